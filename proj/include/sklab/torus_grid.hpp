#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "sklab/numerics.hpp"

namespace sklab::torus {

/// Flat torus of complex dimension n_c, realized as [0, 2pi)^{2 n_c} with
/// real coordinates ordered (x_1, y_1, x_2, y_2, ...). All differentiation
/// is spectral (FFT); derivative operators annihilate constants exactly.
class Grid {
public:
    Grid(int n_complex, int res);
    ~Grid();
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    int n_complex() const { return nc_; }
    int dim() const { return dim_; }
    int res() const { return res_; }
    long size() const { return n_; }

    /// Real coordinate of a node along an axis (axis 2p = x_{p+1}, 2p+1 = y_{p+1}).
    double coord(long node, int axis) const;
    void coords(long node, double* out) const;  // all dim coordinates

    Eigen::ArrayXd sample(const std::function<double(const double*)>& f) const;
    Eigen::ArrayXd coordinate_field(int axis) const;

    double mean(const Eigen::ArrayXd& u) const { return u.mean(); }
    Eigen::ArrayXd mean_zero(const Eigen::ArrayXd& u) const { return u - u.mean(); }

    struct Jet {
        std::vector<Eigen::ArrayXd> first;   // dim entries (empty unless requested)
        std::vector<Eigen::ArrayXd> second;  // dim*(dim+1)/2 entries, pair_index order
    };
    static int pair_index(int a, int b, int dim);  // a <= b
    Jet jet(const Eigen::ArrayXd& u, bool want_first, bool want_second) const;

    Eigen::ArrayXd laplacian(const Eigen::ArrayXd& u) const;  // full real Laplacian

    /// Solves c * (1/4) * Laplacian x = rhs in Fourier space (zero mode
    /// dropped); the constant-coefficient preconditioner for the solvers.
    Eigen::ArrayXd quarter_laplacian_inverse(const Eigen::ArrayXd& rhs, double c) const;

    /// Mixed complex second derivative field u_{p qbar} as one complex array,
    /// p, q in [0, n_c): re + i*im. Convenience for identity checks.
    void mixed_complex_derivative(const Eigen::ArrayXd& u, int p, int q, Eigen::ArrayXd& re,
                                  Eigen::ArrayXd& im) const;

    /// One inverse transform with the direct d_z d_zbar multiplier
    /// -(k_x^2 + k_y^2)/4 on complex axis p; the independent spectral route
    /// against which the quarter-sum assembly is checked.
    Eigen::ArrayXd dz_dzbar_direct(const Eigen::ArrayXd& u, int p) const;

private:
    struct Impl;
    Impl* impl_;
    int nc_, dim_, res_;
    long n_;
};

/// Per-node Hermitian matrix field (n_c x n_c), stored as structure-of-arrays.
struct HermitianField {
    int nc = 0;
    long n = 0;
    std::vector<Eigen::ArrayXd> diag;                 // nc real arrays
    std::vector<Eigen::ArrayXd> off_re, off_im;       // pair p < q

    static int off_index(int p, int q, int nc);
    Eigen::MatrixXcd node_matrix(long node) const;
};

/// Mixed complex Hessian (u_{p qbar}) per node; no identity added.
HermitianField mixed_hessian(const Grid& g, const Eigen::ArrayXd& u);

/// W = I + (u_{p qbar}): the operator argument of the curvature equation.
HermitianField complex_hessian(const Grid& g, const Eigen::ArrayXd& u);

/// sigma_j(lambda(W)) per node via matrix invariants (no eigensolve), j <= nc <= 3.
Eigen::ArrayXd sigma_field(const HermitianField& w, int j);

/// min_{1<=j<=k} sigma_j(lambda(W)) / binom(nc, j) per node, reduced to the
/// grid minimum: the cone-margin guard used by the Newton line search.
double cone_margin(const HermitianField& w, int k);

/// Contraction sum_{pq} T_{qp}(W) v_{p qbar} per node, where T is the
/// derivative tensor of sigma_k at W (T_0 = I, T_1 = s1 I - W,
/// T_2 = s2 I - s1 W + W^2). This is the Newton linearization applied to v.
Eigen::ArrayXd linearized_apply(const HermitianField& w, const HermitianField& dv, int k);

}  // namespace sklab::torus
