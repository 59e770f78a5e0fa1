#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "sklab/numerics.hpp"

namespace sklab::sphere {

/// Spherical-harmonic coefficients of a real field, 0 <= m <= l <= L.
struct Coeffs {
    int L = 0;
    std::vector<std::complex<double>> a;
    int index(int l, int m) const;  // m-major layout
    std::complex<double>& at(int l, int m) { return a[index(l, m)]; }
    const std::complex<double>& at(int l, int m) const { return a[index(l, m)]; }
};

/// Spectral collocation grid on S^2: Gauss-Legendre colatitudes x uniform
/// longitudes, band limit L = n_theta - 1. Nodes exclude the poles, so the
/// rotating orthonormal frame (e_theta, e_phi) is smooth on the whole grid.
class Grid2 {
public:
    explicit Grid2(int n_theta);
    ~Grid2();
    Grid2(const Grid2&) = delete;
    Grid2& operator=(const Grid2&) = delete;

    int n_theta() const { return ntheta_; }
    int n_phi() const { return nphi_; }
    int band_limit() const { return L_; }
    long size() const { return static_cast<long>(ntheta_) * nphi_; }
    long node(int i, int j) const { return static_cast<long>(i) * nphi_ + j; }

    double theta(int i) const { return theta_[i]; }
    double phi(int j) const { return 2.0 * M_PI * j / nphi_; }
    Eigen::Vector3d point(int i, int j) const;

    /// Quadrature weight of a node (integrates degree <= 2 n_theta - 1 exactly).
    const Eigen::VectorXd& weights() const { return w_node_; }
    double integrate(const Eigen::VectorXd& f) const { return w_node_.dot(f); }
    double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
        return (w_node_.array() * f.array() * g.array()).sum();
    }

    Eigen::VectorXd sample(const std::function<double(const Eigen::Vector3d&)>& f) const;
    Eigen::VectorXd coordinate(int axis) const;  // ambient x_1, x_2, x_3 nodal fields

    enum class Mode { Value, DTheta, DPhi, Laplacian, DThetaDPhi, DPhi2 };
    Coeffs analyze(const Eigen::VectorXd& f) const;
    Eigen::VectorXd synth(const Coeffs& c, Mode mode) const;
    /// Synthesis with a caller-supplied multiplier q(l).
    Eigen::VectorXd synth_multiplier(const Coeffs& c,
                                     const std::function<double(int)>& q) const;

    Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& f) const;

    /// Covariant Hessian of u in the orthonormal frame (e_theta, e_phi):
    /// h11 = u_;theta theta, h12 mixed, h22 longitudinal. Trace is the
    /// Laplace-Beltrami of u by construction.
    struct Hessian {
        Eigen::VectorXd h11, h12, h22;
    };
    Hessian covariant_hessian(const Eigen::VectorXd& u) const;

    /// |grad u|^2 = u_theta^2 + (u_phi / sin theta)^2 per node.
    Eigen::VectorXd grad_norm2(const Eigen::VectorXd& u) const;

    /// Removes the degree-1 components (the translation gauge): subtracts
    /// the quadrature projection onto span{x_1, x_2, x_3}. Idempotent.
    Eigen::VectorXd project_linear_out(const Eigen::VectorXd& u) const;

    /// Moments (integral of x_i f, i = 1..3): the solvability obstruction.
    Eigen::Vector3d moments(const Eigen::VectorXd& f) const;

private:
    struct Impl;
    Impl* impl_;
    int ntheta_, nphi_, L_;
    std::vector<double> theta_;
    Eigen::VectorXd w_node_;
};

}  // namespace sklab::sphere
