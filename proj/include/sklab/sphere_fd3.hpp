#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "sklab/numerics.hpp"

namespace sklab::sphere {

/// S^3 on a three-angle product grid (hyperspherical psi, theta, phi), cell
/// centered in psi and theta so no node sits on a coordinate pole. Second
/// order conservative finite differences; the Laplace-Beltrami matvec uses
/// the flux form, which is exactly self-adjoint in the quadrature inner
/// product (pole fluxes vanish with the measure).
class Grid3Fd {
public:
    Grid3Fd(int n_psi, int n_theta, int n_phi);

    long size() const { return static_cast<long>(npsi_) * ntheta_ * nphi_; }
    long node(int i, int j, int l) const {
        return (static_cast<long>(i) * ntheta_ + j) * nphi_ + l;
    }
    double psi(int i) const { return (i + 0.5) * M_PI / npsi_; }
    double theta(int j) const { return (j + 0.5) * M_PI / ntheta_; }
    double phi(int l) const { return 2.0 * M_PI * l / nphi_; }
    Eigen::Vector4d point(int i, int j, int l) const;

    const Eigen::VectorXd& weights() const { return w_; }
    double integrate(const Eigen::VectorXd& f) const { return w_.dot(f); }
    double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return (w_.array() * a.array() * b.array()).sum();
    }

    Eigen::VectorXd coordinate(int axis) const;  // ambient x_1..x_4
    Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& u) const;

    /// Ghost-cell index across the psi/theta coordinate poles: scalar fields
    /// continue smoothly through (psi, theta, phi) -> (-psi, pi-theta, phi+pi).
    long reflect(int i, int j, int l) const;

    struct Hessian {
        // frame components 11, 22, 33, 12, 13, 23
        std::array<Eigen::VectorXd, 6> h;
    };
    Hessian covariant_hessian(const Eigen::VectorXd& u) const;

    Eigen::VectorXd project_linear_out(const Eigen::VectorXd& u) const;

    const Eigen::VectorXd& laplacian_diag() const { return diag_; }

    int n_psi() const { return npsi_; }
    int n_theta3() const { return ntheta_; }
    int n_phi3() const { return nphi_; }

private:
    int npsi_, ntheta_, nphi_;
    Eigen::VectorXd w_;
    // precomputed 7-point stencil for the flux Laplacian
    std::array<Eigen::VectorXi, 6> nb_;     // psi+-, theta+-, phi+- neighbor nodes
    std::array<Eigen::VectorXd, 6> coef_;   // matching flux coefficients
    Eigen::VectorXd diag_;
};

struct Spectrum3Report {
    double coord_rayleigh_worst = 0;     // max_i |RQ(x_i) + 3|
    std::vector<double> low_eigenvalues; // converged Ritz values of -Laplacian (nonzero cluster)
    int multiplicity = 0;                // count within the window around +3
    double window = 0;
    double max_ritz_residual = 0;
};

/// Deflated subspace iteration (constants projected out) on the shifted
/// inverse of the flux Laplacian; certifies the lowest nonzero eigenvalue
/// cluster of -Laplacian and its multiplicity.
Spectrum3Report spectrum3_check(const Grid3Fd& g, double window = 5e-2, int subspace = 6,
                                int iterations = 22);

struct Solve3Report {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
    double sup_sigma1 = 0;
    double u_inf = 0;
    double min_margin = 0;
    std::string failure;
};

/// Newton for sigma_2(u_;ij + u delta_ij) = f on S^3 (the intermediate case
/// k = 2 < n = 3), coarse resolution: sparse Jacobian, bordered direct solve
/// pinning the translation gauge.
std::pair<Eigen::VectorXd, Solve3Report> newton_solve3(const Grid3Fd& g,
                                                       const Eigen::VectorXd& f,
                                                       const Eigen::VectorXd& u0,
                                                       double tol = 1e-9, int max_iter = 25);

/// sigma_j (j = 1, 2, 3) of the support Hessian eigenvalues per node.
Eigen::VectorXd sigma3_field(const Grid3Fd& g, const Eigen::VectorXd& u, int j);

}  // namespace sklab::sphere
