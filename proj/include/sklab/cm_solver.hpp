#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sklab/sphere_grid.hpp"

namespace sklab::sphere {

/// Per-node support Hessian W_ij = u_;ij + u delta_ij in the orthonormal frame.
struct SupportHessian {
    Eigen::VectorXd w11, w12, w22;
};

SupportHessian support_hessian(const Grid2& g, const Eigen::VectorXd& u);

/// sigma_j of the 2x2 eigenvalues via invariants (trace / determinant).
Eigen::VectorXd sigma_field(const SupportHessian& w, int j);

/// min_{1<=j<=k} sigma_j / binom(2, j) over all nodes.
double cone_margin(const SupportHessian& w, int k);

/// sigma_k(W_u) - f per node; throws InadmissibleError off the cone.
Eigen::VectorXd residual(const Grid2& g, const Eigen::VectorXd& u, const Eigen::VectorXd& f,
                         int k);

/// max_i |integral of x_i f|: the solvability obstruction (zero is necessary).
double compatibility_defect(const Grid2& g, const Eigen::VectorXd& f);

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 30;
    double margin_floor = 1e-10;
    int gmres_max = 400;
    double gmres_tol = 1e-11;
    double armijo = 1e-2;
    int max_halvings = 30;
    bool enforce_compatibility = true;
    double compatibility_tol = 1e-8;  // relative to ||f||_inf
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;
    double sup_sigma1 = 0;
    double sup_grad = 0;  // sup |grad u|
    double u_inf = 0;     // after gauge projection
    double inf_f = 0;
    double min_margin = 0;
    double moment_defect = 0;
    double eps = std::numeric_limits<double>::quiet_NaN();
    std::string failure;
};

/// Damped Newton for sigma_k(u_;ij + u delta_ij) = f with the translation
/// gauge projected out of every update, cone-margin line search, and GMRES
/// preconditioned by the constant-coefficient harmonic symbol.
std::pair<Eigen::VectorXd, SolveReport> newton_solve(const Grid2& g, const Eigen::VectorXd& f,
                                                     int k, const Eigen::VectorXd& u0,
                                                     const SolveOptions& opts = {});

enum class ExponentRule { C21, C11 };

struct SweepEntry {
    double eps = 0;
    SolveReport report;
};

/// Continuation over a decreasing eps schedule with f_eps = (g + eps)^p,
/// p = (2k-2)/3 (C21 rule) or k-1 (C11 rule). g must be antipodally even so
/// the moment condition holds for every eps by symmetry; this is verified.
std::vector<SweepEntry> degenerate_sweep(const Grid2& g, const Eigen::VectorXd& g_profile,
                                         int k, const std::vector<double>& eps_schedule,
                                         ExponentRule rule, const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Discrete spectrum facts the blow-up argument rests on
// ---------------------------------------------------------------------------

struct SpectrumReport {
    double const_residual = 0;       // ||Laplacian 1||_inf
    double coord_residual = 0;       // max_i ||(Laplacian + n) x_i||_2 / ||x_i||_2
    double angle_bound = 0;          // Davis-Kahan: coord_residual / spectral gap
    int multiplicity = -1;           // inertia count of eigenvalues in [-n-w, -n+w]
    double subspace_angle = -1;      // from the dense eigensolve (res <= dense_limit)
    int dense_multiplicity = -1;
    bool ok(double angle_tol = 1e-6) const {
        const bool mult_ok = (multiplicity < 0 && dense_multiplicity < 0)
                                 ? angle_bound <= angle_tol
                                 : (multiplicity == 3 || dense_multiplicity == 3);
        const double angle = subspace_angle >= 0 ? std::min(subspace_angle, angle_bound)
                                                 : angle_bound;
        return const_residual < 1e-10 && mult_ok && angle <= angle_tol;
    }
};

/// Verifies that the discrete Laplace-Beltrami kills constants, has
/// eigenvalue -n with multiplicity n+1, and that the eigenspace aligns with
/// the coordinate functions. Multiplicity comes from LDLT inertia counts of
/// the symmetrized operator (grids up to assemble_limit nodes); the angle
/// from a dense eigensolve when the grid is small enough, else from the
/// Davis-Kahan residual bound.
SpectrumReport spectrum_check(const Grid2& g, double window = 1e-6, long dense_limit = 1400,
                              long assemble_limit = 2600);

/// Two-route evaluation of Laplacian(sigma_1(W_u)): covariant-Hessian
/// assembly vs pure harmonic multipliers. Returns the max relative defect.
double trace_identity_defect(const Grid2& g, const Eigen::VectorXd& u);

}  // namespace sklab::sphere
