#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sklab/torus_grid.hpp"

namespace sklab::torus {

struct SolveOptions {
    double tol = 1e-10;          // max-norm residual target
    int max_iter = 40;
    double margin_floor = 1e-10; // normalized cone margin accepted iterates must keep
    int gmres_max = 300;
    double gmres_tol = 1e-10;
    double armijo = 1e-2;
    int max_halvings = 30;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // max-norm per iteration
    double sup_sigma1 = 0;                 // sup over nodes of sigma_1(W)
    double sup_laplacian = 0;              // sup of the real Laplacian of u
    double sup_grad2 = 0;                  // sup of |grad u|^2 (real gradient)
    double u_inf = 0;
    double inf_f = 0;
    double min_margin = 0;
    double compat_scale = 1.0;             // multiplicative rescale applied to f
    double eps = std::numeric_limits<double>::quiet_NaN();  // continuation parameter
    std::string failure;
};

/// Subtracts the grid mean (the normalization fixing the additive gauge).
Eigen::ArrayXd normalize(const Grid& g, const Eigen::ArrayXd& u);

/// sigma_k(lambda(W_u)) - f per node. Throws InadmissibleError when W_u
/// leaves the cone at any node (message carries the worst node's margin).
Eigen::ArrayXd residual(const Grid& g, const Eigen::ArrayXd& u, const Eigen::ArrayXd& f, int k);

struct Monitor {
    double sup_laplacian = 0;
    double sup_grad2 = 0;
    double ratio = 0;  // sup_laplacian / (sup_grad2 + 1)
};
Monitor estimate_monitor(const Grid& g, const Eigen::ArrayXd& u);

/// Damped Newton with mean-zero updates, FFT-preconditioned GMRES for the
/// linearized equation, and a cone-margin line search. f is rescaled
/// multiplicatively so that mean(f) = binom(n_c, k) (recorded in the report).
std::pair<Eigen::ArrayXd, SolveReport> newton_solve(const Grid& g, const Eigen::ArrayXd& f,
                                                    int k, const Eigen::ArrayXd& u0,
                                                    const SolveOptions& opts = {});

enum class ExponentRule { C21, C11 };  // f = (g+eps)^{(2k-2)/3} or (g+eps)^{k-1}

struct SweepEntry {
    double eps = 0;
    SolveReport report;
    Monitor monitor;
};

/// Warm-started continuation over a decreasing eps schedule. Per-eps solve
/// failures are recorded and the sweep continues; a single bisection retry
/// re-warms the start between ruling eps values.
std::vector<SweepEntry> degenerate_sweep(const Grid& g, const Eigen::ArrayXd& g_profile, int k,
                                         const std::vector<double>& eps_schedule,
                                         ExponentRule rule, const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Barrier properties
// ---------------------------------------------------------------------------

/// alpha = sup|u| + 1, beta = sup|grad u|^2 + 1, gamma = curvature bound
/// (0 on the flat torus), delta = 1/(6 alpha (2 gamma + 1)).
struct BarrierParams {
    double alpha = 2.0;
    double beta = 2.0;
    double gamma = 0.0;
    double delta() const { return 1.0 / (6.0 * alpha * (2.0 * gamma + 1.0)); }
    bool valid() const { return alpha > 1.0 && beta > 1.0 && gamma >= 0.0; }
};

struct BarrierReport {
    // max violation (clipped at 0) per statement; order:
    //  |phi| bound, phi' lower, phi' upper, |psi| bound, -psi' lower,
    //  -psi' upper, slack inequality (-psi' + phi' - 2 gamma >= 1)
    std::array<double, 7> defects{};
    double phi_identity_defect = 0;  // |phi'' - 2 phi'^2|, exact identity
    double psi_identity_defect = 0;  // |psi'' - 2 delta psi'^2|, exact identity
    double max_defect() const;
    bool ok(double tol = 1e-12) const;
};

/// Evaluates the closed-form barrier pair phi(t) = -log(1 - t/(2 beta))/2 on
/// [0, beta] and psi(t) = -3 alpha (2 gamma + 1) log(1 + t/(2 alpha)) on
/// [-(alpha-1), alpha-1] on dense t-grids and checks every stated bound.
BarrierReport barrier_check(const BarrierParams& params, int t_points = 2001);

// ---------------------------------------------------------------------------
// Degenerate right-hand-side probe for the continuation estimate
// ---------------------------------------------------------------------------

struct JProbeResult {
    double k3 = 0;          // smallest constant closing the lower bound on the grid
    double j_min = 0;       // smallest J over the grid at the worst direction
    double inf_f_tilde = 0;
    long argmax_node = -1;
};

/// Pointwise lower-bound probe for the quantity
///   J = (f^{1/k})_{e ebar} / (1 + u_{1 1bar}) - |grad f^{1/k}|
///       + (psi' - 2 phi' - gamma) f^{1/k},
/// fed by f_tilde = f^{3/(2k-2)} > 0. Derivatives of f^{1/k} are obtained
/// from f_tilde by the chain rule, whose directional part is exactly the
/// complex-direction defect with exponent alpha = (k+2)/(3k). K3 is the
/// grid supremum of the one-sided deficit
///   [ (f^{1/k})_{e ebar}^- + |grad f^{1/k}| ] * f^{1/(k(k-1))}
/// maximized over unit complex directions e (exact, via the per-node
/// Hermitian eigenvalue). When u11 is supplied the first term is scaled by
/// the node's actual 1/(1 + u_{1 1bar}); otherwise the worst case over
/// u_{1 1bar} in [0, inf) is taken.
JProbeResult j_lower_bound_probe(const Grid& g, const Eigen::ArrayXd& f_tilde, int k,
                                 const BarrierParams& params,
                                 const Eigen::ArrayXd* u11 = nullptr);

}  // namespace sklab::torus
