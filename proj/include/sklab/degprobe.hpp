#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sklab/torus_grid.hpp"

namespace sklab::degprobe {

/// Result of a sup-quotient probe: K_required is the grid supremum of the
/// defining quotient (clipped at zero where the statement is one-sided),
/// with the attaining point/direction and resolution metadata attached.
struct ProbeResult {
    double k_required = 0.0;
    double inf_h = std::numeric_limits<double>::infinity();
    Eigen::Vector3d attained_at = Eigen::Vector3d::Zero();
    Eigen::Vector3d attained_dir = Eigen::Vector3d::Zero();
    long points = 0;
    int directions = 0;
    double identity_defect = 0.0;  // complex probe: two-route mixed-derivative check
};

using Fn1 = std::function<double(double)>;
using FnSphere = std::function<double(const Eigen::Vector3d&)>;

// ---------------------------------------------------------------------------
// Interval domain (compactly contained in a larger interval where h > 0)
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0, hi = 1.0;  // the probed closure
    int resolution = 4097;
    double fd_step = 1e-3;      // 5-point stencil step for the callable
};

/// K = sup |h'|^2 / h over the sampled interval. Throws InadmissibleError on
/// a nonpositive sample.
ProbeResult grad_quotient(const Fn1& h, const Interval& dom);

/// K = sup ( alpha |h'|^2 / h - h'' )^+ / h^{1/3}.
ProbeResult c21_defect(const Fn1& h, double alpha, const Interval& dom);

// ---------------------------------------------------------------------------
// Flat torus (grid fields, spectral derivatives)
// ---------------------------------------------------------------------------

/// K = sup |grad h|^2 / h over all nodes (real gradient).
ProbeResult grad_quotient(const torus::Grid& g, const Eigen::ArrayXd& h);

/// K = sup over nodes and unit directions e of
/// ( alpha (e . grad h)^2 / h - e^T Hess(h) e )^+ / h^{1/3}. The direction
/// sup is exact: it is the top eigenvalue of the per-node quadratic form.
ProbeResult c21_defect(const torus::Grid& g, const Eigen::ArrayXd& h, double alpha);

/// Complex form; the direction sup over unit complex tangent vectors is the
/// top eigenvalue of -(H - alpha g g*/h) with H the mixed Hessian. Also
/// cross-checks the quarter-sum assembly of the mixed derivative against the
/// direct spectral route (identity_defect, relative).
ProbeResult complex_direction_defect(const torus::Grid& g, const Eigen::ArrayXd& h,
                                     double alpha);

// ---------------------------------------------------------------------------
// Geodesic restriction (the 1-D reduction technique)
// ---------------------------------------------------------------------------

/// Samples f along the great circle through x with unit tangent e:
/// gamma(t) = cos(t) x + sin(t) e, t uniform in [-halfwidth, halfwidth],
/// 2*samples+1 values. halfwidth must stay below the pi/2 chart cap.
std::vector<double> geodesic_restrict_sphere(const FnSphere& f, const Eigen::Vector3d& x,
                                             const Eigen::Vector3d& e, double halfwidth,
                                             int samples);

/// Straight-line restriction on the torus (periodic wrap handled by the
/// callable), same sampling convention.
std::vector<double> geodesic_restrict_torus(const std::function<double(double, double)>& f,
                                            const Eigen::Vector2d& x, const Eigen::Vector2d& e,
                                            double halfwidth, int samples);

/// 5-point first/second derivative at the center of a uniformly sampled
/// restriction (needs >= 2 samples on each side).
double restricted_d1(const std::vector<double>& line, double step);
double restricted_d2(const std::vector<double>& line, double step);

// ---------------------------------------------------------------------------
// Sphere probes (callable fields, geodesic stencils, Fibonacci directions)
// ---------------------------------------------------------------------------

struct SphereProbe {
    int n_theta = 192;    // equiangular sampling (theta interior, phi periodic)
    int n_phi = 384;
    int directions = 64;  // golden-angle spread per point
    double step = 2e-3;   // geodesic stencil step
};

ProbeResult grad_quotient(const FnSphere& h, const SphereProbe& dom);
ProbeResult c21_defect(const FnSphere& h, double alpha, const SphereProbe& dom);

}  // namespace sklab::degprobe
