#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace sklab {

/// Deterministic RNG: splitmix64 stream + explicit float/normal construction.
/// std::uniform_real_distribution is implementation-defined; this one produces
/// identical streams on every platform, which the CSV byte-reproducibility
/// contract relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Log-uniform over [a, b], a, b > 0.
    double log_uniform(double a, double b) {
        return std::exp(uniform(std::log(a), std::log(b)));
    }

    int uniform_int(int lo, int hi) {  // inclusive range
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller (cached second value).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01(), u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * M_PI * u2;
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

inline double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

// ---------------------------------------------------------------------------
// Matrix-free GMRES with right preconditioning
// ---------------------------------------------------------------------------

struct GmresOptions {
    int max_iter = 300;
    double rel_tol = 1e-12;
    double abs_tol = 0.0;
};

struct GmresResult {
    int iterations = 0;
    double residual_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
};

using LinearOp = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Solves A x = b with right preconditioning: A M^{-1} y = b, x = M^{-1} y.
/// `op` applies A, `prec` applies M^{-1} (pass identity copy for none).
/// Full-memory GMRES (no restart): the solvers cap max_iter instead.
GmresResult gmres(const LinearOp& op, const LinearOp& prec, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts = {});

// ---------------------------------------------------------------------------
// Finite-difference oracles (shared by tests and self-checks)
// ---------------------------------------------------------------------------

/// Central difference with one Richardson extrapolation step:
/// combines D(h) and D(h/2) to cancel the leading O(h^2) error.
inline double central_diff_richardson(const std::function<double(double)>& f, double h) {
    auto d = [&](double s) { return (f(s) - f(-s)) / (2.0 * s); };
    const double d1 = d(h), d2 = d(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

inline double second_diff_richardson(const std::function<double(double)>& f, double h) {
    auto d = [&](double s) { return (f(s) - 2.0 * f(0.0) + f(-s)) / (s * s); };
    const double d1 = d(h), d2 = d(h / 2.0);
    return (4.0 * d2 - d1) / 3.0;
}

/// Relative deviation |a-b| / max(1, |a|, |b|).
inline double rel_dev(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

// Error taxonomy shared across modules; the CLI maps these onto exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InadmissibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sklab
