#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sklab/numerics.hpp"

namespace sklab::symfun {

/// Eigenvalue vector with an attached symmetric-function order k.
struct Spectrum {
    Eigen::VectorXd values;
    int k = 0;
};

// ---------------------------------------------------------------------------
// Elementary symmetric function calculus
// ---------------------------------------------------------------------------

/// All elementary symmetric functions e_0..e_n of lambda in one pass.
/// One-entry-at-a-time product recurrence with long double accumulation;
/// entries are processed in a canonical (sorted) order so the result is
/// bitwise invariant under permutations of lambda.
Eigen::VectorXd sigma_all(const Eigen::VectorXd& lambda);

/// sigma_j(lambda). Total: returns 1 for j = 0 and 0 for j < 0 or j > n.
double sigma(const Eigen::VectorXd& lambda, int j);

/// sigma_j of lambda with the excluded entries set to zero.
/// Returns 0 when the exclusion list repeats an index; throws on a
/// out-of-range index.
double sigma_excluding(const Eigen::VectorXd& lambda, int j, std::span<const int> excluded);

/// Component i equals sigma_{j-1; i}(lambda), i.e. the gradient of sigma_j.
Eigen::VectorXd sigma_grad(const Eigen::VectorXd& lambda, int j);

/// sigma_{j; i}(lambda) for every single exclusion i at once.
Eigen::VectorXd sigma_excluding_each(const Eigen::VectorXd& lambda, int j);

/// Strict cone test: sigma_j(lambda) > 0 for every 1 <= j <= k.
bool in_gamma_k(const Eigen::VectorXd& lambda, int k);

/// Quantitative cone margin: min_{1<=j<=k} sigma_j(lambda) / binom(n, j)
/// (normalization puts the all-ones vector at margin 1). Solvers guard
/// iterates with this; a nonpositive value means lambda left the cone.
double gamma_margin(const Eigen::VectorXd& lambda, int k);

// ---------------------------------------------------------------------------
// Randomized inequality suites
// ---------------------------------------------------------------------------

/// One inequality's sampled record. worst_residual is the minimum over
/// samples of (LHS - RHS) oriented so that >= 0 means the inequality held;
/// for identity checks it is (rel_tol - observed relative defect).
/// empirical_constant records the extremal ratio standing in for a
/// constant the statement leaves unspecified ("universal").
struct IneqReport {
    std::string label;
    long samples = 0;
    double worst_residual = std::numeric_limits<double>::infinity();
    Spectrum worst_point;
    double empirical_constant = std::numeric_limits<double>::infinity();

    bool held() const { return worst_residual >= 0.0; }
    void absorb(const IneqReport& other);  // min-reduction merge for sharded runs
};

/// Rejection sampler for Gamma_k: uniform draws from [-1
/// , 3]^n filtered by the
/// strict cone test, with a 20% admixture of near-boundary samples obtained
/// by bisecting toward a rejected (outside) draw until the normalized cone
/// margin lands in [1e-6, 1e-1]. The boundary mixture stresses the regime
/// where the inequalities are delicate.
class GammaSampler {
public:
    GammaSampler(int n, int k, double boundary_fraction = 0.2);
    Eigen::VectorXd draw(Rng& rng) const;
    /// Sorted-decreasing draw conditioned on lambda_k <= eps * lambda_1
    /// (closed condition; includes exact equality samples).
    Eigen::VectorXd draw_small_tail(Rng& rng, double eps) const;
    /// Sorted-decreasing draw conditioned on lambda_k >= eps * lambda_1.
    Eigen::VectorXd draw_large_tail(Rng& rng, double eps, bool include_equality) const;

private:
    Eigen::VectorXd draw_interior(Rng& rng) const;
    int n_, k_;
    double boundary_fraction_;
};

struct MaclaurinReport {
    IneqReport monotone;    // normalized power-mean chain with constant exactly 1
    IneqReport lower;       // sigma_{k-1} >= C2 sigma_1^{1/(k-1)} sigma_k^{1-1/(k-1)}
    IneqReport truncation;  // sum_i sigma_{k-1;i} = (n-k+1) sigma_{k-1}, rel 1e-12
    IneqReport trace;       // trace-form lower bound, empirical constant recorded
    bool all_held() const {
        return monotone.held() && lower.held() && truncation.held() && trace.held();
    }
};

/// Samples Gamma_k and checks the classical elementary-symmetric-function
/// inequalities in normalized form; empirical extremal ratios are recorded
/// where the statements only assert a universal constant.
MaclaurinReport maclaurin_suite(int n, int k, long samples, std::uint64_t seed);

/// Over sorted Gamma_k samples with lambda_k >= eps * lambda_1: records the
/// empirical infimum of sigma_{k-1;k} / sum_i sigma_{k-1;i} (the share of the
/// smallest retained diagonal coefficient in the trace).
IneqReport dominance_suite(double eps, int n, int k, long samples, std::uint64_t seed);

struct EpsSearchOptions {
    double eps_max = 1.0;
    double eps_min = 1e-6;
    int per_decade = 8;
    long search_samples = 20000;
    long validate_samples = 100000;
    std::uint64_t seed = 1;
};

struct EpsSearchResult {
    double eps = 0.0;            // largest grid value with zero violations (0 if none)
    bool found = false;
    long violations_above = 0;   // violations observed at the next-larger grid eps
    Spectrum worst_violator;     // worst sample at the next-larger grid eps
    double worst_violation = 0.0;
    double delta = 0.0;
    int n = 0, k = 0;
    bool side_positivity_ok = true;  // sigma_{k-2;i1} > 0 held on all samples
};

/// Searches a logarithmic eps grid (descending) for the largest threshold
/// such that sorted Gamma_k samples with lambda_k <= eps * lambda_1 satisfy
///   sigma_{k-2;i1} - (1 - delta) * sigma_{k-1;i} / lambda_1 >= 0
/// for every i = 2..n. The winning eps is re-validated on the full sample
/// count. Existence of such a threshold is the content the suite probes;
/// no a priori value is asserted.
EpsSearchResult truncated_dominance_eps(double delta, int n, int k,
                                        const EpsSearchOptions& opts = {});

}  // namespace sklab::symfun
