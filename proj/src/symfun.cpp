#include "sklab/symfun.hpp"

#include <algorithm>
#include <cmath>

namespace sklab::symfun {

using Eigen::VectorXd;

namespace {

// Product recurrence e_j += z * e_{j-1}, processed high-to-low, on a
// canonically sorted copy (descending) so permutations of lambda give
// bitwise identical results. long double accumulation tames cancellation
// for mixed-sign inputs.
void sigma_all_into(const VectorXd& lambda, std::vector<long double>& e) {
    const int n = static_cast<int>(lambda.size());
    std::vector<double> z(lambda.data(), lambda.data() + n);
    std::sort(z.begin(), z.end(), std::greater<double>());
    e.assign(static_cast<size_t>(n) + 1, 0.0L);
    e[0] = 1.0L;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j >= 1; --j) e[j] += static_cast<long double>(z[i]) * e[j - 1];
    }
}

}  // namespace

VectorXd sigma_all(const VectorXd& lambda) {
    std::vector<long double> e;
    sigma_all_into(lambda, e);
    VectorXd out(lambda.size() + 1);
    for (int j = 0; j < out.size(); ++j) out(j) = static_cast<double>(e[j]);
    return out;
}

double sigma(const VectorXd& lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    if (j == 0) return 1.0;
    if (j < 0 || j > n) return 0.0;
    std::vector<long double> e;
    sigma_all_into(lambda, e);
    return static_cast<double>(e[j]);
}

double sigma_excluding(const VectorXd& lambda, int j, std::span<const int> excluded) {
    const int n = static_cast<int>(lambda.size());
    for (size_t a = 0; a < excluded.size(); ++a) {
        if (excluded[a] < 0 || excluded[a] >= n)
            throw std::out_of_range("sigma_excluding: index out of range");
        for (size_t b = a + 1; b < excluded.size(); ++b)
            if (excluded[a] == excluded[b]) return 0.0;
    }
    VectorXd v = lambda;
    for (int idx : excluded) v(idx) = 0.0;
    return sigma(v, j);
}

VectorXd sigma_excluding_each(const VectorXd& lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    VectorXd out(n);
    VectorXd v = lambda;
    for (int i = 0; i < n; ++i) {
        const double keep = v(i);
        v(i) = 0.0;
        out(i) = sigma(v, j);
        v(i) = keep;
    }
    return out;
}

VectorXd sigma_grad(const VectorXd& lambda, int j) { return sigma_excluding_each(lambda, j - 1); }

bool in_gamma_k(const VectorXd& lambda, int k) {
    std::vector<long double> e;
    sigma_all_into(lambda, e);
    const int n = static_cast<int>(lambda.size());
    for (int j = 1; j <= std::min(k, n); ++j)
        if (!(e[j] > 0.0L)) return false;
    return k <= n;
}

double gamma_margin(const VectorXd& lambda, int k) {
    std::vector<long double> e;
    sigma_all_into(lambda, e);
    const int n = static_cast<int>(lambda.size());
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= std::min(k, n); ++j)
        margin = std::min(margin, static_cast<double>(e[j]) / binom(n, j));
    return margin;
}

void IneqReport::absorb(const IneqReport& other) {
    samples += other.samples;
    if (other.worst_residual < worst_residual) {
        worst_residual = other.worst_residual;
        worst_point = other.worst_point;
    }
    empirical_constant = std::min(empirical_constant, other.empirical_constant);
}

// ---------------------------------------------------------------------------
// Gamma_k sampling
// ---------------------------------------------------------------------------

GammaSampler::GammaSampler(int n, int k, double boundary_fraction)
    : n_(n), k_(k), boundary_fraction_(boundary_fraction) {
    if (n < 2 || k < 1 || k > n) throw ConfigError("GammaSampler: need n >= 2, 1 <= k <= n");
}

VectorXd GammaSampler::draw_interior(Rng& rng) const {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        VectorXd v(n_);
        for (int i = 0; i < n_; ++i) v(i) = rng.uniform(-1.0, 3.0);
        if (in_gamma_k(v, k_)) return v;
    }
    throw SolveError("GammaSampler: rejection sampling failed to hit the cone");
}

VectorXd GammaSampler::draw(Rng& rng) const {
    VectorXd v = draw_interior(rng);
    if (rng.uniform01() >= boundary_fraction_) return v;

    // Near-boundary sample: bisect along the segment toward an exterior draw
    // until the normalized margin falls in the target decade band.
    VectorXd outside(n_);
    bool got_outside = false;
    for (int attempt = 0; attempt < 1000 && !got_outside; ++attempt) {
        for (int i = 0; i < n_; ++i) outside(i) = rng.uniform(-1.0, 3.0);
        got_outside = !in_gamma_k(outside, k_);
    }
    if (!got_outside) return v;  // cone fills the box (k small); interior draw is fine

    const double target = rng.log_uniform(1e-6, 1e-1) * gamma_margin(v, k_);
    double lo = 0.0, hi = 1.0;  // margin((1-t) v + t outside) crosses 0 before t=1
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const VectorXd w = (1.0 - mid) * v + mid * outside;
        if (in_gamma_k(w, k_) && gamma_margin(w, k_) > target)
            lo = mid;
        else
            hi = mid;
    }
    VectorXd w = (1.0 - lo) * v + lo * outside;
    return in_gamma_k(w, k_) ? w : v;
}

VectorXd GammaSampler::draw_small_tail(Rng& rng, double eps) const {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        VectorXd v = draw(rng);
        std::sort(v.data(), v.data() + n_, std::greater<double>());
        if (v(k_ - 1) <= eps * v(0)) return v;
        // Rescale the tail block so lambda_k hits a ratio <= eps, then re-test.
        const double u = (rng.uniform01() < 0.5) ? 1.0 : rng.uniform01();
        const double s = eps * u * v(0) / v(k_ - 1);
        for (int i = k_ - 1; i < n_; ++i) v(i) *= s;
        if (in_gamma_k(v, k_)) {
            std::sort(v.data(), v.data() + n_, std::greater<double>());
            if (v(k_ - 1) <= eps * v(0)) return v;
        }
    }
    throw SolveError("GammaSampler: small-tail sampling failed");
}

VectorXd GammaSampler::draw_large_tail(Rng& rng, double eps, bool include_equality) const {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        VectorXd v = draw(rng);
        std::sort(v.data(), v.data() + n_, std::greater<double>());
        if (include_equality && rng.uniform01() < 0.25 && eps <= 1.0) {
            // Closed-boundary sample: force lambda_k = eps * lambda_1 exactly.
            const double s = eps * v(0) / v(k_ - 1);
            if (s > 0 && s <= 1.0) {
                VectorXd w = v;
                for (int i = k_ - 1; i < n_; ++i) w(i) *= s;
                if (in_gamma_k(w, k_)) {
                    std::sort(w.data(), w.data() + n_, std::greater<double>());
                    if (w(k_ - 1) >= eps * w(0) * (1.0 - 1e-15)) return w;
                }
            }
        }
        if (v(k_ - 1) >= eps * v(0)) return v;
    }
    throw SolveError("GammaSampler: large-tail sampling failed");
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

MaclaurinReport maclaurin_suite(int n, int k, long samples, std::uint64_t seed) {
    if (k < 2 || k > n) throw ConfigError("maclaurin_suite: need 2 <= k <= n");
    MaclaurinReport rep;
    rep.monotone.label = "maclaurin_monotone";
    rep.lower.label = "newton_lower_bound";
    rep.truncation.label = "truncation_identity";
    rep.trace.label = "trace_lower_bound";

    GammaSampler sampler(n, k);
    Rng rng(seed);
    const double cnk = binom(n, k), cnk1 = binom(n, k - 1);

    for (long s = 0; s < samples; ++s) {
        const VectorXd lam = sampler.draw(rng);
        const VectorXd e = sigma_all(lam);

        // (a) normalized power-mean monotonicity, constant exactly 1
        const double lhs_a = std::pow(e(k) / cnk, 1.0 / k);
        const double rhs_a = std::pow(e(k - 1) / cnk1, 1.0 / (k - 1));
        const double res_a = rhs_a - lhs_a;
        rep.monotone.samples++;
        if (res_a < rep.monotone.worst_residual) {
            rep.monotone.worst_residual = res_a;
            rep.monotone.worst_point = {lam, k};
        }
        rep.monotone.empirical_constant = std::min(
            rep.monotone.empirical_constant, rhs_a > 0 ? lhs_a / rhs_a : 0.0);

        // (b) lower bound with unspecified universal constant: record the ratio
        const double denom_b =
            std::pow(e(1), 1.0 / (k - 1)) * std::pow(e(k), 1.0 - 1.0 / (k - 1));
        const double ratio_b = e(k - 1) / denom_b;
        rep.lower.samples++;
        if (ratio_b < rep.lower.empirical_constant) {
            rep.lower.empirical_constant = ratio_b;
            rep.lower.worst_point = {lam, k};
        }
        rep.lower.worst_residual = std::min(rep.lower.worst_residual, ratio_b);

        // (c) exact truncation identity, relative 1e-12
        const double sum_trunc = sigma_excluding_each(lam, k - 1).sum();
        const double target = (n - k + 1) * e(k - 1);
        const double defect = std::abs(sum_trunc - target) /
                              std::max({1.0, std::abs(sum_trunc), std::abs(target)});
        rep.truncation.samples++;
        const double res_c = 1e-12 - defect;
        if (res_c < rep.truncation.worst_residual) {
            rep.truncation.worst_residual = res_c;
            rep.truncation.worst_point = {lam, k};
            rep.truncation.empirical_constant = defect;  // max defect observed
        }

        // trace-form bound: ((n-k+1)/k) sigma_k^{1/k-1} sigma_{k-1}
        //                   >= C sigma_1^{1/(k-1)} sigma_k^{-1/(k(k-1))}
        const double tr = (n - k + 1.0) / k * std::pow(e(k), 1.0 / k - 1.0) * e(k - 1);
        const double rhs_t =
            std::pow(e(1), 1.0 / (k - 1)) * std::pow(e(k), -1.0 / (k * (k - 1.0)));
        const double ratio_t = tr / rhs_t;
        rep.trace.samples++;
        rep.trace.worst_residual = std::min(rep.trace.worst_residual, ratio_t);
        if (ratio_t < rep.trace.empirical_constant) {
            rep.trace.empirical_constant = ratio_t;
            rep.trace.worst_point = {lam, k};
        }
    }
    return rep;
}

IneqReport dominance_suite(double eps, int n, int k, long samples, std::uint64_t seed) {
    if (!(eps > 0)) throw ConfigError("dominance_suite: eps must be positive");
    if (k < 2 || k > n) throw ConfigError("dominance_suite: need 2 <= k <= n");
    IneqReport rep;
    rep.label = "diagonal_trace_share";
    GammaSampler sampler(n, k);
    Rng rng(seed);
    for (long s = 0; s < samples; ++s) {
        const VectorXd lam = sampler.draw_large_tail(rng, eps, /*include_equality=*/true);
        const VectorXd trunc = sigma_excluding_each(lam, k - 1);
        const double share = trunc(k - 1) / trunc.sum();
        rep.samples++;
        rep.worst_residual = std::min(rep.worst_residual, share);
        if (share < rep.empirical_constant) {
            rep.empirical_constant = share;
            rep.worst_point = {lam, k};
        }
    }
    return rep;
}

namespace {

struct TailCheck {
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    VectorXd worst_lambda;
    bool positivity_ok = true;
};

// sigma_{k-2; i 1} - (1 - delta) sigma_{k-1; i} / lambda_1 >= 0 for i = 2..n,
// evaluated on a sorted-decreasing lambda. Roundoff floor keeps exact
// equality cases (they occur, e.g. at rescaled all-ones vectors) from
// counting as violations.
TailCheck check_tail_inequality(const VectorXd& lam, int k, double delta) {
    TailCheck out;
    const int n = static_cast<int>(lam.size());
    const double lam1 = lam(0);
    for (int i = 1; i < n; ++i) {
        const int idx[2] = {i, 0};
        const double a = sigma_excluding(lam, k - 2, std::span<const int>(idx, 2));
        const int one[1] = {i};
        const double b = sigma_excluding(lam, k - 1, std::span<const int>(one, 1));
        if (!(a > 0)) out.positivity_ok = false;
        const double r = a - (1.0 - delta) * b / lam1;
        const double scale = std::abs(a) + std::abs((1.0 - delta) * b / lam1);
        if (r < -1e-12 * std::max(1.0, scale)) {
            out.ok = false;
            if (r < out.worst) {
                out.worst = r;
                out.worst_lambda = lam;
            }
        }
    }
    return out;
}

}  // namespace

EpsSearchResult truncated_dominance_eps(double delta, int n, int k,
                                        const EpsSearchOptions& opts) {
    if (!(delta > 0 && delta < 1)) throw ConfigError("truncated_dominance_eps: need 0<delta<1");
    if (k < 2 || k > n) throw ConfigError("truncated_dominance_eps: need 2 <= k <= n");
    EpsSearchResult result;
    result.delta = delta;
    result.n = n;
    result.k = k;

    GammaSampler sampler(n, k);
    const int decades =
        static_cast<int>(std::round(std::log10(opts.eps_max / opts.eps_min)));
    const int npts = decades * opts.per_decade + 1;

    auto run_at = [&](double eps, long count, std::uint64_t seed, EpsSearchResult* rec) {
        Rng rng(seed);
        long violations = 0;
        for (long s = 0; s < count; ++s) {
            const VectorXd lam = sampler.draw_small_tail(rng, eps);
            const TailCheck c = check_tail_inequality(lam, k, delta);
            if (!c.positivity_ok) result.side_positivity_ok = false;
            if (!c.ok) {
                ++violations;
                if (rec && c.worst < rec->worst_violation) {
                    rec->worst_violation = c.worst;
                    rec->worst_violator = {c.worst_lambda, k};
                }
                if (!rec) break;  // search phase: first violation disqualifies
            }
        }
        return violations;
    };

    double prev_eps = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < npts; ++i) {
        const double eps = opts.eps_max * std::pow(10.0, -static_cast<double>(i) / opts.per_decade);
        const long bad_search = run_at(eps, opts.search_samples, opts.seed + i, nullptr);
        if (bad_search > 0) {
            prev_eps = eps;
            continue;
        }
        // candidate: validate at full sample count
        const long bad_full = run_at(eps, opts.validate_samples, opts.seed + 7919 + i, nullptr);
        if (bad_full == 0) {
            result.eps = eps;
            result.found = true;
            if (std::isfinite(prev_eps)) {
                EpsSearchResult rec;
                rec.worst_violation = 0.0;
                result.violations_above =
                    run_at(prev_eps, opts.search_samples, opts.seed + 104729, &rec);
                result.worst_violator = rec.worst_violator;
                result.worst_violation = rec.worst_violation;
            }
            return result;
        }
        prev_eps = eps;
    }
    return result;  // found = false: no grid point passed (reported, not thrown)
}

}  // namespace sklab::symfun
