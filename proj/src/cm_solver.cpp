#include "sklab/cm_solver.hpp"

#include <cmath>
#include <sstream>

// LAPACK symmetric indefinite factorization (Bunch-Kaufman): inertia counts.
extern "C" {
void dsytrf_(const char* uplo, const int* n, double* a, const int* lda, int* ipiv, double* work,
             const int* lwork, int* info);
}

namespace sklab::sphere {

using Eigen::VectorXd;

SupportHessian support_hessian(const Grid2& g, const VectorXd& u) {
    const Grid2::Hessian h = g.covariant_hessian(u);
    SupportHessian w;
    w.w11 = h.h11 + u;
    w.w12 = h.h12;
    w.w22 = h.h22 + u;
    return w;
}

VectorXd sigma_field(const SupportHessian& w, int j) {
    if (j == 1) return w.w11 + w.w22;
    return (w.w11.array() * w.w22.array() - w.w12.array().square()).matrix();
}

double cone_margin(const SupportHessian& w, int k) {
    double margin = sigma_field(w, 1).minCoeff() / binom(2, 1);
    if (k >= 2) margin = std::min(margin, sigma_field(w, 2).minCoeff());
    return margin;
}

VectorXd residual(const Grid2& g, const VectorXd& u, const VectorXd& f, int k) {
    const SupportHessian w = support_hessian(g, u);
    const double margin = cone_margin(w, k);
    if (!(margin > 0)) {
        std::ostringstream msg;
        msg << "residual: support Hessian left the cone (worst margin " << margin << ")";
        throw InadmissibleError(msg.str());
    }
    return sigma_field(w, k) - f;
}

double compatibility_defect(const Grid2& g, const VectorXd& f) {
    return g.moments(f).cwiseAbs().maxCoeff();
}

namespace {

// Linearization tr(T_{k-1}(W) dV) for 2x2 fields; dV is the support Hessian
// of the direction (Hessian + v I).
VectorXd linearized_apply(const SupportHessian& w, const SupportHessian& dv, int k) {
    if (k == 1) return dv.w11 + dv.w22;
    // T_1 = sigma_1 I - W: contraction = w22*dv11 + w11*dv22 - 2 w12*dv12
    return (w.w22.array() * dv.w11.array() + w.w11.array() * dv.w22.array() -
            2.0 * w.w12.array() * dv.w12.array())
        .matrix();
}

}  // namespace

std::pair<VectorXd, SolveReport> newton_solve(const Grid2& g, const VectorXd& f, int k,
                                              const VectorXd& u0, const SolveOptions& opts) {
    SolveReport rep;
    if (k < 1 || k > 2) throw ConfigError("sphere newton_solve: k in {1, 2}");
    if (!(f.minCoeff() > 0)) throw ConfigError("sphere newton_solve: f must be positive");

    rep.moment_defect = compatibility_defect(g, f);
    const double fscale = f.cwiseAbs().maxCoeff();
    if (opts.enforce_compatibility && rep.moment_defect > opts.compatibility_tol * fscale) {
        std::ostringstream msg;
        msg << "newton_solve: f violates the moment condition (max_i |int x_i f| = "
            << rep.moment_defect << ", tolerance " << opts.compatibility_tol * fscale << ")";
        throw ConfigError(msg.str());
    }
    rep.inf_f = f.minCoeff();

    VectorXd u = u0;
    SupportHessian w = support_hessian(g, u);
    {
        const double m0 = cone_margin(w, k);
        if (!(m0 >= opts.margin_floor)) {
            std::ostringstream msg;
            msg << "newton_solve: initial data inadmissible (cone margin " << m0 << " < floor "
                << opts.margin_floor << ")";
            throw InadmissibleError(msg.str());
        }
    }

    const double c0 = binom(1, k - 1);  // linearization coefficient at W = I
    VectorXd res = sigma_field(w, k) - f;
    double res_norm = res.cwiseAbs().maxCoeff();
    rep.residual_history.push_back(res_norm);
    rep.min_margin = cone_margin(w, k);

    // nodal coordinate fields for gauge projection
    std::array<VectorXd, 3> xi;
    for (int a = 0; a < 3; ++a) xi[a] = g.coordinate(a);
    const double xi_norm2 = g.inner(xi[0], xi[0]);  // = |S^2|/3 for each

    auto project = [&](VectorXd& v) {
        for (int a = 0; a < 3; ++a) v -= (g.inner(v, xi[a]) / xi_norm2) * xi[a];
    };

    for (int it = 0; it < opts.max_iter && res_norm > opts.tol; ++it) {
        LinearOp op = [&](const VectorXd& vin, VectorXd& vout) {
            VectorXd v = vin;
            project(v);
            const SupportHessian dv = support_hessian(g, v);
            vout = linearized_apply(w, dv, k);
            project(vout);
        };
        LinearOp prec = [&](const VectorXd& vin, VectorXd& vout) {
            // harmonic symbol on the band-limited part; the collocation
            // operator acts like multiplication by tr(T) ~ n c0 on the
            // super-band complement, so treat that part with a scaled identity
            const Coeffs c = g.analyze(vin);
            vout = g.synth_multiplier(c, [&](int l) {
                const double symbol = c0 * (2.0 - static_cast<double>(l) * (l + 1));
                return (l == 1) ? 0.0 : 1.0 / symbol;
            });
            vout += (vin - g.synth(c, Grid2::Mode::Value)) / (2.0 * c0);
        };
        VectorXd rhs = -res;
        project(rhs);
        VectorXd delta = VectorXd::Zero(g.size());
        GmresOptions gopts;
        gopts.max_iter = opts.gmres_max;
        gopts.rel_tol = std::clamp(0.01 * res_norm, opts.gmres_tol, 1e-2);
        const GmresResult lin = gmres(op, prec, rhs, delta, gopts);
        if (lin.residual_norm > 0.5 * rhs.norm()) {
            rep.failure = "linear solve stalled";
            break;
        }
        project(delta);

        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            VectorXd u_trial = u + step * delta;
            const SupportHessian w_trial = support_hessian(g, u_trial);
            if (cone_margin(w_trial, k) < opts.margin_floor) continue;
            const VectorXd res_trial = sigma_field(w_trial, k) - f;
            const double norm_trial = res_trial.cwiseAbs().maxCoeff();
            if (norm_trial <= (1.0 - opts.armijo * step) * res_norm) {
                u = u_trial;
                w = w_trial;
                res = res_trial;
                res_norm = norm_trial;
                accepted = true;
                break;
            }
        }
        rep.iterations = it + 1;
        if (!accepted) {
            rep.failure = "line search stalled (cone margin or descent)";
            break;
        }
        rep.residual_history.push_back(res_norm);
        rep.min_margin = std::min(rep.min_margin, cone_margin(w, k));
    }

    rep.converged = res_norm <= opts.tol;
    if (!rep.converged && rep.failure.empty()) rep.failure = "iteration budget exhausted";
    u = g.project_linear_out(u);
    rep.sup_sigma1 = sigma_field(w, 1).maxCoeff();
    rep.sup_grad = std::sqrt(g.grad_norm2(u).maxCoeff());
    rep.u_inf = u.cwiseAbs().maxCoeff();
    return {u, rep};
}

std::vector<SweepEntry> degenerate_sweep(const Grid2& g, const VectorXd& g_profile, int k,
                                         const std::vector<double>& eps_schedule,
                                         ExponentRule rule, const SolveOptions& opts) {
    if (g_profile.minCoeff() < 0) throw ConfigError("degenerate_sweep: g must be nonnegative");
    for (size_t i = 1; i < eps_schedule.size(); ++i)
        if (!(eps_schedule[i] < eps_schedule[i - 1]))
            throw ConfigError("degenerate_sweep: eps schedule must be decreasing");
    // antipodal evenness (ensures the moment condition for every eps)
    {
        const double defect = compatibility_defect(g, g_profile);
        if (defect > 1e-8 * std::max(1.0, g_profile.cwiseAbs().maxCoeff()))
            throw ConfigError("degenerate_sweep: g is not antipodally even (moments nonzero)");
    }

    const double p_exp = (rule == ExponentRule::C21) ? (2.0 * k - 2.0) / 3.0 : k - 1.0;
    std::vector<SweepEntry> out;
    VectorXd warm;
    bool have_warm = false;
    for (size_t i = 0; i < eps_schedule.size(); ++i) {
        const double eps = eps_schedule[i];
        auto make_f = [&](double e) {
            return VectorXd((g_profile.array() + e).pow(p_exp).matrix());
        };
        const VectorXd f = make_f(eps);
        if (!have_warm) {
            const double mean_f = g.integrate(f) / (4.0 * M_PI);
            warm = VectorXd::Constant(g.size(), std::pow(mean_f / binom(2, k), 1.0 / k));
        }
        SweepEntry entry;
        entry.eps = eps;
        try {
            auto [u, rep] = newton_solve(g, f, k, warm, opts);
            rep.eps = eps;
            if (!rep.converged && i > 0) {
                const double mid = std::sqrt(eps * eps_schedule[i - 1]);
                auto [umid, rmid] = newton_solve(g, make_f(mid), k, warm, opts);
                if (rmid.converged) {
                    std::tie(u, rep) = newton_solve(g, f, k, umid, opts);
                    rep.eps = eps;
                }
            }
            entry.report = rep;
            if (rep.converged) {
                warm = u;
                have_warm = true;
            }
        } catch (const std::exception& e) {
            entry.report.failure = e.what();
            entry.report.eps = eps;
        }
        out.push_back(std::move(entry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum facts
// ---------------------------------------------------------------------------

namespace {

// Eigenvalue count of symmetric S below `shift` via Bunch-Kaufman inertia.
int count_below(Eigen::MatrixXd s, double shift) {
    const int n = static_cast<int>(s.rows());
    s.diagonal().array() -= shift;
    std::vector<int> ipiv(n);
    int info = 0;
    int lwork = -1;
    double wkopt = 0;
    dsytrf_("L", &n, s.data(), &n, ipiv.data(), &wkopt, &lwork, &info);
    lwork = static_cast<int>(wkopt);
    std::vector<double> work(std::max(1, lwork));
    dsytrf_("L", &n, s.data(), &n, ipiv.data(), work.data(), &lwork, &info);
    if (info < 0) throw SolveError("dsytrf failed");
    int below = 0;
    for (int i = 0; i < n;) {
        if (ipiv[i] > 0) {
            if (s(i, i) < 0) ++below;
            ++i;
        } else {
            // 2x2 block: eigenvalues of [[a, b], [b, c]]
            const double a = s(i, i), b = s(i + 1, i), c = s(i + 1, i + 1);
            const double tr = a + c, det = a * c - b * b;
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            if (tr / 2.0 - disc < 0) ++below;
            if (tr / 2.0 + disc < 0) ++below;
            i += 2;
        }
    }
    return below;
}

}  // namespace

SpectrumReport spectrum_check(const Grid2& g, double window, long dense_limit,
                              long assemble_limit) {
    SpectrumReport rep;
    const long n = g.size();
    const double nn = 2.0;  // sphere dimension

    const VectorXd ones = VectorXd::Ones(n);
    rep.const_residual = g.apply_laplacian(ones).cwiseAbs().maxCoeff();

    double worst = 0;
    std::array<VectorXd, 3> xi;
    for (int a = 0; a < 3; ++a) {
        xi[a] = g.coordinate(a);
        const VectorXd r = g.apply_laplacian(xi[a]) + nn * xi[a];
        worst = std::max(worst, r.norm() / xi[a].norm());
    }
    rep.coord_residual = worst;
    rep.angle_bound = worst / 2.0;  // nearest other eigenvalues: 0 and -6, gap >= 2

    if (n > assemble_limit) return rep;  // residual certificates only

    // symmetrized operator S = D^{1/2} A D^{-1/2}; assembled column by column
    Eigen::MatrixXd s(n, n);
    {
        const VectorXd sqw = g.weights().cwiseSqrt();
        VectorXd e = VectorXd::Zero(n);
        for (long j = 0; j < n; ++j) {
            e(j) = 1.0 / sqw(j);
            s.col(j) = sqw.asDiagonal() * g.apply_laplacian(e);
            e(j) = 0.0;
        }
        s = 0.5 * (s + s.transpose()).eval();  // kill assembly roundoff asymmetry
    }
    rep.multiplicity = count_below(s, -nn + window) - count_below(s, -nn - window);

    if (n <= dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        const VectorXd evals = es.eigenvalues();
        std::vector<long> in_window;
        for (long i = 0; i < n; ++i)
            if (std::abs(evals(i) + nn) <= window) in_window.push_back(i);
        rep.dense_multiplicity = static_cast<int>(in_window.size());
        if (rep.dense_multiplicity >= 1) {
            // principal angle between span{D^{1/2} x_i} and the eigenspace
            Eigen::MatrixXd u(n, in_window.size());
            for (size_t c = 0; c < in_window.size(); ++c) u.col(c) = es.eigenvectors().col(in_window[c]);
            Eigen::MatrixXd x(n, 3);
            const VectorXd sqw = g.weights().cwiseSqrt();
            for (int a = 0; a < 3; ++a) x.col(a) = sqw.asDiagonal() * xi[a];
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
            Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(u.transpose() * q);
            const double smin = svd.singularValues().minCoeff();
            rep.subspace_angle = std::sqrt(std::max(0.0, 1.0 - smin * smin));
        }
    }
    return rep;
}

double trace_identity_defect(const Grid2& g, const VectorXd& u) {
    const SupportHessian w = support_hessian(g, u);
    const VectorXd h = sigma_field(w, 1);  // = Delta u + 2u via the Hessian assembly
    const VectorXd route_a = g.apply_laplacian(h);
    const Coeffs c = g.analyze(u);
    const VectorXd route_b = g.synth_multiplier(c, [](int l) {
        const double ll = -static_cast<double>(l) * (l + 1);
        return ll * (ll + 2.0);
    });
    const double scale = std::max(1.0, route_b.cwiseAbs().maxCoeff());
    return (route_a - route_b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace sklab::sphere
