#include "sklab/khessian.hpp"

#include <cmath>
#include <sstream>

namespace sklab::torus {

using Eigen::ArrayXd;
using Eigen::VectorXd;

ArrayXd normalize(const Grid& g, const ArrayXd& u) { return g.mean_zero(u); }

ArrayXd residual(const Grid& g, const ArrayXd& u, const ArrayXd& f, int k) {
    const HermitianField w = complex_hessian(g, u);
    const double margin = cone_margin(w, k);
    if (!(margin > 0)) {
        std::ostringstream msg;
        msg << "residual: field left the admissible cone (worst normalized margin " << margin
            << ")";
        throw InadmissibleError(msg.str());
    }
    return sigma_field(w, k) - f;
}

Monitor estimate_monitor(const Grid& g, const ArrayXd& u) {
    Monitor m;
    const Grid::Jet j1 = g.jet(u, true, false);
    ArrayXd grad2 = ArrayXd::Zero(g.size());
    for (int a = 0; a < g.dim(); ++a) grad2 += j1.first[a].square();
    m.sup_grad2 = grad2.maxCoeff();
    m.sup_laplacian = g.laplacian(u).maxCoeff();
    m.ratio = m.sup_laplacian / (m.sup_grad2 + 1.0);
    return m;
}

std::pair<ArrayXd, SolveReport> newton_solve(const Grid& g, const ArrayXd& f_in, int k,
                                             const ArrayXd& u0, const SolveOptions& opts) {
    SolveReport rep;
    const int nc = g.n_complex();
    if (k < 1 || k > nc) throw ConfigError("newton_solve: need 1 <= k <= n_c");
    if (!(f_in.minCoeff() > 0)) throw ConfigError("newton_solve: f must be positive on the grid");

    // Compatibility: mean(sigma_k(W)) is conserved by the discrete operator,
    // so mean(f) must equal binom(n_c, k). Enforced multiplicatively.
    const double target_mean = binom(nc, k);
    const double scale = target_mean / f_in.mean();
    rep.compat_scale = scale;
    const ArrayXd f = scale * f_in;
    rep.inf_f = f.minCoeff();

    ArrayXd u = g.mean_zero(u0);
    {
        const HermitianField w0 = complex_hessian(g, u);
        const double m0 = cone_margin(w0, k);
        rep.min_margin = m0;
        if (!(m0 >= opts.margin_floor)) {
            std::ostringstream msg;
            msg << "newton_solve: initial data inadmissible (cone margin " << m0 << " < floor "
                << opts.margin_floor << ")";
            throw InadmissibleError(msg.str());
        }
    }

    const double c0 = binom(nc - 1, k - 1);  // linearization coefficient at W = I
    HermitianField w = complex_hessian(g, u);
    ArrayXd res = sigma_field(w, k) - f;
    double res_norm = res.abs().maxCoeff();
    rep.residual_history.push_back(res_norm);
    rep.min_margin = cone_margin(w, k);

    for (int it = 0; it < opts.max_iter && res_norm > opts.tol; ++it) {
        LinearOp op = [&](const VectorXd& vin, VectorXd& vout) {
            ArrayXd va = vin.array();
            va -= va.mean();
            const HermitianField dv = mixed_hessian(g, va);
            ArrayXd lv = linearized_apply(w, dv, k);
            lv -= lv.mean();
            vout = lv.matrix();
        };
        LinearOp prec = [&](const VectorXd& vin, VectorXd& vout) {
            vout = g.quarter_laplacian_inverse(vin.array(), c0).matrix();
        };
        VectorXd rhs = (-res).matrix();
        rhs.array() -= rhs.array().mean();
        VectorXd delta = VectorXd::Zero(g.size());
        GmresOptions gopts;
        gopts.max_iter = opts.gmres_max;
        gopts.rel_tol = opts.gmres_tol;
        const GmresResult lin = gmres(op, prec, rhs, delta, gopts);
        if (!lin.converged && lin.residual_norm > 1e-2 * rhs.norm()) {
            rep.failure = "linear solve stalled";
            break;
        }

        // cone-margin guarded backtracking
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h, step *= 0.5) {
            const ArrayXd u_trial = g.mean_zero(u + step * delta.array());
            const HermitianField w_trial = complex_hessian(g, u_trial);
            if (cone_margin(w_trial, k) < opts.margin_floor) continue;
            const ArrayXd res_trial = sigma_field(w_trial, k) - f;
            const double norm_trial = res_trial.abs().maxCoeff();
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
    rep.sup_sigma1 = sigma_field(w, 1).maxCoeff();
    const Monitor m = estimate_monitor(g, u);
    rep.sup_laplacian = m.sup_laplacian;
    rep.sup_grad2 = m.sup_grad2;
    rep.u_inf = u.abs().maxCoeff();
    return {u, rep};
}

std::vector<SweepEntry> degenerate_sweep(const Grid& g, const ArrayXd& g_profile, int k,
                                         const std::vector<double>& eps_schedule,
                                         ExponentRule rule, const SolveOptions& opts) {
    if (g_profile.minCoeff() < 0) throw ConfigError("degenerate_sweep: g must be nonnegative");
    for (size_t i = 1; i < eps_schedule.size(); ++i)
        if (!(eps_schedule[i] < eps_schedule[i - 1]))
            throw ConfigError("degenerate_sweep: eps schedule must be decreasing");

    const double p_exp = (rule == ExponentRule::C21) ? (2.0 * k - 2.0) / 3.0 : k - 1.0;
    std::vector<SweepEntry> out;
    ArrayXd warm = ArrayXd::Zero(g.size());
    for (size_t i = 0; i < eps_schedule.size(); ++i) {
        const double eps = eps_schedule[i];
        auto make_f = [&](double e) { return (g_profile + e).pow(p_exp).eval(); };
        SweepEntry entry;
        entry.eps = eps;
        try {
            auto [u, rep] = newton_solve(g, make_f(eps), k, warm, opts);
            rep.eps = eps;
            if (!rep.converged && i > 0) {
                // one bisection retry: re-warm at the geometric midpoint
                const double mid = std::sqrt(eps * eps_schedule[i - 1]);
                auto [umid, rmid] = newton_solve(g, make_f(mid), k, warm, opts);
                if (rmid.converged) {
                    std::tie(u, rep) = newton_solve(g, make_f(eps), k, umid, opts);
                    rep.eps = eps;
                }
            }
            entry.report = rep;
            entry.monitor = estimate_monitor(g, u);
            if (rep.converged) warm = u;
        } catch (const std::exception& e) {
            entry.report.failure = e.what();
            entry.report.eps = eps;
        }
        out.push_back(std::move(entry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Barriers
// ---------------------------------------------------------------------------

double BarrierReport::max_defect() const {
    double m = std::max(phi_identity_defect, psi_identity_defect);
    for (double d : defects) m = std::max(m, d);
    return m;
}

bool BarrierReport::ok(double tol) const { return max_defect() <= tol; }

BarrierReport barrier_check(const BarrierParams& params, int t_points) {
    if (!params.valid()) throw ConfigError("barrier_check: need alpha > 1, beta > 1, gamma >= 0");
    BarrierReport rep;
    const double a = params.alpha, b = params.beta, gm = params.gamma;
    const double dl = params.delta();
    const double log2 = std::log(2.0);

    auto bump = [](double& slot, double violation) { slot = std::max(slot, violation); };

    for (int i = 0; i < t_points; ++i) {
        const double t = b * static_cast<double>(i) / (t_points - 1);  // [0, beta]
        const double phi = -0.5 * std::log(1.0 - t / (2.0 * b));
        const double dphi = 0.25 / b / (1.0 - t / (2.0 * b));
        const double ddphi = 0.125 / (b * b) / ((1.0 - t / (2.0 * b)) * (1.0 - t / (2.0 * b)));
        bump(rep.defects[0], std::abs(phi) - log2);
        bump(rep.defects[1], 0.25 / b - dphi);
        bump(rep.defects[2], dphi - 0.5 / b);
        rep.phi_identity_defect =
            std::max(rep.phi_identity_defect, std::abs(ddphi - 2.0 * dphi * dphi));
    }
    double min_neg_dpsi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t_points; ++i) {
        const double t = -(a - 1.0) + 2.0 * (a - 1.0) * static_cast<double>(i) / (t_points - 1);
        const double psi = -3.0 * a * (2.0 * gm + 1.0) * std::log(1.0 + t / (2.0 * a));
        const double dpsi = -3.0 * a * (2.0 * gm + 1.0) / (2.0 * a + t);
        const double ddpsi = 3.0 * a * (2.0 * gm + 1.0) / ((2.0 * a + t) * (2.0 * a + t));
        bump(rep.defects[3], std::abs(psi) - 3.0 * a * (2.0 * gm + 1.0) * log2);
        bump(rep.defects[4], (2.0 * gm + 1.0) - (-dpsi));
        bump(rep.defects[5], (-dpsi) - 3.0 * (2.0 * gm + 1.0));
        rep.psi_identity_defect =
            std::max(rep.psi_identity_defect, std::abs(ddpsi - 2.0 * dl * dpsi * dpsi));
        min_neg_dpsi = std::min(min_neg_dpsi, -dpsi);
    }
    // slack inequality uses the worst pairing of the two ranges
    const double min_dphi = 0.25 / b;
    bump(rep.defects[6], 1.0 - (min_neg_dpsi + min_dphi - 2.0 * gm));
    for (double& d : rep.defects) d = std::max(d, 0.0);
    return rep;
}

// ---------------------------------------------------------------------------
// Lower-bound probe
// ---------------------------------------------------------------------------

JProbeResult j_lower_bound_probe(const Grid& g, const ArrayXd& f_tilde, int k,
                                 const BarrierParams& params, const ArrayXd* u11) {
    if (k < 2) throw ConfigError("j_lower_bound_probe: need k >= 2");
    if (!(f_tilde.minCoeff() > 0))
        throw InadmissibleError("j_lower_bound_probe: f_tilde must be positive");
    const int nc = g.n_complex();
    const long n = g.size();
    const double q = (2.0 * k - 2.0) / (3.0 * k);
    const double alpha_j = (k + 2.0) / (3.0 * k);  // = 1 - q

    const Grid::Jet jet = g.jet(f_tilde, true, true);
    auto d2 = [&](int a, int b) -> const ArrayXd& {
        return jet.second[Grid::pair_index(a, b, g.dim())];
    };

    // complex first derivatives f_p = (f_x - i f_y)/2 per complex axis
    std::vector<ArrayXd> fp_re(nc), fp_im(nc);
    ArrayXd grad2 = ArrayXd::Zero(n);  // sum_p |f_p|^2
    for (int p = 0; p < nc; ++p) {
        fp_re[p] = 0.5 * jet.first[2 * p];
        fp_im[p] = -0.5 * jet.first[2 * p + 1];
        grad2 += fp_re[p].square() + fp_im[p].square();
    }

    // mixed Hessian H_pq = f_{p qbar}
    HermitianField h;
    h.nc = nc;
    h.n = n;
    h.diag.resize(nc);
    h.off_re.resize(nc * (nc - 1) / 2);
    h.off_im.resize(nc * (nc - 1) / 2);
    for (int p = 0; p < nc; ++p)
        h.diag[p] = 0.25 * (d2(2 * p, 2 * p) + d2(2 * p + 1, 2 * p + 1));
    for (int p = 0; p < nc; ++p)
        for (int qq = p + 1; qq < nc; ++qq) {
            const int idx = HermitianField::off_index(p, qq, nc);
            h.off_re[idx] = 0.25 * (d2(2 * p, 2 * qq) + d2(2 * p + 1, 2 * qq + 1));
            h.off_im[idx] = 0.25 * (d2(2 * p, 2 * qq + 1) - d2(2 * p + 1, 2 * qq));
        }

    // J's coefficient (psi' - 2 phi' - gamma) at the params' worst case
    const double coef =
        -3.0 * (2.0 * params.gamma + 1.0) - 2.0 * 0.5 / params.beta - params.gamma;

    JProbeResult out;
    out.inf_f_tilde = f_tilde.minCoeff();
    out.j_min = std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd m(nc, nc);
    for (long i = 0; i < n; ++i) {
        const double ft = f_tilde(i);
        // worst complex direction of the defect -(H - alpha_j g g^*/f): its
        // largest eigenvalue gives the exact one-sided deficit over |e| = 1
        double lam_max;
        if (nc == 1) {
            lam_max = -(h.diag[0](i) - alpha_j * grad2(i) / ft);
        } else {
            for (int p = 0; p < nc; ++p) {
                for (int qq = 0; qq < nc; ++qq) {
                    std::complex<double> hpq;
                    if (p == qq) hpq = h.diag[p](i);
                    else {
                        const int idx = HermitianField::off_index(std::min(p, qq),
                                                                  std::max(p, qq), nc);
                        hpq = {h.off_re[idx](i), (p < qq ? 1.0 : -1.0) * h.off_im[idx](i)};
                    }
                    const std::complex<double> gp(fp_re[p](i), fp_im[p](i));
                    const std::complex<double> gq(fp_re[qq](i), fp_im[qq](i));
                    m(p, qq) = -(hpq - alpha_j * gp * std::conj(gq) / ft);
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            lam_max = es.eigenvalues().maxCoeff();
        }
        const double chain = q * std::pow(ft, q - 1.0);
        const double neg_second = chain * std::max(0.0, lam_max);  // [-(f^{1/k})_{e ebar}]^+
        const double rho = (u11 != nullptr) ? 1.0 / (1.0 + (*u11)(i)) : 1.0;
        const double grad_term = chain * std::sqrt(grad2(i));      // |grad f^{1/k}|
        const double weight = std::pow(ft, 2.0 / (3.0 * k));       // f^{1/(k(k-1))}
        const double deficit = (rho * neg_second + grad_term) * weight;
        if (deficit > out.k3) {
            out.k3 = deficit;
            out.argmax_node = i;
        }
        const double j_here = -rho * neg_second - grad_term + coef * std::pow(ft, q);
        out.j_min = std::min(out.j_min, j_here);
    }
    return out;
}

}  // namespace sklab::torus
