#include "sklab/sphere_fd3.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace sklab::sphere {

using Eigen::VectorXd;

Grid3Fd::Grid3Fd(int n_psi, int n_theta, int n_phi)
    : npsi_(n_psi), ntheta_(n_theta), nphi_(n_phi) {
    if (n_phi % 2 != 0) throw ConfigError("Grid3Fd: n_phi must be even (pole reflection)");
    w_.resize(size());
    const double hp = M_PI / npsi_, ht = M_PI / ntheta_, hf = 2.0 * M_PI / nphi_;
    // exact cell integrals of the volume element: constants integrate to
    // |S^3| at machine precision rather than O(h^2)
    for (int i = 0; i < npsi_; ++i) {
        const double a = psi(i) - hp / 2, b = psi(i) + hp / 2;
        const double ipsi = (b - a) / 2 - (std::sin(2 * b) - std::sin(2 * a)) / 4;
        for (int j = 0; j < ntheta_; ++j) {
            const double itheta = std::cos(theta(j) - ht / 2) - std::cos(theta(j) + ht / 2);
            for (int l = 0; l < nphi_; ++l) w_(node(i, j, l)) = ipsi * itheta * hf;
        }
    }

    // finite-volume flux stencil: face coefficients shared between cells, so
    // the operator is exactly self-adjoint in the w_ inner product; pole
    // faces carry sin^2(0) = 0 and drop out
    for (auto& v : nb_) v.resize(size());
    for (auto& v : coef_) v.resize(size());
    diag_.resize(size());
    for (int i = 0; i < npsi_; ++i) {
        const double a = psi(i) - hp / 2, b = psi(i) + hp / 2;
        const double ipsi = (b - a) / 2 - (std::sin(2 * b) - std::sin(2 * a)) / 4;
        const double sp_p = std::sin(b), sp_m = std::sin(a);
        for (int j = 0; j < ntheta_; ++j) {
            const double st = std::sin(theta(j));
            const double itheta = std::cos(theta(j) - ht / 2) - std::cos(theta(j) + ht / 2);
            const double st_p = std::sin(theta(j) + ht / 2), st_m = std::sin(theta(j) - ht / 2);
            for (int l = 0; l < nphi_; ++l) {
                const long c = node(i, j, l);
                nb_[0](c) = static_cast<int>(reflect(i + 1, j, l));
                nb_[1](c) = static_cast<int>(reflect(i - 1, j, l));
                nb_[2](c) = static_cast<int>(reflect(i, j + 1, l));
                nb_[3](c) = static_cast<int>(reflect(i, j - 1, l));
                nb_[4](c) = static_cast<int>(reflect(i, j, l + 1));
                nb_[5](c) = static_cast<int>(reflect(i, j, l - 1));
                coef_[0](c) = sp_p * sp_p / (hp * ipsi);
                coef_[1](c) = sp_m * sp_m / (hp * ipsi);
                coef_[2](c) = st_p * hp / (ht * ipsi * itheta);
                coef_[3](c) = st_m * hp / (ht * ipsi * itheta);
                coef_[4](c) = hp * ht / (st * hf * hf * ipsi * itheta);
                coef_[5](c) = coef_[4](c);
                diag_(c) = -(coef_[0](c) + coef_[1](c) + coef_[2](c) + coef_[3](c) +
                             2.0 * coef_[4](c));
            }
        }
    }
}

Eigen::Vector4d Grid3Fd::point(int i, int j, int l) const {
    const double sp = std::sin(psi(i)), cp = std::cos(psi(i));
    const double st = std::sin(theta(j)), ct = std::cos(theta(j));
    return {sp * st * std::cos(phi(l)), sp * st * std::sin(phi(l)), sp * ct, cp};
}

VectorXd Grid3Fd::coordinate(int axis) const {
    VectorXd out(size());
    for (int i = 0; i < npsi_; ++i)
        for (int j = 0; j < ntheta_; ++j)
            for (int l = 0; l < nphi_; ++l) out(node(i, j, l)) = point(i, j, l)(axis);
    return out;
}

long Grid3Fd::reflect(int i, int j, int l) const {
    // psi out of range crosses a psi-pole: theta and phi both flip
    if (i < 0) {
        i = -1 - i;
        j = ntheta_ - 1 - j;
        l += nphi_ / 2;
    } else if (i >= npsi_) {
        i = 2 * npsi_ - 1 - i;
        j = ntheta_ - 1 - j;
        l += nphi_ / 2;
    }
    if (j < 0) {
        j = -1 - j;
        l += nphi_ / 2;
    } else if (j >= ntheta_) {
        j = 2 * ntheta_ - 1 - j;
        l += nphi_ / 2;
    }
    l = ((l % nphi_) + nphi_) % nphi_;
    return node(i, j, l);
}

VectorXd Grid3Fd::apply_laplacian(const VectorXd& u) const {
    VectorXd out(size());
    const long n = size();
    for (long c = 0; c < n; ++c) {
        double acc = diag_(c) * u(c);
        for (int d = 0; d < 6; ++d) acc += coef_[d](c) * u(nb_[d](c));
        out(c) = acc;
    }
    return out;
}

VectorXd Grid3Fd::project_linear_out(const VectorXd& u) const {
    VectorXd out = u;
    for (int a = 0; a < 4; ++a) {
        const VectorXd xi = coordinate(a);
        out -= (inner(out, xi) / inner(xi, xi)) * xi;
    }
    return out;
}

Grid3Fd::Hessian Grid3Fd::covariant_hessian(const VectorXd& u) const {
    Hessian h;
    for (auto& v : h.h) v.resize(size());
    const double hp = M_PI / npsi_, ht = M_PI / ntheta_, hf = 2.0 * M_PI / nphi_;
    for (int i = 0; i < npsi_; ++i) {
        const double sp = std::sin(psi(i)), cp = std::cos(psi(i));
        const double cotp = cp / sp;
        for (int j = 0; j < ntheta_; ++j) {
            const double st = std::sin(theta(j)), ct = std::cos(theta(j));
            const double cott = ct / st;
            for (int l = 0; l < nphi_; ++l) {
                const long c = node(i, j, l);
                const double uc = u(c);
                const double up1 = u(reflect(i + 1, j, l)), um1 = u(reflect(i - 1, j, l));
                const double ut1 = u(reflect(i, j + 1, l)), utm = u(reflect(i, j - 1, l));
                const double uf1 = u(reflect(i, j, l + 1)), ufm = u(reflect(i, j, l - 1));
                const double dups = (up1 - um1) / (2 * hp);
                const double duth = (ut1 - utm) / (2 * ht);
                const double duph = (uf1 - ufm) / (2 * hf);
                const double dpp = (up1 - 2 * uc + um1) / (hp * hp);
                const double dtt = (ut1 - 2 * uc + utm) / (ht * ht);
                const double dff = (uf1 - 2 * uc + ufm) / (hf * hf);
                const double dpt = (u(reflect(i + 1, j + 1, l)) - u(reflect(i + 1, j - 1, l)) -
                                    u(reflect(i - 1, j + 1, l)) + u(reflect(i - 1, j - 1, l))) /
                                   (4 * hp * ht);
                const double dpf = (u(reflect(i + 1, j, l + 1)) - u(reflect(i + 1, j, l - 1)) -
                                    u(reflect(i - 1, j, l + 1)) + u(reflect(i - 1, j, l - 1))) /
                                   (4 * hp * hf);
                const double dtf = (u(reflect(i, j + 1, l + 1)) - u(reflect(i, j + 1, l - 1)) -
                                    u(reflect(i, j - 1, l + 1)) + u(reflect(i, j - 1, l - 1))) /
                                   (4 * ht * hf);
                h.h[0](c) = dpp;
                h.h[1](c) = (dtt + sp * cp * dups) / (sp * sp);
                h.h[2](c) = (dff + sp * cp * st * st * dups + st * ct * duth) /
                            (sp * sp * st * st);
                h.h[3](c) = (dpt - cotp * duth) / sp;
                h.h[4](c) = (dpf - cotp * duph) / (sp * st);
                h.h[5](c) = (dtf - cott * duph) / (sp * sp * st);
            }
        }
    }
    return h;
}

VectorXd sigma3_field(const Grid3Fd& g, const VectorXd& u, int j) {
    const Grid3Fd::Hessian hess = g.covariant_hessian(u);
    const long n = g.size();
    VectorXd out(n);
    for (long c = 0; c < n; ++c) {
        const double w11 = hess.h[0](c) + u(c), w22 = hess.h[1](c) + u(c),
                     w33 = hess.h[2](c) + u(c);
        const double w12 = hess.h[3](c), w13 = hess.h[4](c), w23 = hess.h[5](c);
        if (j == 1) {
            out(c) = w11 + w22 + w33;
        } else if (j == 2) {
            out(c) = w11 * w22 + w11 * w33 + w22 * w33 - w12 * w12 - w13 * w13 - w23 * w23;
        } else {
            out(c) = w11 * (w22 * w33 - w23 * w23) - w12 * (w12 * w33 - w23 * w13) +
                     w13 * (w12 * w23 - w22 * w13);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum: deflated subspace iteration on the shifted inverse
// ---------------------------------------------------------------------------

namespace {

// Jacobi-preconditioned CG for S = D^{1/2} (-Lap + I) D^{-1/2}: the polar
// 1/sin^2 coefficient growth makes the unpreconditioned system hopeless.
struct SymShiftedOp {
    const Grid3Fd& g;
    VectorXd sqw;
    VectorXd inv_diag;  // 1 / diag(S)
    VectorXd apply(const VectorXd& v) const {
        const VectorXd x = v.cwiseQuotient(sqw);
        const VectorXd y = -g.apply_laplacian(x) + x;
        return sqw.cwiseProduct(y);
    }
};

VectorXd cg_solve(const SymShiftedOp& op, const VectorXd& b, double tol, int max_iter) {
    VectorXd x = VectorXd::Zero(b.size());
    VectorXd r = b;
    VectorXd z = op.inv_diag.cwiseProduct(r);
    VectorXd p = z;
    double rho = r.dot(z);
    const double target = tol * tol * b.squaredNorm();
    for (int it = 0; it < max_iter && r.squaredNorm() > target; ++it) {
        const VectorXd ap = op.apply(p);
        const double alpha = rho / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        z = op.inv_diag.cwiseProduct(r);
        const double rho_new = r.dot(z);
        p = z + (rho_new / rho) * p;
        rho = rho_new;
    }
    return x;
}

}  // namespace

Spectrum3Report spectrum3_check(const Grid3Fd& g, double window, int subspace, int iterations) {
    Spectrum3Report rep;
    rep.window = window;
    const long n = g.size();

    double worst = 0;
    for (int a = 0; a < 4; ++a) {
        const VectorXd xi = g.coordinate(a);
        const double rq = g.inner(xi, g.apply_laplacian(xi)) / g.inner(xi, xi);
        worst = std::max(worst, std::abs(rq + 3.0));
    }
    rep.coord_rayleigh_worst = worst;

    SymShiftedOp op{g, g.weights().cwiseSqrt(),
                    (1.0 - g.laplacian_diag().array()).cwiseInverse().matrix()};
    const VectorXd ones_s = op.sqw;  // D^{1/2} * 1: the deflated constant mode

    Rng rng(20240901u);
    Eigen::MatrixXd x(n, subspace);
    for (long i = 0; i < n; ++i)
        for (int c = 0; c < subspace; ++c) x(i, c) = rng.normal();

    auto orthonormalize = [&](Eigen::MatrixXd& m) {
        for (int c = 0; c < m.cols(); ++c) {
            m.col(c) -= (ones_s.dot(m.col(c)) / ones_s.squaredNorm()) * ones_s;
            for (int d = 0; d < c; ++d) m.col(c) -= m.col(d).dot(m.col(c)) * m.col(d);
            m.col(c).normalize();
        }
    };
    orthonormalize(x);
    for (int it = 0; it < iterations; ++it) {
        // inexact inverse iteration: tighten the inner tolerance as the
        // subspace converges (contraction factor 4/9 per sweep)
        const double inner_tol = std::max(1e-9, 1e-2 * std::pow(4.0 / 9.0, it));
        Eigen::MatrixXd y(n, subspace);
        for (int c = 0; c < subspace; ++c) y.col(c) = cg_solve(op, x.col(c), inner_tol, 1200);
        x = y;
        orthonormalize(x);
    }
    // Rayleigh-Ritz with S
    Eigen::MatrixXd sx(n, subspace);
    for (int c = 0; c < subspace; ++c) sx.col(c) = op.apply(x.col(c));
    const Eigen::MatrixXd t = x.transpose() * sx;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
    for (int c = 0; c < subspace; ++c) {
        const double lam = es.eigenvalues()(c) - 1.0;  // eigenvalue of -Laplacian
        const VectorXd v = x * es.eigenvectors().col(c);
        const VectorXd res = sx * es.eigenvectors().col(c) - es.eigenvalues()(c) * v;
        rep.low_eigenvalues.push_back(lam);
        if (std::abs(lam - 3.0) <= window) {
            rep.multiplicity++;
            // certify only the window: guard vectors sit inside the next
            // (degenerate) cluster and need not converge individually
            rep.max_ritz_residual = std::max(rep.max_ritz_residual, res.norm());
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Newton solve for the intermediate case k = 2
// ---------------------------------------------------------------------------

std::pair<VectorXd, Solve3Report> newton_solve3(const Grid3Fd& g, const VectorXd& f,
                                                const VectorXd& u0, double tol, int max_iter) {
    Solve3Report rep;
    const long n = g.size();
    const int npsi = g.n_psi(), nth = g.n_theta3(), nph = g.n_phi3();
    const double hp = M_PI / npsi, ht = M_PI / nth, hf = 2.0 * M_PI / nph;

    VectorXd u = u0;
    auto sigma = [&](const VectorXd& v, int j) { return sigma3_field(g, v, j); };
    auto margin_of = [&](const VectorXd& v) {
        const VectorXd s1 = sigma(v, 1), s2 = sigma(v, 2);
        return std::min(s1.minCoeff() / 3.0, s2.minCoeff() / 3.0);
    };
    const double m0 = margin_of(u);
    if (!(m0 > 0)) throw InadmissibleError("newton_solve3: initial data inadmissible");

    VectorXd res = sigma(u, 2) - f;
    double res_norm = res.cwiseAbs().maxCoeff();
    rep.residual_history.push_back(res_norm);
    rep.min_margin = m0;

    std::array<VectorXd, 4> xi;
    for (int a = 0; a < 4; ++a) xi[a] = g.coordinate(a);

    for (int it = 0; it < max_iter && res_norm > tol; ++it) {
        // Newton tensor T_1 = sigma_1 I - W per node
        const Grid3Fd::Hessian hess = g.covariant_hessian(u);
        // assemble J v = tr(T_1 (Hess v + v I)) as a sparse matrix
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(n) * 32);
        for (int i = 0; i < npsi; ++i) {
            const double sp = std::sin(g.psi(i)), cp = std::cos(g.psi(i));
            const double cotp = cp / sp;
            for (int j = 0; j < nth; ++j) {
                const double st = std::sin(g.theta(j)), ct = std::cos(g.theta(j));
                const double cott = ct / st;
                for (int l = 0; l < nph; ++l) {
                    const long c = g.node(i, j, l);
                    const double w11 = hess.h[0](c) + u(c), w22 = hess.h[1](c) + u(c),
                                 w33 = hess.h[2](c) + u(c);
                    const double w12 = hess.h[3](c), w13 = hess.h[4](c), w23 = hess.h[5](c);
                    const double s1 = w11 + w22 + w33;
                    const double t11 = s1 - w11, t22 = s1 - w22, t33 = s1 - w33;
                    const double t12 = -w12, t13 = -w13, t23 = -w23;

                    auto add = [&](long col, double val) {
                        if (val != 0.0) trip.emplace_back(c, col, val);
                    };
                    const long cp1 = g.reflect(i + 1, j, l), cm1 = g.reflect(i - 1, j, l);
                    const long ct1 = g.reflect(i, j + 1, l), ctm = g.reflect(i, j - 1, l);
                    const long cf1 = g.reflect(i, j, l + 1), cfm = g.reflect(i, j, l - 1);

                    // diagonal Hessian blocks
                    add(cp1, t11 / (hp * hp));
                    add(cm1, t11 / (hp * hp));
                    add(c, -2.0 * t11 / (hp * hp));
                    const double c22 = t22 / (sp * sp);
                    add(ct1, c22 / (ht * ht));
                    add(ctm, c22 / (ht * ht));
                    add(c, -2.0 * c22 / (ht * ht));
                    add(cp1, c22 * sp * cp / (2 * hp));
                    add(cm1, -c22 * sp * cp / (2 * hp));
                    const double c33 = t33 / (sp * sp * st * st);
                    add(cf1, c33 / (hf * hf));
                    add(cfm, c33 / (hf * hf));
                    add(c, -2.0 * c33 / (hf * hf));
                    add(cp1, c33 * sp * cp * st * st / (2 * hp));
                    add(cm1, -c33 * sp * cp * st * st / (2 * hp));
                    add(ct1, c33 * st * ct / (2 * ht));
                    add(ctm, -c33 * st * ct / (2 * ht));
                    // mixed blocks (factor 2 from symmetry)
                    const double c12 = 2.0 * t12 / sp;
                    add(g.reflect(i + 1, j + 1, l), c12 / (4 * hp * ht));
                    add(g.reflect(i - 1, j - 1, l), c12 / (4 * hp * ht));
                    add(g.reflect(i + 1, j - 1, l), -c12 / (4 * hp * ht));
                    add(g.reflect(i - 1, j + 1, l), -c12 / (4 * hp * ht));
                    add(ct1, -c12 * cotp / (2 * ht));
                    add(ctm, c12 * cotp / (2 * ht));
                    const double c13 = 2.0 * t13 / (sp * st);
                    add(g.reflect(i + 1, j, l + 1), c13 / (4 * hp * hf));
                    add(g.reflect(i - 1, j, l - 1), c13 / (4 * hp * hf));
                    add(g.reflect(i + 1, j, l - 1), -c13 / (4 * hp * hf));
                    add(g.reflect(i - 1, j, l + 1), -c13 / (4 * hp * hf));
                    add(cf1, -c13 * cotp / (2 * hf));
                    add(cfm, c13 * cotp / (2 * hf));
                    const double c23 = 2.0 * t23 / (sp * sp * st);
                    add(g.reflect(i, j + 1, l + 1), c23 / (4 * ht * hf));
                    add(g.reflect(i, j - 1, l - 1), c23 / (4 * ht * hf));
                    add(g.reflect(i, j + 1, l - 1), -c23 / (4 * ht * hf));
                    add(g.reflect(i, j - 1, l + 1), -c23 / (4 * ht * hf));
                    add(cf1, -c23 * cott / (2 * hf));
                    add(cfm, c23 * cott / (2 * hf));
                    // + v * tr(T) from the v delta_ij part
                    add(c, t11 + t22 + t33);
                }
            }
        }
        // bordered system pins the 4-dim translation gauge
        const long nb = n + 4;
        Eigen::SparseMatrix<double> jac(nb, nb);
        std::vector<Eigen::Triplet<double>> all = std::move(trip);
        for (int a = 0; a < 4; ++a)
            for (long r = 0; r < n; ++r) {
                const double v = g.weights()(r) * xi[a](r);
                all.emplace_back(r, n + a, v);
                all.emplace_back(n + a, r, v);
            }
        jac.setFromTriplets(all.begin(), all.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success) {
            rep.failure = "sparse factorization failed";
            break;
        }
        VectorXd rhs = VectorXd::Zero(nb);
        rhs.head(n) = -res;
        const VectorXd sol = lu.solve(rhs);
        VectorXd delta = sol.head(n);

        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= 30; ++h, step *= 0.5) {
            const VectorXd u_trial = u + step * delta;
            if (!(margin_of(u_trial) > 1e-10)) continue;
            const VectorXd res_trial = sigma(u_trial, 2) - f;
            const double norm_trial = res_trial.cwiseAbs().maxCoeff();
            if (norm_trial <= (1.0 - 1e-2 * step) * res_norm) {
                u = u_trial;
                res = res_trial;
                res_norm = norm_trial;
                accepted = true;
                break;
            }
        }
        rep.iterations = it + 1;
        if (!accepted) {
            rep.failure = "line search stalled";
            break;
        }
        rep.residual_history.push_back(res_norm);
        rep.min_margin = std::min(rep.min_margin, margin_of(u));
    }

    rep.converged = res_norm <= tol;
    if (!rep.converged && rep.failure.empty()) rep.failure = "iteration budget exhausted";
    u = g.project_linear_out(u);
    rep.sup_sigma1 = sigma(u, 1).maxCoeff();
    rep.u_inf = u.cwiseAbs().maxCoeff();
    return {u, rep};
}

}  // namespace sklab::sphere
