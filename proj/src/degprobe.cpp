#include "sklab/degprobe.hpp"

#include <cmath>
#include <sstream>

namespace sklab::degprobe {

using Eigen::ArrayXd;
using Eigen::Vector3d;

namespace {

void require_positive(double h, const char* who, double where) {
    if (!(h > 0.0)) {
        std::ostringstream msg;
        msg << who << ": nonpositive sample h = " << h << " at " << where;
        throw InadmissibleError(msg.str());
    }
}

}  // namespace

double restricted_d1(const std::vector<double>& line, double step) {
    const size_t c = line.size() / 2;
    return (-line[c + 2] + 8.0 * line[c + 1] - 8.0 * line[c - 1] + line[c - 2]) / (12.0 * step);
}

double restricted_d2(const std::vector<double>& line, double step) {
    const size_t c = line.size() / 2;
    return (-line[c + 2] + 16.0 * line[c + 1] - 30.0 * line[c] + 16.0 * line[c - 1] -
            line[c - 2]) /
           (12.0 * step * step);
}

// ---------------------------------------------------------------------------
// Interval
// ---------------------------------------------------------------------------

ProbeResult grad_quotient(const Fn1& h, const Interval& dom) {
    ProbeResult out;
    out.points = dom.resolution;
    out.directions = 1;
    const double hstep = dom.fd_step;
    for (int i = 0; i < dom.resolution; ++i) {
        const double x = dom.lo + (dom.hi - dom.lo) * i / (dom.resolution - 1);
        const double v = h(x);
        require_positive(v, "grad_quotient", x);
        out.inf_h = std::min(out.inf_h, v);
        const double d1 = (-h(x + 2 * hstep) + 8 * h(x + hstep) - 8 * h(x - hstep) +
                           h(x - 2 * hstep)) /
                          (12 * hstep);
        const double q = d1 * d1 / v;
        if (q > out.k_required) {
            out.k_required = q;
            out.attained_at = {x, 0, 0};
        }
    }
    return out;
}

ProbeResult c21_defect(const Fn1& h, double alpha, const Interval& dom) {
    ProbeResult out;
    out.points = dom.resolution;
    out.directions = 1;
    const double hstep = dom.fd_step;
    for (int i = 0; i < dom.resolution; ++i) {
        const double x = dom.lo + (dom.hi - dom.lo) * i / (dom.resolution - 1);
        const double v = h(x);
        require_positive(v, "c21_defect", x);
        out.inf_h = std::min(out.inf_h, v);
        const double hp2 = h(x + 2 * hstep), hp1 = h(x + hstep);
        const double hm1 = h(x - hstep), hm2 = h(x - 2 * hstep);
        const double d1 = (-hp2 + 8 * hp1 - 8 * hm1 + hm2) / (12 * hstep);
        const double d2 = (-hp2 + 16 * hp1 - 30 * v + 16 * hm1 - hm2) / (12 * hstep * hstep);
        const double q = std::max(0.0, alpha * d1 * d1 / v - d2) / std::cbrt(v);
        if (q > out.k_required) {
            out.k_required = q;
            out.attained_at = {x, 0, 0};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Torus grid fields
// ---------------------------------------------------------------------------

ProbeResult grad_quotient(const torus::Grid& g, const ArrayXd& h) {
    if (!(h.minCoeff() > 0)) throw InadmissibleError("grad_quotient: h must be positive");
    ProbeResult out;
    out.points = g.size();
    out.directions = 1;
    out.inf_h = h.minCoeff();
    const torus::Grid::Jet jet = g.jet(h, true, false);
    ArrayXd grad2 = ArrayXd::Zero(g.size());
    for (int a = 0; a < g.dim(); ++a) grad2 += jet.first[a].square();
    const ArrayXd q = grad2 / h;
    long arg = 0;
    out.k_required = q.maxCoeff(&arg);
    double c[6];
    g.coords(arg, c);
    out.attained_at = {c[0], c[1], g.dim() > 2 ? c[2] : 0.0};
    return out;
}

ProbeResult c21_defect(const torus::Grid& g, const ArrayXd& h, double alpha) {
    if (!(h.minCoeff() > 0)) throw InadmissibleError("c21_defect: h must be positive");
    const int d = g.dim();
    ProbeResult out;
    out.points = g.size();
    out.directions = -1;  // exact over directions (top eigenvalue of the form)
    out.inf_h = h.minCoeff();
    const torus::Grid::Jet jet = g.jet(h, true, true);
    Eigen::MatrixXd m(d, d);
    Eigen::VectorXd grad(d);
    for (long i = 0; i < g.size(); ++i) {
        for (int a = 0; a < d; ++a) grad(a) = jet.first[a](i);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) {
                m(a, b) = jet.second[torus::Grid::pair_index(a, b, d)](i);
                m(b, a) = m(a, b);
            }
        // defect form: alpha (e.grad)^2/h - e^T Hess e; its sup over |e|=1
        const Eigen::MatrixXd form = (alpha / h(i)) * grad * grad.transpose() - m;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form, Eigen::ComputeEigenvectors);
        const double lam = es.eigenvalues().maxCoeff();
        const double q = std::max(0.0, lam) / std::cbrt(h(i));
        if (q > out.k_required) {
            out.k_required = q;
            double c[6];
            g.coords(i, c);
            out.attained_at = {c[0], c[1], d > 2 ? c[2] : 0.0};
            const auto ev = es.eigenvectors().col(d - 1);
            out.attained_dir = {ev(0), d > 1 ? ev(1) : 0.0, d > 2 ? ev(2) : 0.0};
        }
    }
    return out;
}

ProbeResult complex_direction_defect(const torus::Grid& g, const ArrayXd& h, double alpha) {
    if (!(h.minCoeff() > 0))
        throw InadmissibleError("complex_direction_defect: h must be positive");
    const int nc = g.n_complex();
    ProbeResult out;
    out.points = g.size();
    out.directions = -1;
    out.inf_h = h.minCoeff();

    const torus::Grid::Jet jet = g.jet(h, true, true);
    auto d2 = [&](int a, int b) -> const ArrayXd& {
        return jet.second[torus::Grid::pair_index(a, b, g.dim())];
    };

    // identity check: quarter-sum assembly vs direct spectral d_z d_zbar
    double iddef = 0.0;
    for (int p = 0; p < nc; ++p) {
        const ArrayXd quarter = 0.25 * (d2(2 * p, 2 * p) + d2(2 * p + 1, 2 * p + 1));
        const ArrayXd direct = g.dz_dzbar_direct(h, p);
        const double scale = std::max(1.0, direct.abs().maxCoeff());
        iddef = std::max(iddef, (quarter - direct).abs().maxCoeff() / scale);
    }
    out.identity_defect = iddef;

    std::vector<ArrayXd> fre(nc), fim(nc);
    for (int p = 0; p < nc; ++p) {
        fre[p] = 0.5 * jet.first[2 * p];
        fim[p] = -0.5 * jet.first[2 * p + 1];
    }

    Eigen::MatrixXcd m(nc, nc);
    for (long i = 0; i < g.size(); ++i) {
        for (int p = 0; p < nc; ++p) {
            for (int q = 0; q < nc; ++q) {
                std::complex<double> hpq;
                if (p == q) {
                    hpq = 0.25 * (d2(2 * p, 2 * p)(i) + d2(2 * p + 1, 2 * p + 1)(i));
                } else {
                    const int a = std::min(p, q), b = std::max(p, q);
                    const double re = 0.25 * (d2(2 * a, 2 * b)(i) + d2(2 * a + 1, 2 * b + 1)(i));
                    const double im = 0.25 * (d2(2 * a, 2 * b + 1)(i) - d2(2 * a + 1, 2 * b)(i));
                    hpq = {re, p < q ? im : -im};
                }
                const std::complex<double> gp(fre[p](i), fim[p](i));
                const std::complex<double> gq(fre[q](i), fim[q](i));
                m(p, q) = -(hpq - (alpha / h(i)) * gp * std::conj(gq));
            }
        }
        double lam;
        if (nc == 1) {
            lam = m(0, 0).real();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
            lam = es.eigenvalues().maxCoeff();
        }
        const double q = std::max(0.0, lam) / std::cbrt(h(i));
        if (q > out.k_required) {
            out.k_required = q;
            double c[6];
            g.coords(i, c);
            out.attained_at = {c[0], c[1], g.dim() > 2 ? c[2] : 0.0};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geodesic restriction
// ---------------------------------------------------------------------------

std::vector<double> geodesic_restrict_sphere(const FnSphere& f, const Vector3d& x,
                                             const Vector3d& e, double halfwidth, int samples) {
    if (halfwidth >= M_PI / 2)
        throw ConfigError("geodesic_restrict_sphere: halfwidth exceeds the pi/2 chart cap");
    std::vector<double> out(2 * samples + 1);
    for (int s = -samples; s <= samples; ++s) {
        const double t = halfwidth * s / samples;
        const Vector3d p = std::cos(t) * x + std::sin(t) * e;
        out[s + samples] = f(p);
    }
    return out;
}

std::vector<double> geodesic_restrict_torus(const std::function<double(double, double)>& f,
                                            const Eigen::Vector2d& x, const Eigen::Vector2d& e,
                                            double halfwidth, int samples) {
    std::vector<double> out(2 * samples + 1);
    for (int s = -samples; s <= samples; ++s) {
        const double t = halfwidth * s / samples;
        out[s + samples] = f(x(0) + t * e(0), x(1) + t * e(1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sphere probes via geodesic stencils
// ---------------------------------------------------------------------------

namespace {

void tangent_basis(const Vector3d& x, Vector3d& t1, Vector3d& t2) {
    const Vector3d up = std::abs(x(2)) < 0.9 ? Vector3d(0, 0, 1) : Vector3d(1, 0, 0);
    t1 = up.cross(x).normalized();
    t2 = x.cross(t1);
}

}  // namespace

ProbeResult grad_quotient(const FnSphere& h, const SphereProbe& dom) {
    ProbeResult out;
    out.points = static_cast<long>(dom.n_theta) * dom.n_phi;
    out.directions = 2;
    const double step = dom.step;
    for (int i = 0; i < dom.n_theta; ++i) {
        const double th = M_PI * (i + 0.5) / dom.n_theta;
        for (int j = 0; j < dom.n_phi; ++j) {
            const double ph = 2.0 * M_PI * j / dom.n_phi;
            const Vector3d x(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                             std::cos(th));
            const double v = h(x);
            require_positive(v, "grad_quotient(sphere)", th);
            out.inf_h = std::min(out.inf_h, v);
            Vector3d t1, t2;
            tangent_basis(x, t1, t2);
            const auto l1 = geodesic_restrict_sphere(h, x, t1, 2 * step, 2);
            const auto l2 = geodesic_restrict_sphere(h, x, t2, 2 * step, 2);
            const double g1 = restricted_d1(l1, step), g2 = restricted_d1(l2, step);
            const double q = (g1 * g1 + g2 * g2) / v;
            if (q > out.k_required) {
                out.k_required = q;
                out.attained_at = x;
            }
        }
    }
    return out;
}

ProbeResult c21_defect(const FnSphere& h, double alpha, const SphereProbe& dom) {
    ProbeResult out;
    out.points = static_cast<long>(dom.n_theta) * dom.n_phi;
    out.directions = dom.directions;
    const double step = dom.step;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < dom.n_theta; ++i) {
        const double th = M_PI * (i + 0.5) / dom.n_theta;
        for (int j = 0; j < dom.n_phi; ++j) {
            const double ph = 2.0 * M_PI * j / dom.n_phi;
            const Vector3d x(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                             std::cos(th));
            const double v = h(x);
            require_positive(v, "c21_defect(sphere)", th);
            out.inf_h = std::min(out.inf_h, v);
            Vector3d t1, t2;
            tangent_basis(x, t1, t2);
            for (int d = 0; d < dom.directions; ++d) {
                const double a = golden * d;
                const Vector3d e = std::cos(a) * t1 + std::sin(a) * t2;
                const auto line = geodesic_restrict_sphere(h, x, e, 2 * step, 2);
                const double d1 = restricted_d1(line, step);
                const double d2 = restricted_d2(line, step);
                const double q = std::max(0.0, alpha * d1 * d1 / v - d2) / std::cbrt(v);
                if (q > out.k_required) {
                    out.k_required = q;
                    out.attained_at = x;
                    out.attained_dir = e;
                }
            }
        }
    }
    return out;
}

}  // namespace sklab::degprobe
