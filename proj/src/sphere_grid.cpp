#include "sklab/sphere_grid.hpp"

#include <fftw3.h>

#include <cmath>

namespace sklab::sphere {

using Eigen::VectorXd;
using cplx = std::complex<double>;

int Coeffs::index(int l, int m) const {
    // chunks of constant m: offset(m) = sum_{m'<m} (L+1-m') = m(L+1) - m(m-1)/2
    return m * (L + 1) - m * (m - 1) / 2 + (l - m);
}

namespace {

// Gauss-Legendre nodes (ascending) and weights on [-1, 1], Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[n - 1 - i] = t;
        x[i] = -t;
        const double wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
}

}  // namespace

struct Grid2::Impl {
    // Normalized associated Legendre tables: P[m] is (L+1-m) x n_theta,
    // row l-m; dP[m] holds d/dtheta. Normalization: Y_lm = P e^{i m phi}
    // orthonormal on the sphere.
    std::vector<Eigen::MatrixXd> P, dP;
    std::vector<double> xgl, wgl, sin_theta, cot_theta;
    fftw_plan fwd = nullptr, bwd = nullptr;
    fftw_complex* proto_a = nullptr;
    fftw_complex* proto_b = nullptr;
    int nphi = 0;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (proto_a) fftw_free(proto_a);
        if (proto_b) fftw_free(proto_b);
    }
};

Grid2::Grid2(int n_theta) : ntheta_(n_theta), nphi_(2 * n_theta), L_(n_theta - 1) {
    if (n_theta < 4) throw ConfigError("sphere::Grid2: n_theta >= 4 required");
    impl_ = new Impl;
    impl_->nphi = nphi_;
    gauss_legendre(ntheta_, impl_->xgl, impl_->wgl);
    // x ascending corresponds to theta descending; store theta ascending (north first)
    std::reverse(impl_->xgl.begin(), impl_->xgl.end());
    std::reverse(impl_->wgl.begin(), impl_->wgl.end());
    theta_.resize(ntheta_);
    impl_->sin_theta.resize(ntheta_);
    impl_->cot_theta.resize(ntheta_);
    for (int i = 0; i < ntheta_; ++i) {
        theta_[i] = std::acos(impl_->xgl[i]);
        impl_->sin_theta[i] = std::sin(theta_[i]);
        impl_->cot_theta[i] = impl_->xgl[i] / impl_->sin_theta[i];
    }
    w_node_.resize(size());
    for (int i = 0; i < ntheta_; ++i)
        for (int j = 0; j < nphi_; ++j)
            w_node_(node(i, j)) = impl_->wgl[i] * (2.0 * M_PI / nphi_);

    // Legendre tables by the standard stable recurrences.
    impl_->P.resize(L_ + 1);
    impl_->dP.resize(L_ + 1);
    Eigen::VectorXd pmm = Eigen::VectorXd::Constant(ntheta_, std::sqrt(1.0 / (4.0 * M_PI)));
    for (int m = 0; m <= L_; ++m) {
        if (m > 0) {
            const double c = -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
            for (int i = 0; i < ntheta_; ++i) pmm(i) *= c * impl_->sin_theta[i];
        }
        const int rows = L_ - m + 1;
        Eigen::MatrixXd& tp = impl_->P[m];
        tp.resize(rows, ntheta_);
        tp.row(0) = pmm.transpose();
        if (rows > 1) {
            const double c1 = std::sqrt(2.0 * m + 3.0);
            for (int i = 0; i < ntheta_; ++i) tp(1, i) = c1 * impl_->xgl[i] * pmm(i);
        }
        for (int l = m + 2; l <= L_; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) /
                                       (static_cast<double>(l) * l - static_cast<double>(m) * m));
            const double b = std::sqrt(((2.0 * l + 1.0) / (2.0 * l - 3.0)) *
                                       ((static_cast<double>(l - 1) * (l - 1) -
                                         static_cast<double>(m) * m) /
                                        (static_cast<double>(l) * l - static_cast<double>(m) * m)));
            for (int i = 0; i < ntheta_; ++i)
                tp(l - m, i) = a * impl_->xgl[i] * tp(l - 1 - m, i) - b * tp(l - 2 - m, i);
        }
        // dP/dtheta = [ l x P_l^m - c_lm P_{l-1}^m ] / sin theta
        Eigen::MatrixXd& td = impl_->dP[m];
        td.resize(rows, ntheta_);
        for (int l = m; l <= L_; ++l) {
            const double c = (l > m) ? std::sqrt((static_cast<double>(l) * l -
                                                  static_cast<double>(m) * m) *
                                                 (2.0 * l + 1.0) / (2.0 * l - 1.0))
                                     : 0.0;
            for (int i = 0; i < ntheta_; ++i) {
                double v = l * impl_->xgl[i] * tp(l - m, i);
                if (l > m) v -= c * tp(l - 1 - m, i);
                td(l - m, i) = v / impl_->sin_theta[i];
            }
        }
    }

    impl_->proto_a = fftw_alloc_complex(nphi_);
    impl_->proto_b = fftw_alloc_complex(nphi_);
    impl_->fwd = fftw_plan_dft_1d(nphi_, impl_->proto_a, impl_->proto_b, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_1d(nphi_, impl_->proto_a, impl_->proto_b, FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
}

Grid2::~Grid2() { delete impl_; }

Eigen::Vector3d Grid2::point(int i, int j) const {
    const double st = impl_->sin_theta[i], ct = impl_->xgl[i];
    const double p = phi(j);
    return {st * std::cos(p), st * std::sin(p), ct};
}

VectorXd Grid2::sample(const std::function<double(const Eigen::Vector3d&)>& f) const {
    VectorXd out(size());
    for (int i = 0; i < ntheta_; ++i)
        for (int j = 0; j < nphi_; ++j) out(node(i, j)) = f(point(i, j));
    return out;
}

VectorXd Grid2::coordinate(int axis) const {
    return sample([axis](const Eigen::Vector3d& p) { return p(axis); });
}

Coeffs Grid2::analyze(const VectorXd& f) const {
    Coeffs c;
    c.L = L_;
    c.a.assign((L_ + 1) * (L_ + 2) / 2, cplx(0.0, 0.0));

    fftw_complex* in = fftw_alloc_complex(nphi_);
    fftw_complex* out = fftw_alloc_complex(nphi_);
    Eigen::MatrixXcd fm(ntheta_, L_ + 1);  // phi spectrum rows, m in [0..L]
    for (int i = 0; i < ntheta_; ++i) {
        for (int j = 0; j < nphi_; ++j) {
            in[j][0] = f(node(i, j));
            in[j][1] = 0.0;
        }
        fftw_execute_dft(impl_->fwd, in, out);
        for (int m = 0; m <= L_; ++m) fm(i, m) = cplx(out[m][0], out[m][1]);
    }
    fftw_free(in);
    fftw_free(out);

    const double phi_w = 2.0 * M_PI / nphi_;
    for (int m = 0; m <= L_; ++m) {
        const Eigen::MatrixXd& tp = impl_->P[m];
        for (int l = m; l <= L_; ++l) {
            cplx acc(0.0, 0.0);
            for (int i = 0; i < ntheta_; ++i) acc += impl_->wgl[i] * tp(l - m, i) * fm(i, m);
            c.at(l, m) = phi_w * acc;
        }
    }
    return c;
}

namespace {

// multiplier and table choice per synthesis mode
struct ModeSpec {
    bool use_dtheta_table;
    std::function<cplx(int l, int m)> factor;
};

}  // namespace

VectorXd Grid2::synth(const Coeffs& c, Mode mode) const {
    ModeSpec spec;
    switch (mode) {
        case Mode::Value:
            spec = {false, [](int, int) { return cplx(1.0, 0.0); }};
            break;
        case Mode::DTheta:
            spec = {true, [](int, int) { return cplx(1.0, 0.0); }};
            break;
        case Mode::DPhi:
            spec = {false, [](int, int m) { return cplx(0.0, m); }};
            break;
        case Mode::Laplacian:
            spec = {false, [](int l, int) { return cplx(-static_cast<double>(l) * (l + 1), 0.0); }};
            break;
        case Mode::DThetaDPhi:
            spec = {true, [](int, int m) { return cplx(0.0, m); }};
            break;
        case Mode::DPhi2:
            spec = {false, [](int, int m) { return cplx(-static_cast<double>(m) * m, 0.0); }};
            break;
    }

    VectorXd outfield(size());
    fftw_complex* row = fftw_alloc_complex(nphi_);
    fftw_complex* vals = fftw_alloc_complex(nphi_);
    for (int i = 0; i < ntheta_; ++i) {
        for (int j = 0; j < nphi_; ++j) row[j][0] = row[j][1] = 0.0;
        for (int m = 0; m <= L_; ++m) {
            const Eigen::MatrixXd& tab = spec.use_dtheta_table ? impl_->dP[m] : impl_->P[m];
            cplx g(0.0, 0.0);
            for (int l = m; l <= L_; ++l) g += spec.factor(l, m) * c.at(l, m) * tab(l - m, i);
            if (m == 0) {
                row[0][0] = g.real();
                row[0][1] = g.imag();
            } else {
                row[m][0] = g.real();
                row[m][1] = g.imag();
                row[nphi_ - m][0] = g.real();   // conjugate (real output)
                row[nphi_ - m][1] = -g.imag();
            }
        }
        fftw_execute_dft(impl_->bwd, row, vals);
        for (int j = 0; j < nphi_; ++j) outfield(node(i, j)) = vals[j][0];
    }
    fftw_free(row);
    fftw_free(vals);
    return outfield;
}

VectorXd Grid2::synth_multiplier(const Coeffs& c, const std::function<double(int)>& q) const {
    Coeffs scaled = c;
    for (int m = 0; m <= L_; ++m)
        for (int l = m; l <= L_; ++l) scaled.at(l, m) *= q(l);
    return synth(scaled, Mode::Value);
}

VectorXd Grid2::apply_laplacian(const VectorXd& f) const {
    return synth(analyze(f), Mode::Laplacian);
}

Grid2::Hessian Grid2::covariant_hessian(const VectorXd& u) const {
    const Coeffs c = analyze(u);
    const VectorXd ut = synth(c, Mode::DTheta);
    const VectorXd up = synth(c, Mode::DPhi);
    const VectorXd utp = synth(c, Mode::DThetaDPhi);
    const VectorXd upp = synth(c, Mode::DPhi2);
    const VectorXd lap = synth(c, Mode::Laplacian);

    Hessian h;
    h.h11.resize(size());
    h.h12.resize(size());
    h.h22.resize(size());
    for (int i = 0; i < ntheta_; ++i) {
        const double st = impl_->sin_theta[i];
        const double ct = impl_->cot_theta[i];
        for (int j = 0; j < nphi_; ++j) {
            const long idx = node(i, j);
            const double h22 = upp(idx) / (st * st) + ct * ut(idx);
            h.h22(idx) = h22;
            h.h11(idx) = lap(idx) - h22;  // = u_theta_theta, trace-exact
            h.h12(idx) = (utp(idx) - ct * up(idx)) / st;
        }
    }
    return h;
}

VectorXd Grid2::grad_norm2(const VectorXd& u) const {
    const Coeffs c = analyze(u);
    const VectorXd ut = synth(c, Mode::DTheta);
    const VectorXd up = synth(c, Mode::DPhi);
    VectorXd g(size());
    for (int i = 0; i < ntheta_; ++i) {
        const double st = impl_->sin_theta[i];
        for (int j = 0; j < nphi_; ++j) {
            const long idx = node(i, j);
            const double gphi = up(idx) / st;
            g(idx) = ut(idx) * ut(idx) + gphi * gphi;
        }
    }
    return g;
}

VectorXd Grid2::project_linear_out(const VectorXd& u) const {
    VectorXd out = u;
    for (int axis = 0; axis < 3; ++axis) {
        const VectorXd xi = coordinate(axis);
        out -= (inner(out, xi) / inner(xi, xi)) * xi;
    }
    return out;
}

Eigen::Vector3d Grid2::moments(const VectorXd& f) const {
    Eigen::Vector3d m;
    for (int axis = 0; axis < 3; ++axis) m(axis) = inner(f, coordinate(axis));
    return m;
}

}  // namespace sklab::sphere
