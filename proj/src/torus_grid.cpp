#include "sklab/torus_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>

namespace sklab::torus {

using Eigen::ArrayXd;
using cplx = std::complex<double>;

struct Grid::Impl {
    fftw_plan fwd = nullptr, bwd = nullptr;
    fftw_complex* proto_in = nullptr;
    fftw_complex* proto_out = nullptr;
    std::vector<int> shape;
    std::vector<long> stride;
    std::vector<std::vector<double>> freq;  // per axis: FFT-ordered wavenumbers
    long n = 0;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (proto_in) fftw_free(proto_in);
        if (proto_out) fftw_free(proto_out);
    }
};

Grid::Grid(int n_complex, int res) : nc_(n_complex), dim_(2 * n_complex), res_(res) {
    if (n_complex < 1 || n_complex > 3) throw ConfigError("torus::Grid: n_complex in {1,2,3}");
    if (res < 4 || res % 2 != 0) throw ConfigError("torus::Grid: resolution must be even, >= 4");
    n_ = 1;
    for (int a = 0; a < dim_; ++a) n_ *= res_;

    impl_ = new Impl;
    impl_->n = n_;
    impl_->shape.assign(dim_, res_);
    impl_->stride.assign(dim_, 1);
    for (int a = dim_ - 2; a >= 0; --a) impl_->stride[a] = impl_->stride[a + 1] * res_;
    impl_->freq.resize(dim_);
    for (int a = 0; a < dim_; ++a) {
        impl_->freq[a].resize(res_);
        for (int i = 0; i < res_; ++i)
            impl_->freq[a][i] = (i <= res_ / 2) ? i : i - res_;
    }
    impl_->proto_in = fftw_alloc_complex(n_);
    impl_->proto_out = fftw_alloc_complex(n_);
    impl_->fwd = fftw_plan_dft(dim_, impl_->shape.data(), impl_->proto_in, impl_->proto_out,
                               FFTW_FORWARD, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft(dim_, impl_->shape.data(), impl_->proto_in, impl_->proto_out,
                               FFTW_BACKWARD, FFTW_ESTIMATE);
}

Grid::~Grid() { delete impl_; }

double Grid::coord(long node, int axis) const {
    const long idx = (node / impl_->stride[axis]) % res_;
    return 2.0 * M_PI * static_cast<double>(idx) / res_;
}

void Grid::coords(long node, double* out) const {
    for (int a = 0; a < dim_; ++a) out[a] = coord(node, a);
}

ArrayXd Grid::sample(const std::function<double(const double*)>& f) const {
    ArrayXd out(n_);
    double c[6];
    for (long i = 0; i < n_; ++i) {
        coords(i, c);
        out(i) = f(c);
    }
    return out;
}

ArrayXd Grid::coordinate_field(int axis) const {
    ArrayXd out(n_);
    for (long i = 0; i < n_; ++i) out(i) = coord(i, axis);
    return out;
}

int Grid::pair_index(int a, int b, int dim) {
    if (a > b) std::swap(a, b);
    // row-major upper triangle
    return a * dim - a * (a - 1) / 2 + (b - a);
}

namespace {

struct FftScratch {
    fftw_complex* buf_a;
    fftw_complex* buf_b;
    explicit FftScratch(long n) : buf_a(fftw_alloc_complex(n)), buf_b(fftw_alloc_complex(n)) {}
    ~FftScratch() {
        fftw_free(buf_a);
        fftw_free(buf_b);
    }
};

}  // namespace

Grid::Jet Grid::jet(const ArrayXd& u, bool want_first, bool want_second) const {
    Jet out;
    FftScratch s(n_);
    for (long i = 0; i < n_; ++i) {
        s.buf_a[i][0] = u(i);
        s.buf_a[i][1] = 0.0;
    }
    fftw_execute_dft(impl_->fwd, s.buf_a, s.buf_b);  // spectrum in buf_b

    const double inv_n = 1.0 / static_cast<double>(n_);
    auto axis_digit = [&](long node, int a) { return (node / impl_->stride[a]) % res_; };

    auto transform_with = [&](const std::function<cplx(long)>& factor) {
        for (long i = 0; i < n_; ++i) {
            const cplx f = factor(i);
            const cplx v(s.buf_b[i][0], s.buf_b[i][1]);
            const cplx w = f * v;
            s.buf_a[i][0] = w.real();
            s.buf_a[i][1] = w.imag();
        }
        fftw_complex* res_buf = fftw_alloc_complex(n_);
        fftw_execute_dft(impl_->bwd, s.buf_a, res_buf);
        ArrayXd field(n_);
        for (long i = 0; i < n_; ++i) field(i) = res_buf[i][0] * inv_n;
        fftw_free(res_buf);
        return field;
    };

    if (want_first) {
        out.first.resize(dim_);
        for (int a = 0; a < dim_; ++a) {
            out.first[a] = transform_with([&](long node) {
                const long d = axis_digit(node, a);
                double ka = impl_->freq[a][d];
                if (d == res_ / 2) ka = 0.0;  // Nyquist: odd derivative has no consistent sign
                return cplx(0.0, ka);
            });
        }
    }
    if (want_second) {
        out.second.resize(static_cast<size_t>(dim_) * (dim_ + 1) / 2);
        for (int a = 0; a < dim_; ++a) {
            for (int b = a; b < dim_; ++b) {
                out.second[pair_index(a, b, dim_)] = transform_with([&](long node) {
                    const long da = axis_digit(node, a), db = axis_digit(node, b);
                    double ka = impl_->freq[a][da], kb = impl_->freq[b][db];
                    if (a != b) {  // mixed derivative: drop unsigned Nyquist modes
                        if (da == res_ / 2) ka = 0.0;
                        if (db == res_ / 2) kb = 0.0;
                    }
                    return cplx(-ka * kb, 0.0);
                });
            }
        }
    }
    return out;
}

ArrayXd Grid::laplacian(const ArrayXd& u) const {
    FftScratch s(n_);
    for (long i = 0; i < n_; ++i) {
        s.buf_a[i][0] = u(i);
        s.buf_a[i][1] = 0.0;
    }
    fftw_execute_dft(impl_->fwd, s.buf_a, s.buf_b);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (long i = 0; i < n_; ++i) {
        double k2 = 0.0;
        for (int a = 0; a < dim_; ++a) {
            const double ka = impl_->freq[a][(i / impl_->stride[a]) % res_];
            k2 += ka * ka;
        }
        s.buf_a[i][0] = -k2 * s.buf_b[i][0];
        s.buf_a[i][1] = -k2 * s.buf_b[i][1];
    }
    fftw_execute_dft(impl_->bwd, s.buf_a, s.buf_b);
    ArrayXd out(n_);
    for (long i = 0; i < n_; ++i) out(i) = s.buf_b[i][0] * inv_n;
    return out;
}

ArrayXd Grid::quarter_laplacian_inverse(const ArrayXd& rhs, double c) const {
    FftScratch s(n_);
    for (long i = 0; i < n_; ++i) {
        s.buf_a[i][0] = rhs(i);
        s.buf_a[i][1] = 0.0;
    }
    fftw_execute_dft(impl_->fwd, s.buf_a, s.buf_b);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (long i = 0; i < n_; ++i) {
        double k2 = 0.0;
        for (int a = 0; a < dim_; ++a) {
            const double ka = impl_->freq[a][(i / impl_->stride[a]) % res_];
            k2 += ka * ka;
        }
        const double mult = (k2 == 0.0) ? 0.0 : -4.0 / (c * k2);
        s.buf_a[i][0] = mult * s.buf_b[i][0];
        s.buf_a[i][1] = mult * s.buf_b[i][1];
    }
    fftw_execute_dft(impl_->bwd, s.buf_a, s.buf_b);
    ArrayXd out(n_);
    for (long i = 0; i < n_; ++i) out(i) = s.buf_b[i][0] * inv_n;
    return out;
}

void Grid::mixed_complex_derivative(const ArrayXd& u, int p, int q, ArrayXd& re,
                                    ArrayXd& im) const {
    const Jet j2 = jet(u, false, true);
    const int xp = 2 * p, yp = 2 * p + 1, xq = 2 * q, yq = 2 * q + 1;
    re = 0.25 * (j2.second[pair_index(xp, xq, dim_)] + j2.second[pair_index(yp, yq, dim_)]);
    im = 0.25 * (j2.second[pair_index(xp, yq, dim_)] - j2.second[pair_index(yp, xq, dim_)]);
}

ArrayXd Grid::dz_dzbar_direct(const ArrayXd& u, int p) const {
    FftScratch s(n_);
    for (long i = 0; i < n_; ++i) {
        s.buf_a[i][0] = u(i);
        s.buf_a[i][1] = 0.0;
    }
    fftw_execute_dft(impl_->fwd, s.buf_a, s.buf_b);
    const double inv_n = 1.0 / static_cast<double>(n_);
    const int ax = 2 * p, ay = 2 * p + 1;
    for (long i = 0; i < n_; ++i) {
        const double kx = impl_->freq[ax][(i / impl_->stride[ax]) % res_];
        const double ky = impl_->freq[ay][(i / impl_->stride[ay]) % res_];
        const double mult = -0.25 * (kx * kx + ky * ky);
        s.buf_a[i][0] = mult * s.buf_b[i][0];
        s.buf_a[i][1] = mult * s.buf_b[i][1];
    }
    fftw_execute_dft(impl_->bwd, s.buf_a, s.buf_b);
    ArrayXd out(n_);
    for (long i = 0; i < n_; ++i) out(i) = s.buf_b[i][0] * inv_n;
    return out;
}

// ---------------------------------------------------------------------------
// Hermitian field algebra
// ---------------------------------------------------------------------------

int HermitianField::off_index(int p, int q, int nc) {
    if (p > q) std::swap(p, q);
    return p * nc - p * (p + 1) / 2 + (q - p - 1);
}

Eigen::MatrixXcd HermitianField::node_matrix(long node) const {
    Eigen::MatrixXcd m(nc, nc);
    for (int p = 0; p < nc; ++p) m(p, p) = diag[p](node);
    for (int p = 0; p < nc; ++p)
        for (int q = p + 1; q < nc; ++q) {
            const int idx = off_index(p, q, nc);
            m(p, q) = cplx(off_re[idx](node), off_im[idx](node));
            m(q, p) = std::conj(m(p, q));
        }
    return m;
}

HermitianField mixed_hessian(const Grid& g, const ArrayXd& u) {
    const int nc = g.n_complex();
    const int dim = g.dim();
    const Grid::Jet j2 = g.jet(u, false, true);
    HermitianField w;
    w.nc = nc;
    w.n = g.size();
    w.diag.resize(nc);
    const int noff = nc * (nc - 1) / 2;
    w.off_re.resize(noff);
    w.off_im.resize(noff);
    auto d2 = [&](int a, int b) -> const ArrayXd& { return j2.second[Grid::pair_index(a, b, dim)]; };
    for (int p = 0; p < nc; ++p)
        w.diag[p] = 0.25 * (d2(2 * p, 2 * p) + d2(2 * p + 1, 2 * p + 1));
    for (int p = 0; p < nc; ++p)
        for (int q = p + 1; q < nc; ++q) {
            const int idx = HermitianField::off_index(p, q, nc);
            w.off_re[idx] = 0.25 * (d2(2 * p, 2 * q) + d2(2 * p + 1, 2 * q + 1));
            w.off_im[idx] = 0.25 * (d2(2 * p, 2 * q + 1) - d2(2 * p + 1, 2 * q));
        }
    return w;
}

HermitianField complex_hessian(const Grid& g, const ArrayXd& u) {
    HermitianField w = mixed_hessian(g, u);
    for (int p = 0; p < w.nc; ++p) w.diag[p] += 1.0;
    return w;
}

ArrayXd sigma_field(const HermitianField& w, int j) {
    const int nc = w.nc;
    if (j == 0) return ArrayXd::Ones(w.n);
    if (j < 0 || j > nc) return ArrayXd::Zero(w.n);
    ArrayXd out(w.n);
    if (nc == 1) {
        out = w.diag[0];
        return out;
    }
    if (nc == 2) {
        if (j == 1) out = w.diag[0] + w.diag[1];
        else out = w.diag[0] * w.diag[1] - w.off_re[0].square() - w.off_im[0].square();
        return out;
    }
    // nc == 3
    const ArrayXd& d0 = w.diag[0];
    const ArrayXd& d1 = w.diag[1];
    const ArrayXd& d2 = w.diag[2];
    const int i01 = HermitianField::off_index(0, 1, 3);
    const int i02 = HermitianField::off_index(0, 2, 3);
    const int i12 = HermitianField::off_index(1, 2, 3);
    const ArrayXd m01 = w.off_re[i01].square() + w.off_im[i01].square();
    const ArrayXd m02 = w.off_re[i02].square() + w.off_im[i02].square();
    const ArrayXd m12 = w.off_re[i12].square() + w.off_im[i12].square();
    if (j == 1) {
        out = d0 + d1 + d2;
    } else if (j == 2) {
        out = d0 * d1 + d0 * d2 + d1 * d2 - m01 - m02 - m12;
    } else {
        // det of a 3x3 Hermitian matrix: real by construction
        // 2 Re(W01 W12 conj(W02)) cross term
        const ArrayXd cross =
            2.0 * (w.off_re[i01] * (w.off_re[i12] * w.off_re[i02] + w.off_im[i12] * w.off_im[i02]) -
                   w.off_im[i01] * (w.off_im[i12] * w.off_re[i02] - w.off_re[i12] * w.off_im[i02]));
        out = d0 * d1 * d2 + cross - d0 * m12 - d1 * m02 - d2 * m01;
    }
    return out;
}

double cone_margin(const HermitianField& w, int k) {
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= k; ++j) {
        const ArrayXd sj = sigma_field(w, j);
        margin = std::min(margin, sj.minCoeff() / binom(w.nc, j));
    }
    return margin;
}

namespace {

// tr(A B) per node for Hermitian fields: real.
ArrayXd trace_pairing(const HermitianField& a, const HermitianField& b) {
    ArrayXd out = ArrayXd::Zero(a.n);
    for (int p = 0; p < a.nc; ++p) out += a.diag[p] * b.diag[p];
    for (int p = 0; p < a.nc; ++p)
        for (int q = p + 1; q < a.nc; ++q) {
            const int i = HermitianField::off_index(p, q, a.nc);
            out += 2.0 * (a.off_re[i] * b.off_re[i] + a.off_im[i] * b.off_im[i]);
        }
    return out;
}

// W^2 per node, nc == 3 (only consumer is the k=3 Newton tensor).
HermitianField squared(const HermitianField& w) {
    HermitianField s;
    s.nc = w.nc;
    s.n = w.n;
    s.diag.resize(w.nc);
    s.off_re.resize(w.off_re.size());
    s.off_im.resize(w.off_im.size());
    const int i01 = HermitianField::off_index(0, 1, 3);
    const int i02 = HermitianField::off_index(0, 2, 3);
    const int i12 = HermitianField::off_index(1, 2, 3);
    const ArrayXd m01 = w.off_re[i01].square() + w.off_im[i01].square();
    const ArrayXd m02 = w.off_re[i02].square() + w.off_im[i02].square();
    const ArrayXd m12 = w.off_re[i12].square() + w.off_im[i12].square();
    s.diag[0] = w.diag[0].square() + m01 + m02;
    s.diag[1] = w.diag[1].square() + m01 + m12;
    s.diag[2] = w.diag[2].square() + m02 + m12;
    // (W^2)_{pq} = (d_p + d_q) W_pq + W_pr W_rq with r the remaining index
    s.off_re[i01] = (w.diag[0] + w.diag[1]) * w.off_re[i01] +
                    (w.off_re[i02] * w.off_re[i12] + w.off_im[i02] * w.off_im[i12]);
    s.off_im[i01] = (w.diag[0] + w.diag[1]) * w.off_im[i01] +
                    (w.off_im[i02] * w.off_re[i12] - w.off_re[i02] * w.off_im[i12]);
    s.off_re[i02] = (w.diag[0] + w.diag[2]) * w.off_re[i02] +
                    (w.off_re[i01] * w.off_re[i12] - w.off_im[i01] * w.off_im[i12]);
    s.off_im[i02] = (w.diag[0] + w.diag[2]) * w.off_im[i02] +
                    (w.off_re[i01] * w.off_im[i12] + w.off_im[i01] * w.off_re[i12]);
    s.off_re[i12] = (w.diag[1] + w.diag[2]) * w.off_re[i12] +
                    (w.off_re[i01] * w.off_re[i02] + w.off_im[i01] * w.off_im[i02]);
    s.off_im[i12] = (w.diag[1] + w.diag[2]) * w.off_im[i12] +
                    (w.off_re[i01] * w.off_im[i02] - w.off_im[i01] * w.off_re[i02]);
    return s;
}

}  // namespace

ArrayXd linearized_apply(const HermitianField& w, const HermitianField& dv, int k) {
    const int nc = w.nc;
    ArrayXd trace_dv = ArrayXd::Zero(w.n);
    for (int p = 0; p < nc; ++p) trace_dv += dv.diag[p];
    if (k == 1) return trace_dv;
    const ArrayXd s1 = sigma_field(w, 1);
    if (k == 2) return s1 * trace_dv - trace_pairing(w, dv);
    if (k != 3 || nc != 3) throw ConfigError("linearized_apply: supported orders are k <= 3");
    const ArrayXd s2 = sigma_field(w, 2);
    return s2 * trace_dv - s1 * trace_pairing(w, dv) + trace_pairing(squared(w), dv);
}

}  // namespace sklab::torus
