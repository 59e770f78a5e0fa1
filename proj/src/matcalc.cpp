#include "sklab/matcalc.hpp"

#include <cmath>

namespace sklab::matcalc {

using Eigen::VectorXd;
using symfun::sigma_all;
using symfun::sigma_excluding;
using symfun::sigma_excluding_each;
using symfun::in_gamma_k;

namespace {

template <typename Mat>
void require_selfadjoint(const Mat& a) {
    const double scale = std::max(1.0, a.norm());
    if ((a - a.adjoint()).norm() > 1e-12 * scale)
        throw InadmissibleError("matcalc: input is not symmetric/Hermitian");
}

template <typename Mat>
VectorXd eig_desc_impl(const Mat& a) {
    require_selfadjoint(a);
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().reverse();
}

template <typename Mat>
double f_value_impl(const Mat& a, int k) {
    const VectorXd lam = eig_desc_impl(a);
    if (!in_gamma_k(lam, k)) throw InadmissibleError("F_value: eigenvalues not in Gamma_k");
    return std::pow(symfun::sigma(lam, k), 1.0 / k);
}

template <typename Mat>
Mat f_grad_impl(const Mat& a, int k) {
    using Scalar = typename Mat::Scalar;
    require_selfadjoint(a);
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    const VectorXd lam = es.eigenvalues();
    if (!in_gamma_k(lam, k)) throw InadmissibleError("F_grad: eigenvalues not in Gamma_k");
    const double sk = symfun::sigma(lam, k);
    const VectorXd g =
        (1.0 / k) * std::pow(sk, 1.0 / k - 1.0) * sigma_excluding_each(lam, k - 1);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gs = g.template cast<Scalar>();
    return es.eigenvectors() * gs.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

VectorXd eigenvalues_desc(const Matrix& a) { return eig_desc_impl(a); }
VectorXd eigenvalues_desc(const CMatrix& a) { return eig_desc_impl(a); }
double F_value(const Matrix& a, int k) { return f_value_impl(a, k); }
double F_value(const CMatrix& a, int k) { return f_value_impl(a, k); }
Matrix F_grad(const Matrix& a, int k) { return f_grad_impl(a, k); }
CMatrix F_grad(const CMatrix& a, int k) { return f_grad_impl(a, k); }

SecondDerivTensor::SecondDerivTensor(const VectorXd& lambda, int k)
    : n_(static_cast<int>(lambda.size())), k_(k) {
    if (!in_gamma_k(lambda, k)) throw InadmissibleError("SecondDerivTensor: not in Gamma_k");
    const double sk = symfun::sigma(lambda, k);
    const double c1 = std::pow(sk, 1.0 / k - 1.0) / k;                    // sigma^{1/k-1}/k
    const double c2 = (1.0 / k) * (1.0 / k - 1.0) * std::pow(sk, 1.0 / k - 2.0);
    const VectorXd grad = sigma_excluding_each(lambda, k - 1);            // sigma_{k-1;i}

    diag_.setZero(n_, n_);
    off_.setZero(n_, n_);
    for (int i = 0; i < n_; ++i) {
        for (int s = 0; s < n_; ++s) {
            double hess_sigma = 0.0;  // d^2 sigma_k / d lambda_i d lambda_s
            if (i != s) {
                const int idx[2] = {i, s};
                hess_sigma = sigma_excluding(lambda, k - 2, std::span<const int>(idx, 2));
                off_(i, s) = -c1 * hess_sigma;
            }
            diag_(i, s) = c2 * grad(i) * grad(s) + c1 * hess_sigma;
        }
    }
}

double SecondDerivTensor::entry(int i, int j, int s, int t) const {
    if (i == j && s == t) return diag_(i, s);
    if (i != j && s == j && t == i) return off_(i, j);
    return 0.0;
}

double SecondDerivTensor::quadform(const Matrix& b) const {
    double acc = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int s = 0; s < n_; ++s) acc += diag_(i, s) * b(i, i) * b(s, s);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (i != j) acc += off_(i, j) * b(i, j) * b(j, i);
    return acc;
}

SecondDerivTensor F_hess_at_diagonal(const VectorXd& lambda, int k) {
    return SecondDerivTensor(lambda, k);
}

double sigma_hess_quadform(const Matrix& w, const Matrix& a, int k) {
    require_selfadjoint(w);
    Eigen::SelfAdjointEigenSolver<Matrix> es(w);
    const VectorXd lam = es.eigenvalues();
    const Matrix b = es.eigenvectors().transpose() * a * es.eigenvectors();
    const int n = static_cast<int>(lam.size());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int s = i + 1; s < n; ++s) {
            const int idx[2] = {i, s};
            const double sig = sigma_excluding(lam, k - 2, std::span<const int>(idx, 2));
            acc += 2.0 * sig * (b(i, i) * b(s, s) - b(i, s) * b(s, i));
        }
    }
    return acc;
}

double sigma_grad_pairing(const Matrix& w, const Matrix& a, int k) {
    require_selfadjoint(w);
    Eigen::SelfAdjointEigenSolver<Matrix> es(w);
    const VectorXd lam = es.eigenvalues();
    const Matrix b = es.eigenvectors().transpose() * a * es.eigenvectors();
    const VectorXd g = sigma_excluding_each(lam, k - 1);
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(lam.size()); ++i) acc += g(i) * b(i, i);
    return acc;
}

namespace {

struct GapParts {
    double lhs, rhs, p, q;
};

GapParts gap_parts(const Matrix& w, const Matrix& a, int k) {
    const VectorXd lam = eigenvalues_desc(w);
    if (!in_gamma_k(lam, k)) throw InadmissibleError("concavity_gap: W not in Gamma_k");
    const double sk = symfun::sigma(lam, k);
    const double s1 = lam.sum();
    GapParts parts;
    parts.lhs = sigma_hess_quadform(w, a, k) / sk;
    parts.p = sigma_grad_pairing(w, a, k) / sk;
    parts.q = a.trace() / s1;
    parts.rhs = (k - 2.0) / (k - 1.0) * parts.p * parts.p +
                2.0 / (k - 1.0) * parts.p * parts.q - k / (k - 1.0) * parts.q * parts.q;
    return parts;
}

}  // namespace

double concavity_gap(const Matrix& w, const Matrix& a, int k) {
    const GapParts parts = gap_parts(w, a, k);
    return parts.rhs - parts.lhs;
}

double concavity_gap_scale(const Matrix& w, const Matrix& a, int k) {
    const GapParts parts = gap_parts(w, a, k);
    return 1.0 + std::abs(parts.lhs) + parts.p * parts.p + parts.q * parts.q;
}

SegmentCheck segment_concavity_check(const Matrix& w1, const Matrix& w2, int k, int m) {
    SegmentCheck out;
    if (m < 3) m = 3;
    std::vector<double> fvals(m), lvals(m);
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / (m - 1);
        const Matrix w = (1.0 - t) * w1 + t * w2;
        const VectorXd lam = eigenvalues_desc(w);
        if (!in_gamma_k(lam, k)) {
            out.stayed_admissible = false;
            out.exit_t = t;
            return out;
        }
        const double sk = symfun::sigma(lam, k);
        fvals[i] = std::pow(sk, 1.0 / k);
        lvals[i] = std::log(sk);
    }
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / (m - 1);
        out.min_gap_F =
            std::min(out.min_gap_F, fvals[i] - ((1.0 - t) * fvals[0] + t * fvals[m - 1]));
        out.min_gap_logsigma =
            std::min(out.min_gap_logsigma, lvals[i] - ((1.0 - t) * lvals[0] + t * lvals[m - 1]));
    }
    return out;
}

}  // namespace sklab::matcalc
