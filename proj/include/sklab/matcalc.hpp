#pragma once

#include <Eigen/Dense>

#include "sklab/numerics.hpp"
#include "sklab/symfun.hpp"

namespace sklab::matcalc {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

/// Real eigenvalues in decreasing order. Throws InadmissibleError if the
/// input is not symmetric/Hermitian to 1e-12 (relative).
Eigen::VectorXd eigenvalues_desc(const Matrix& a);
Eigen::VectorXd eigenvalues_desc(const CMatrix& a);

/// F(A) = sigma_k(lambda(A))^{1/k}. Requires lambda(A) in Gamma_k.
double F_value(const Matrix& a, int k);
double F_value(const CMatrix& a, int k);

/// Derivative matrix of F: positive definite on admissible input; at a
/// diagonal argument its diagonal is (1/k) sigma_k^{1/k-1} sigma_{k-1;i}.
Matrix F_grad(const Matrix& a, int k);
CMatrix F_grad(const CMatrix& a, int k);

/// Second derivative of F = sigma_k^{1/k} at a diagonal base point.
/// The only nonzero entries are the diagonal-pair block (i,i,s,s), given by
/// the scalar Hessian of sigma_k^{1/k}, and the transpose pairs
/// (i,j,j,i), i != j, equal to -(1/k) sigma_k^{1/k-1} sigma_{k-2;ij}.
/// The latter is the eigenvalue divided difference in closed form, so no
/// eigenvalue-gap threshold is involved.
class SecondDerivTensor {
public:
    SecondDerivTensor(const Eigen::VectorXd& lambda, int k);

    int n() const { return n_; }
    double entry(int i, int j, int s, int t) const;
    const Matrix& diagonal_block() const { return diag_; }
    double transpose_pair(int i, int j) const { return off_(i, j); }

    /// Contraction sum F^{ij,st} B_ij B_st for a symmetric direction B.
    double quadform(const Matrix& b) const;

private:
    int n_, k_;
    Matrix diag_;  // d^2 sigma_k^{1/k} / d lambda_i d lambda_s
    Matrix off_;   // -(1/k) sigma^{1/k-1} sigma_{k-2;ij}, zero diagonal
};

SecondDerivTensor F_hess_at_diagonal(const Eigen::VectorXd& lambda, int k);

/// d^2/dt^2 sigma_k(lambda(W + tA)) at t=0: the sigma_k Hessian contracted
/// twice with A, evaluated in W's eigenbasis.
double sigma_hess_quadform(const Matrix& w, const Matrix& a, int k);

/// First-derivative pairing sum sigma_k^{ij}(W) A_ij.
double sigma_grad_pairing(const Matrix& w, const Matrix& a, int k);

/// RHS - LHS of the quadratic-form concavity inequality
///   sigma_k^{ij,st} A A / sigma_k  <=  (k-2)/(k-1) p^2 + 2/(k-1) p q - k/(k-1) q^2
/// with p = sigma_k^{ij}A_ij / sigma_k, q = sigma_1^{ij}A_ij / sigma_1,
/// at an admissible base W. Contract: >= -1e-9 * scale for all valid inputs,
/// equality at A in span{W}.
double concavity_gap(const Matrix& w, const Matrix& a, int k);

/// Natural size against which concavity_gap roundoff is measured.
double concavity_gap_scale(const Matrix& w, const Matrix& a, int k);

struct SegmentCheck {
    double min_gap_F = std::numeric_limits<double>::infinity();
    double min_gap_logsigma = std::numeric_limits<double>::infinity();
    bool stayed_admissible = true;
    double exit_t = -1.0;  // first t where the segment left the cone
};

/// Minimal concavity gap of F and of log sigma_k along the segment
/// (1-t) W1 + t W2, m interior sample points. Admissibility is checked
/// pointwise; on exit the first bad t is reported instead of values.
SegmentCheck segment_concavity_check(const Matrix& w1, const Matrix& w2, int k, int m);

}  // namespace sklab::matcalc
