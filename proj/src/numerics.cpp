#include "sklab/numerics.hpp"

#include <vector>

namespace sklab {

GmresResult gmres(const LinearOp& op, const LinearOp& prec, const Eigen::VectorXd& b,
                  Eigen::VectorXd& x, const GmresOptions& opts) {
    using Eigen::VectorXd;
    const auto n = b.size();
    GmresResult res;

    VectorXd r(n), tmp(n);
    if (x.size() != n) x = VectorXd::Zero(n);
    if (x.isZero(0.0)) {
        r = b;
    } else {
        op(x, tmp);
        r = b - tmp;
    }
    const double bnorm = b.norm();
    const double target = std::max(opts.abs_tol, opts.rel_tol * (bnorm > 0 ? bnorm : 1.0));
    double beta = r.norm();
    res.residual_norm = beta;
    if (beta <= target) {
        res.converged = true;
        return res;
    }

    const int m = opts.max_iter;
    std::vector<VectorXd> V;
    V.reserve(m + 1);
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m, 0.0), sn(m, 0.0);
    VectorXd g = VectorXd::Zero(m + 1);
    g(0) = beta;

    int j = 0;
    for (; j < m; ++j) {
        VectorXd z(n), w(n);
        prec(V[j], z);
        op(z, w);
        // modified Gram-Schmidt
        for (int i = 0; i <= j; ++i) {
            H(i, j) = w.dot(V[i]);
            w -= H(i, j) * V[i];
        }
        const double h_sub = w.norm();  // Arnoldi subdiagonal before rotations
        H(j + 1, j) = h_sub;
        if (h_sub > 0) V.push_back(w / h_sub);

        // apply accumulated Givens rotations to the new column
        for (int i = 0; i < j; ++i) {
            const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
            H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
            H(i, j) = t;
        }
        const double denom = std::hypot(H(j, j), H(j + 1, j));
        if (denom == 0.0) break;
        cs[j] = H(j, j) / denom;
        sn[j] = H(j + 1, j) / denom;
        H(j, j) = denom;
        H(j + 1, j) = 0.0;
        g(j + 1) = -sn[j] * g(j);
        g(j) = cs[j] * g(j);

        res.residual_norm = std::abs(g(j + 1));
        res.iterations = j + 1;
        if (res.residual_norm <= target || h_sub == 0.0) {  // converged or lucky breakdown
            ++j;
            break;
        }
    }

    // back substitution for y, then x += M^{-1} (V y)
    const int k = std::min(j, m);
    Eigen::VectorXd y(k);
    for (int i = k - 1; i >= 0; --i) {
        double s = g(i);
        for (int l = i + 1; l < k; ++l) s -= H(i, l) * y(l);
        y(i) = s / H(i, i);
    }
    VectorXd update = VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) update += y(i) * V[i];
    VectorXd z(n);
    prec(update, z);
    x += z;

    res.converged = res.residual_norm <= target;
    return res;
}

}  // namespace sklab
