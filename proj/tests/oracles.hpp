#pragma once

// Test-only oracles, deliberately independent of the library's evaluation
// paths: subset enumeration for elementary symmetric functions and direct
// constructions for admissible random matrices.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sklab/numerics.hpp"
#include "sklab/symfun.hpp"

namespace oracle {

/// sigma_j by explicit enumeration of all j-subsets (n <= 20).
inline double sigma_bruteforce(const Eigen::VectorXd& lambda, int j) {
    const int n = static_cast<int>(lambda.size());
    if (j == 0) return 1.0;
    if (j < 0 || j > n) return 0.0;
    double total = 0.0;
    std::vector<int> idx(j);
    for (int i = 0; i < j; ++i) idx[i] = i;
    while (true) {
        double prod = 1.0;
        for (int i : idx) prod *= lambda(i);
        total += prod;
        int pos = j - 1;
        while (pos >= 0 && idx[pos] == n - j + pos) --pos;
        if (pos < 0) break;
        ++idx[pos];
        for (int i = pos + 1; i < j; ++i) idx[i] = idx[i - 1] + 1;
    }
    return total;
}

inline Eigen::MatrixXd random_orthogonal(int n, sklab::Rng& rng) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    // fix signs for a proper Haar-ish draw
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

inline Eigen::MatrixXcd random_unitary(int n, sklab::Rng& rng) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = std::complex<double>(rng.normal(), rng.normal());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.householderQ();
}

/// Random symmetric matrix with spectrum in Gamma_k.
inline Eigen::MatrixXd random_admissible(int n, int k, sklab::Rng& rng,
                                         sklab::symfun::GammaSampler& sampler) {
    const Eigen::VectorXd lam = sampler.draw(rng);
    const Eigen::MatrixXd q = random_orthogonal(n, rng);
    return q * lam.asDiagonal() * q.transpose();
}

/// Interior spectrum draw: finite-difference oracles need curvature bounded
/// away from the cone boundary, where derivatives of F legitimately blow up.
inline Eigen::VectorXd interior_spectrum(int n, int k, sklab::Rng& rng,
                                         sklab::symfun::GammaSampler& sampler,
                                         double min_margin = 1e-2) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const Eigen::VectorXd lam = sampler.draw(rng);
        if (sklab::symfun::gamma_margin(lam, k) >= min_margin) return lam;
    }
    throw std::runtime_error("interior_spectrum: sampler starved");
}

inline Eigen::MatrixXd random_admissible_interior(int n, int k, sklab::Rng& rng,
                                                  sklab::symfun::GammaSampler& sampler,
                                                  double min_margin = 1e-2) {
    const Eigen::VectorXd lam = interior_spectrum(n, k, rng, sampler, min_margin);
    const Eigen::MatrixXd q = random_orthogonal(n, rng);
    return q * lam.asDiagonal() * q.transpose();
}

inline Eigen::MatrixXd random_symmetric(int n, sklab::Rng& rng, double scale = 1.0) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a(i, j) = a(j, i) = scale * rng.normal();
    return a;
}

}  // namespace oracle
