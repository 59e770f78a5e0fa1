#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sklab/numerics.hpp"

using namespace sklab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("rng: determinism and moments") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.uniform01() == b.uniform01());
    Rng c(7);
    double mean = 0, var = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = c.normal();
        mean += x;
        var += x * x;
    }
    mean /= n;
    var = var / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("binomial coefficients") {
    CHECK(binom(6, 3) == 20.0);
    CHECK(binom(5, 0) == 1.0);
    CHECK(binom(4, 5) == 0.0);
    CHECK(binom(8, 4) == 70.0);
}

TEST_CASE("gmres solves a general nonsymmetric system to tight tolerance") {
    Rng rng(9);
    const int n = 60;
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.3 * rng.normal();
    a.diagonal().array() += 6.0;  // well conditioned but genuinely coupled
    VectorXd xtrue(n), b(n);
    for (int i = 0; i < n; ++i) xtrue(i) = rng.normal();
    b = a * xtrue;

    LinearOp op = [&](const VectorXd& in, VectorXd& out) { out = a * in; };
    LinearOp ident = [](const VectorXd& in, VectorXd& out) { out = in; };
    VectorXd x = VectorXd::Zero(n);
    GmresOptions opts;
    opts.max_iter = 200;
    opts.rel_tol = 1e-13;
    const GmresResult res = gmres(op, ident, b, x, opts);
    CHECK(res.converged);
    CHECK(res.iterations > 3);  // must actually iterate, not bail after one step
    CHECK((x - xtrue).norm() < 1e-10 * xtrue.norm());
    CHECK((a * x - b).norm() < 1e-11 * b.norm());
}

TEST_CASE("gmres with a right preconditioner and a singular-direction projection") {
    // operator with a known null direction; both sides projected
    const int n = 40;
    Rng rng(10);
    MatrixXd a = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = 0.2 * rng.normal();
    a.diagonal().array() += 4.0;
    VectorXd kernel = VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    // force A kernel = 0 and range orthogonal to kernel
    a = (MatrixXd::Identity(n, n) - kernel * kernel.transpose()) * a *
        (MatrixXd::Identity(n, n) - kernel * kernel.transpose());
    VectorXd xtrue(n);
    for (int i = 0; i < n; ++i) xtrue(i) = rng.normal();
    xtrue -= kernel.dot(xtrue) * kernel;
    const VectorXd b = a * xtrue;

    LinearOp op = [&](const VectorXd& in, VectorXd& out) { out = a * in; };
    LinearOp prec = [&](const VectorXd& in, VectorXd& out) { out = in / 4.0; };
    VectorXd x = VectorXd::Zero(n);
    GmresOptions opts;
    opts.max_iter = 120;
    opts.rel_tol = 1e-12;
    const GmresResult res = gmres(op, prec, b, x, opts);
    CHECK(res.converged);
    x -= kernel.dot(x) * kernel;
    CHECK((x - xtrue).norm() < 1e-9 * (1 + xtrue.norm()));
}

TEST_CASE("finite difference helpers hit their stated orders") {
    auto f = [](double t) { return std::sin(1.3 + t) * std::exp(0.2 * t); };
    const double d1 = central_diff_richardson(f, 1e-3);
    const double d2 = second_diff_richardson(f, 1e-3);
    // closed forms
    const double e = std::exp(0.0);
    const double fd1 = std::cos(1.3) + 0.2 * std::sin(1.3);
    const double fd2 = -std::sin(1.3) + 0.4 * std::cos(1.3) + 0.04 * std::sin(1.3);
    CHECK(rel_dev(d1, fd1 * e) < 1e-11);
    CHECK(rel_dev(d2, fd2 * e) < 1e-8);
}
