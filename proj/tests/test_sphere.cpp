#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sklab/cm_solver.hpp"

using namespace sklab;
using namespace sklab::sphere;
using Eigen::VectorXd;

namespace {
// a fixed degree-2 harmonic (x1^2 - x2^2 restricted to the sphere)
VectorXd harmonic2(const Grid2& g) {
    return g.sample([](const Eigen::Vector3d& p) { return p(0) * p(0) - p(1) * p(1); });
}
}  // namespace

TEST_CASE("quadrature integrates low harmonics exactly") {
    Grid2 g(16);
    CHECK(rel_dev(g.integrate(VectorXd::Ones(g.size())), 4.0 * M_PI) < 1e-12);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(g.integrate(g.coordinate(a))) < 1e-12);
    const VectorXd x3 = g.coordinate(2);
    CHECK(rel_dev(g.inner(x3, x3), 4.0 * M_PI / 3.0) < 1e-12);
}

TEST_CASE("analysis/synthesis round trip on band-limited fields") {
    Grid2 g(20);
    const VectorXd u = 0.7 * g.coordinate(0) + harmonic2(g) - 0.2 * VectorXd::Ones(g.size());
    const VectorXd back = g.synth(g.analyze(u), Grid2::Mode::Value);
    CHECK((u - back).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Laplacian eigenfunctions: constants, coordinates, degree 2") {
    Grid2 g(16);
    const VectorXd ones = VectorXd::Ones(g.size());
    CHECK(g.apply_laplacian(ones).cwiseAbs().maxCoeff() < 1e-10);
    for (int a = 0; a < 3; ++a) {
        const VectorXd xi = g.coordinate(a);
        CHECK((g.apply_laplacian(xi) + 2.0 * xi).cwiseAbs().maxCoeff() < 1e-11);
    }
    const VectorXd y2 = harmonic2(g);
    CHECK((g.apply_laplacian(y2) + 6.0 * y2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("covariant Hessian: unit support function and translation invariance") {
    Grid2 g(16);
    // u = 1: W = I exactly (sigma_1 = 2, sigma_2 = 1)
    const SupportHessian w1 = support_hessian(g, VectorXd::Ones(g.size()));
    CHECK((sigma_field(w1, 1).array() - 2.0).abs().maxCoeff() < 1e-11);
    CHECK((sigma_field(w1, 2).array() - 1.0).abs().maxCoeff() < 1e-11);

    // linear functions: Hess(x_i) + x_i I = 0, so W is unchanged
    for (int a = 0; a < 3; ++a) {
        const SupportHessian wl = support_hessian(g, g.coordinate(a));
        CHECK(wl.w11.cwiseAbs().maxCoeff() < 1e-10);
        CHECK(wl.w12.cwiseAbs().maxCoeff() < 1e-10);
        CHECK(wl.w22.cwiseAbs().maxCoeff() < 1e-10);
    }

    // constant data: residual vanishes at u = 1 and tracks constant offsets
    {
        const Eigen::VectorXd ones_u = Eigen::VectorXd::Ones(g.size());
        const Eigen::VectorXd fc = Eigen::VectorXd::Constant(g.size(), 1.0);
        CHECK(residual(g, ones_u, fc, 2).cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::VectorXd fc_off = Eigen::VectorXd::Constant(g.size(), 1.1);
        CHECK((residual(g, ones_u, fc_off, 2).array() + 0.1).abs().maxCoeff() < 1e-10);
    }

    // residual invariance under adding a linear function
    const VectorXd u = VectorXd::Ones(g.size()) + 0.1 * harmonic2(g);
    const VectorXd f = sigma_field(support_hessian(g, u), 2);
    const VectorXd shifted = u + 0.4 * g.coordinate(1);
    const VectorXd r = residual(g, shifted, f, 2);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("trace of the support Hessian matches the harmonic multiplier route") {
    Grid2 g(24);
    Rng rng(5);
    // random band-limited u (degrees <= 6)
    VectorXd u = VectorXd::Ones(g.size());
    u += 0.2 * g.coordinate(0) + 0.15 * harmonic2(g);
    u += 0.05 * g.sample([](const Eigen::Vector3d& p) {
        return p(0) * p(1) * p(2);  // degree-3 harmonic
    });
    const SupportHessian w = support_hessian(g, u);
    const VectorXd s1 = sigma_field(w, 1);
    const VectorXd direct = g.apply_laplacian(u) + 2.0 * u;
    CHECK((s1 - direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(trace_identity_defect(g, u) < 1e-8);
}

TEST_CASE("gradient norm on a coordinate function") {
    Grid2 g(16);
    const VectorXd x3 = g.coordinate(2);
    const VectorXd g2 = g.grad_norm2(x3);
    const VectorXd expected = g.sample([](const Eigen::Vector3d& p) { return 1.0 - p(2) * p(2); });
    CHECK((g2 - expected).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("gauge projection and moments") {
    Grid2 g(16);
    const VectorXd ones = VectorXd::Ones(g.size());
    CHECK(g.project_linear_out(g.coordinate(0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.project_linear_out(ones) - ones).cwiseAbs().maxCoeff() < 1e-12);
    const VectorXd mixed = ones + 0.3 * g.coordinate(1);
    CHECK((g.project_linear_out(mixed) - ones).cwiseAbs().maxCoeff() < 1e-12);

    // moments: f = 1 + x3 has third moment |S^2|/3
    const VectorXd f = ones + g.coordinate(2);
    const Eigen::Vector3d m = g.moments(f);
    CHECK(std::abs(m(0)) < 1e-12);
    CHECK(std::abs(m(1)) < 1e-12);
    CHECK(m(2) == doctest::Approx(4.0 * M_PI / 3.0));
    CHECK(compatibility_defect(g, ones) < 1e-12);
}

TEST_CASE("discrete spectrum: eigenvalue -2 with multiplicity 3 aligned to coordinates") {
    Grid2 g(16);
    const SpectrumReport rep = spectrum_check(g);
    CHECK(rep.const_residual < 1e-11);
    CHECK(rep.coord_residual < 1e-10);
    CHECK(rep.multiplicity == 3);        // inertia count
    CHECK(rep.dense_multiplicity == 3);  // dense eigensolve agrees
    CHECK(rep.subspace_angle >= 0.0);
    CHECK(rep.subspace_angle < 1e-6);
    CHECK(rep.angle_bound < 1e-6);
    CHECK(rep.ok());
}

TEST_CASE("newton solve: constant data, both orders") {
    Grid2 g(24);
    for (int k : {1, 2}) {
        const VectorXd f = VectorXd::Constant(g.size(), binom(2, k));
        const VectorXd u0 = VectorXd::Constant(g.size(), 1.2);
        auto [u, rep] = newton_solve(g, f, k, u0);
        CAPTURE(k);
        REQUIRE(rep.converged);
        CHECK(rep.iterations <= 8);
        CHECK(rep.residual_history.back() <= 1e-10);
        CHECK((u.array() - 1.0).abs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("newton solve: manufactured solution recovery (k = 2)") {
    Grid2 g(24);
    const VectorXd ustar = VectorXd::Ones(g.size()) + 0.1 * harmonic2(g);
    const VectorXd f = sigma_field(support_hessian(g, ustar), 2);
    const VectorXd u0 = VectorXd::Ones(g.size());
    SolveOptions opts;
    opts.tol = 1e-11;
    auto [u, rep] = newton_solve(g, f, 2, u0, opts);
    REQUIRE(rep.converged);
    CHECK(rep.min_margin > 0.0);  // admissible at every accepted iterate
    CHECK((u - g.project_linear_out(ustar)).cwiseAbs().maxCoeff() < 1e-7);

    // gauge invariance: a translated start lands on the same projected answer
    auto [u2, rep2] = newton_solve(g, f, 2, (u0 + 0.3 * g.coordinate(1)).eval(), opts);
    REQUIRE(rep2.converged);
    CHECK((u2 - u).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("negative controls: moment violation and inadmissible start") {
    Grid2 g(16);
    const VectorXd f_bad = VectorXd::Constant(g.size(), 1.0) + 0.5 * g.coordinate(2);
    CHECK_THROWS_AS((void)newton_solve(g, f_bad, 2, VectorXd::Ones(g.size())), ConfigError);
    try {
        (void)newton_solve(g, f_bad, 2, VectorXd::Ones(g.size()));
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("moment") != std::string::npos);
    }

    const VectorXd f = VectorXd::Constant(g.size(), 1.0);
    const VectorXd u_bad = VectorXd::Ones(g.size()) + 2.0 * harmonic2(g);
    CHECK_THROWS_AS((void)newton_solve(g, f, 2, u_bad), InadmissibleError);
}

TEST_CASE("degenerate sweep on an even profile (smoke)") {
    Grid2 g(16);
    const VectorXd profile = g.sample([](const Eigen::Vector3d& p) {
        const double t = p(2) * p(2) - 0.25;
        return t * t;
    });
    SolveOptions opts;
    opts.tol = 1e-9;
    const auto entries = degenerate_sweep(g, profile, 2, {1e-1, 1e-2, 1e-3}, ExponentRule::C21,
                                          opts);
    REQUIRE(entries.size() == 3);
    for (const auto& e : entries) {
        CAPTURE(e.eps);
        CHECK(e.report.converged);
        CHECK(e.report.sup_sigma1 > 0.0);
    }

    // the contrast rule f = (g + eps)^{k-1} runs as exploratory data
    const auto c11 = degenerate_sweep(g, profile, 2, {1e-1, 1e-2}, ExponentRule::C11, opts);
    CHECK(c11.size() == 2);
    for (const auto& e : c11) CHECK(e.report.converged);

    // an odd profile is rejected up front
    const VectorXd odd = (g.coordinate(2).array() + 1.1).square().matrix();
    CHECK_THROWS_AS(degenerate_sweep(g, odd, 2, {1e-1, 1e-2}, ExponentRule::C21, opts),
                    ConfigError);
}
