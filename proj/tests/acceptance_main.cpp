// Acceptance gate: one integration check per shipped claim, every tolerance
// pinned here, one PASS/FAIL line per criterion. Exit code = failure count.
//
// Sweep tables and probe constants are persisted under --out-dir
// (default acceptance_out/) as plot-ready CSV.

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "sklab/cm_solver.hpp"
#include "sklab/degprobe.hpp"
#include "sklab/khessian.hpp"
#include "sklab/matcalc.hpp"
#include "sklab/report_io.hpp"
#include "sklab/symfun.hpp"

using namespace sklab;
using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::uint64_t kSeed = 20250808u;
std::string g_out_dir = "acceptance_out";
int g_failures = 0;

void report(int number, const std::string& label, bool pass, const std::string& detail) {
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << label
              << "  (" << detail << ")" << std::endl;
    if (!pass) ++g_failures;
}

double spread_factor(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*hi <= 1e-12) return 1.0;  // identically-zero constants count as stable
    return *hi / std::max(*lo, 1e-300);
}

// ---------------------------------------------------------------------------

void criterion_1() {
    bool pass = true;
    std::ostringstream detail;
    double worst_identity = 0.0;
    for (int n = 2; n <= 8 && pass; ++n) {
        for (int k = 2; k <= n; ++k) {
            const auto rep = symfun::maclaurin_suite(n, k, 100000, kSeed + n * 16 + k);
            worst_identity = std::max(worst_identity, rep.truncation.empirical_constant);
            if (!rep.truncation.held() || !rep.monotone.held() || !rep.lower.held()) {
                pass = false;
                detail << "failed at (n,k)=(" << n << "," << k << ") ";
                break;
            }
        }
    }
    double worst_euler = 0.0;
    {
        // cone margin floored at 1e-3: closer to the boundary the identity's
        // condition number exceeds 1e6 and no double-precision evaluation can
        // certify 1e-10 (the boundary regime is covered at 1e-8 in the unit
        // suite, matching the module invariant)
        Rng rng(kSeed + 99);
        for (int trial = 0; trial < 2000; ++trial) {
            const int n = 2 + static_cast<int>(rng.next() % 5);
            const int k = 2 + static_cast<int>(rng.next() % (n - 1));
            symfun::GammaSampler sampler(n, k);
            const MatrixXd a = oracle::random_admissible_interior(n, k, rng, sampler, 1e-3);
            const MatrixXd grad = matcalc::F_grad(a, k);
            worst_euler =
                std::max(worst_euler, rel_dev((grad.array() * a.array()).sum(),
                                              matcalc::F_value(a, k)));
        }
        pass = pass && worst_euler <= 1e-10;
    }
    detail << "truncation identity rel defect <= " << worst_identity
           << " (tol 1e-12) on 1e5 samples per (n,k), 2<=k<=n<=8; Euler rel defect <= "
           << worst_euler << " (tol 1e-10)";
    report(1, "exact sigma identities", pass, detail.str());
}

void criterion_2() {
    Rng rng(kSeed + 2);
    double worst_grad = 0.0, worst_hess = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 3 + trial % 4;
        const int k = 2 + trial % (n - 1);
        symfun::GammaSampler sampler(n, k);
        VectorXd lam;
        if (trial % 10 == 0) {  // near-degenerate spectrum, gap 1e-8
            lam = oracle::interior_spectrum(n, k, rng, sampler);
            std::sort(lam.data(), lam.data() + n, std::greater<double>());
            lam(1) = lam(0) - 1e-8;
        } else {
            lam = oracle::interior_spectrum(n, k, rng, sampler);
        }
        const MatrixXd q = oracle::random_orthogonal(n, rng);
        const MatrixXd a = q * lam.asDiagonal() * q.transpose();
        const MatrixXd grad = matcalc::F_grad(a, k);
        const double h = 1e-5 * (1.0 + a.norm());
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double fd = central_diff_richardson(
                    [&](double t) {
                        MatrixXd p = a;
                        p(i, j) += t;
                        p(j, i) = p(i, j);
                        return matcalc::F_value(p, k);
                    },
                    h);
                const double expected = (i == j) ? grad(i, i) : 2.0 * grad(i, j);
                worst_grad = std::max(worst_grad, rel_dev(fd, expected));
            }
        // second derivative tensor at the diagonal point, random direction
        const matcalc::SecondDerivTensor tensor(lam, k);
        const MatrixXd b = oracle::random_symmetric(n, rng);
        const double hh = 1e-4 * (1.0 + lam.cwiseAbs().maxCoeff()) / (1.0 + b.norm());
        const double fd2 = second_diff_richardson(
            [&](double s) {
                const MatrixXd m = lam.asDiagonal().toDenseMatrix() + s * b;
                return matcalc::F_value(m, k);
            },
            hh);
        worst_hess = std::max(worst_hess, rel_dev(tensor.quadform(b), fd2));
    }
    const bool pass = worst_grad <= 1e-6 && worst_hess <= 1e-5;
    std::ostringstream detail;
    detail << "1000 admissible matrices n<=6 incl. gap-1e-8 spectra: F_grad vs FD rel <= "
           << worst_grad << " (tol 1e-6), Hessian quadform vs FD rel <= " << worst_hess
           << " (tol 1e-5)";
    report(2, "derivative oracles", pass, detail.str());
}

void criterion_3() {
    Rng rng(kSeed + 3);
    double worst_rel = std::numeric_limits<double>::infinity();
    double worst_eq = 0.0;
    long count = 0;
    const std::vector<std::pair<int, int>> pairs = [] {
        std::vector<std::pair<int, int>> p;
        for (int n = 2; n <= 6; ++n)
            for (int k = 2; k <= n; ++k) p.emplace_back(n, k);
        return p;
    }();
    for (long s = 0; s < 100000; ++s) {
        const auto [n, k] = pairs[s % pairs.size()];
        symfun::GammaSampler sampler(n, k);
        const MatrixXd w = oracle::random_admissible(n, k, rng, sampler);
        const MatrixXd a = oracle::random_symmetric(n, rng, 2.0);
        const double gap = matcalc::concavity_gap(w, a, k);
        const double scale = matcalc::concavity_gap_scale(w, a, k);
        worst_rel = std::min(worst_rel, gap / scale);
        if (s % 20 == 0) worst_eq = std::max(worst_eq, std::abs(matcalc::concavity_gap(w, w, k)));
        ++count;
    }
    const bool pass = worst_rel >= -1e-9 && worst_eq <= 1e-9;
    std::ostringstream detail;
    detail << count << " (W,A) draws, 2<=k<=n<=6: min gap/scale = " << worst_rel
           << " (floor -1e-9); |gap| at A=W <= " << worst_eq << " (tol 1e-9)";
    report(3, "quadratic-form concavity inequality", pass, detail.str());
}

void criterion_4() {
    std::vector<double> betas{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> k_hot, k_cold;
    for (double beta : betas) {
        const double s = std::sqrt(beta);
        const degprobe::Fn1 h = [s](double x) { return (x + s) * (x + s); };
        degprobe::Interval dom{0.0, 1.0, 4097, 1e-5};
        k_hot.push_back(degprobe::c21_defect(h, 0.55, dom).k_required);
        k_cold.push_back(degprobe::c21_defect(h, 0.45, dom).k_required);
    }
    const double slope = std::log10(k_hot.back() / k_hot.front()) /
                         std::log10(betas.back() / betas.front());
    const double cold_factor = spread_factor(k_cold);
    const bool pass = std::abs(slope + 1.0 / 3.0) <= 0.05 && cold_factor < 2.0;
    std::ostringstream detail;
    detail << "alpha=0.55: log-log slope " << slope << " (target -1/3 +- 0.05); alpha=0.45: "
           << "defect spread factor " << cold_factor << " (< 2; max value "
           << *std::max_element(k_cold.begin(), k_cold.end()) << ")";
    report(4, "sharpness of the 1/2 exponent", pass, detail.str());
}

void criterion_5() {
    const std::vector<double> eps_list = {1e0, 1e-1, 1e-2, 1e-3, 1e-4,
                                          1e-5, 1e-6, 1e-7, 1e-8};
    io::Csv csv({"domain", "probe", "alpha", "eps", "k_required"});
    bool pass = true;
    std::ostringstream detail;

    auto check = [&](const std::string& name, const std::vector<double>& ks) {
        const double f = spread_factor(ks);
        if (f >= 2.0) {
            pass = false;
            detail << name << " spread " << f << " >= 2; ";
        } else {
            detail << name << " " << f << "; ";
        }
    };

    {  // interval
        std::vector<double> kg, k13, k715;
        for (double eps : eps_list) {
            const degprobe::Fn1 h = [eps](double x) {
                return 1e4 * x * x * (1 - x) * (1 - x) + eps;
            };
            degprobe::Interval dom{0.0, 1.0, 4001, 5e-5};
            kg.push_back(degprobe::grad_quotient(h, dom).k_required);
            k13.push_back(degprobe::c21_defect(h, 1.0 / 3.0, dom).k_required);
            k715.push_back(degprobe::c21_defect(h, 7.0 / 15.0, dom).k_required);
            csv.add_row({"interval", "grad", "0", io::format_double(eps),
                         io::format_double(kg.back())});
            csv.add_row({"interval", "c21", "1/3", io::format_double(eps),
                         io::format_double(k13.back())});
            csv.add_row({"interval", "c21", "7/15", io::format_double(eps),
                         io::format_double(k715.back())});
        }
        check("interval/grad", kg);
        check("interval/c21(1/3)", k13);
        check("interval/c21(7/15)", k715);
    }
    {  // torus
        torus::Grid grid(1, 256);
        const ArrayXd x = grid.coordinate_field(0);
        const ArrayXd profile = 1e4 * (1.0 - x.cos()).square();
        std::vector<double> kg, k13, k715;
        for (double eps : eps_list) {
            const ArrayXd h = profile + eps;
            kg.push_back(degprobe::grad_quotient(grid, h).k_required);
            k13.push_back(degprobe::c21_defect(grid, h, 1.0 / 3.0).k_required);
            k715.push_back(degprobe::c21_defect(grid, h, 7.0 / 15.0).k_required);
            csv.add_row({"torus", "grad", "0", io::format_double(eps),
                         io::format_double(kg.back())});
            csv.add_row({"torus", "c21", "1/3", io::format_double(eps),
                         io::format_double(k13.back())});
            csv.add_row({"torus", "c21", "7/15", io::format_double(eps),
                         io::format_double(k715.back())});
        }
        check("torus/grad", kg);
        check("torus/c21(1/3)", k13);
        check("torus/c21(7/15)", k715);
    }
    {  // sphere
        degprobe::SphereProbe dom;
        dom.n_theta = 256;
        dom.n_phi = 512;
        dom.directions = 64;
        std::vector<double> kg, k13, k715;
        for (double eps : eps_list) {
            const degprobe::FnSphere h = [eps](const Eigen::Vector3d& p) {
                const double t = p(2) * p(2) - 0.25;
                return 1e4 * t * t + eps;
            };
            kg.push_back(degprobe::grad_quotient(h, dom).k_required);
            k13.push_back(degprobe::c21_defect(h, 1.0 / 3.0, dom).k_required);
            k715.push_back(degprobe::c21_defect(h, 7.0 / 15.0, dom).k_required);
            csv.add_row({"sphere", "grad", "0", io::format_double(eps),
                         io::format_double(kg.back())});
            csv.add_row({"sphere", "c21", "1/3", io::format_double(eps),
                         io::format_double(k13.back())});
            csv.add_row({"sphere", "c21", "7/15", io::format_double(eps),
                         io::format_double(k715.back())});
        }
        check("sphere/grad", kg);
        check("sphere/c21(1/3)", k13);
        check("sphere/c21(7/15)", k715);
    }
    csv.write(g_out_dir + "/criterion5_k_required.csv");
    detail << "eps in {1e0..1e-8}, data persisted";
    report(5, "epsilon-uniformity of the probe constants", pass, detail.str());
}

void criterion_6() {
    Rng rng(kSeed + 6);
    double worst = 0.0, worst_eq = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        torus::BarrierParams p;
        p.alpha = rng.uniform(1.05, 25.0);
        p.beta = rng.uniform(1.05, 60.0);
        p.gamma = 0.0;
        const torus::BarrierReport rep = torus::barrier_check(p, 4001);
        for (double d : rep.defects) worst = std::max(worst, d);
        worst_eq = std::max({worst_eq, rep.phi_identity_defect, rep.psi_identity_defect});
    }
    const bool pass = worst <= 1e-12 && worst_eq <= 1e-12;
    std::ostringstream detail;
    detail << "20 random (alpha,beta,gamma=0) draws, dense t-grids: max inequality defect "
           << worst << ", max identity defect " << worst_eq << " (tol 1e-12, identities exact)";
    report(6, "barrier function properties", pass, detail.str());
}

void criterion_7() {
    bool pass = true;
    std::ostringstream detail;
    for (double delta : {0.1, 0.5, 0.9}) {
        for (auto [n, k] : {std::pair{5, 3}, {6, 5}, {8, 5}}) {
            symfun::EpsSearchOptions opts;
            opts.search_samples = 10000;
            opts.validate_samples = 100000;
            opts.seed = kSeed + static_cast<std::uint64_t>(delta * 100) + n * 8 + k;
            const auto res = symfun::truncated_dominance_eps(delta, n, k, opts);
            if (!res.found || !(res.eps > 0) || !res.side_positivity_ok) {
                pass = false;
                detail << "no eps at (delta,n,k)=(" << delta << "," << n << "," << k << "); ";
            } else {
                detail << "(" << delta << "," << n << "," << k << ")->" << res.eps << " ";
            }
        }
    }
    detail << "[zero violations over 1e5 validation samples at each returned eps]";
    report(7, "positive ratio threshold for the truncated dominance inequality", pass,
           detail.str());
}

void criterion_8() {
    sphere::Grid2 grid(48);
    bool pass = true;
    std::ostringstream detail;

    {  // manufactured recovery at res 48
        const VectorXd y2 =
            grid.sample([](const Eigen::Vector3d& p) { return p(0) * p(0) - p(1) * p(1); });
        const VectorXd ustar = VectorXd::Ones(grid.size()) + 0.1 * y2;
        const VectorXd f = sphere::sigma_field(sphere::support_hessian(grid, ustar), 2);
        sphere::SolveOptions opts;
        opts.tol = 1e-11;
        auto [u, rep] = sphere::newton_solve(grid, f, 2, VectorXd::Ones(grid.size()), opts);
        const double err =
            (u - grid.project_linear_out(ustar)).cwiseAbs().maxCoeff();
        pass = pass && rep.converged && err <= 1e-7;
        detail << "manufactured max-err " << err << " (tol 1e-7); ";
    }
    {  // constant data from a constant start
        const VectorXd f = VectorXd::Constant(grid.size(), binom(2, 2));
        const VectorXd u0 = VectorXd::Constant(grid.size(), 1.2);
        sphere::SolveOptions opts;
        opts.tol = 1e-9;
        auto [u, rep] = sphere::newton_solve(grid, f, 2, u0, opts);
        pass = pass && rep.converged && rep.iterations <= 8 &&
               rep.residual_history.back() <= 1e-9;
        detail << "constant solve " << rep.iterations << " iters (<= 8), residual "
               << rep.residual_history.back() << "; ";
    }
    {  // spectrum facts: full certificate at res 24, residual certificate at 48
        sphere::Grid2 coarse(24);
        const auto rep24 = sphere::spectrum_check(coarse);
        const auto rep48 = sphere::spectrum_check(grid);  // inertia skipped: residual bound
        const double angle24 = rep24.subspace_angle;
        pass = pass && rep24.multiplicity == 3 && rep24.dense_multiplicity == 3 &&
               angle24 >= 0 && angle24 <= 1e-6 && rep48.angle_bound <= 1e-6 &&
               rep48.const_residual <= 1e-10;
        detail << "eigenvalue -2 multiplicity " << rep24.multiplicity
               << " (res 24, inertia + dense), subspace angle " << angle24
               << "; res-48 residual angle bound " << rep48.angle_bound << " (tol 1e-6)";
    }
    report(8, "sphere solver correctness", pass, detail.str());
}

void criterion_9() {
    sphere::Grid2 grid(48);
    bool pass = true;
    std::ostringstream detail;
    const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    struct Family {
        const char* name;
        std::function<double(const Eigen::Vector3d&)> g;
    };
    const std::vector<Family> families = {
        {"latitude_quartic",
         [](const Eigen::Vector3d& p) {
             const double t = p(2) * p(2) - 0.25;
             return t * t;
         }},
        {"diagonal_quartic",
         [](const Eigen::Vector3d& p) {
             const double t = p(0) * p(0) - p(1) * p(1);
             return t * t;
         }},
    };
    io::Csv csv({"family", "eps", "inf_f", "sup_sigma1", "u_inf_norm", "iterations",
                 "residual", "converged"});
    for (const auto& fam : families) {
        const VectorXd profile = grid.sample(fam.g);
        sphere::SolveOptions opts;
        opts.tol = 1e-8;
        const auto entries =
            sphere::degenerate_sweep(grid, profile, 2, eps, sphere::ExponentRule::C21, opts);
        std::vector<double> sigma1s, uinfs;
        for (const auto& e : entries) {
            csv.add_row({fam.name, io::format_double(e.eps), io::format_double(e.report.inf_f),
                         io::format_double(e.report.sup_sigma1),
                         io::format_double(e.report.u_inf),
                         std::to_string(e.report.iterations),
                         io::format_double(e.report.residual_history.empty()
                                               ? -1.0
                                               : e.report.residual_history.back()),
                         e.report.converged ? "1" : "0"});
            if (!e.report.converged) {
                pass = false;
                continue;
            }
            sigma1s.push_back(e.report.sup_sigma1);
            uinfs.push_back(e.report.u_inf);
        }
        const double fs = spread_factor(sigma1s), fu = spread_factor(uinfs);
        pass = pass && fs < 2.0 && fu < 2.0;
        detail << fam.name << ": sup_sigma1 factor " << fs << ", u_inf factor " << fu << "; ";
    }
    csv.write(g_out_dir + "/criterion9_sweeps.csv");
    detail << "eps in {1e-1..1e-6}, k=2, res 48, data persisted";
    report(9, "sphere degenerate-sweep stability", pass, detail.str());
}

void criterion_10() {
    bool pass = true;
    std::ostringstream detail;
    struct Case {
        int nc, k, res;
    };
    for (const Case c : {Case{2, 2, 16}, {3, 2, 8}, {3, 3, 8}}) {
        torus::Grid grid(c.nc, c.res);
        const ArrayXd x1 = grid.coordinate_field(0);
        ArrayXd ustar = 0.1 * x1.cos();
        if (c.nc == 3) {
            const ArrayXd y2 = grid.coordinate_field(3);
            ustar = 0.05 * (x1.cos() + y2.cos());
        }
        ustar = grid.mean_zero(ustar);
        const ArrayXd f = torus::sigma_field(torus::complex_hessian(grid, ustar), c.k);
        torus::SolveOptions opts;
        opts.tol = 1e-10;
        auto [u, rep] =
            torus::newton_solve(grid, f, c.k, ArrayXd::Zero(grid.size()), opts);
        const double err = (u - ustar).abs().maxCoeff();
        pass = pass && rep.converged && err <= 1e-6;
        detail << "(" << c.nc << "," << c.k << ") err " << err << "; ";
        if (c.nc == 2) {
            const torus::Monitor m = torus::estimate_monitor(grid, u);
            pass = pass && std::isfinite(m.ratio);
        }
    }
    {  // pointwise lower-bound constant at k = 5 on criterion 5's torus family
        torus::Grid grid(1, 512);
        const ArrayXd x = grid.coordinate_field(0);
        const ArrayXd profile = 1e4 * (1.0 - x.cos()).square();
        std::vector<double> k3s;
        io::Csv csv({"eps", "K3", "inf_f_tilde"});
        for (int d = 0; d <= 8; ++d) {
            const double eps = std::pow(10.0, -d);
            const auto r = torus::j_lower_bound_probe(grid, (profile + eps).eval(), 5,
                                                      torus::BarrierParams{2, 5, 0});
            k3s.push_back(r.k3);
            csv.add_row({io::format_double(eps), io::format_double(r.k3),
                         io::format_double(r.inf_f_tilde)});
        }
        csv.write(g_out_dir + "/criterion10_j_probe.csv");
        const double factor = spread_factor(k3s);
        pass = pass && factor < 2.0;
        detail << "K3 spread factor " << factor << " (< 2) over eps in {1e0..1e-8}";
    }
    report(10, "torus solver correctness and lower-bound stability", pass, detail.str());
}

void criterion_11() {
    bool pass = true;
    std::ostringstream detail;
    {  // moment-violating data is rejected with the moment named
        sphere::Grid2 grid(16);
        const VectorXd f_bad =
            VectorXd::Constant(grid.size(), 1.0) + 0.5 * grid.coordinate(2);
        bool rejected = false;
        try {
            (void)sphere::newton_solve(grid, f_bad, 2, VectorXd::Ones(grid.size()));
        } catch (const ConfigError& e) {
            rejected = std::string(e.what()).find("moment") != std::string::npos;
        }
        pass = pass && rejected;
        detail << (rejected ? "moment violation rejected; " : "moment violation NOT caught; ");
    }
    {  // inadmissible sphere start triggers the cone-margin error
        sphere::Grid2 grid(16);
        const VectorXd f = VectorXd::Constant(grid.size(), 1.0);
        const VectorXd y2 =
            grid.sample([](const Eigen::Vector3d& p) { return p(0) * p(0) - p(1) * p(1); });
        bool caught = false;
        try {
            (void)sphere::newton_solve(grid, f, 2, (VectorXd::Ones(grid.size()) + 2.0 * y2).eval());
        } catch (const InadmissibleError& e) {
            caught = std::string(e.what()).find("margin") != std::string::npos;
        }
        pass = pass && caught;
        detail << (caught ? "sphere cone-margin error raised; " : "sphere inadmissible start NOT caught; ");
    }
    {  // inadmissible torus start likewise, never a silent answer
        torus::Grid grid(2, 8);
        const ArrayXd f = ArrayXd::Constant(grid.size(), 1.0);
        const ArrayXd bad = 5.0 * grid.coordinate_field(0).cos();
        bool caught = false;
        try {
            (void)torus::newton_solve(grid, f, 2, bad);
        } catch (const InadmissibleError&) {
            caught = true;
        }
        pass = pass && caught;
        detail << (caught ? "torus cone-margin error raised" : "torus inadmissible start NOT caught");
    }
    report(11, "negative controls", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--out-dir") g_out_dir = argv[i + 1];
    io::ensure_dir(g_out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();

    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
              << g_failures << " failed, " << dt << " s)" << std::endl;
    return g_failures;
}
