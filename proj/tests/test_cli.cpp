#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sklab/config.hpp"
#include "sklab/expr.hpp"
#include "sklab/report_io.hpp"

using namespace sklab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SKLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string find_csv(const std::string& dir) {
    const std::string cmd = "ls " + dir + "/*.csv";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[512];
    std::string out;
    if (fgets(buf, sizeof buf, p)) out = buf;
    pclose(p);
    while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
    return out;
}

}  // namespace

TEST_CASE("expression parser: values, precedence, powers, trig") {
    const expr::Expr e1 = expr::Expr::parse("10000*x^2*(1-x)^2", {"x"});
    double x = 0.5;
    CHECK(e1.eval(&x) == doctest::Approx(625.0));
    x = 0.0;
    CHECK(e1.eval(&x) == doctest::Approx(0.0));

    const expr::Expr e2 = expr::Expr::parse("2 + cos(x1) - 0.5*sin(2*y1)", {"x1", "y1"});
    double v[2] = {0.3, 0.7};
    CHECK(e2.eval(v) == doctest::Approx(2 + std::cos(0.3) - 0.5 * std::sin(1.4)));

    const expr::Expr e3 = expr::Expr::parse("(x3^2-0.25)^2", {"x1", "x2", "x3"});
    double p[3] = {0, 0, 0.5};
    CHECK(e3.eval(p) == doctest::Approx(0.0));
    p[2] = 1.0;
    CHECK(e3.eval(p) == doctest::Approx(0.5625));

    const expr::Expr e4 = expr::Expr::parse("-x^3 + 2^2", {"x"});
    x = 2.0;
    CHECK(e4.eval(&x) == doctest::Approx(-4.0));

    CHECK_THROWS_AS(expr::Expr::parse("foo(x)", {"x"}), ConfigError);
    CHECK_THROWS_AS(expr::Expr::parse("x + ", {"x"}), ConfigError);
    CHECK_THROWS_AS(expr::Expr::parse("x1", {"x"}), ConfigError);
    CHECK_THROWS_AS(expr::Expr::parse("x^y", {"x", "y"}), ConfigError);
    // nesting depth is capped (evaluator stack safety)
    std::string deep = "x";
    for (int i = 0; i < 80; ++i) deep = "(" + deep + ")";
    CHECK_THROWS_AS(expr::Expr::parse(deep, {"x"}), ConfigError);
}

TEST_CASE("ini parsing and normalization digest") {
    const config::Ini ini = config::Ini::parse_text(
        "# comment\n[family]\ndomain = torus\n g =  1+cos(x1) \nk=2\n");
    CHECK(*ini.get("family", "domain") == "torus");
    CHECK(*ini.get("family", "g") == "1+cos(x1)");
    CHECK(!ini.get("family", "missing"));
    CHECK_THROWS_AS(config::Ini::parse_text("key_without_equals\n"), ConfigError);

    const auto d1 = config::fnv1a64(ini.normalized());
    const config::Ini same = config::Ini::parse_text("[family]\nk = 2\ng = 1+cos(x1)\ndomain=torus");
    CHECK(config::fnv1a64(same.normalized()) == d1);
}

TEST_CASE("eps schedule parsing") {
    const auto dec = config::parse_eps_schedule("1e-1:1e-6:decade");
    REQUIRE(dec.size() == 6);
    CHECK(dec.front() == doctest::Approx(0.1));
    CHECK(dec.back() == doctest::Approx(1e-6));
    const auto list = config::parse_eps_schedule("0.5, 0.1, 0.001");
    REQUIRE(list.size() == 3);
    CHECK(list[1] == doctest::Approx(0.1));
    CHECK_THROWS_AS(config::parse_eps_schedule("1e-6:1e-1:decade"), ConfigError);
    CHECK_THROWS_AS(config::parse_eps_schedule(""), ConfigError);
}

TEST_CASE("family validation rules") {
    // sphere without the even flag names the compatibility requirement
    const config::Ini no_even = config::Ini::parse_text(
        "[family]\ndomain = sphere\ng = (x3^2-0.25)^2\neps = 1e-1:1e-3:decade\nk = 2\n");
    CHECK_THROWS_WITH_AS(config::validate_family(no_even),
                         doctest::Contains("even"), ConfigError);

    // an even flag on a genuinely odd profile is caught by sampling
    const config::Ini lying = config::Ini::parse_text(
        "[family]\ndomain = sphere\ng = (1+x3)^2\neven = true\neps = 1e-1:1e-3:decade\nk = 2\n");
    CHECK_THROWS_AS(config::validate_family(lying), ConfigError);

    // non-decreasing schedule named
    const config::Ini bad_eps = config::Ini::parse_text(
        "[family]\ndomain = torus\ng = 1-cos(x1)\neps = 1e-3,1e-1\nk = 2\n");
    CHECK_THROWS_AS(config::validate_family(bad_eps), ConfigError);

    // negative profile rejected by grid scan
    const config::Ini neg = config::Ini::parse_text(
        "[family]\ndomain = interval\ng = x-0.5\neps = 1e-1:1e-2:decade\nk = 2\n");
    CHECK_THROWS_AS(config::validate_family(neg), ConfigError);

    // valid torus family resolves the exponent from k and the rule
    const config::Ini good = config::Ini::parse_text(
        "[family]\ndomain = torus\nn_complex = 1\ng = (1-cos(x1))^2\neps = 1e-1:1e-3:decade\n"
        "k = 4\nrule = c21\n");
    const config::FamilySpec fs = config::validate_family(good);
    CHECK(fs.p_exponent == doctest::Approx(2.0));  // (2k-2)/3 at k = 4
    const config::Ini c11 = config::Ini::parse_text(
        "[family]\ndomain = torus\nn_complex = 1\ng = (1-cos(x1))^2\neps = 1e-1:1e-3:decade\n"
        "k = 4\nrule = c11\n");
    CHECK(config::validate_family(c11).p_exponent == doctest::Approx(3.0));
}

TEST_CASE("csv and manifest writers") {
    io::Csv csv({"a", "b"});
    csv.add_row({"1", "2"});
    CHECK(csv.to_string() == "a,b\n1,2\n");
    CHECK_THROWS_AS(csv.add_row({"only-one"}), IoError);
    CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("field files: round trip and header validation") {
    const std::string path = "/tmp/sklab_field_test.field";
    io::FieldFile f;
    f.kind = "torus";
    f.dim = 2;
    f.resolution = 8;
    f.values = Eigen::VectorXd::LinSpaced(4096, 0.5, 2.0);
    io::write_field(path, f);
    const io::FieldFile back = io::read_field(path);
    CHECK(back.kind == "torus");
    CHECK(back.dim == 2);
    CHECK(back.resolution == 8);
    CHECK((back.values - f.values).cwiseAbs().maxCoeff() == 0.0);  // %.17g round-trips

    // a positive constant field drives the solver through the @file path
    io::FieldFile fc = f;
    fc.values = Eigen::VectorXd::Constant(4096, 1.0);
    io::write_field(path, fc);
    CHECK(run_cli("solve-torus --k 2 --nc 2 --res 8 --f @" + path +
                  " --out-dir /tmp/sklab_cli_test/fld") == 0);
    // header mismatch (wrong resolution) is a config error
    CHECK(run_cli("solve-torus --k 2 --nc 2 --res 12 --f @" + path +
                  " --out-dir /tmp/sklab_cli_test/fld") == 2);
}

TEST_CASE("cli end-to-end: determinism, exit codes, artifacts") {
    const std::string dir = "/tmp/sklab_cli_test";
    if (std::system(("rm -rf " + dir).c_str()) != 0) FAIL("cleanup failed");

    // identical seed + flags give byte-identical CSVs
    REQUIRE(run_cli("probe-ineq --suite dominance --n 5 --k 3 --samples 3000 --eps 0.1 "
                    "--seed 7 --out-dir " + dir + "/a") == 0);
    REQUIRE(run_cli("probe-ineq --suite dominance --n 5 --k 3 --samples 3000 --eps 0.1 "
                    "--seed 7 --out-dir " + dir + "/b") == 0);
    const std::string csv_a = find_csv(dir + "/a");
    const std::string csv_b = find_csv(dir + "/b");
    CHECK(slurp(csv_a) == slurp(csv_b));
    // provenance columns present
    CHECK(slurp(csv_a).find("seed") != std::string::npos);
    CHECK(slurp(csv_a).find("config_digest") != std::string::npos);

    // config error paths: unknown flag and malformed family
    CHECK(run_cli("probe-ineq --no-such-flag") != 0);
    {
        std::ofstream bad(dir + "/bad.cfg");
        bad << "[family]\ndomain = sphere\ng = (x3^2-0.25)^2\neps = 1e-1:1e-3:decade\nk = 2\n";
    }
    CHECK(run_cli("probe-degenerate --config " + dir + "/bad.cfg --out-dir " + dir) == 2);

    // compatibility-violating sphere data is a config error (exit 2)
    CHECK(run_cli("solve-cm --k 2 --res 16 --f \"1+0.5*x3\" --out-dir " + dir) == 2);

    // small healthy runs
    CHECK(run_cli("solve-cm --k 1 --res 16 --f constant --out-dir " + dir) == 0);
    CHECK(run_cli("solve-torus --k 2 --nc 2 --res 8 --f constant --out-dir " + dir) == 0);
    CHECK(run_cli("spectrum-check --domain s2 --res 12 --out-dir " + dir) == 0);
}
