#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kinklat/commands.hpp"

using namespace kinklat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("kinklat_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string toda_config(const fs::path& out, int steps = 2000) {
    return R"({"model": {"sites": 3, "boundary": "open", "terms": [{"beta": 1, "k": 1}]},
               "random": {"q_box": [-0.25, 0.25], "p_sigma": 0.5, "spacing": 2},
               "integration": {"scheme": "yoshida4", "dt": 0.01, "steps": )" +
           std::to_string(steps) + R"(, "sample_every": 20},
               "outputs": {"dir": ")" + out.string() + R"("},
               "seed": 7})";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int rc = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

}  // namespace

TEST_CASE("splitmix64 reference stream") {
    SplitMix64 g(0);
    CHECK(g.next() == 0xE220A8397B1DCDAFULL);
    CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
    CHECK(g.next() == 0x06C45D188009454FULL);
    SplitMix64 u(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("random states: q first, then p") {
    RandomStateSpec spec{-1.0, 1.0, 2.0, 3.0};
    const PhaseState s = random_state(spec, 3, 99);
    SplitMix64 g(99);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(s.q[i] == -3.0 * static_cast<double>(i) - 1.0 + 2.0 * g.uniform());
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(s.p[i] == 2.0 * g.normal());
    const PhaseState again = random_state(spec, 3, 99);
    CHECK(again.q == s.q);
    CHECK(again.p == s.p);
}

TEST_CASE("config parsing") {
    const RunConfig c = parse_config(R"({"model": {"sites": 4, "boundary": "periodic", "n_max": 3},
        "state": {"q": [3, 1, -1, -3], "p": [0, 0, 0, 0]}, "lambda": -1.5, "seed": 18446744073709551615})");
    CHECK(c.model.sites == 4);
    CHECK(c.model.boundary == Boundary::periodic);
    CHECK(c.model.kink_mode);
    CHECK(c.n_max == 3);
    CHECK(c.model.interaction.terms.size() == 3);
    CHECK(c.lambda == -1.5);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(initial_state(c).q[0] == 3.0);

    const RunConfig pb = parse_config(R"({"model": {"sites": 3, "per_bond": [[{"beta": 1, "k": 1}],
        [{"beta": 1, "k": 2}]]}, "random": {}})");
    REQUIRE(pb.model.per_bond.has_value());
    CHECK((*pb.model.per_bond)[1].terms[0].k == 2.0);
    CHECK(initial_state(pb).q.size() == 3);
}

TEST_CASE("config rejections") {
    const std::string model = R"("model": {"sites": 3, "terms": [{"beta": 1, "k": 1}]})";
    const std::string state = R"("state": {"q": [0, 0, 0], "p": [0, 0, 0]})";
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "extra": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "random": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "integration": {"steps": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "integration": {"dt": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "integration": {"scheme": "euler"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "seed": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{" + model + "," + state + R"(, "lambda": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"sites": 3, "n_max": 2, "terms": []}, )" + state + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"sites": 3, "boundary": "periodic", "n_max": 2}, )" + state + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"sites": 3, "terms": [{"beta": 1, "k": 1, "x": 0}]}, )" + state + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"sites": 3, "terms": [{"beta": 1, "k": 1}]}, "state": {"q": [0], "p": [0]}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("coeffs table") {
    std::ostringstream out;
    cmd_coeffs(3, out);
    CHECK(out.str() == "n,alpha,beta,k,identity\n1,1,-1,1,0\n2,-6,4,1.5,0\n3,19,-9.5,2,0\n");
    std::ostringstream one;
    cmd_coeffs(1, one);
    CHECK(one.str() == "n,alpha,beta,k,identity\n1,1,-1,1,0\n");
    std::ostringstream all;
    cmd_coeffs(50, all);
    CHECK(all.str().find(",0\n50,") != std::string::npos);
    CHECK_THROWS_AS(cmd_coeffs(0, out), ConfigError);
}

TEST_CASE("chi table") {
    std::string text;
    REQUIRE(cli({"chi", "--order", "6"}, &text) == exit_code::ok);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,a_k");
    const double v = 1.0 / (2.0 * std::sqrt(2.0));
    for (int k = 1; k <= 6; ++k) {
        std::getline(in, line);
        const double a = std::stod(line.substr(line.find(',') + 1));
        CHECK(a == doctest::Approx((k % 2 ? -2.0 : 2.0) * v).epsilon(1e-12));
    }
    REQUIRE(cli({"chi", "--a1", "0", "--order", "4"}, &text) == exit_code::ok);
    CHECK(text == "k,a_k\n1,0\n2,0\n3,0\n4,0\n");
    REQUIRE(cli({"chi", "--a1", "1", "--order", "3"}, &text) == exit_code::ok);
    CHECK(text.find("2,1.414213562373") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}) == exit_code::usage);
    CHECK(cli({"frobnicate"}) == exit_code::usage);
    CHECK(cli({"coeffs", "--terms", "0"}) == exit_code::usage);
    CHECK(cli({"simulate"}) == exit_code::usage);
    CHECK(cli({"simulate", "--config", "/nonexistent/kinklat.json"}) == exit_code::usage);
    std::string help;
    CHECK(cli({"--help"}, &help) == exit_code::ok);
    CHECK(help.find("simulate") != std::string::npos);

    const fs::path dir = scratch("usage");
    const fs::path cfg = write_config(dir, toda_config(dir / "out", 0));
    std::string err;
    CHECK(cli({"simulate", "--config", cfg.string()}, nullptr, &err) == exit_code::usage);
    CHECK(err.find("steps") != std::string::npos);
    const fs::path ok = write_config(dir, toda_config(dir / "out"));
    CHECK(cli({"simulate", "--config", ok.string(), "--scheme", "euler"}) == exit_code::usage);
    CHECK(cli({"simulate", "--config", ok.string(), "--terms", "0"}) == exit_code::usage);
}

TEST_CASE("simulate writes a deterministic trajectory and report") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg = write_config(dir, toda_config(dir / "a"));
    std::string text;
    REQUIRE(cli({"simulate", "--config", cfg.string()}, &text) == exit_code::ok);
    CHECK(text.find("integrable-consistent") != std::string::npos);
    REQUIRE(cli({"--quiet", "simulate", "--config", cfg.string(), "--out", (dir / "b").string()}, &text) ==
            exit_code::ok);
    CHECK(text.empty());
    for (const char* f : {"trajectory.csv", "report.json"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string csv = slurp(dir / "a" / "trajectory.csv");
    CHECK(csv.rfind("t,q0,q1,q2,p0,p1,p2,energy,H1,H2,H3\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 101);
    const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
    CHECK(report["verdict"] == "integrable-consistent");
    CHECK(report["seed"] == 7);
    CHECK(report["drifts"].size() == 3);

    REQUIRE(cli({"simulate", "--config", cfg.string(), "--seed", "8", "--out", (dir / "c").string()}) ==
            exit_code::ok);
    CHECK(slurp(dir / "c" / "trajectory.csv") != csv);
}

TEST_CASE("blow-up exits with 3") {
    const fs::path dir = scratch("blowup");
    const fs::path cfg = write_config(dir, R"({"model": {"sites": 2, "n_max": 3},
        "state": {"q": [0, 0], "p": [-1, 1]}, "integration": {"dt": 0.01, "steps": 100000},
        "outputs": {"dir": ")" + (dir / "out").string() + R"("}})");
    std::string err;
    CHECK(cli({"simulate", "--config", cfg.string()}, nullptr, &err) == exit_code::blow_up);
    CHECK(err.find("blow-up") != std::string::npos);
}

TEST_CASE("unwritable output directory is a usage error before any work") {
    const fs::path dir = scratch("unwritable");
    std::ofstream(dir / "file") << "x";
    const fs::path cfg = write_config(dir, toda_config(dir / "file" / "sub"));
    CHECK(cli({"simulate", "--config", cfg.string()}) == exit_code::usage);
}

TEST_CASE("laxcheck") {
    const fs::path dir = scratch("laxcheck");
    RunConfig c = parse_config(R"({"model": {"sites": 3, "per_bond": [[{"beta": 1, "k": 1}], [{"beta": 1, "k": 2}]]},
        "state": {"q": [0, 0, 0], "p": [0, 0, 0]}})");
    c.output_dir = dir.string();
    const auto r = cmd_laxcheck(c);
    REQUIRE(r["delta_entries"].size() == 2);
    CHECK(r["delta_entries"][0]["re"].get<double>() == doctest::Approx(0.5));
    CHECK(r["constraint_residuals"][0].get<double>() == doctest::Approx(0.25));
    CHECK(fs::exists(dir / "laxcheck.json"));

    RunConfig two = parse_config(R"({"model": {"sites": 2, "terms": [{"beta": 1, "k": 1}, {"beta": 0.3, "k": 2}]},
        "state": {"q": [0.4, 0], "p": [0.1, 0]}})");
    two.output_dir = dir.string();
    CHECK(cmd_laxcheck(two)["delta_entries"].empty());

    RunConfig four = parse_config(R"({"model": {"sites": 4, "terms": [{"beta": 1, "k": 1}, {"beta": 0.3, "k": 2}]},
        "state": {"q": [0.4, 0, -0.3, -0.5], "p": [0.1, 0.3, -0.2, 0.6]}})");
    four.output_dir = dir.string();
    const auto f = cmd_laxcheck(four);
    REQUIRE(f["m3_out_of_pattern"].size() == 3);
    for (const auto& e : f["m3_out_of_pattern"]) {
        CHECK(e["assembled"].get<double>() == doctest::Approx(e["closed_form"].get<double>()).epsilon(1e-12));
    }
}

TEST_CASE("bracket") {
    const fs::path dir = scratch("bracket");
    const fs::path cfg = write_config(dir, R"({"model": {"sites": 3, "per_bond": [[{"beta": 1, "k": 1}],
        [{"beta": 1, "k": 2}]]}, "state": {"q": [0, 0, 0], "p": [0, 0, 0]}, "outputs": {"dir": ")" +
                                                  dir.string() + R"("}})");
    std::string text;
    REQUIRE(cli({"bracket", "--config", cfg.string(), "--k1", "2", "--k2", "3"}, &text) == exit_code::ok);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(j["closed_form"].get<double>() == doctest::Approx(1.0));
    REQUIRE(cli({"bracket", "--config", cfg.string(), "--k1", "1", "--k2", "2"}, &text) == exit_code::ok);
    CHECK(std::abs(nlohmann::json::parse(text)["value"].get<double>()) <= 1e-10);
    CHECK(cli({"bracket", "--config", cfg.string(), "--k1", "0"}) == exit_code::usage);
}

TEST_CASE("moser probe command") {
    const fs::path dir = scratch("moser");
    const fs::path cfg = write_config(dir, R"({"model": {"sites": 2, "terms": [{"beta": 1, "k": 1}]},
        "state": {"q": [0, 0.5], "p": [0.8, -0.3]}, "integration": {"dt": 0.01, "steps": 1000, "sample_every": 100},
        "outputs": {"dir": ")" + dir.string() + R"("}})");
    std::string text;
    REQUIRE(cli({"moser", "--config", cfg.string()}, &text) == exit_code::ok);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["max_eigenvalue_deviation"].get<double>() <= 1e-6);
    CHECK(j["max_ratio_deviation"].get<double>() <= 1e-6);
    CHECK(j["samples"].size() == 11);
    // the n_max = 3 kink bond has no positive-w states
    CHECK(cli({"moser", "--config", cfg.string(), "--terms", "3"}) == exit_code::usage);
}

TEST_CASE("installed binary is byte-deterministic") {
    const fs::path dir = scratch("binary");
    const fs::path cfg = write_config(dir, toda_config(dir / "unused"));
    for (const char* sub : {"x", "y"}) {
        const std::string cmd = std::string(KINKLAT_CLI_PATH) + " --quiet simulate --config " + cfg.string() +
                                " --out " + (dir / sub).string();
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    CHECK(slurp(dir / "x" / "trajectory.csv") == slurp(dir / "y" / "trajectory.csv"));
    CHECK(slurp(dir / "x" / "report.json") == slurp(dir / "y" / "report.json"));
    CHECK_FALSE(slurp(dir / "x" / "trajectory.csv").empty());
}
