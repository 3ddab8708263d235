#include <doctest.h>

#include <fstream>
#include <numbers>
#include <sstream>

#include "qme/cli/commands.hpp"
#include "qme/cli/config.hpp"
#include "qme/cli/output.hpp"

using namespace qme;
using namespace qme::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qme_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_config() {
    return json::parse(R"({
        "model": {"L": 6},
        "init": {"theta_s": ["pi/2"], "theta_b": ["pi/4", "3pi/4"]},
        "time": {"t_max": 4, "n_points": 21},
        "ensemble": {"n_samples": 3, "seed": 7},
        "krylov": {"max_depth": 30, "t_max": 2, "n_points": 11},
        "output": {"emit_svg": true}
    })");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults") {
    const auto c = parse_config(json::object());
    CHECK(c.model.L == 15);
    CHECK(c.model.J == 1.0);
    CHECK(c.model.h == 0.2);
    CHECK(c.qos_first == 7);
    CHECK(c.qos_last == 9);
    CHECK(c.ensemble.n_samples == 100);
    CHECK(c.ensemble.dt_min == 50.0);
    CHECK(c.ensemble.dt_max == 150.0);
    CHECK(format_arrows(c.spectra_element.row, 3) == "duu");
    CHECK(format_arrows(c.spectra_element.col, 3) == "ddu");
    // smaller chains keep a centred three-site QOS
    const auto small = parse_config(json::parse(R"({"model": {"L": 11}})"));
    CHECK(small.qos_first == 5);
    CHECK(small.qos_last == 7);
}

TEST_CASE("angles and arrows") {
    const auto c = parse_config(json::parse(R"({"init": {"theta_s": ["3pi/4", "pi", 0.5, "2*pi/8", "0.25"]}})"));
    REQUIRE(c.theta_s.size() == 5);
    CHECK(c.theta_s[0] == doctest::Approx(3 * std::numbers::pi / 4));
    CHECK(c.theta_s[1] == doctest::Approx(std::numbers::pi));
    CHECK(c.theta_s[2] == 0.5);
    CHECK(c.theta_s[3] == doctest::Approx(std::numbers::pi / 4));
    CHECK(c.theta_s[4] == 0.25);
    CHECK(parse_arrows("udd", 3).bits == 1);
    CHECK(format_arrows({0b110}, 3) == "duu");
    CHECK(angle_tag(std::numbers::pi / 2) == "1.5708");
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("invalid configs list every problem") {
    const auto doc = json::parse(R"({
        "model": {"L": 40, "J": "x"},
        "time": {"n_points": 1},
        "ensemble": {"dt_min": 5, "dt_max": 1},
        "analysis": {"n_tilde": "weird"},
        "bogus": 1
    })");
    try {
        parse_config(doc);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("model.L") != std::string::npos);
        CHECK(msg.find("model.J") != std::string::npos);
        CHECK(msg.find("time.n_points") != std::string::npos);
        CHECK(msg.find("ensemble") != std::string::npos);
        CHECK(msg.find("analysis.n_tilde") != std::string::npos);
        CHECK(msg.find("bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(json::parse(R"({"geometry": {"qos_sites": [3, 20]}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"spectra": {"element": {"row": "dxu", "col": "ddu"}}})")),
                    ConfigError);
}

TEST_CASE("config hash ignores thread count and output location") {
    auto a = parse_config(small_config());
    auto b = a;
    b.threads = 4;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.ensemble.seed = 8;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
    // round trip through the expanded form
    CHECK(config_hash(parse_config(to_json(a))) == config_hash(a));
}

TEST_CASE("relax output is deterministic and thread independent") {
    const auto cfg = parse_config(small_config());
    const auto d1 = scratch("relax1"), d2 = scratch("relax2");
    const auto r1 = cmd_relax(cfg, d1);
    auto threaded = cfg;
    threaded.threads = 3;
    cmd_relax(threaded, d2);
    const std::string name = "relax_" + angle_tag(std::numbers::pi / 2) + "_" + angle_tag(std::numbers::pi / 4) + ".csv";
    REQUIRE(fs::exists(d1 / name));
    CHECK(fs::exists(d1 / "relax.svg"));
    CHECK(slurp(d1 / name) == slurp(d2 / name));
    const std::string text = slurp(d1 / name);
    CHECK(text.find("# config_hash: " + config_hash(cfg)) != std::string::npos);
    CHECK(text.find("\nt,delta_s\n") != std::string::npos);
    const auto fit = json::parse(slurp(d1 / ("relax_" + angle_tag(std::numbers::pi / 2) + "_" +
                                             angle_tag(std::numbers::pi / 4) + "_fit.json")));
    CHECK(fit.contains("t0"));
    CHECK(fit.contains("excluded"));
    CHECK(fit["config_hash"] == config_hash(cfg));
}

TEST_CASE("theta_s = 0 with a charge-eigenstate bath gives a flat zero curve") {
    auto doc = small_config();
    doc["init"]["theta_s"] = {0.0};
    doc["init"]["theta_b"] = {0.0};
    const auto cfg = parse_config(doc);
    const auto dir = scratch("flat");
    const auto r = cmd_relax(cfg, dir);
    CHECK(r.summary["runs"][0]["excluded"] == true);
    std::ifstream in(dir / "relax_0.0000_0.0000.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        CHECK(line.substr(line.find(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 21);
}

TEST_CASE("theta_s = 0 starts symmetric for any bath") {
    auto doc = small_config();
    doc["init"]["theta_s"] = {0.0};
    doc["init"]["theta_b"] = {0.4, 1.9};
    const auto r = cmd_relax(parse_config(doc), scratch("zero_start"));
    for (const auto& run : r.summary["runs"]) CHECK(run["delta_s0"].get<double>() == 0.0);
}

TEST_CASE("qme verdicts for identical and swapped configurations") {
    auto doc = small_config();
    doc["qme"] = {{"first", {{"theta_s", 1.2}, {"theta_b", 0.7}}}, {"second", {{"theta_s", 1.2}, {"theta_b", 0.7}}}};
    const auto same = cmd_qme(parse_config(doc), scratch("qme_same"));
    CHECK(same.summary["occurs"] == false);

    doc["qme"] = {{"first", {{"theta_s", 1.5}, {"theta_b", 0.5}}}, {"second", {{"theta_s", 0.6}, {"theta_b", 2.4}}}};
    const auto ab = cmd_qme(parse_config(doc), scratch("qme_ab"));
    doc["qme"] = {{"first", {{"theta_s", 0.6}, {"theta_b", 2.4}}}, {"second", {{"theta_s", 1.5}, {"theta_b", 0.5}}}};
    const auto ba = cmd_qme(parse_config(doc), scratch("qme_ba"));
    CHECK(ab.summary["occurs"] == ba.summary["occurs"]);
    CHECK(ab.summary["t_mpemba"] == ba.summary["t_mpemba"]);
    CHECK(ab.summary["margin"] == ba.summary["margin"]);
}

TEST_CASE("spectra, krylov and theory commands write their files") {
    const auto cfg = parse_config(small_config());
    const auto dir = scratch("misc");
    const auto s = cmd_spectra(cfg, dir);
    CHECK(fs::exists(dir / "sector_variance.csv"));
    CHECK(fs::exists(dir / "gaps_m0.csv"));
    CHECK(slurp(dir / "gaps_m0.csv").find("omega,count,n_tilde,m_avg,nm_product") != std::string::npos);
    CHECK(s.summary["per_m"].size() == 4);

    const auto k = cmd_krylov(cfg, dir);
    CHECK(fs::exists(dir / "krylov_chain_q0.csv"));
    CHECK(slurp(dir / "krylov_correlation.csv").find("t,re_direct,im_direct,re_krylov,im_krylov,qprime") !=
          std::string::npos);
    CHECK(k.summary["entries"].size() == 3);

    const auto t = cmd_theory(cfg, dir);
    CHECK(fs::exists(dir / "theory_per_m.csv"));
    CHECK(slurp(dir / "theory_per_m.csv").find("t,m,re,im,abs") != std::string::npos);
    CHECK(fs::exists(dir / "theory_compare.csv"));
    CHECK(t.summary["per_m"].size() == 4);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    std::ostringstream log, err;
    {
        std::ofstream(dir / "bad.json") << R"({"model": {"L": 1}})";
    }
    CHECK(run_command("relax", dir / "bad.json", dir, log, err) == kExitConfigError);
    CHECK(err.str().find("model.L") != std::string::npos);
    CHECK(run_command("relax", dir / "missing.json", dir, log, err) == kExitConfigError);
    {
        std::ofstream(dir / "broken.json") << "{ not json";
    }
    CHECK(run_command("relax", dir / "broken.json", dir, log, err) == kExitConfigError);
    {
        std::ofstream(dir / "big.json") << R"({"model": {"L": 12}})";
    }
    // the Krylov study needs dense operators
    CHECK(run_command("krylov", dir / "big.json", dir, log, err) == kExitConfigError);
    {
        std::ofstream(dir / "ok.json") << small_config().dump();
    }
    CHECK(run_command("spectra", dir / "ok.json", dir / "out", log, err) == kExitSuccess);
    CHECK(fs::exists(dir / "out" / "spectra_summary.json"));
    {
        std::ofstream(dir / "not_a_dir") << "x";
    }
    CHECK(run_command("relax", dir / "ok.json", dir / "not_a_dir" / "sub", log, err) == kExitIoError);
}

}
