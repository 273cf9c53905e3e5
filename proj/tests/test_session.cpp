#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "rnf/session.hpp"

using namespace rnf;
namespace fs = std::filesystem;

namespace {

const std::string kCli = RNF_CLI_PATH;
const std::string kConfigs = RNF_CONFIG_DIR;

struct Run {
  int code = -1;
  std::string output;
};

Run run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + "\"" + kCli + "\" " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), static_cast<int>(buf.size()), p)) r.output += buf.data();
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("rnf-session-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const char* kSmall = R"({
  "d": 2,
  "n": 2,
  "q": 1,
  "S": [[0, 0], [1, 0]],
  "box_radius": 6,
  "xi": {"samples": [[1.0, 1.37], [1.21, 1.83]]},
  "seed": 11,
  "melnikov": {"nu_max": 4, "min_points": 1},
  "stratify": {"box": 4, "N": [4]},
  "kam": {"steps": 2, "seeds": [3, 4], "box": 3}
})";

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_config(kSmall, "small.json");
  CHECK(c.d == 2);
  CHECK(c.n == 2);
  CHECK(c.S == std::vector<IVec>{{0, 0}, {1, 0}});
  CHECK(c.xi_samples.size() == 2);
  CHECK(c.atlas_samples >= c.n + 2);
  CHECK(c.seed == 11);
  CHECK(c.tol("fit") == 1e-8);
  CHECK(kam_seeds(c) == std::vector<std::uint64_t>{3, 4});
  CHECK(xi_points(c).size() == 2);

  auto g = parse_config(R"({"d":1,"n":1,"q":1,"S":[[0]],"box_radius":2,
                            "xi":{"grid":{"lo":[1],"hi":[2],"count":3}}})");
  auto pts = xi_points(g);
  REQUIRE(pts.size() == 3);
  CHECK(pts[1][0] == doctest::Approx(1.5));
  CHECK(kam_seeds(g) == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
}

TEST_CASE("config errors carry the source line") {
  auto line_of = [](const std::string& text) {
    try {
      parse_config(text, "t.json");
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("{\n \"d\": 2,\n \"n\": 2,\n \"q\": 1,\n \"S\": [[0,0],[0,0]],\n \"box_radius\": 3,\n"
                " \"xi\": {\"samples\": [[1,1]]}\n}") == 5);
  CHECK(line_of("{\n \"d\": 2,\n \"bogus\": 1\n}") == 3);
  CHECK(line_of("{\n \"d\": 2,\n \"n\": 2,\n \"q\": 9,\n \"S\": [[0,0],[1,0]],\n \"box_radius\": 3,\n"
                " \"xi\": {\"samples\": [[1,1]]}\n}") == 4);
  CHECK(line_of("{\n \"d\": 2,\n \"n\": 2\n") > 0);
  CHECK_THROWS_WITH_AS(parse_config("{\"d\": 2}", "x.json"), doctest::Contains("x.json:1:"), ConfigError);
}

TEST_CASE("tolerance overrides and subcommands") {
  auto c = parse_config(kSmall);
  apply_tolerance(c, "fit=1e-6");
  CHECK(c.tol("fit") == 1e-6);
  CHECK_THROWS(apply_tolerance(c, "nonsense=1"));
  CHECK_THROWS(apply_tolerance(c, "fit=-1"));
  CHECK_THROWS(apply_tolerance(c, "fit"));
  CHECK(parse_subcommand("normal-form") == Subcommand::normal_form);
  CHECK_FALSE(parse_subcommand("bogus"));
  CHECK(std::string(subcommand_name(Subcommand::all)) == "all");
}

TEST_CASE("in-process session is deterministic across worker counts") {
  auto c = parse_config(kSmall);
  auto a = run_session(c, Subcommand::all, 1);
  auto b = run_session(c, Subcommand::all, 3);
  CHECK(a.exit_code == 0);
  CHECK(a.report == b.report);
  CHECK(a.summary == b.summary);
  CHECK(a.csv == b.csv);
  auto rep = nlohmann::json::parse(a.report);
  CHECK(rep["schema"] == "resonant-nf/report/v1");
  CHECK(rep["status"] == "ok");
  CHECK(rep["seed"] == 11);
  CHECK(rep["config_hash"].get<std::string>().size() == 16);
  for (const char* s : {"graph", "normal_form", "melnikov", "stratify", "kam"}) CHECK(rep["stages"].contains(s));
  // header plus steps x seeds rows
  CHECK(std::count(a.csv.begin(), a.csv.end(), '\n') == 1 + 2 * 2);
  CHECK(a.csv.rfind("seed,", 0) == 0);

  auto other = c;
  other.seed = 12;
  auto o = run_session(other, Subcommand::graph, 1);
  CHECK(nlohmann::json::parse(o.report)["config_hash"] != rep["config_hash"]);
  CHECK(o.csv.empty());
}

TEST_CASE("cli: cubic graph succeeds and writes the outputs") {
  auto out = scratch("cubic");
  auto r = run("graph --config \"" + kConfigs + "/cubic.json\" --out \"" + out.string() + "\"");
  CHECK(r.code == 0);
  CHECK(r.output.find("graph: ok") != std::string::npos);
  CHECK(fs::exists(out / "report.json"));
  CHECK(fs::exists(out / "summary.txt"));
  auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(rep["subcommand"] == "graph");
  CHECK(rep["stages"]["graph"]["special_component"]["equals_S"] == true);
  CHECK(rep["stages"]["graph"]["black_edges"].get<int>() > 0);
}

TEST_CASE("cli: exit codes") {
  auto out = scratch("codes");
  auto dup = run("graph --config \"" + kConfigs + "/duplicate-site.json\" --out \"" + out.string() + "\"");
  CHECK(dup.code == 1);
  CHECK(dup.output.find("duplicate-site.json:5:") != std::string::npos);

  auto col = run("all --config \"" + kConfigs + "/collinear.json\" --out \"" + out.string() + "\"");
  CHECK(col.code == 2);
  CHECK(col.output.find("affine-dependence") != std::string::npos);
  auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(rep["status"] == "non-generic");
  CHECK(rep["skipped"].size() == 2);

  CHECK(run("graph --config /nonexistent.json").code == 1);
  CHECK(run("frobnicate --config x").code == 1);
  CHECK(run("graph").code == 1);
}

TEST_CASE("cli: reruns are byte identical; overrides apply") {
  auto cfg = scratch("cfg") / "small.json";
  std::ofstream(cfg) << kSmall;
  auto a = scratch("a"), b = scratch("b"), s = scratch("s");
  CHECK(run("kam --config \"" + cfg.string() + "\" --out \"" + a.string() + "\" --workers 1").code == 0);
  CHECK(run("kam --config \"" + cfg.string() + "\" --out \"" + b.string() + "\"", "RESONANT_NF_WORKERS=3").code ==
        0);
  for (const char* f : {"report.json", "summary.txt", "decay.csv"}) CHECK(slurp(a / f) == slurp(b / f));

  CHECK(run("graph --config \"" + cfg.string() + "\" --out \"" + s.string() + "\" --seed 99 --tol fit=1e-7").code ==
        0);
  auto rep = nlohmann::json::parse(slurp(s / "report.json"));
  CHECK(rep["seed"] == 99);
  CHECK(rep["config"]["tolerances"]["fit"] == 1e-7);
  CHECK(run("graph --config \"" + cfg.string() + "\" --out \"" + s.string() + "\" --tol bogus=1").code == 1);
}
