#include "rnf/session.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace rnf {

namespace {

using json = nlohmann::json;
using Path = std::vector<std::string>;

class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : text_(text), src_(source) {}

  // Line of the last key on the path, found by walking the keys in order.
  int line_of(const Path& path) const {
    std::size_t pos = 0, hit = 0;
    for (const auto& k : path) {
      const std::string pat = "\"" + k + "\"";
      std::size_t p = text_.find(pat, pos);
      while (p != std::string::npos) {
        std::size_t q = p + pat.size();
        while (q < text_.size() && std::isspace(static_cast<unsigned char>(text_[q]))) ++q;
        if (q < text_.size() && text_[q] == ':') break;
        p = text_.find(pat, p + 1);
      }
      if (p == std::string::npos) break;
      hit = p;
      pos = p + pat.size();
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(hit), '\n'));
  }

  [[noreturn]] void fail(const Path& path, const std::string& msg) const {
    std::string name;
    for (const auto& k : path) name += (name.empty() ? "" : ".") + k;
    throw ConfigError(src_, line_of(path), name.empty() ? msg : name + ": " + msg);
  }

  void only_keys(const json& obj, const Path& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) {
        Path p = path;
        p.push_back(it.key());
        fail(p, "unknown field");
      }
  }

  const json& need(const json& obj, const Path& path, const std::string& key) const {
    if (!obj.contains(key)) fail(path, "missing field \"" + key + "\"");
    return obj.at(key);
  }

  long long integer(const json& v, const Path& path, long long lo, long long hi) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    long long x = v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi)
                      ? hi + 1
                      : v.get<long long>();
    if (x < lo || x > hi) fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  double real(const json& v, const Path& path, bool positive) const {
    if (!v.is_number()) fail(path, "expected a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    if (positive && !(x > 0)) fail(path, "must be positive");
    return x;
  }

  std::vector<double> reals(const json& v, const Path& path, bool positive) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(real(e, path, positive));
    return out;
  }

 private:
  const std::string& text_;
  const std::string& src_;
};

Path at(Path p, const std::string& k) {
  p.push_back(k);
  return p;
}

}  // namespace

SessionConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    // the parser reports the byte after the offending token
    if (byte > 0 && byte <= text.size() && text[byte - 1] == '\n') --line;
    std::string msg = e.what();
    auto p = msg.find("parse error");
    throw ConfigError(source, line, "malformed JSON: " + (p == std::string::npos ? msg : msg.substr(p)));
  }
  Reader R(text, source);
  const Path top;
  R.only_keys(root, top,
              {"d", "n", "q", "S", "box_radius", "xi", "atlas_samples", "K0", "tau", "rho0", "S0", "tolerances",
               "seed", "melnikov", "stratify", "kam", "comment"});
  SessionConfig c;
  c.d = static_cast<int>(R.integer(R.need(root, top, "d"), {"d"}, 1, 8));
  c.n = static_cast<int>(R.integer(R.need(root, top, "n"), {"n"}, 1, 12));
  c.q = static_cast<int>(R.integer(R.need(root, top, "q"), {"q"}, 1, 6));

  const json& S = R.need(root, top, "S");
  if (!S.is_array()) R.fail({"S"}, "expected a list of sites");
  if (static_cast<int>(S.size()) != c.n)
    R.fail({"S"}, "has " + std::to_string(S.size()) + " sites but n = " + std::to_string(c.n));
  std::set<IVec> seen;
  for (const auto& site : S) {
    if (!site.is_array() || static_cast<int>(site.size()) != c.d)
      R.fail({"S"}, "every site must be a list of d = " + std::to_string(c.d) + " integers");
    IVec k;
    for (const auto& x : site) k.push_back(R.integer(x, {"S"}, -1000000, 1000000));
    if (!seen.insert(k).second) R.fail({"S"}, "duplicate site " + to_string(k));
    c.S.push_back(k);
  }
  c.box_radius = R.integer(R.need(root, top, "box_radius"), {"box_radius"}, 1, 10000);
  Int maxs = 0;
  for (const auto& k : c.S) maxs = std::max(maxs, norm_inf(k));
  if (c.box_radius < maxs) R.fail({"box_radius"}, "smaller than the largest tangential site");

  const json& xi = R.need(root, top, "xi");
  R.only_keys(xi, {"xi"}, {"samples", "grid"});
  if (xi.contains("samples") == xi.contains("grid")) R.fail({"xi"}, "give exactly one of \"samples\" or \"grid\"");
  if (xi.contains("samples")) {
    const Path p{"xi", "samples"};
    const json& s = xi.at("samples");
    if (!s.is_array() || s.empty()) R.fail(p, "expected a nonempty list of points");
    for (const auto& pt : s) {
      auto v = R.reals(pt, p, true);
      if (static_cast<int>(v.size()) != c.n) R.fail(p, "every point must have n = " + std::to_string(c.n) + " entries");
      c.xi_samples.push_back(v);
    }
  } else {
    const Path p{"xi", "grid"};
    const json& g = xi.at("grid");
    R.only_keys(g, p, {"lo", "hi", "count"});
    XiGrid grid;
    grid.lo = R.reals(R.need(g, p, "lo"), at(p, "lo"), true);
    grid.hi = R.reals(R.need(g, p, "hi"), at(p, "hi"), true);
    grid.count = static_cast<int>(R.integer(R.need(g, p, "count"), at(p, "count"), 1, 1000));
    if (static_cast<int>(grid.lo.size()) != c.n || static_cast<int>(grid.hi.size()) != c.n)
      R.fail(p, "lo and hi must have n = " + std::to_string(c.n) + " entries");
    for (int i = 0; i < c.n; ++i)
      if (grid.lo[i] > grid.hi[i]) R.fail(p, "lo exceeds hi in coordinate " + std::to_string(i));
    double pts = std::pow(static_cast<double>(grid.count), c.n);
    if (pts > 1e6) R.fail(p, "grid has more than 10^6 points");
    c.xi_grid = grid;
  }

  c.atlas_samples = std::max(6, c.n + 2);
  if (root.contains("atlas_samples"))
    c.atlas_samples = static_cast<int>(R.integer(root["atlas_samples"], {"atlas_samples"}, c.n + 2, 64));
  if (root.contains("K0")) c.K0 = static_cast<int>(R.integer(root["K0"], {"K0"}, 1, 64));
  if (root.contains("tau")) c.tau = R.real(root["tau"], {"tau"}, true);
  if (root.contains("rho0")) c.rho0 = R.real(root["rho0"], {"rho0"}, true);
  if (root.contains("S0")) c.S0 = R.real(root["S0"], {"S0"}, true);
  if (root.contains("seed"))
    c.seed = static_cast<std::uint64_t>(R.integer(root["seed"], {"seed"}, 0, std::numeric_limits<long long>::max()));

  c.tolerances = default_tolerances();
  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    if (!t.is_object()) R.fail({"tolerances"}, "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      const Path p{"tolerances", it.key()};
      if (!c.tolerances.count(it.key())) R.fail(p, "unknown tolerance");
      c.tolerances[it.key()] = R.real(it.value(), p, true);
    }
  }

  if (root.contains("melnikov")) {
    const json& m = root["melnikov"];
    const Path p{"melnikov"};
    R.only_keys(m, p, {"nu_max", "K", "rhos", "min_points", "root_radius", "epsilon"});
    if (m.contains("nu_max")) c.melnikov.nu_max = static_cast<int>(R.integer(m["nu_max"], at(p, "nu_max"), 0, 32));
    if (m.contains("K")) c.melnikov.K = static_cast<int>(R.integer(m["K"], at(p, "K"), 1, 64));
    if (m.contains("rhos")) {
      c.melnikov.rhos = R.reals(m["rhos"], at(p, "rhos"), true);
      if (c.melnikov.rhos.empty()) R.fail(at(p, "rhos"), "expected at least one value");
    }
    if (m.contains("min_points"))
      c.melnikov.min_points = static_cast<int>(R.integer(m["min_points"], at(p, "min_points"), 1, 1000000));
    if (m.contains("root_radius")) c.melnikov.root_radius = R.integer(m["root_radius"], at(p, "root_radius"), 0, 10000);
    if (m.contains("epsilon")) c.melnikov.epsilon = R.real(m["epsilon"], at(p, "epsilon"), true);
  }
  if (root.contains("stratify")) {
    const json& s = root["stratify"];
    const Path p{"stratify"};
    R.only_keys(s, p, {"box", "N"});
    if (s.contains("box")) c.stratify.box = R.integer(s["box"], at(p, "box"), 0, 64);
    if (s.contains("N")) {
      if (!s["N"].is_array() || s["N"].empty()) R.fail(at(p, "N"), "expected a nonempty list of scales");
      c.stratify.N.clear();
      for (const auto& x : s["N"]) c.stratify.N.push_back(static_cast<int>(R.integer(x, at(p, "N"), 2, 64)));
    }
  }
  if (root.contains("kam")) {
    const json& k = root["kam"];
    const Path p{"kam"};
    R.only_keys(k, p, {"steps", "seeds", "box", "eps_rg", "eps_p3", "rg_terms", "p3_terms", "s0", "r0"});
    if (k.contains("steps")) c.kam.steps = static_cast<int>(R.integer(k["steps"], at(p, "steps"), 0, 4));
    if (k.contains("seeds")) {
      if (!k["seeds"].is_array()) R.fail(at(p, "seeds"), "expected a list of integers");
      for (const auto& x : k["seeds"])
        c.kam.seeds.push_back(
            static_cast<std::uint64_t>(R.integer(x, at(p, "seeds"), 0, std::numeric_limits<long long>::max())));
    }
    if (k.contains("box")) c.kam.box = R.integer(k["box"], at(p, "box"), 1, 16);
    if (k.contains("eps_rg")) c.kam.eps_rg = R.real(k["eps_rg"], at(p, "eps_rg"), true);
    if (k.contains("eps_p3")) c.kam.eps_p3 = R.real(k["eps_p3"], at(p, "eps_p3"), false);
    if (k.contains("rg_terms")) c.kam.rg_terms = static_cast<int>(R.integer(k["rg_terms"], at(p, "rg_terms"), 0, 100000));
    if (k.contains("p3_terms")) c.kam.p3_terms = static_cast<int>(R.integer(k["p3_terms"], at(p, "p3_terms"), 0, 100000));
    if (k.contains("s0")) c.kam.s0 = R.real(k["s0"], at(p, "s0"), true);
    if (k.contains("r0")) c.kam.r0 = R.real(k["r0"], at(p, "r0"), true);
  }
  return c;
}

SessionConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_tolerance(SessionConfig& c, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("--tol expects NAME=VALUE, got '" + assignment + "'");
  std::string name = assignment.substr(0, eq), value = assignment.substr(eq + 1);
  if (c.tolerances.empty()) c.tolerances = default_tolerances();
  if (!c.tolerances.count(name)) throw std::invalid_argument("unknown tolerance '" + name + "'");
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !(x > 0) || !std::isfinite(x))
    throw std::invalid_argument("tolerance '" + name + "' needs a positive number, got '" + value + "'");
  c.tolerances[name] = x;
}

std::optional<Subcommand> parse_subcommand(const std::string& s) {
  if (s == "graph") return Subcommand::graph;
  if (s == "normal-form") return Subcommand::normal_form;
  if (s == "melnikov") return Subcommand::melnikov;
  if (s == "stratify") return Subcommand::stratify;
  if (s == "kam") return Subcommand::kam;
  if (s == "all") return Subcommand::all;
  return std::nullopt;
}

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::graph: return "graph";
    case Subcommand::normal_form: return "normal-form";
    case Subcommand::melnikov: return "melnikov";
    case Subcommand::stratify: return "stratify";
    case Subcommand::kam: return "kam";
    case Subcommand::all: return "all";
  }
  return "?";
}

SessionOutput run_session(const SessionConfig& c, Subcommand cmd, int workers) {
  const bool want_graph = cmd == Subcommand::graph || cmd == Subcommand::normal_form ||
                          cmd == Subcommand::melnikov || cmd == Subcommand::all;
  const bool want_nf = cmd == Subcommand::normal_form || cmd == Subcommand::melnikov || cmd == Subcommand::all;
  const bool want_mel = cmd == Subcommand::melnikov || cmd == Subcommand::all;
  const bool want_strat = cmd == Subcommand::stratify || cmd == Subcommand::all;
  const bool want_kam = cmd == Subcommand::kam || cmd == Subcommand::all;

  const ojson cfg = config_json(c);
  Findings F;
  ojson stages = ojson::object();
  ojson skipped = ojson::array();
  std::string summary, csv;

  auto guarded = [&](const char* name, auto&& body) {
    try {
      body();
    } catch (const RegionError& e) {
      F.errors.push_back({"region", std::string(name) + ": " + e.what()});
    } catch (const SingularBlockError& e) {
      F.nongeneric.push_back({"singular-block", std::string(name) + ": " + e.what()});
    } catch (const std::exception& e) {
      F.errors.push_back({"internal", std::string(name) + ": " + e.what()});
    }
  };
  auto blocked = [&] { return !F.errors.empty() || !F.nongeneric.empty(); };

  std::optional<GraphStage> graph;
  std::optional<NormalFormStage> nf;
  if (want_graph || want_strat) {
    guarded("graph", [&] {
      graph = run_graph(c, workers);
      if (want_graph) {
        F.absorb(graph->comps.diagnostics);
        F.absorb(graph->genericity.failures);
        F.absorb(graph->family_diag);
        stages["graph"] = graph_json(*graph);
        summary += graph_summary(*graph);
      }
    });
  }
  if (want_nf) {
    if (blocked() || !graph) {
      skipped.push_back("normal-form");
    } else {
      guarded("normal-form", [&] {
        nf = run_normal_form(c, *graph, workers);
        F.absorb(nf->y.diagnostics);
        F.absorb(nf->fg.diagnostics);
        F.absorb(nf->fg.consistency);
        F.absorb(nf->partition.diagnostics);
        F.absorb(nf->partition.failures);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& f : nf->forms)
          for (const auto& d : f.failures)
            if (seen.insert({d.code, d.message}).second) F.absorb({d});
        F.absorb(nf->kernel.failures);
        if (nf->conservation_defect != 0)
          F.errors.push_back({"conservation", "normal form does not commute with L, M, K: defect " +
                                                  std::to_string(nf->conservation_defect)});
        stages["normal_form"] = normal_form_json(*nf);
        summary += normal_form_summary(*nf);
      });
    }
  }
  if (want_mel) {
    if (blocked() || !nf) {
      skipped.push_back("melnikov");
    } else {
      guarded("melnikov", [&] {
        auto m = run_melnikov(c, *nf, workers);
        F.absorb(m.kernel.failures);
        F.absorb(m.scan.failures);
        if (m.screen.unsound)
          F.errors.push_back({"screen-unsound", std::to_string(m.screen.unsound) +
                                                    " blocks passed the fast screen but are singular"});
        for (const auto& t : m.tecnico)
          if (!t.pass) F.errors.push_back({"measure-lemma", "Monte Carlo measure exceeds the lemma bound"});
        stages["melnikov"] = melnikov_json(m);
        summary += melnikov_summary(m);
      });
    }
  }
  if (want_strat) {
    guarded("stratify", [&] {
      auto s = run_stratify(c, graph ? &*graph : nullptr, workers);
      for (const auto& st : s.levels) {
        F.absorb(st.refinement);
        if (!st.partition_ok)
          F.errors.push_back({"strata-partition", "strata do not partition the box at N=" + std::to_string(st.N)});
        if (!st.counts_ok)
          F.warnings.push_back({"strata-count", "a level exceeds the counting bound at N=" + std::to_string(st.N)});
      }
      stages["stratify"] = stratify_json(s);
      summary += stratify_summary(s);
    });
  }
  if (want_kam) {
    guarded("kam", [&] {
      auto k = run_kam(c, workers);
      for (const auto& r : k.runs)
        if (r.table.excluded)
          F.warnings.push_back({"kam-excluded", "seed " + std::to_string(r.seed) + " " + *r.table.excluded});
      stages["kam"] = kam_json(k);
      summary += kam_summary(k);
      csv = kam_csv(k);
    });
  }

  SessionOutput out;
  out.exit_code = !F.errors.empty() ? 1 : !F.nongeneric.empty() ? 2 : 0;
  const char* status = out.exit_code == 0 ? "ok" : out.exit_code == 2 ? "non-generic" : "error";

  ojson rep;
  rep["schema"] = kReportSchema;
  rep["subcommand"] = subcommand_name(cmd);
  rep["config_hash"] = hex64(fnv1a64(dump_json(cfg)));
  rep["module_versions"] = module_versions();
  rep["seed"] = c.seed;
  rep["status"] = status;
  rep["exit_code"] = out.exit_code;
  rep["config"] = cfg;
  rep["findings"] = ojson{{"nongeneric", diagnostics_json(F.nongeneric)},
                          {"errors", diagnostics_json(F.errors)},
                          {"warnings", diagnostics_json(F.warnings)}};
  rep["skipped"] = skipped;
  rep["stages"] = stages;
  out.report = dump_json(rep);

  std::ostringstream head;
  head << "resonant-nf " << subcommand_name(cmd) << ": " << status << " (exit " << out.exit_code << "), schema "
       << kReportSchema << ", config " << rep["config_hash"].get<std::string>() << "\n";
  out.summary = head.str() + summary;
  for (const auto* group : {&F.nongeneric, &F.errors, &F.warnings})
    for (const auto& d : *group) out.summary += "  [" + d.code + "] " + d.message + "\n";
  for (const auto& s : skipped) out.summary += "  skipped " + s.get<std::string>() + "\n";
  out.csv = csv;
  return out;
}

void write_outputs(const SessionOutput& o, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& data) {
    fs::path p = fs::path(out_dir) / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << data;
    if (!f) throw std::runtime_error("write failed for " + p.string());
  };
  put("report.json", o.report);
  put("summary.txt", o.summary);
  if (!o.csv.empty()) put("decay.csv", o.csv);
}

}  // namespace rnf
