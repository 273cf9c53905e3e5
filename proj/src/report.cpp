#include "rnf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rnf {

namespace {

void write(const ojson& j, std::string& out, int indent);

bool scalar(const ojson& j) { return !j.is_object() && !j.is_array(); }

void write_number(const ojson& j, std::string& out) {
  if (j.is_number_integer()) {
    out += j.is_number_unsigned() ? std::to_string(j.get<std::uint64_t>()) : std::to_string(j.get<std::int64_t>());
    return;
  }
  const double x = j.get<double>();
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void write(const ojson& j, std::string& out, int indent) {
  const std::string pad(indent, ' '), inner(indent + 2, ' ');
  if (j.is_number()) {
    write_number(j, out);
  } else if (scalar(j)) {
    out += j.dump();
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    bool flat = true;
    for (const auto& e : j) flat = flat && (scalar(e) || (e.is_array() && e.size() <= 8 &&
                                                           std::all_of(e.begin(), e.end(), scalar)));
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ", ";
        write(j[i], out, indent);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      out += inner;
      write(j[i], out, indent + 2);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "]";
  } else {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    std::size_t i = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++i) {
      out += inner + ojson(it.key()).dump() + ": ";
      write(it.value(), out, indent + 2);
      out += i + 1 < j.size() ? ",\n" : "\n";
    }
    out += pad + "}";
  }
}

ojson vec(const IVec& v) { return ojson(v); }

ojson vecs(const std::vector<IVec>& vs) {
  ojson a = ojson::array();
  for (const auto& v : vs) a.push_back(vec(v));
  return a;
}

ojson cplx_json(std::complex<double> z) { return ojson::array({z.real(), z.imag()}); }

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

std::string dump_json(const ojson& j) {
  std::string out;
  write(j, out, 0);
  out += "\n";
  return out;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ojson module_versions() {
  return ojson{{"lattice_core", "1.0.0"},   {"resonance_graph", "1.0.0"}, {"birkhoff_poly", "1.0.0"},
               {"block_matrices", "1.0.0"}, {"final_graph", "1.0.0"},     {"melnikov", "1.0.0"},
               {"stratification", "1.0.0"}, {"kam_engine", "1.0.0"},      {"cli", "1.0.0"}};
}

ojson config_json(const SessionConfig& c) {
  ojson j;
  j["d"] = c.d;
  j["n"] = c.n;
  j["q"] = c.q;
  j["S"] = vecs(c.S);
  j["box_radius"] = c.box_radius;
  if (c.xi_grid) {
    j["xi"] = ojson{{"grid", {{"lo", c.xi_grid->lo}, {"hi", c.xi_grid->hi}, {"count", c.xi_grid->count}}}};
  } else {
    j["xi"] = ojson{{"samples", c.xi_samples}};
  }
  j["atlas_samples"] = c.atlas_samples;
  j["K0"] = c.K0;
  j["tau"] = c.tau;
  j["rho0"] = c.rho0;
  j["S0"] = c.S0;
  ojson tol = ojson::object();
  for (const auto& [k, v] : c.tolerances) tol[k] = v;
  j["tolerances"] = tol;
  j["seed"] = c.seed;
  ojson m{{"nu_max", c.melnikov.nu_max},
          {"K", c.melnikov.K},
          {"rhos", c.melnikov.rhos},
          {"min_points", c.melnikov.min_points},
          {"root_radius", c.melnikov.root_radius}};
  if (c.melnikov.epsilon) m["epsilon"] = *c.melnikov.epsilon;
  j["melnikov"] = m;
  j["stratify"] = ojson{{"box", c.stratify.box}, {"N", c.stratify.N}};
  j["kam"] = ojson{{"steps", c.kam.steps},     {"seeds", kam_seeds(c)},       {"box", c.kam.box},
                   {"eps_rg", c.kam.eps_rg},   {"eps_p3", c.kam.eps_p3},     {"rg_terms", c.kam.rg_terms},
                   {"p3_terms", c.kam.p3_terms}, {"s0", c.kam.s0},           {"r0", c.kam.r0}};
  return j;
}

ojson diagnostics_json(const Diagnostics& ds) {
  ojson a = ojson::array();
  for (const auto& d : ds) a.push_back(ojson{{"code", d.code}, {"message", d.message}});
  return a;
}

ojson graph_json(const GraphStage& g) {
  ojson j;
  j["vertices"] = g.graph.vertices.size();
  j["black_edges"] = g.graph.black.size();
  j["red_edges"] = g.graph.red.size();
  j["special_component"] = ojson{{"vertices", vecs(g.comps.special.vertices)}, {"equals_S", g.comps.special_is_S}};
  std::size_t singletons = 0;
  ojson comps = ojson::array();
  for (const auto& b : g.comps.blocks) {
    if (b.size() == 1) {
      ++singletons;
      continue;
    }
    comps.push_back(ojson{{"root", vec(b.root)},
                          {"vertices", vecs(b.vertices)},
                          {"sigma", b.sigma},
                          {"L", vecs(b.L)},
                          {"black", b.black.size()},
                          {"red", b.red.size()},
                          {"boundary", b.boundary}});
  }
  j["blocks"] = g.comps.blocks.size();
  j["singletons"] = singletons;
  j["components"] = comps;
  j["genericity"] = ojson{{"pass", g.genericity.pass},
                          {"checked", g.genericity.checked},
                          {"red_blocks", g.genericity.red_blocks}};
  ojson fams = ojson::array();
  for (const auto& f : g.families)
    fams.push_back(ojson{{"root", vec(g.comps.blocks[f.representative].root)},
                         {"members", f.members.size()},
                         {"rank", f.rank},
                         {"expected_rank", f.expected_rank},
                         {"generators", vecs(f.generators)},
                         {"flagged", f.flagged}});
  j["families"] = fams;
  return j;
}

ojson normal_form_json(const NormalFormStage& nf) {
  ojson j;
  j["atlas_samples"] = nf.atlas_samples;
  j["blocks"] = nf.atlas.blocks.size();
  j["canonical_blocks"] = nf.atlas.combs.size();
  ojson br = ojson::array();
  for (const auto& b : nf.atlas.catalog.branches)
    br.push_back(ojson{{"id", b.id}, {"real", b.real}, {"value", cplx_json(b.values.front())}});
  j["branches"] = br;
  ojson ye = ojson::array();
  for (const auto& e : nf.y.edges)
    ye.push_back(ojson{{"ell", vec(e.ell)}, {"color", color_name(e.color)}, {"witnesses", e.witnesses.size()}});
  j["y_edges"] = ye;
  j["final_graph"] = ojson{{"vertices", nf.fg.vertices.size()},
                           {"edges", nf.fg.edges.size()},
                           {"components", nf.fg.components.size()},
                           {"closure_ok", nf.fg.closure_ok}};
  std::size_t good = 0;
  ojson finite = ojson::array();
  for (const auto& r : nf.partition.roots) {
    if (!r.finite) {
      ++good;
      continue;
    }
    ojson sites = ojson::array();
    for (int s : r.sites) sites.push_back(vec(nf.partition.sites[s].k));
    finite.push_back(ojson{{"r", vec(r.r)}, {"theta", r.theta}, {"sites", sites}});
  }
  j["partition"] = ojson{{"sites", nf.partition.sites.size()},
                         {"roots", nf.partition.roots.size()},
                         {"good_roots", good},
                         {"finite_roots", finite}};
  ojson forms = ojson::array();
  for (const auto& f : nf.forms) forms.push_back(ojson{{"xi", f.xi}, {"omega", f.omega}});
  j["forms"] = forms;
  j["frequency_residual"] = nf.frequency_residual;
  j["nilpotent_residual"] = nf.nilpotent_residual;
  j["kernel"] = ojson{{"pairs_tested", nf.kernel.pairs_tested},
                      {"quadratic_kernel", nf.kernel.quadratic_kernel},
                      {"linear_kernel", nf.kernel.linear_kernel},
                      {"x_dependent", nf.kernel.x_dependent},
                      {"cross_block", nf.kernel.cross_block},
                      {"pass", nf.kernel.pass()}};
  j["conservation"] = ojson{{"coefficients_exact", nf.conservation_exact}, {"bracket_defect", nf.conservation_defect}};
  return j;
}

namespace {

ojson scan_json(const ResonantScanReport& s) {
  return ojson{{"K", s.K},
               {"grid_points", s.grid_points},
               {"classes_examined", s.classes_examined},
               {"rhos", s.rhos},
               {"fraction", s.fraction},
               {"census", s.census},
               {"census_bound", s.census_bound},
               {"monotone", s.monotone}};
}

}  // namespace

ojson melnikov_json(const MelnikovStage& m) {
  ojson j;
  j["epsilon"] = m.epsilon;
  j["M"] = m.M;
  j["rho_from_tau"] = m.rho_tau;
  j["roots_swept"] = m.ts.size();
  j["kernel"] = ojson{{"samples", m.kernel.samples},
                      {"tested", m.kernel.tested},
                      {"kernel_blocks", m.kernel.kernel_blocks},
                      {"kernel_singular", m.kernel.kernel_singular},
                      {"unexpected_singular", m.kernel.unexpected_singular},
                      {"min_det_ratio", m.kernel.min_ratio},
                      {"pass", m.kernel.pass()}};
  j["scan"] = scan_json(m.scan);
  j["scan_coarse"] = scan_json(m.scan_coarse);
  j["screen"] = ojson{{"invertible_fast", m.screen.fast},
                      {"needs_full_check", m.screen.full},
                      {"singular", m.screen.singular},
                      {"unsound", m.screen.unsound}};
  ojson t = ojson::array();
  const char* names[] = {"x on [0,1]", "x^2 on [-1,1]", "x1 on [0,1]^2"};
  const double alphas[] = {0.1, 0.01};
  for (std::size_t i = 0; i < m.tecnico.size(); ++i)
    t.push_back(ojson{{"function", names[i % 3]},
                      {"alpha", alphas[i / 3]},
                      {"measure", m.tecnico[i].measure},
                      {"stderr", m.tecnico[i].stderr_},
                      {"bound", m.tecnico[i].bound},
                      {"pass", m.tecnico[i].pass}});
  j["measure_lemma"] = t;
  return j;
}

ojson stratify_json(const StratifyStage& s) {
  ojson a = ojson::array();
  for (const auto& st : s.levels) {
    ojson lv = ojson::array();
    for (int jl = 1; jl <= st.d + 1; ++jl)
      lv.push_back(ojson{{"level", jl}, {"count", st.per_level[jl]}, {"bound", st.level_bound[jl]}});
    ojson strata = ojson::array();
    for (const auto& x : st.strata)
      strata.push_back(ojson{{"basepoint", vec(x.basepoint)},
                             {"generators", vecs(x.generators)},
                             {"codim", x.ell},
                             {"level", x.level},
                             {"members", x.members}});
    a.push_back(ojson{{"N", st.N},
                      {"rho0", st.rho0},
                      {"box", st.box},
                      {"strata", st.strata.size()},
                      {"partition_ok", st.partition_ok},
                      {"counts_ok", st.counts_ok},
                      {"per_level", lv},
                      {"refinement_mismatches", st.refinement.size()},
                      {"dump", strata}});
  }
  return a;
}

ojson kam_json(const KamStage& k) {
  ojson runs = ojson::array();
  for (const auto& r : k.runs) {
    ojson steps = ojson::array();
    for (const auto& row : r.table.rows)
      steps.push_back(ojson{{"m", row.m},
                            {"K", row.K},
                            {"s", row.s},
                            {"r", row.r},
                            {"prg", row.prg},
                            {"F_norm", row.step.F_norm},
                            {"ratio", row.step.ratio},
                            {"residual", row.step.residual},
                            {"truncation_debt", row.step.truncation_debt},
                            {"cube_zero", row.step.cube_zero},
                            {"lie_order", row.step.lie_order}});
    ojson e{{"seed", r.seed},
            {"prg", r.table.prg},
            {"decreasing", r.decreasing},
            {"exponent", r.table.exponent_defined ? ojson(r.table.exponent) : ojson(nullptr)},
            {"linear_exponent", r.linear_exponent ? ojson(*r.linear_exponent) : ojson(nullptr)},
            {"conservation_defect", r.table.conservation_defect},
            {"excluded", r.table.excluded ? ojson(*r.table.excluded) : ojson(nullptr)},
            {"steps", steps}};
    runs.push_back(e);
  }
  return ojson{{"runs", runs}, {"worst_ratio", k.worst_ratio}};
}

std::string kam_csv(const KamStage& k) {
  std::string out;
  bool header = true;
  for (const auto& r : k.runs) {
    std::istringstream in(decay_csv(r.table));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        first = false;
        if (header) out += "seed," + line + "\n";
        header = false;
        continue;
      }
      out += std::to_string(r.seed) + "," + line + "\n";
    }
  }
  return out;
}

std::string graph_summary(const GraphStage& g) {
  std::ostringstream os;
  std::size_t pairs = 0;
  for (const auto& b : g.comps.blocks) pairs += b.size() == 2;
  os << "graph: " << g.graph.vertices.size() << " vertices, " << g.graph.black.size() << " black / "
     << g.graph.red.size() << " red edges, " << g.comps.blocks.size() << " components (" << pairs
     << " pairs), genericity " << (g.genericity.pass ? "ok" : "FAILED") << ", " << g.families.size()
     << " translation families\n";
  return os.str();
}

std::string normal_form_summary(const NormalFormStage& nf) {
  std::ostringstream os;
  std::size_t fin = 0;
  for (const auto& r : nf.partition.roots) fin += r.finite;
  os << "normal form: " << nf.atlas.combs.size() << " canonical blocks, " << nf.atlas.catalog.branches.size()
     << " branches, " << nf.y.edges.size() << " Y-edges, " << nf.partition.roots.size() << " roots (" << fin
     << " finite), " << nf.forms.size() << " xi points, frequency residual " << fmt(nf.frequency_residual)
     << ", kernel check " << (nf.kernel.pass() ? "ok" : "FAILED") << ", conservation defect "
     << fmt(nf.conservation_defect) << "\n";
  return os.str();
}

std::string melnikov_summary(const MelnikovStage& m) {
  std::ostringstream os;
  os << "melnikov: eps " << fmt(m.epsilon) << ", " << m.kernel.tested << " blocks tested, kernel "
     << m.kernel.kernel_singular << "/" << m.kernel.kernel_blocks << " singular, " << m.kernel.unexpected_singular
     << " unexpected singular, min det ratio " << fmt(m.kernel.min_ratio) << "\n";
  os << "  scan K=" << m.scan.K << " on " << m.scan.grid_points << " points:";
  for (std::size_t r = 0; r < m.scan.rhos.size(); ++r)
    os << " rho " << fmt(m.scan.rhos[r]) << " -> " << fmt(m.scan.fraction[r]) << " (" << m.scan.census[r]
       << " classes)";
  os << ", census bound " << fmt(m.scan.census_bound) << ", monotone " << (m.scan.monotone ? "yes" : "no") << "\n";
  os << "  screen: " << m.screen.fast << " fast, " << m.screen.full << " full, " << m.screen.singular
     << " singular, " << m.screen.unsound << " unsound\n";
  std::size_t ok = 0;
  for (const auto& t : m.tecnico) ok += t.pass;
  os << "  measure lemma: " << ok << "/" << m.tecnico.size() << " within bound\n";
  return os.str();
}

std::string stratify_summary(const StratifyStage& s) {
  std::ostringstream os;
  for (const auto& st : s.levels) {
    os << "stratify N=" << st.N << ": " << st.strata.size() << " strata on box " << st.box << ", partition "
       << (st.partition_ok ? "ok" : "FAILED") << ", counts " << (st.counts_ok ? "ok" : "FAILED")
       << ", refinement mismatches " << st.refinement.size() << "\n";
  }
  return os.str();
}

std::string kam_summary(const KamStage& k) {
  std::ostringstream os;
  for (const auto& r : k.runs) {
    os << "kam seed " << r.seed << ": |P_rg|";
    for (double x : r.table.prg) os << " " << fmt(x);
    os << ", exponent " << (r.table.exponent_defined ? fmt(r.table.exponent) : std::string("n/a"))
       << ", linear-order exponent " << (r.linear_exponent ? fmt(*r.linear_exponent) : std::string("n/a"));
    if (r.table.excluded) os << ", stopped at " << *r.table.excluded;
    os << "\n";
  }
  return os.str();
}

}  // namespace rnf
