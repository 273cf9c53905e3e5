#include "rnf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "rnf/parallel.hpp"
#include "rnf/random.hpp"

namespace rnf {

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"fit", 1e-8},         // cluster separation, relation read-off, Fitting residuals
      {"det_factor", 1e-8},  // |det| > det_factor eps^{2q dim} off the kernel
      {"singular", 1e-10},   // ad(N) blocks in the homological equation
      {"lie", 1e-14},        // Lie series stopping rule
  };
  return t;
}

std::vector<std::uint64_t> kam_seeds(const SessionConfig& c) {
  if (!c.kam.seeds.empty()) return c.kam.seeds;
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < 5; ++i) out.push_back(c.seed + i);
  return out;
}

std::vector<std::vector<double>> xi_points(const SessionConfig& c) {
  if (!c.xi_grid) return c.xi_samples;
  const auto& g = *c.xi_grid;
  const int n = static_cast<int>(g.lo.size());
  std::vector<std::vector<double>> out;
  std::vector<int> idx(n, 0);
  for (;;) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
      x[i] = g.count == 1 ? 0.5 * (g.lo[i] + g.hi[i]) : g.lo[i] + (g.hi[i] - g.lo[i]) * idx[i] / (g.count - 1.0);
    out.push_back(std::move(x));
    int c2 = n - 1;
    while (c2 >= 0 && idx[c2] == g.count - 1) idx[c2--] = 0;
    if (c2 < 0) break;
    ++idx[c2];
  }
  return out;
}

Severity severity(const std::string& code) {
  static const std::set<std::string> nongeneric{
      "special-component", "block-size",  "affine-dependence", "final-red-loop", "final-same-root", "dt-bound",
      "linear-kernel",     "x-dependent", "cross-block",       "singular-block", "kernel-regular",  "y-edge-nonint", "root-data"};
  static const std::set<std::string> warning{"red-boundary", "family-rank", "refinement", "strata-count",
                                                    "kam-excluded"};
  if (nongeneric.count(code)) return Severity::nongeneric;
  if (warning.count(code)) return Severity::warning;
  return Severity::error;
}

void Findings::absorb(const Diagnostics& ds) {
  for (const auto& d : ds) {
    switch (severity(d.code)) {
      case Severity::nongeneric: nongeneric.push_back(d); break;
      case Severity::warning: warnings.push_back(d); break;
      case Severity::error: errors.push_back(d); break;
    }
  }
}

GraphStage run_graph(const SessionConfig& c, int workers) {
  GraphStage st;
  TangentialSites S(c.S);
  st.graph = build_graph(S, c.q, c.box_radius, workers);
  st.comps = components(st.graph, S);
  st.genericity = genericity_report(st.comps.blocks, c.d);
  st.families = translation_classes(st.comps.blocks, c.d, st.family_diag);
  return st;
}

namespace {

// Random points in the bounding box of the xi points, widened when degenerate.
std::vector<std::vector<double>> catalog_samples(const SessionConfig& c, const std::vector<std::vector<double>>& pts) {
  const int n = c.n;
  std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, -lo[0]);
  for (const auto& x : pts)
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
  for (int i = 0; i < n; ++i)
    if (hi[i] - lo[i] < 0.1 * lo[i]) {
      const double m = 0.5 * (lo[i] + hi[i]);
      lo[i] = 0.9 * m;
      hi[i] = 1.1 * m;
    }
  std::mt19937_64 rng(c.seed * 0x9E3779B97F4A7C15ULL + 17);
  std::vector<std::vector<double>> out(c.atlas_samples, std::vector<double>(n));
  for (auto& x : out)
    for (int i = 0; i < n; ++i) x[i] = uniform(rng, lo[i], hi[i]);
  return out;
}

}  // namespace

NormalFormStage run_normal_form(const SessionConfig& c, const GraphStage& g, int workers) {
  NormalFormStage st;
  TangentialSites S(c.S);
  const double tol = c.tol("fit");
  auto pts = xi_points(c);
  st.atlas_samples = catalog_samples(c, pts);
  st.atlas = build_atlas(g.comps.blocks, c.n, c.q, st.atlas_samples, tol, workers);
  st.y = y_edges(st.atlas.catalog, c.q, c.n, tol);
  st.fg = build_final_graph(st.atlas, st.y, S);
  st.partition = finalize_partition(st.atlas, st.fg, S, c.d, tol);
  st.forms.resize(pts.size());
  parallel_for(pts.size(), workers, [&](std::size_t i) {
    st.forms[i] = assemble_normal_form(st.partition, st.atlas, st.fg, S, c.q, pts[i], tol);
  });
  for (const auto& nf : st.forms) {
    st.frequency_residual = std::max(st.frequency_residual, nf.frequency_residual);
    st.nilpotent_residual = std::max(st.nilpotent_residual, nf.nilpotent_residual);
    st.conservation_exact = st.conservation_exact && nf.conservation_exact;
  }
  st.kernel = check_kernel_phase_shift(st.partition, st.y, S);
  if (!st.forms.empty()) {
    auto nfh = normal_form_hamiltonian(st.forms.front(), st.partition, S);
    auto cq = conserved_quantities(nfh.space, nfh.N.cutoffs());
    st.conservation_defect = conservation_defect(nfh.N, cq);
  }
  return st;
}

MelnikovStage run_melnikov(const SessionConfig& c, const NormalFormStage& nf, int workers) {
  MelnikovStage st;
  TangentialSites S(c.S);
  const auto& p = nf.partition;
  if (c.melnikov.epsilon) {
    st.epsilon = *c.melnikov.epsilon;
  } else {
    double sum = 0;
    std::size_t cnt = 0;
    for (const auto& f : nf.forms)
      for (double x : f.xi) {
        sum += x;
        ++cnt;
      }
    st.epsilon = cnt ? std::sqrt(sum / static_cast<double>(cnt)) : 1.0;
  }
  const double side = 2.0 * c.d + 1;
  st.rho_tau = (c.tau - 1) / (3 * (side * side + 4));
  for (int t = 0; t < static_cast<int>(p.roots.size()); ++t)
    if (p.roots[t].finite || norm_inf(p.roots[t].r) <= c.melnikov.root_radius) st.ts.push_back(t);

  st.kernel = kernel_verify(nf.forms, p, S, c.q, st.epsilon, c.melnikov.nu_max, st.ts, c.tol("det_factor"));
  st.scan = resonant_scan(nf.forms, p, S, c.q, st.epsilon, c.melnikov.K, c.melnikov.rhos, st.ts,
                          static_cast<std::size_t>(c.melnikov.min_points), workers);
  std::vector<NormalForm> half;
  for (std::size_t i = 0; i < nf.forms.size(); i += 2) half.push_back(nf.forms[i]);
  st.scan_coarse = resonant_scan(half, p, S, c.q, st.epsilon, c.melnikov.K, c.melnikov.rhos, st.ts,
                                 static_cast<std::size_t>(c.melnikov.min_points), workers);

  if (!nf.forms.empty()) {
    const auto& f0 = nf.forms.front();
    st.M = measure_M(f0, p, S, st.epsilon, c.q);
    ScreenParams prm{st.epsilon, st.M, c.q, c.d};
    const int nu_cap = std::min(c.melnikov.nu_max, static_cast<int>(std::floor(c.S0)));
    for (const auto& id : enumerate_blocks(p, S, std::max(0, nu_cap), st.ts)) {
      switch (invertibility_screen(id, f0, p, S, prm)) {
        case Screen::singular: ++st.screen.singular; break;
        case Screen::needs_full_check: ++st.screen.full; break;
        case Screen::invertible_fast: {
          ++st.screen.fast;
          Eigen::MatrixXcd op = block_operator(id, f0);
          Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op);
          if (svd.singularValues()(op.rows() - 1) <= 1e-12 * std::max(1.0, op.norm())) ++st.screen.unsound;
          break;
        }
      }
    }
  }

  std::mt19937_64 rng(c.seed + 1000003);
  for (double alpha : {0.1, 0.01}) {
    st.tecnico.push_back(
        tecnico_check([](const std::vector<double>& x) { return x[0]; }, 1, 1, alpha, {0}, {1}, 100000, rng));
    st.tecnico.push_back(
        tecnico_check([](const std::vector<double>& x) { return x[0] * x[0]; }, 2, 1, alpha, {-1}, {1}, 100000, rng));
    st.tecnico.push_back(tecnico_check([](const std::vector<double>& x) { return x[0]; }, 1, 1, alpha, {0, 0},
                                       {1, 1}, 100000, rng));
  }
  return st;
}

StratifyStage run_stratify(const SessionConfig& c, const GraphStage* g, int workers) {
  StratifyStage st;
  for (int N : c.stratify.N) {
    auto s = stratify(c.stratify.box, c.d, N, c.rho0, workers);
    if (g) refinement_check(s, g->comps.blocks, g->families);
    st.levels.push_back(std::move(s));
  }
  return st;
}

std::optional<double> linear_order_exponent(const ToyInstance& toy, int K, const std::vector<double>& ts,
                                            const KamOptions& opt) {
  std::vector<double> xs, ys;
  for (double t : ts) {
    TruncatedHamiltonian H = toy.N + cplx(t) * toy.P_rg + toy.P3;
    auto st = kam_step(H, K, toy.partition, opt);
    xs.push_back(t);
    ys.push_back(st.report.prg_after_low);
  }
  return loglog_slope(xs, ys);
}

KamStage run_kam(const SessionConfig& c, int workers) {
  KamStage st;
  for (auto seed : kam_seeds(c)) {
    ToyParams tp;
    tp.box = c.kam.box;
    tp.K0 = c.K0;
    tp.eps_rg = c.kam.eps_rg;
    tp.eps_p3 = c.kam.eps_p3;
    tp.rg_terms = c.kam.rg_terms;
    tp.p3_terms = c.kam.p3_terms;
    tp.seed = seed;
    auto toy = make_toy(tp);
    KamOptions opt;
    opt.norm.s = c.kam.s0;
    opt.norm.r = c.kam.r0;
    opt.singular_tol = c.tol("singular");
    opt.lie_tol = c.tol("lie");
    opt.workers = workers;
    KamRun run;
    run.seed = seed;
    run.table = kam_iterate(toy.H(), toy.partition, c.kam.steps, c.K0, {c.kam.s0, c.kam.r0}, opt);
    run.decreasing = run.table.prg.size() >= 2;
    for (std::size_t i = 1; i < run.table.prg.size(); ++i)
      if (!(run.table.prg[i] < run.table.prg[i - 1])) run.decreasing = false;
    run.linear_exponent = linear_order_exponent(toy, c.K0, {1.0, 0.5, 0.25}, opt);
    for (const auto& r : run.table.rows) st.worst_ratio = std::max(st.worst_ratio, r.step.ratio);
    st.runs.push_back(std::move(run));
  }
  return st;
}

}  // namespace rnf
