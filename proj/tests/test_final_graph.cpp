#include <set>

#include "doctest.h"
#include "rnf/pipeline.hpp"

using namespace rnf;

namespace {

SessionConfig small_config(std::vector<IVec> S, Int box) {
  SessionConfig c;
  c.d = 2;
  c.n = static_cast<int>(S.size());
  c.q = 1;
  c.S = std::move(S);
  c.box_radius = box;
  c.xi_samples = {{1.0, 1.37}, {1.21, 1.83}, {1.55, 1.12}};
  c.atlas_samples = 6;
  c.tolerances = default_tolerances();
  c.seed = 4;
  return c;
}

struct Built {
  GraphStage g;
  NormalFormStage nf;
};

Built build(const SessionConfig& c) {
  Built b;
  b.g = run_graph(c, 2);
  b.nf = run_normal_form(c, b.g, 2);
  return b;
}

void check_partition(const Built& b, const SessionConfig& c) {
  const auto& p = b.nf.partition;
  CHECK(p.failures.empty());
  CHECK(p.diagnostics.empty());
  // every non-boundary site sits in exactly one D_t
  std::set<IVec> expect;
  for (const auto& blk : b.g.comps.blocks)
    if (!blk.boundary)
      for (const auto& k : blk.vertices) expect.insert(k);
  std::multiset<IVec> covered;
  for (const auto& fr : p.roots)
    for (int s : fr.sites) covered.insert(p.sites[s].k);
  CHECK(covered.size() == expect.size());
  CHECK(std::set<IVec>(covered.begin(), covered.end()) == expect);

  TangentialSites S(c.S);
  for (const auto& s : p.sites) {
    const auto& fr = p.roots[s.t];
    // root momentum identity and the sign rule, recomputed here
    IVec pi(c.d, 0);
    Int eta = 0;
    for (int i = 0; i < c.n; ++i) {
      pi = add(pi, scale(s.ell[i], c.S[i]));
      eta += s.ell[i];
    }
    CHECK(add(pi, s.r) == scale(eta + 1, fr.r));
    CHECK(s.s == s.sigma * (eta + 1));
    CHECK((eta == 0 || eta == -2));
    // geometric root identity
    IVec lhs = s.k;
    for (int i = 0; i < c.n; ++i) lhs = add(lhs, scale(s.L[i], c.S[i]));
    CHECK(lhs == scale(s.sigma, s.r));
  }
}

}  // namespace

TEST_CASE("cubic example: partition, kernel and conservation") {
  auto c = small_config({{0, 0}, {1, 0}}, 10);
  auto b = build(c);
  CHECK(b.nf.atlas.combs.size() == 2);
  CHECK(b.nf.atlas.catalog.branches.size() == 3);
  CHECK(b.nf.y.edges.empty());
  CHECK(b.nf.fg.closure_ok);
  CHECK(b.nf.fg.diagnostics.empty());
  check_partition(b, c);
  for (const auto& fr : b.nf.partition.roots) CHECK_FALSE(fr.finite);
  CHECK(b.nf.kernel.pass());
  CHECK(b.nf.kernel.failures.empty());
  CHECK(b.nf.frequency_residual < 1e-10);
  CHECK(b.nf.nilpotent_residual < 1e-10);
  CHECK(b.nf.conservation_exact);
  CHECK(b.nf.conservation_defect < 1e-12);
  REQUIRE(b.nf.forms.size() == c.xi_samples.size());
  // normal form frequencies: |j_i|^2 - 2 xi_i
  for (std::size_t s = 0; s < c.xi_samples.size(); ++s) {
    CHECK(b.nf.forms[s].omega[0] == doctest::Approx(-2 * c.xi_samples[s][0]));
    CHECK(b.nf.forms[s].omega[1] == doctest::Approx(1 - 2 * c.xi_samples[s][1]));
  }
}

TEST_CASE("red pair example: finite roots and a Y-edge") {
  auto c = small_config({{0, 0}, {2, 0}}, 8);
  auto b = build(c);
  check_partition(b, c);
  int finite = 0;
  for (const auto& fr : b.nf.partition.roots) finite += fr.finite;
  CHECK(finite == 2);
  CHECK(b.nf.y.edges.size() == 1);
  CHECK(b.nf.kernel.pass());
  CHECK(b.nf.conservation_defect < 1e-12);
}

TEST_CASE("normal form blocks carry the root frequency on the diagonal") {
  auto c = small_config({{0, 0}, {2, 0}}, 8);
  auto b = build(c);
  const auto& nf = b.nf.forms[0];
  const auto& p = b.nf.partition;
  REQUIRE(nf.blocks.size() == p.roots.size());
  for (std::size_t t = 0; t < p.roots.size(); ++t) {
    const auto& blk = nf.blocks[t];
    const cdouble want = static_cast<double>(norm2(p.roots[t].r)) + nf.theta[p.roots[t].theta];
    REQUIRE(blk.omega.rows() == static_cast<Eigen::Index>(p.roots[t].sites.size()));
    Eigen::MatrixXcd shifted = blk.omega - want * Eigen::MatrixXcd::Identity(blk.omega.rows(), blk.omega.cols());
    CHECK((shifted - blk.nil).norm() <= 1e-9 * (1 + std::abs(want)));
  }
}

TEST_CASE("phase shift moves Fourier indices by sigma ell") {
  auto c = small_config({{0, 0}, {2, 0}}, 8);
  auto b = build(c);
  const auto& p = b.nf.partition;
  for (int k = 0; k < static_cast<int>(p.sites.size()); k += 7) {
    const auto& s = p.sites[k];
    IVec nu{1, -2};
    IVec got = phase_shift(nu, {{k, 1}, {k, -1}}, p);
    CHECK(got == nu);
    IVec one = phase_shift(nu, {{k, 1}}, p);
    CHECK(one == sub(nu, scale(s.sigma, s.ell)));
  }
  // y shift coefficients are sigma(k) (ell_k)_i
  for (int i = 0; i < c.n; ++i)
    for (const auto& [k, coef] : y_shift(i, p)) CHECK(coef == p.sites[k].sigma * p.sites[k].ell[i]);
}

TEST_CASE("integer relation recovery") {
  std::vector<std::vector<double>> w{{-2.0, -2.6}, {-2.4, -1.8}, {-3.1, -2.2}};
  IVec ell{1, -1};
  std::vector<cdouble> delta;
  for (const auto& row : w) delta.push_back(row[0] * ell[0] + row[1] * ell[1]);
  auto got = solve_relation(w, delta, 1e-8);
  REQUIRE(got);
  CHECK(*got == ell);
  delta[1] += 0.3;
  CHECK_FALSE(solve_relation(w, delta, 1e-8));
}
