#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "rnf/resonance_graph.hpp"

using namespace rnf;

namespace {

std::vector<IVec> box_points(int d, Int R) {
  std::vector<IVec> pts;
  IVec k(d, -R);
  for (;;) {
    pts.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[c] == R) k[c--] = -R;
    if (c < 0) break;
    ++k[c];
  }
  return pts;
}

using EdgeKey = std::tuple<IVec, IVec, IVec>;

// All (h, k, ell) in the box solving the momentum and energy equations, by direct search.
void brute_graph(const TangentialSites& S, int q, Int R, std::set<EdgeKey>& black, std::set<EdgeKey>& red) {
  auto X = enumerate_edges(q, S.n());
  auto pts = box_points(S.d(), R);
  for (const auto& e : X.black) {
    auto im = linear_maps(e.ell, S);
    for (const auto& h : pts)
      for (const auto& k : pts)
        if (h <= k && add(im.pi, sub(h, k)) == IVec(S.d(), 0) && im.pi2 + norm2(h) - norm2(k) == 0)
          black.insert({h, k, e.ell});
  }
  for (const auto& e : X.red) {
    auto im = linear_maps(e.ell, S);
    for (const auto& h : pts)
      for (const auto& k : pts)
        if (h <= k && is_zero(add(im.pi, add(h, k))) && im.pi2 + norm2(h) + norm2(k) == 0) red.insert({h, k, e.ell});
  }
}

void check_root_identities(const GeometricBlock& b, const TangentialSites& S, int q) {
  REQUIRE(b.sigma.size() == b.vertices.size());
  CHECK(b.sigma[0] == 1);
  CHECK(b.root == b.vertices.front());
  for (int v = 0; v < b.size(); ++v) {
    const auto& k = b.vertices[v];
    const auto& L = b.L[v];
    const int s = b.sigma[v];
    IVec lhs = k;
    Int e = norm2(k), m = 1;
    for (int i = 0; i < S.n(); ++i) {
      lhs = add(lhs, scale(L[i], S[i]));
      e += L[i] * norm2(S[i]);
      m += L[i];
    }
    CHECK(lhs == scale(s, b.root));
    CHECK(e == s * norm2(b.root));
    CHECK(m == s);
    CHECK(norm1(L) <= 4 * q * S.d());
  }
}

}  // namespace

TEST_CASE("cubic example: black edges match brute force") {
  TangentialSites S({{0, 0}, {1, 0}});
  auto g = build_graph(S, 1, 10, 2);
  std::set<EdgeKey> bb, br;
  brute_graph(S, 1, 10, bb, br);
  std::set<EdgeKey> gb, gr;
  for (const auto& e : g.black) gb.insert({e.h, e.k, e.ell});
  for (const auto& e : g.red) gr.insert({e.h, e.k, e.ell});
  // every stored black edge is oriented h <= k; brute force stores the same orientation
  CHECK(gb == bb);
  CHECK(gr == br);
  std::set<IVec> ys;
  for (const auto& [h, k, ell] : gb) {
    CHECK(h[1] == k[1]);
    CHECK(((h[0] == 0 && k[0] == 1) || (h[0] == 1 && k[0] == 0)));
    ys.insert({h[1]});
  }
  CHECK(ys.size() == 21);
}

TEST_CASE("red pair for S = {(0,0),(2,0)}") {
  TangentialSites S({{0, 0}, {2, 0}});
  auto g = build_graph(S, 1, 6);
  std::set<std::pair<IVec, IVec>> reds;
  for (const auto& e : g.red) {
    CHECK(e.ell == IVec{-1, -1});
    reds.insert({e.h, e.k});
  }
  CHECK(reds == std::set<std::pair<IVec, IVec>>{{{0, 0}, {2, 0}}, {{1, -1}, {1, 1}}});
  std::set<EdgeKey> bb, br;
  brute_graph(S, 1, 6, bb, br);
  std::set<EdgeKey> gb;
  for (const auto& e : g.black) gb.insert({e.h, e.k, e.ell});
  CHECK(gb == bb);
}

TEST_CASE("single tangential site gives no edges") {
  for (int q = 1; q <= 3; ++q) {
    TangentialSites S({{1, 2}});
    auto g = build_graph(S, q, 5);
    CHECK(g.black.empty());
    CHECK(g.red.empty());
    auto cs = components(g, S);
    for (const auto& b : cs.blocks) CHECK(b.size() == 1);
    CHECK(cs.special_is_S);
  }
}

TEST_CASE("cubic components are the vertical pairs plus singletons") {
  TangentialSites S({{0, 0}, {1, 0}});
  auto g = build_graph(S, 1, 20);
  auto cs = components(g, S);
  CHECK(cs.special_is_S);
  CHECK(cs.diagnostics.empty());
  std::set<std::set<IVec>> pairs;
  std::size_t singles = 0;
  for (const auto& b : cs.blocks) {
    if (b.size() == 1) {
      ++singles;
      continue;
    }
    pairs.insert(std::set<IVec>(b.vertices.begin(), b.vertices.end()));
  }
  std::set<std::set<IVec>> expect;
  for (Int y = -20; y <= 20; ++y)
    if (y != 0) expect.insert({{0, y}, {1, y}});
  CHECK(pairs == expect);
  CHECK(singles == 41 * 41 - 2 - 2 * 40);
  for (const auto& b : cs.blocks) check_root_identities(b, S, 1);
  auto rep = genericity_report(cs.blocks, 2);
  CHECK(rep.pass);
}

TEST_CASE("root data examples") {
  TangentialSites S({{0, 0}, {1, 0}});
  auto cs = components(build_graph(S, 1, 10), S);
  const GeometricBlock* pair = nullptr;
  for (const auto& b : cs.blocks)
    if (b.root == IVec{0, 5}) pair = &b;
  REQUIRE(pair);
  CHECK(pair->sigma == std::vector<int>{1, 1});
  CHECK(pair->L[1] == IVec{1, -1});
  CHECK(pair->L[0] == IVec{0, 0});

  TangentialSites R({{0, 0}, {2, 0}});
  auto rc = components(build_graph(R, 1, 8), R);
  const GeometricBlock* red = nullptr;
  for (const auto& b : rc.blocks)
    if (b.root == IVec{1, -1}) red = &b;
  REQUIRE(red);
  REQUIRE(red->size() == 2);
  CHECK(red->has_red());
  CHECK(red->vertices[1] == IVec{1, 1});
  CHECK(red->sigma[1] == -1);
  CHECK(red->L[1] == IVec{-1, -1});
  CHECK(norm2(red->vertices[1]) + red->L[1][0] * 0 + red->L[1][1] * 4 == -norm2(red->root));
  for (const auto& b : rc.blocks) check_root_identities(b, R, 1);

  for (const auto& b : cs.blocks)
    if (b.size() == 1) {
      CHECK(b.sigma[0] == 1);
      CHECK(is_zero(b.L[0]));
    }
}

TEST_CASE("genericity flags a collinear red-free block") {
  GeometricBlock b;
  b.vertices = {{0, 3}, {1, 3}, {2, 3}};
  b.black = {{{0, 3}, {1, 3}, {1, -1, 0}}, {{1, 3}, {2, 3}, {0, 1, -1}}};
  b.root = {0, 3};
  auto rep = genericity_report({b}, 2);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.failures.size() == 1);
  CHECK(rep.failures[0].code == "affine-dependence");
  CHECK(rep.failures[0].message.find("(2,3)") != std::string::npos);

  GeometricBlock big;
  for (Int x = 0; x < 6; ++x) big.vertices.push_back({x, 0});
  big.red = {{{0, 0}, {1, 0}, {-1, -1}}};
  big.root = {0, 0};
  auto r2 = genericity_report({big}, 2);
  CHECK_FALSE(r2.pass);
  CHECK(r2.failures[0].code == "block-size");
}

TEST_CASE("three collinear tangential sites are reported, not crashed on") {
  TangentialSites S({{0, 0}, {1, 0}, {2, 0}});
  auto cs = components(build_graph(S, 1, 8), S);
  auto rep = genericity_report(cs.blocks, 2);
  CHECK_FALSE(rep.pass);
  bool affine = false;
  for (const auto& f : rep.failures) affine = affine || f.code == "affine-dependence";
  CHECK(affine);
}

TEST_CASE("translation families in the cubic example") {
  TangentialSites S({{0, 0}, {1, 0}});
  auto cs = components(build_graph(S, 1, 12), S);
  Diagnostics diag;
  auto fams = translation_classes(cs.blocks, 2, diag);
  CHECK(diag.empty());
  bool pair_fam = false, single_fam = false;
  for (const auto& f : fams) {
    const auto& rep = cs.blocks[f.representative];
    if (rep.size() == 2) {
      pair_fam = true;
      CHECK(f.rank == 1);
      CHECK(f.expected_rank == 1);
      REQUIRE(f.generators.size() == 1);
      CHECK((f.generators[0] == IVec{0, 1} || f.generators[0] == IVec{0, -1}));
    } else if (rep.size() == 1) {
      single_fam = true;
      CHECK(f.rank == 2);
    }
    // roots of translates are translates of the root
    auto key = shape_key(rep);
    for (auto m : f.members) CHECK(shape_key(cs.blocks[m]) == key);
  }
  CHECK(pair_fam);
  CHECK(single_fam);

  GeometricBlock lone;
  lone.vertices = {{0, 0}, {3, 1}};
  lone.black = {{{0, 0}, {3, 1}, {1, -1}}};
  lone.root = {0, 0};
  Diagnostics d2;
  auto f2 = translation_classes({lone}, 2, d2);
  REQUIRE(f2.size() == 1);
  CHECK(f2[0].flagged);
  CHECK(f2[0].generators.empty());
}

TEST_CASE("non-boundary components are stable under box growth") {
  TangentialSites S({{0, 0}, {1, 0}, {0, 1}});
  auto small = components(build_graph(S, 1, 8), S);
  auto large = components(build_graph(S, 1, 12), S);
  std::set<std::vector<IVec>> big;
  for (const auto& b : large.blocks) big.insert(b.vertices);
  for (const auto& b : small.blocks)
    if (!b.boundary) CHECK(big.count(b.vertices) == 1);
}

TEST_CASE("random tangential sites: identities and genericity") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coord(-3, 3);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 3 + trial % 2, q = 1 + (trial / 2) % 2;
    std::set<IVec> ss;
    while (static_cast<int>(ss.size()) < n) ss.insert({coord(rng), coord(rng)});
    TangentialSites S(std::vector<IVec>(ss.begin(), ss.end()));
    auto g = build_graph(S, q, 10, 2);
    for (const auto& e : g.black) {
      auto im = linear_maps(e.ell, S);
      CHECK(add(im.pi, e.h) == e.k);
      CHECK(im.pi2 + norm2(e.h) - norm2(e.k) == 0);
    }
    for (const auto& e : g.red) {
      auto im = linear_maps(e.ell, S);
      CHECK(is_zero(add(im.pi, add(e.h, e.k))));
      CHECK(im.pi2 + norm2(e.h) + norm2(e.k) == 0);
    }
    auto cs = components(g, S);
    if (cs.diagnostics.empty())
      for (const auto& b : cs.blocks) check_root_identities(b, S, q);
    auto rep = genericity_report(cs.blocks, 2);
    for (const auto& b : cs.blocks)
      if (!b.boundary && rep.pass) CHECK(b.size() <= 5);
  }
}
