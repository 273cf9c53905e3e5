#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "rnf/stratification.hpp"

using namespace rnf;

namespace {

// Two-dimensional presentation by definition: best vector, then best vector not parallel to it.
Presentation brute_presentation_2d(const IVec& m, int N) {
  auto better = [&](const IVec& a, const IVec& b) {
    Int pa = std::abs(dot(a, m)), pb = std::abs(dot(b, m));
    if (pa != pb) return pa < pb;
    if (norm1(a) != norm1(b)) return norm1(a) < norm1(b);
    return a < b;
  };
  std::vector<IVec> all;
  for (int x = -N; x <= N; ++x)
    for (int y = -N; y <= N; ++y)
      if (std::abs(x) + std::abs(y) <= N && (x > 0 || (x == 0 && y > 0))) all.push_back({x, y});
  IVec first = all[0];
  for (const auto& v : all)
    if (better(v, first)) first = v;
  IVec second;
  bool have = false;
  for (const auto& v : all) {
    if (v[0] * first[1] - v[1] * first[0] == 0) continue;
    if (!have || better(v, second)) {
      second = v;
      have = true;
    }
  }
  Presentation p;
  p.N = N;
  p.v = {first, second};
  p.p = {dot(first, m), dot(second, m)};
  return p;
}

// Floating-point cut: first level j, then first ell with 2|p_ell| < N^rho_j <= |p_{ell+1}| / 4 at the next scale.
CutResult float_cut(const std::vector<Int>& p, int N, double rho0) {
  const int d = static_cast<int>(p.size());
  for (int j = 1; j <= d + 1; ++j) {
    double lo = std::pow(N, std::pow(4.0 * d, j) * rho0), hi = std::pow(N, std::pow(4.0 * d, j + 1) * rho0);
    for (int ell = 0; ell <= d; ++ell) {
      bool below = ell == 0 || 2.0 * std::abs(static_cast<double>(p[ell - 1])) < lo;
      bool above = ell == d || std::abs(static_cast<double>(p[ell])) >= 4 * hi;
      if (below && above) return {ell, j};
    }
  }
  return {-1, -1};
}

}  // namespace

TEST_CASE("presentation of the origin keeps every equation") {
  auto pr = optimal_presentation({0, 0}, 4);
  CHECK(pr.p == std::vector<Int>{0, 0});
  auto cut = find_cut(pr, 4, 0.5);
  CHECK(cut.ell == 2);
  CHECK(cut.level == 1);
  auto pr3 = optimal_presentation({0, 0, 0}, 3);
  CHECK(find_cut(pr3, 3, 0.5).ell == 3);
}

TEST_CASE("presentation of a point far along an axis") {
  auto pr = optimal_presentation({1000, 0}, 8);
  CHECK(pr.v == std::vector<IVec>{{0, 1}, {1, 0}});
  CHECK(pr.p == std::vector<Int>{0, 1000});
  // rho0 = 1/32, d = 2: thresholds sqrt2, 16, 4^16 at N = 4
  auto pr4 = optimal_presentation({1000, 0}, 4);
  auto cut = find_cut(pr4, 4, 1.0 / 32);
  CHECK(cut.ell == 1);
  CHECK(cut.level == 1);
  CHECK(float_cut(pr4.p, 4, 1.0 / 32).ell == 1);
}

TEST_CASE("presentations match the definition by brute force") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> c(-40, 40);
  for (int t = 0; t < 200; ++t) {
    IVec m{c(rng), c(rng)};
    const int N = 2 + t % 5;
    auto got = optimal_presentation(m, N);
    auto want = brute_presentation_2d(m, N);
    CHECK(got.v == want.v);
    CHECK(got.p == want.p);
  }
}

TEST_CASE("presentation does not depend on candidate order") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    IVec m{static_cast<Int>(rng() % 31) - 15, static_cast<Int>(rng() % 31) - 15, static_cast<Int>(rng() % 31) - 15};
    auto cand = presentation_candidates(3, 3);
    auto base = optimal_presentation(m, 3, cand);
    std::shuffle(cand.begin(), cand.end(), rng);
    auto sh = optimal_presentation(m, 3, cand);
    CHECK(sh.v == base.v);
    CHECK(sh.p == base.p);
  }
}

TEST_CASE("candidate directions are sign normalized and within the l1 ball") {
  auto cand = presentation_candidates(2, 3);
  // half of the nonzero points of the l1 ball of radius 3: (1 + 2*3*4) - 1 over 2
  CHECK(cand.size() == 12);
  for (const auto& v : cand) {
    CHECK(norm1(v) <= 3);
    CHECK((v[0] > 0 || (v[0] == 0 && v[1] > 0)));
  }
}

TEST_CASE("rational rho") {
  CHECK(rational_rho(0.5) == mpq_class(1, 2));
  CHECK(rational_rho(0.125) == mpq_class(1, 8));
  CHECK(rational_rho(1.0 / 3) == mpq_class(1, 3));
  CHECK(rational_rho(1e-4) == mpq_class(1, 64));
  CHECK_THROWS(rational_rho(0));
}

TEST_CASE("exact cuts agree with a floating-point oracle") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> c(-300, 300);
  int compared = 0;
  for (int t = 0; t < 400; ++t) {
    IVec m{c(rng), c(rng)};
    for (int N : {4, 8}) {
      auto pr = optimal_presentation(m, N);
      auto want = float_cut(pr.p, N, 1.0 / 32);
      if (want.ell < 0) continue;
      auto got = find_cut(pr, N, 1.0 / 32);
      CHECK(got.ell == want.ell);
      CHECK(got.level == want.level);
      ++compared;
    }
  }
  CHECK(compared > 700);
}

TEST_CASE("stratification partitions the box") {
  for (int N : {4, 8}) {
    auto st = stratify(6, 2, N, 1.0 / 32, 2);
    CHECK(st.partition_ok);
    CHECK(st.stratum_of.size() == 13 * 13);
    std::size_t total = 0, by_level = 0;
    for (const auto& s : st.strata) {
      total += s.members;
      CHECK(static_cast<int>(s.v.size()) == s.ell);
      CHECK(static_cast<int>(s.generators.size()) == 2 - s.ell);
      for (const auto& g : s.generators)
        for (const auto& v : s.v) CHECK(dot(g, v) == 0);
    }
    CHECK(total == 13 * 13);
    for (int j = 1; j <= 3; ++j) {
      by_level += st.per_level[j];
      CHECK(st.level_bound[j] == doctest::Approx(std::pow(N, 3 * std::pow(8.0, j) / 32)));
    }
    CHECK(by_level == st.strata.size());
    for (const auto& [pt, s] : st.stratum_of) {
      const auto& S = st.strata[s];
      for (int e = 0; e < S.ell; ++e) CHECK(dot(S.v[e], pt) == S.p[e]);
      CHECK(S.basepoint <= pt);
    }
  }
}

TEST_CASE("stratification is independent of the worker count") {
  auto a = stratify(5, 2, 4, 0.5, 1);
  auto b = stratify(5, 2, 4, 0.5, 3);
  CHECK(a.counts_ok);
  REQUIRE(a.strata.size() == b.strata.size());
  CHECK(a.stratum_of == b.stratum_of);
  for (std::size_t i = 0; i < a.strata.size(); ++i) CHECK(a.strata[i].basepoint == b.strata[i].basepoint);
}
