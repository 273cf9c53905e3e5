#include "rnf/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

#include "rnf/parallel.hpp"

namespace rnf {

namespace {

bool sign_normalized(const IVec& v) {
  for (Int x : v)
    if (x != 0) return x > 0;
  return false;
}

void all_vectors(int d, int N, std::vector<IVec>& out) {
  IVec v(d, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == d) {
      if (sign_normalized(v)) out.push_back(v);
      return;
    }
    for (int x = -left; x <= left; ++x) {
      v[i] = x;
      self(self, i + 1, left - std::abs(x));
    }
    v[i] = 0;
  };
  rec(rec, 0, N);
}

mpz_class zpow(const mpz_class& b, unsigned long e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

}  // namespace

std::vector<IVec> presentation_candidates(int d, int N) {
  std::vector<IVec> out;
  all_vectors(d, N, out);
  return out;
}

Presentation optimal_presentation(const IVec& m, int N, std::vector<IVec> cand) {
  const int d = static_cast<int>(m.size());
  std::vector<std::tuple<Int, Int, IVec>> keyed;
  keyed.reserve(cand.size());
  for (auto& v : cand) {
    Int p = dot(v, m);
    keyed.emplace_back(p < 0 ? -p : p, norm1(v), std::move(v));
  }
  std::sort(keyed.begin(), keyed.end());
  Presentation pr;
  pr.N = N;
  for (const auto& [ap, n1, v] : keyed) {
    pr.v.push_back(v);
    if (integer_rank(pr.v) < static_cast<int>(pr.v.size())) {
      pr.v.pop_back();
      continue;
    }
    pr.p.push_back(dot(v, m));
    if (static_cast<int>(pr.v.size()) == d) break;
  }
  if (static_cast<int>(pr.v.size()) != d) throw std::invalid_argument("optimal_presentation: N too small");
  return pr;
}

Presentation optimal_presentation(const IVec& m, int N) {
  return optimal_presentation(m, N, presentation_candidates(static_cast<int>(m.size()), N));
}

mpq_class rational_rho(double rho0) {
  if (!(rho0 > 0)) throw std::invalid_argument("rho0 must be positive");
  // best rational approximation with denominator <= 64 (continued fractions)
  Int h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = rho0;
  for (int it = 0; it < 40; ++it) {
    Int a = static_cast<Int>(std::floor(x));
    Int h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > 64) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    double frac = x - static_cast<double>(a);
    if (frac < 1e-12) break;
    x = 1.0 / frac;
  }
  if (h1 == 0) return mpq_class(1, 64);
  mpq_class r(static_cast<long>(h1), static_cast<unsigned long>(k1));
  r.canonicalize();
  return r;
}

CutResult find_cut(const Presentation& pres, int N, double rho0) {
  const int d = static_cast<int>(pres.p.size());
  mpq_class rho = rational_rho(rho0);
  const unsigned long b = rho.get_den().get_ui();
  const mpz_class a = rho.get_num();
  const mpz_class Nz(N);
  std::vector<mpz_class> absp(d);
  for (int i = 0; i < d; ++i) absp[i] = static_cast<long>(pres.p[i] < 0 ? -pres.p[i] : pres.p[i]);
  // rho_j = (4d)^j a / b; compare x < N^{rho_j} as x^b < N^{(4d)^j a}
  auto scale_pow = [&](int j) {
    mpz_class e = a * zpow(mpz_class(4 * d), j);
    return zpow(Nz, e.get_ui());
  };
  for (int j = 1; j <= d + 1; ++j) {
    mpz_class lo = scale_pow(j), hi = scale_pow(j + 1);
    for (int ell = 0; ell <= d; ++ell) {
      bool below = ell == 0 || zpow(2 * absp[ell - 1], b) < lo;
      bool above = ell == d || zpow(absp[ell], b) >= zpow(mpz_class(4), b) * hi;
      if (below && above) return {ell, j};
    }
  }
  throw std::runtime_error("find_cut: no cut at any level; rho0 misconfigured");
}

Stratification stratify(Int box, int d, int N, double rho0, int workers) {
  Stratification st;
  st.N = N;
  st.rho0 = rho0;
  st.d = d;
  st.box = box;
  std::vector<IVec> pts;
  IVec k(d, -box);
  for (;;) {
    pts.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[c] == box) k[c--] = -box;
    if (c < 0) break;
    ++k[c];
  }
  auto cand = presentation_candidates(d, N);
  std::vector<Presentation> pres(pts.size());
  std::vector<CutResult> cuts(pts.size());
  parallel_for(pts.size(), workers, [&](std::size_t i) {
    pres[i] = optimal_presentation(pts[i], N, cand);
    cuts[i] = find_cut(pres[i], N, rho0);
  });
  using Key = std::tuple<int, int, std::vector<IVec>, std::vector<Int>>;
  std::map<Key, int> index;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int ell = cuts[i].ell;
    std::vector<IVec> v(pres[i].v.begin(), pres[i].v.begin() + ell);
    std::vector<Int> p(pres[i].p.begin(), pres[i].p.begin() + ell);
    Key key{ell, cuts[i].level, v, p};
    auto [it, fresh] = index.emplace(key, static_cast<int>(st.strata.size()));
    if (fresh) {
      Stratum s;
      s.ell = ell;
      s.level = cuts[i].level;
      s.v = v;
      s.p = p;
      s.basepoint = pts[i];
      s.generators = integer_kernel(v, d);
      st.strata.push_back(std::move(s));
    }
    auto& s = st.strata[it->second];
    ++s.members;
    for (int e = 0; e < ell; ++e)
      if (dot(s.v[e], pts[i]) != s.p[e]) st.partition_ok = false;
    if (!st.stratum_of.emplace(pts[i], it->second).second) st.partition_ok = false;
  }
  std::size_t total = 0;
  for (const auto& s : st.strata) total += s.members;
  if (total != pts.size()) st.partition_ok = false;

  st.per_level.assign(d + 2, 0);
  st.level_bound.assign(d + 2, 0);
  for (const auto& s : st.strata) ++st.per_level[s.level];
  for (int j = 1; j <= d + 1; ++j) {
    double rho_j = std::pow(4.0 * d, j) * rho0;
    st.level_bound[j] = std::pow(static_cast<double>(N), (2.0 * d - 1) * rho_j);
    if (static_cast<double>(st.per_level[j]) > st.level_bound[j]) st.counts_ok = false;
  }
  return st;
}

void refinement_check(Stratification& st, const std::vector<GeometricBlock>& blocks,
                      const std::vector<TranslationFamily>& families) {
  std::map<IVec, std::size_t> family_of_root;
  for (std::size_t f = 0; f < families.size(); ++f)
    for (auto m : families[f].members) family_of_root[blocks[m].root] = f;
  std::vector<std::vector<IVec>> members(st.strata.size());
  for (const auto& [pt, s] : st.stratum_of) members[s].push_back(pt);
  std::vector<std::size_t> bad(families.size(), 0);
  for (const auto& mem : members) {
    std::set<std::size_t> fams;
    for (const auto& pt : mem) {
      auto it = family_of_root.find(pt);
      if (it != family_of_root.end()) fams.insert(it->second);
    }
    // a stratum meeting several families splits them
    if (fams.size() > 1)
      for (auto f : fams) ++bad[f];
  }
  for (std::size_t f = 0; f < families.size(); ++f)
    if (bad[f] > 0)
      st.refinement.push_back({"refinement", "family of block rooted at " +
                                                 to_string(blocks[families[f].representative].root) + " shares " +
                                                 std::to_string(bad[f]) + " strata with other families"});
}

}  // namespace rnf
