#include <cmath>
#include <random>

#include "doctest.h"
#include "rnf/hamiltonian.hpp"

using namespace rnf;

namespace {

const cplx I(0, 1);

std::shared_ptr<const PhaseSpace> small_space() {
  return PhaseSpace::make({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}, {-1, 0}, {2, 0}});
}

// A point of the complexified phase space; zbar is independent of z.
struct Point {
  std::vector<double> x, y;
  std::vector<cplx> z, zb;
};

struct Gradient {
  cplx value = 0;
  std::vector<cplx> dx, dy, dz, dzb;
};

Gradient gradient(const TruncatedHamiltonian& H, const Point& P) {
  const int n = static_cast<int>(P.x.size()), ns = static_cast<int>(P.z.size());
  Gradient g;
  g.dx.assign(n, 0);
  g.dy.assign(n, 0);
  g.dz.assign(ns, 0);
  g.dzb.assign(ns, 0);
  for (const auto& [m, c] : H.terms()) {
    double phase = 0;
    for (int j = 0; j < n; ++j) phase += static_cast<double>(m.nu[j]) * P.x[j];
    cplx v = c * std::polar(1.0, phase);
    for (int j = 0; j < n; ++j) v *= std::pow(P.y[j], static_cast<double>(m.y[j]));
    for (const auto& [k, p] : m.alpha) v *= std::pow(P.z[k], p);
    for (const auto& [k, p] : m.beta) v *= std::pow(P.zb[k], p);
    g.value += v;
    for (int j = 0; j < n; ++j) {
      g.dx[j] += I * static_cast<double>(m.nu[j]) * v;
      if (m.y[j] > 0) g.dy[j] += static_cast<double>(m.y[j]) * v / P.y[j];
    }
    for (const auto& [k, p] : m.alpha) g.dz[k] += static_cast<double>(p) * v / P.z[k];
    for (const auto& [k, p] : m.beta) g.dzb[k] += static_cast<double>(p) * v / P.zb[k];
  }
  return g;
}

// {F, G} = sum_j (dy F dx G - dx F dy G) + i sum_k (dzb F dz G - dz F dzb G)
cplx bracket_oracle(const TruncatedHamiltonian& F, const TruncatedHamiltonian& G, const Point& P) {
  auto f = gradient(F, P), g = gradient(G, P);
  cplx out = 0;
  for (std::size_t j = 0; j < P.x.size(); ++j) out += f.dy[j] * g.dx[j] - f.dx[j] * g.dy[j];
  for (std::size_t k = 0; k < P.z.size(); ++k) out += I * (f.dzb[k] * g.dz[k] - f.dz[k] * g.dzb[k]);
  return out;
}

Monomial random_monomial(std::mt19937_64& rng, int n, int sites, int max_nu) {
  std::uniform_int_distribution<int> nu(-max_nu, max_nu), pw(0, 2), y01(0, 1), site(0, sites - 1);
  IVec v(n), y(n);
  for (int j = 0; j < n; ++j) {
    v[j] = nu(rng);
    y[j] = y01(rng);
  }
  std::map<int, int> a, b;
  int na = pw(rng), nb = pw(rng);
  for (int i = 0; i < na; ++i) ++a[site(rng)];
  for (int i = 0; i < nb; ++i) ++b[site(rng)];
  return make_monomial(n, v, y, SparseExp(a.begin(), a.end()), SparseExp(b.begin(), b.end()));
}

TruncatedHamiltonian random_integer_hamiltonian(std::mt19937_64& rng, std::shared_ptr<const PhaseSpace> sp,
                                                int terms) {
  TruncatedHamiltonian H(sp, {});
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int t = 0; t < terms; ++t) H.add(random_monomial(rng, sp->n, sp->size(), 2), cplx(coef(rng), coef(rng)));
  H.drop_zeros();
  return H;
}

}  // namespace

TEST_CASE("bracket conventions") {
  auto sp = small_space();
  TruncatedHamiltonian L(sp, {}), z(sp, {}), y1(sp, {}), e1(sp, {});
  L.add(make_monomial(2, {}, {}, {{1, 1}}, {{1, 1}}), 1);
  z.add(make_monomial(2, {}, {}, {{1, 1}}, {}), 1);
  auto r = poisson(L, z);
  REQUIRE(r.size() == 1);
  CHECK(r.coeff(make_monomial(2, {}, {}, {{1, 1}}, {})) == I);
  y1.add(make_monomial(2, {}, {1, 0}), 1);
  e1.add(make_monomial(2, {1, 0}), 1);
  auto s = poisson(y1, e1);
  REQUIRE(s.size() == 1);
  CHECK(s.coeff(make_monomial(2, {1, 0})) == I);
}

TEST_CASE("bracket agrees with the derivative formula at random points") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.3, 1.2);
  auto sp = small_space();
  for (int trial = 0; trial < 20; ++trial) {
    TruncatedHamiltonian F(sp, {}), G(sp, {});
    std::normal_distribution<double> g(0, 1);
    for (int t = 0; t < 6; ++t) F.add(random_monomial(rng, 2, 4, 2), cplx(g(rng), g(rng)));
    for (int t = 0; t < 6; ++t) G.add(random_monomial(rng, 2, 4, 2), cplx(g(rng), g(rng)));
    Point P;
    P.x = {u(rng), u(rng)};
    P.y = {u(rng), u(rng)};
    for (int k = 0; k < 4; ++k) {
      P.z.push_back(cplx(u(rng), u(rng)));
      P.zb.push_back(cplx(u(rng), -u(rng)));
    }
    cplx want = bracket_oracle(F, G, P);
    cplx got = gradient(poisson(F, G, 1 + trial % 3), P).value;
    CHECK(std::abs(got - want) <= 1e-10 * (1 + std::abs(want)));
  }
}

TEST_CASE("antisymmetry and Jacobi hold exactly on integer coefficients") {
  std::mt19937_64 rng(5);
  auto sp = small_space();
  for (int trial = 0; trial < 10; ++trial) {
    auto F = random_integer_hamiltonian(rng, sp, 5);
    auto G = random_integer_hamiltonian(rng, sp, 5);
    auto H = random_integer_hamiltonian(rng, sp, 5);
    auto anti = poisson(F, G) + poisson(G, F);
    anti.drop_zeros();
    CHECK(anti.empty());
    auto J = poisson(F, poisson(G, H)) + poisson(G, poisson(H, F)) + poisson(H, poisson(F, G));
    J.drop_zeros();
    CHECK(max_coeff(J) == 0);
  }
}

TEST_CASE("brackets of conserving terms conserve") {
  std::mt19937_64 rng(13);
  auto sp = small_space();
  int pairs = 0;
  for (int trial = 0; trial < 400 && pairs < 30; ++trial) {
    auto a = random_monomial(rng, 2, 4, 2), b = random_monomial(rng, 2, 4, 2);
    if (!conserves(a, *sp) || !conserves(b, *sp)) continue;
    ++pairs;
    TruncatedHamiltonian F(sp, {}), G(sp, {});
    F.add(a, 1);
    G.add(b, 1);
    auto FG = poisson(F, G);
    for (const auto& [m, c] : FG.terms()) CHECK(conserves(m, *sp));
  }
  CHECK(pairs > 0);
}

TEST_CASE("majorant norm of a pure Fourier term") {
  auto sp = small_space();
  NormParams np{0.4, 0.3};
  for (IVec nu : {IVec{1, 0}, IVec{2, -1}, IVec{-3, 2}}) {
    TruncatedHamiltonian H(sp, {});
    cplx c(0.7, -1.1);
    H.add(make_monomial(2, nu), c);
    const double k = static_cast<double>(norm1(nu));
    CHECK(majorant_norm(H, np) == doctest::Approx(std::abs(c) * k * std::exp(np.s * k) / (np.r * np.r)));
    CHECK(majorant_norm(cplx(0, 3) * H, np) == doctest::Approx(3 * majorant_norm(H, np)));
  }
}

TEST_CASE("y-part of a quadratic is controlled by its trigonometric degree") {
  std::mt19937_64 rng(14);
  auto sp = small_space();
  std::normal_distribution<double> g(0, 1);
  std::uniform_int_distribution<int> site(0, 3), kind(0, 2);
  for (int K : {2, 4, 8}) {
    std::uniform_int_distribution<int> nu(-K, K);
    for (int trial = 0; trial < 100; ++trial) {
      TruncatedHamiltonian Q(sp, {});
      for (int t = 0; t < 6; ++t) {
        IVec v{nu(rng), 0};
        const int rem = K - static_cast<int>(std::abs(v[0]));
        v[1] = std::uniform_int_distribution<int>(-rem, rem)(rng);
        int h = site(rng), k = site(rng);
        SparseExp a, b;
        switch (kind(rng)) {
          case 0:
            a = {{h, 1}};
            b = {{k, 1}};
            break;
          case 1: a = h == k ? SparseExp{{h, 2}} : SparseExp{{std::min(h, k), 1}, {std::max(h, k), 1}}; break;
          default: b = h == k ? SparseExp{{h, 2}} : SparseExp{{std::min(h, k), 1}, {std::max(h, k), 1}}; break;
        }
        Q.add(make_monomial(2, v, {}, a, b), cplx(g(rng), g(rng)));
      }
      NormParams np{0.5, 0.5};
      CHECK(majorant_norm_y(Q, np) <= K * majorant_norm_w(Q, np) * (1 + 1e-14));
    }
  }
}

TEST_CASE("projections") {
  std::mt19937_64 rng(22);
  auto sp = small_space();
  KamPartition part;
  part.block_of_site = {0, 0, 1, 1};
  part.s = {1, 1, 1, -1};
  auto H = random_integer_hamiltonian(rng, sp, 60);
  auto low = project(H, Selector::degree_le, 2);
  auto ker = project(H, Selector::kernel, 0, &part);
  auto rg = project(H, Selector::range, 0, &part);
  auto sum = ker + rg - low;
  sum.drop_zeros();
  CHECK(sum.empty());
  CHECK(project(ker, Selector::kernel, 0, &part).terms() == ker.terms());
  CHECK(project(rg, Selector::range, 0, &part).terms() == rg.terms());
  CHECK(project(rg, Selector::kernel, 0, &part).empty());
  auto hi = project(H, Selector::degree_gt, 2);
  auto whole = low + hi - H;
  whole.drop_zeros();
  CHECK(whole.empty());
  auto f = project(H, Selector::freq_le, 2) + project(H, Selector::freq_gt, 2) - H;
  f.drop_zeros();
  CHECK(f.empty());
  CHECK_THROWS(project(H, Selector::kernel));

  // same block, equal signs: kernel; different blocks or x-dependent: range
  CHECK(is_kernel(make_monomial(2, {}, {}, {{0, 1}}, {{1, 1}}), part));
  CHECK_FALSE(is_kernel(make_monomial(2, {}, {}, {{0, 1}}, {{2, 1}}), part));
  CHECK(is_range(make_monomial(2, {1, 0}, {}, {{0, 1}}, {{1, 1}}), part));
  CHECK(is_kernel(make_monomial(2, {}, {0, 1}), part));
  // opposite signs: z z is Lagrangian, z zbar is not
  CHECK(is_kernel(make_monomial(2, {}, {}, {{2, 1}, {3, 1}}, {}), part));
  CHECK_FALSE(is_kernel(make_monomial(2, {}, {}, {{2, 1}}, {{3, 1}}), part));

  // kernel is closed under brackets
  auto kk = poisson(ker, ker);
  for (const auto& [m, c] : kk.terms())
    if (degree(m) <= 2) CHECK(is_kernel(m, part));
}

TEST_CASE("brackets preserve reality") {
  std::mt19937_64 rng(41);
  auto sp = small_space();
  auto realify = [&](const TruncatedHamiltonian& A) {
    TruncatedHamiltonian R = A.zero_like();
    for (const auto& [m, c] : A.terms()) {
      R.add(m, c);
      R.add(conjugate(m), std::conj(c));
    }
    R.drop_zeros();
    return R;
  };
  for (int trial = 0; trial < 5; ++trial) {
    auto F = realify(random_integer_hamiltonian(rng, sp, 6));
    auto G = realify(random_integer_hamiltonian(rng, sp, 6));
    CHECK(reality_defect(F) == 0);
    auto B = poisson(F, G);
    CHECK(reality_defect(B) <= 1e-12);
  }
}

TEST_CASE("cutoffs move dropped terms into the debt") {
  auto sp = small_space();
  Cutoffs cut;
  cut.K_x = 1;
  TruncatedHamiltonian H(sp, cut);
  H.add(make_monomial(2, {1, 1}), cplx(3, 4));
  CHECK(H.empty());
  CHECK(H.debt() == doctest::Approx(5.0));
  H.add(make_monomial(2, {1, 0}), 2);
  CHECK(H.size() == 1);
}
