#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "rnf/birkhoff.hpp"

using namespace rnf;
using cd = std::complex<double>;

namespace {

// Fourier coefficient at `mode` of z^a conj(z)^b, z = sum sqrt(xi_i) e^{i theta_i},
// by averaging on a uniform angle grid fine enough to be exact.
cd fourier_coeff(const std::vector<double>& xi, int a, int b, const IVec& mode) {
  const int n = static_cast<int>(xi.size());
  const int M = a + b + 3;
  std::vector<int> idx(n, 0);
  cd acc = 0;
  long count = 0;
  for (;;) {
    cd z = 0;
    double phase = 0;
    for (int i = 0; i < n; ++i) {
      double th = 2 * M_PI * idx[i] / M;
      z += std::sqrt(xi[i]) * std::polar(1.0, th);
      phase += static_cast<double>(mode[i]) * th;
    }
    acc += std::pow(z, a) * std::pow(std::conj(z), b) * std::polar(1.0, -phase);
    ++count;
    int c = 0;
    while (c < n && idx[c] == M - 1) idx[c++] = 0;
    if (c == n) break;
    ++idx[c];
  }
  return acc / static_cast<double>(count);
}

double edge_oracle(const IVec& ell, int q, const std::vector<double>& xi) {
  if (mass(ell) == 0) return (q + 1) * (q + 1) * fourier_coeff(xi, q, q, ell).real();
  return (q + 1) * q * fourier_coeff(xi, q + 1, q - 1, neg(ell)).real();
}

std::vector<double> random_xi(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.3, 3.0);
  std::vector<double> xi(n);
  for (auto& x : xi) x = u(rng);
  return xi;
}

}  // namespace

TEST_CASE("symmetric A examples") {
  CHECK(symmetric_A(0, 3) == HalfPoly::constant(3, 1));
  HalfPoly a1 = symmetric_A(1, 2);
  CHECK(a1.coeff({2, 0}) == 1);
  CHECK(a1.coeff({0, 2}) == 1);
  HalfPoly a2 = symmetric_A(2, 2);
  CHECK(a2.coeff({4, 0}) == 1);
  CHECK(a2.coeff({2, 2}) == 4);
  CHECK(a2.evaluate({1.0, 1.0}) == doctest::Approx(6.0));
  CHECK(*a2.degree() == 2);
}

TEST_CASE("symmetric A equals the angle average of |z|^{2r}") {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 3; ++n)
    for (int r = 0; r <= 3; ++r) {
      auto xi = random_xi(rng, n);
      double ref = fourier_coeff(xi, r, r, IVec(n, 0)).real();
      CHECK(symmetric_A(r, n).evaluate(xi) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("frequency modulation examples") {
  auto w = omega1(1, 2);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == HalfPoly::xi_power({1, 0}, -2));
  CHECK(w[1] == HalfPoly::xi_power({0, 1}, -2));
  for (int q = 1; q <= 4; ++q)
    for (int n = 1; n <= 3; ++n) {
      auto wq = omega1(q, n);
      for (int i = 0; i < n; ++i) {
        std::vector<int> k(n, 0);
        k[i] = q;
        CHECK(wq[i].restrict_to_axis(i) == HalfPoly::xi_power(k, -q * (q + 1)));
        CHECK(*wq[i].degree() == q);
      }
    }
}

TEST_CASE("frequency modulation is permutation covariant") {
  auto w = omega1(2, 3);
  std::vector<int> perm{2, 0, 1};
  for (int i = 0; i < 3; ++i) CHECK(w[perm[i]].permuted(perm) == w[i]);
}

TEST_CASE("edge coefficient examples") {
  HalfPoly c = edge_coeff(EdgeLabel::make({1, -1}), 1);
  CHECK(c == HalfPoly::monomial({1, 1}, 4));
  CHECK(edge_coeff(EdgeLabel::make({-1, -1}), 1) == HalfPoly::monomial({1, 1}, 4));
  CHECK(c.evaluate({4.0, 9.0}) == doctest::Approx(24.0));
  CHECK_THROWS(edge_coeff(EdgeLabel{{-2, 0}, Color::red}, 1));
}

TEST_CASE("edge coefficients match angle-averaged Fourier coefficients") {
  std::mt19937_64 rng(17);
  for (int q = 1; q <= 3; ++q)
    for (int n = 2; n <= (q == 3 ? 2 : 3); ++n) {
      auto X = enumerate_edges(q, n);
      auto xi = random_xi(rng, n);
      for (const auto* pool : {&X.black, &X.red})
        for (const auto& e : *pool) {
          HalfPoly c = edge_coeff(e, q);
          CHECK(c.evaluate(xi) == doctest::Approx(edge_oracle(e.ell, q, xi)).epsilon(1e-9));
        }
    }
}

TEST_CASE("edge coefficients are homogeneous of degree q with positive coefficients") {
  for (int q = 1; q <= 4; ++q) {
    auto X = enumerate_edges(q, 3);
    for (const auto* pool : {&X.black, &X.red})
      for (const auto& e : *pool) {
        HalfPoly c = edge_coeff(e, q);
        REQUIRE(c.degree());
        CHECK(*c.degree() == q);
        CHECK(c.has_nonnegative_coefficients());
        std::vector<double> xi{0.7, 1.3, 2.1}, txi{1.4, 2.6, 4.2};
        CHECK(c.evaluate(txi) == doctest::Approx(std::pow(2.0, q) * c.evaluate(xi)).epsilon(1e-12));
      }
  }
}

TEST_CASE("edge coefficients commute with relabelling the sites") {
  std::vector<int> perm{1, 2, 0};
  auto X = enumerate_edges(2, 3);
  for (const auto& e : X.black) {
    IVec pe(3);
    for (int i = 0; i < 3; ++i) pe[i] = e.ell[perm[i]];
    CHECK(edge_coeff(e, 2).permuted(perm) == edge_coeff(EdgeLabel::make(pe), 2));
  }
}

TEST_CASE("derivatives of symmetric A keep nonnegative coefficients") {
  for (int r = 1; r <= 4; ++r) {
    HalfPoly a = symmetric_A(r, 3);
    CHECK(a.has_nonnegative_coefficients());
    for (int i = 0; i < 3; ++i) CHECK(a.derivative(i).has_nonnegative_coefficients());
  }
  CHECK(compositions(2, 2) == std::vector<std::vector<int>>{{0, 2}, {1, 1}, {2, 0}});
  CHECK(multinomial(4, {2, 1, 1}) == 12);
}
