#include "rnf/birkhoff.hpp"

#include <stdexcept>

namespace rnf {

std::vector<std::vector<int>> compositions(int m, int n) {
  std::vector<std::vector<int>> out;
  if (n <= 0) return out;
  std::vector<int> k(n, 0);
  // recursive fill, last slot takes the remainder
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == n - 1) {
      k[i] = left;
      out.push_back(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (m >= 0) rec(rec, 0, m);
  return out;
}

HalfPoly symmetric_A(int r, int n) {
  HalfPoly a(n);
  for (const auto& k : compositions(r, n)) {
    mpz_class c = multinomial(r, k);
    a += HalfPoly::xi_power(k, mpq_class(c * c));
  }
  return a;
}

std::vector<HalfPoly> omega1(int q, int n) {
  HalfPoly next = symmetric_A(q + 1, n);
  HalfPoly base = symmetric_A(q, n) * mpq_class((q + 1) * (q + 1));
  std::vector<HalfPoly> w;
  w.reserve(n);
  for (int i = 0; i < n; ++i) w.push_back(next.derivative(i) - base);
  return w;
}

HalfPoly edge_coeff(const EdgeLabel& label, int q) {
  const IVec& ell = label.ell;
  if (!EdgeLabel::admissible(ell)) throw std::invalid_argument("edge_coeff: inadmissible label " + to_string(ell));
  const int n = static_cast<int>(ell.size());
  std::vector<int> plus(n), minus(n);
  HalfPoly::Exponent half(n);
  int np = 0;
  for (int i = 0; i < n; ++i) {
    plus[i] = ell[i] > 0 ? static_cast<int>(ell[i]) : 0;
    minus[i] = ell[i] < 0 ? static_cast<int>(-ell[i]) : 0;
    half[i] = plus[i] + minus[i];
    np += plus[i];
  }
  const bool red = mass(ell) == -2;
  const int span = red ? q - 1 - np : q - np;
  HalfPoly sum(n);
  if (span >= 0) {
    for (const auto& a : compositions(span, n)) {
      std::vector<int> pa(n), ma(n);
      for (int i = 0; i < n; ++i) {
        pa[i] = plus[i] + a[i];
        ma[i] = minus[i] + a[i];
      }
      mpz_class c = red ? multinomial(q + 1, ma) * multinomial(q - 1, pa) : multinomial(q, pa) * multinomial(q, ma);
      if (c != 0) sum += HalfPoly::xi_power(a, mpq_class(c));
    }
  }
  mpq_class pref = red ? mpq_class((q + 1) * q) : mpq_class((q + 1) * (q + 1));
  return HalfPoly::monomial(half, pref) * sum;
}

}  // namespace rnf
