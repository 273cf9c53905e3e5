#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnf/lattice.hpp"

namespace rnf {

// Polynomial in sqrt(xi_1) .. sqrt(xi_n) with rational coefficients. Exponents
// are stored doubled, so {1, 1} means sqrt(xi_1 xi_2).
class HalfPoly {
 public:
  using Exponent = std::vector<int>;

  HalfPoly() = default;
  explicit HalfPoly(int n) : n_(n) {}

  static HalfPoly constant(int n, const mpq_class& c);
  static HalfPoly monomial(const Exponent& twice, const mpq_class& c);
  // c * xi^k for an integer exponent vector k
  static HalfPoly xi_power(const std::vector<int>& k, const mpq_class& c);

  int nvars() const { return n_; }
  const std::map<Exponent, mpq_class>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  mpq_class coeff(const Exponent& twice) const;

  void add_term(const Exponent& twice, const mpq_class& c);

  HalfPoly operator+(const HalfPoly& o) const;
  HalfPoly operator-(const HalfPoly& o) const;
  HalfPoly operator*(const HalfPoly& o) const;
  HalfPoly operator*(const mpq_class& c) const;
  HalfPoly operator-() const { return *this * mpq_class(-1); }
  HalfPoly& operator+=(const HalfPoly& o);
  bool operator==(const HalfPoly& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  HalfPoly derivative(int i) const;
  // Homogeneity degree in xi when every term has the same degree.
  std::optional<mpq_class> degree() const;
  // Sets xi_j = 0 for every j != i.
  HalfPoly restrict_to_axis(int i) const;
  // Variable i of the result is variable perm[i] of *this.
  HalfPoly permuted(const std::vector<int>& perm) const;
  bool has_nonnegative_coefficients() const;

  // Exact rational sums per sqrt-parity class, one floating conversion each.
  double evaluate(const std::vector<double>& xi) const;
  // Plain double evaluation for inner loops; same value up to rounding.
  double evaluate_fast(const std::vector<double>& xi) const;

  std::string to_string() const;

 private:
  int n_ = 0;
  std::map<Exponent, mpq_class> terms_;
};

mpz_class multinomial(int m, const std::vector<int>& k);

// omega . ell for a vector of polynomials
HalfPoly dot(const std::vector<HalfPoly>& w, const IVec& ell);

}  // namespace rnf
