#include "rnf/half_poly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rnf {

HalfPoly HalfPoly::constant(int n, const mpq_class& c) {
  HalfPoly p(n);
  p.add_term(Exponent(n, 0), c);
  return p;
}

HalfPoly HalfPoly::monomial(const Exponent& twice, const mpq_class& c) {
  HalfPoly p(static_cast<int>(twice.size()));
  p.add_term(twice, c);
  return p;
}

HalfPoly HalfPoly::xi_power(const std::vector<int>& k, const mpq_class& c) {
  Exponent e(k.size());
  for (size_t i = 0; i < k.size(); ++i) e[i] = 2 * k[i];
  return monomial(e, c);
}

mpq_class HalfPoly::coeff(const Exponent& twice) const {
  auto it = terms_.find(twice);
  return it == terms_.end() ? mpq_class(0) : it->second;
}

void HalfPoly::add_term(const Exponent& twice, const mpq_class& c) {
  if (static_cast<int>(twice.size()) != n_) throw std::invalid_argument("HalfPoly: exponent length mismatch");
  for (int e : twice)
    if (e < 0) throw std::invalid_argument("HalfPoly: negative exponent");
  if (c == 0) return;
  auto [it, fresh] = terms_.emplace(twice, c);
  if (!fresh) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

HalfPoly HalfPoly::operator+(const HalfPoly& o) const {
  HalfPoly r = *this;
  r += o;
  return r;
}

HalfPoly& HalfPoly::operator+=(const HalfPoly& o) {
  if (n_ == 0) n_ = o.n_;
  if (o.n_ != 0 && o.n_ != n_) throw std::invalid_argument("HalfPoly: variable count mismatch");
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

HalfPoly HalfPoly::operator-(const HalfPoly& o) const { return *this + (-o); }

HalfPoly HalfPoly::operator*(const HalfPoly& o) const {
  if (n_ != o.n_) throw std::invalid_argument("HalfPoly: variable count mismatch");
  HalfPoly r(n_);
  for (const auto& [e1, c1] : terms_) {
    for (const auto& [e2, c2] : o.terms_) {
      Exponent e(n_);
      for (int i = 0; i < n_; ++i) e[i] = e1[i] + e2[i];
      r.add_term(e, c1 * c2);
    }
  }
  return r;
}

HalfPoly HalfPoly::operator*(const mpq_class& c) const {
  HalfPoly r(n_);
  if (c == 0) return r;
  for (const auto& [e, v] : terms_) r.terms_.emplace(e, v * c);
  return r;
}

HalfPoly HalfPoly::derivative(int i) const {
  HalfPoly r(n_);
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponent f = e;
    f[i] -= 2;
    if (f[i] < 0) throw std::domain_error("HalfPoly::derivative: xi^(1/2) is not differentiable at 0");
    mpq_class half(e[i], 2);
    half.canonicalize();
    r.add_term(f, c * half);
  }
  return r;
}

std::optional<mpq_class> HalfPoly::degree() const {
  std::optional<mpq_class> deg;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    mpq_class d(s, 2);
    d.canonicalize();
    if (deg && *deg != d) return std::nullopt;
    deg = d;
  }
  return deg;
}

HalfPoly HalfPoly::restrict_to_axis(int i) const {
  HalfPoly r(n_);
  for (const auto& [e, c] : terms_) {
    bool keep = true;
    for (int j = 0; j < n_; ++j)
      if (j != i && e[j] != 0) keep = false;
    if (keep) r.add_term(e, c);
  }
  return r;
}

HalfPoly HalfPoly::permuted(const std::vector<int>& perm) const {
  HalfPoly r(n_);
  for (const auto& [e, c] : terms_) {
    Exponent f(n_);
    for (int i = 0; i < n_; ++i) f[i] = e[perm[i]];
    r.add_term(f, c);
  }
  return r;
}

bool HalfPoly::has_nonnegative_coefficients() const {
  for (const auto& [e, c] : terms_)
    if (c < 0) return false;
  return true;
}

double HalfPoly::evaluate(const std::vector<double>& xi) const {
  if (static_cast<int>(xi.size()) != n_) throw std::invalid_argument("HalfPoly::evaluate: wrong number of variables");
  for (double x : xi)
    if (!(x > 0)) throw std::domain_error("HalfPoly::evaluate: xi must be positive");
  std::vector<mpq_class> xq(xi.begin(), xi.end());
  std::map<std::vector<bool>, mpq_class> groups;
  for (const auto& [e, c] : terms_) {
    std::vector<bool> odd(n_);
    mpq_class v = c;
    for (int i = 0; i < n_; ++i) {
      odd[i] = e[i] % 2 != 0;
      for (int k = 0; k < e[i] / 2; ++k) v *= xq[i];
    }
    groups[odd] += v;
  }
  long double total = 0;
  for (const auto& [odd, v] : groups) {
    long double f = v.get_d();
    for (int i = 0; i < n_; ++i)
      if (odd[i]) f *= std::sqrt(static_cast<long double>(xi[i]));
    total += f;
  }
  return static_cast<double>(total);
}

double HalfPoly::evaluate_fast(const std::vector<double>& xi) const {
  std::vector<double> rt(xi.size());
  for (size_t i = 0; i < xi.size(); ++i) rt[i] = std::sqrt(xi[i]);
  double total = 0;
  for (const auto& [e, c] : terms_) {
    double v = c.get_d();
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < e[i]; ++k) v *= rt[i];
    total += v;
  }
  return total;
}

std::string HalfPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.get_str();
    for (int i = 0; i < n_; ++i)
      if (e[i] != 0) os << " * xi" << (i + 1) << "^(" << e[i] << "/2)";
  }
  return os.str();
}

mpz_class multinomial(int m, const std::vector<int>& k) {
  int s = 0;
  for (int x : k) {
    if (x < 0) return 0;
    s += x;
  }
  if (s != m) return 0;
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), m);
  for (int x : k) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), x);
    r /= f;
  }
  return r;
}

HalfPoly dot(const std::vector<HalfPoly>& w, const IVec& ell) {
  if (w.size() != ell.size()) throw std::invalid_argument("dot: length mismatch");
  HalfPoly r(w.empty() ? 0 : w[0].nvars());
  for (size_t i = 0; i < w.size(); ++i)
    if (ell[i] != 0) r += w[i] * mpq_class(static_cast<long>(ell[i]));
  return r;
}

}  // namespace rnf
