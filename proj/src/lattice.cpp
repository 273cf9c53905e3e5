#include "rnf/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rnf {

IVec add(const IVec& a, const IVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: dimension mismatch");
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

IVec sub(const IVec& a, const IVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

IVec neg(const IVec& a) { return scale(-1, a); }

IVec scale(Int c, const IVec& a) {
  IVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

Int dot(const IVec& a, const IVec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  Int s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Int norm2(const IVec& a) { return dot(a, a); }

Int norm1(const IVec& a) {
  Int s = 0;
  for (Int x : a) s += x < 0 ? -x : x;
  return s;
}

Int norm_inf(const IVec& a) {
  Int s = 0;
  for (Int x : a) s = std::max(s, x < 0 ? -x : x);
  return s;
}

IVec unit(int n, int i, Int value) {
  IVec e(n, 0);
  e[i] = value;
  return e;
}

bool is_zero(const IVec& a) {
  return std::all_of(a.begin(), a.end(), [](Int x) { return x == 0; });
}

std::string to_string(const IVec& a) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ')';
  return os.str();
}

TangentialSites::TangentialSites(std::vector<IVec> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("tangential sites: need n >= 1");
  d_ = static_cast<int>(sites_[0].size());
  if (d_ < 1) throw std::invalid_argument("tangential sites: need d >= 1");
  std::set<IVec> seen;
  for (const auto& s : sites_) {
    if (static_cast<int>(s.size()) != d_)
      throw std::invalid_argument("tangential sites: inconsistent dimension");
    if (!seen.insert(s).second)
      throw std::invalid_argument("tangential sites: duplicate site " + to_string(s));
  }
}

bool TangentialSites::contains(const IVec& k) const {
  return std::find(sites_.begin(), sites_.end(), k) != sites_.end();
}

Int TangentialSites::max_norm_inf() const {
  Int m = 0;
  for (const auto& s : sites_) m = std::max(m, norm_inf(s));
  return m;
}

IVec TangentialSites::norms2() const {
  IVec r;
  for (const auto& s : sites_) r.push_back(norm2(s));
  return r;
}

const char* color_name(Color c) { return c == Color::black ? "black" : "red"; }

Int mass(const IVec& ell) { return std::accumulate(ell.begin(), ell.end(), Int{0}); }

bool EdgeLabel::admissible(const IVec& ell) {
  Int eta = mass(ell);
  if (eta != 0 && eta != -2) return false;
  if (is_zero(ell)) return false;
  if (eta == -2) {
    for (size_t i = 0; i < ell.size(); ++i)
      if (ell == unit(static_cast<int>(ell.size()), static_cast<int>(i), -2)) return false;
  }
  return true;
}

EdgeLabel EdgeLabel::make(const IVec& ell) {
  if (!admissible(ell)) throw std::invalid_argument("edge label " + to_string(ell) + " is not admissible");
  return EdgeLabel{ell, mass(ell) == 0 ? Color::black : Color::red};
}

LinearImage linear_maps(const IVec& ell, const TangentialSites& S) {
  if (static_cast<int>(ell.size()) != S.n())
    throw std::invalid_argument("linear_maps: ell has length " + std::to_string(ell.size()) +
                                " but S has " + std::to_string(S.n()) + " sites");
  LinearImage r;
  r.pi.assign(S.d(), 0);
  for (int i = 0; i < S.n(); ++i) {
    r.eta += ell[i];
    for (int c = 0; c < S.d(); ++c) r.pi[c] += ell[i] * S[i][c];
    r.pi2 += ell[i] * norm2(S[i]);
  }
  return r;
}

EdgeSets enumerate_edges(int q, int n) {
  if (q < 1 || n < 1) throw std::invalid_argument("enumerate_edges: q, n must be positive");
  // Level sets of sums of exactly m signed basis vectors.
  std::set<IVec> level{IVec(n, 0)};
  for (int m = 0; m < 2 * q; ++m) {
    std::set<IVec> next;
    for (const auto& v : level) {
      for (int i = 0; i < n; ++i) {
        IVec a = v, b = v;
        ++a[i];
        --b[i];
        next.insert(std::move(a));
        next.insert(std::move(b));
      }
    }
    level = std::move(next);
  }
  EdgeSets out;
  for (const auto& v : level) {
    if (!EdgeLabel::admissible(v)) continue;
    auto e = EdgeLabel::make(v);
    (e.color == Color::black ? out.black : out.red).push_back(e);
  }
  return out;
}

Int quadratic_energy(const EdgeLabel& ell, const TangentialSites& S) {
  auto im = linear_maps(ell.ell, S);
  Int paren = norm2(im.pi) + im.pi2;
  if (paren % 2 != 0) throw std::logic_error("quadratic_energy: odd parenthesis for " + to_string(ell.ell));
  return (1 + im.eta) * (paren / 2);
}

namespace {

// Integer row echelon by Euclidean row operations; returns nonzero rows.
std::vector<IVec> echelon(std::vector<IVec> rows, int d) {
  std::vector<IVec> out;
  int col = 0;
  while (!rows.empty() && col < d) {
    for (;;) {
      int piv = -1;
      for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        if (rows[i][col] == 0) continue;
        if (piv < 0 || std::llabs(rows[i][col]) < std::llabs(rows[piv][col])) piv = i;
      }
      if (piv < 0) break;
      bool done = true;
      for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        if (i == piv || rows[i][col] == 0) continue;
        Int f = rows[i][col] / rows[piv][col];
        for (int c = 0; c < d; ++c) rows[i][c] -= f * rows[piv][c];
        if (rows[i][col] != 0) done = false;
      }
      if (done) {
        IVec p = rows[piv];
        if (p[col] < 0) p = neg(p);
        out.push_back(p);
        rows.erase(rows.begin() + piv);
        break;
      }
    }
    rows.erase(std::remove_if(rows.begin(), rows.end(), [](const IVec& r) { return is_zero(r); }), rows.end());
    ++col;
  }
  return out;
}

}  // namespace

int integer_rank(const std::vector<IVec>& rows) {
  if (rows.empty()) return 0;
  int d = static_cast<int>(rows[0].size());
  return static_cast<int>(echelon(rows, d).size());
}

bool affinely_independent(const std::vector<IVec>& points) {
  if (points.size() <= 1) return true;
  std::vector<IVec> diffs;
  for (size_t i = 1; i < points.size(); ++i) diffs.push_back(sub(points[i], points[0]));
  return integer_rank(diffs) == static_cast<int>(diffs.size());
}

std::vector<IVec> lattice_basis(const std::vector<IVec>& rows) {
  if (rows.empty()) return {};
  auto e = echelon(rows, static_cast<int>(rows[0].size()));
  // reduce entries above pivots to keep the basis small
  for (size_t i = 0; i < e.size(); ++i) {
    size_t pc = 0;
    while (e[i][pc] == 0) ++pc;
    for (size_t j = 0; j < i; ++j) {
      Int f = e[j][pc] / e[i][pc];
      if (e[j][pc] - f * e[i][pc] < 0) --f;
      if (f != 0) e[j] = sub(e[j], scale(f, e[i]));
    }
  }
  return e;
}

std::vector<IVec> integer_kernel(const std::vector<IVec>& rows, int d) {
  // Column operations on [A; I] bring A to column echelon form; the identity
  // part of the zero columns spans the kernel.
  int m = static_cast<int>(rows.size());
  std::vector<IVec> cols(d, IVec(m + d, 0));
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < m; ++r) cols[c][r] = rows[r][c];
    cols[c][m + c] = 1;
  }
  int lead = 0;
  for (int r = 0; r < m && lead < d; ++r) {
    for (;;) {
      int piv = -1;
      for (int c = lead; c < d; ++c) {
        if (cols[c][r] == 0) continue;
        if (piv < 0 || std::llabs(cols[c][r]) < std::llabs(cols[piv][r])) piv = c;
      }
      if (piv < 0) break;
      bool done = true;
      for (int c = lead; c < d; ++c) {
        if (c == piv || cols[c][r] == 0) continue;
        Int f = cols[c][r] / cols[piv][r];
        for (int k = 0; k < m + d; ++k) cols[c][k] -= f * cols[piv][k];
        if (cols[c][r] != 0) done = false;
      }
      if (done) {
        std::swap(cols[piv], cols[lead]);
        ++lead;
        break;
      }
    }
  }
  std::vector<IVec> ker;
  for (int c = lead; c < d; ++c) ker.emplace_back(cols[c].begin() + m, cols[c].end());
  return lattice_basis(ker);
}

}  // namespace rnf
