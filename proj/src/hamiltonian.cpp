#include "rnf/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "rnf/parallel.hpp"

namespace rnf {

namespace {

constexpr cplx I(0, 1);

IVec add_or_empty(const IVec& a, const IVec& b) {
  IVec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

double site_weight(const PhaseSpace& sp, int k, const NormParams& np) {
  if (np.a == 0 && np.p == 0) return 1;
  double nk = std::sqrt(static_cast<double>(norm2(sp.sites[k])));
  return std::exp(np.a * nk) * std::pow(std::max(1.0, nk), np.p);
}

}  // namespace

std::shared_ptr<const PhaseSpace> PhaseSpace::make(const std::vector<IVec>& tangential,
                                                   const std::vector<IVec>& sites) {
  auto sp = std::make_shared<PhaseSpace>();
  sp->n = static_cast<int>(tangential.size());
  sp->d = !sites.empty() ? static_cast<int>(sites[0].size())
                         : (!tangential.empty() ? static_cast<int>(tangential[0].size()) : 0);
  sp->tangential = tangential;
  sp->sites = sites;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    sp->mass.push_back(1);
    sp->momentum.push_back(sites[i]);
    sp->energy.push_back(norm2(sites[i]));
    if (!sp->index.emplace(sites[i], static_cast<int>(i)).second)
      throw std::invalid_argument("PhaseSpace: duplicate site " + to_string(sites[i]));
  }
  return sp;
}

std::shared_ptr<const PhaseSpace> PhaseSpace::with_charges(const std::vector<IVec>& tangential,
                                                           const std::vector<IVec>& sites, std::vector<Int> mass,
                                                           std::vector<IVec> momentum, std::vector<Int> energy) {
  auto base = make(tangential, sites);
  if (mass.size() != sites.size() || momentum.size() != sites.size() || energy.size() != sites.size())
    throw std::invalid_argument("PhaseSpace: charge vectors must match the sites");
  auto sp = std::make_shared<PhaseSpace>(*base);
  sp->mass = std::move(mass);
  sp->momentum = std::move(momentum);
  sp->energy = std::move(energy);
  return sp;
}

std::shared_ptr<const PhaseSpace> PhaseSpace::box(const TangentialSites& S, Int radius) {
  const int d = S.d();
  std::vector<IVec> sites;
  IVec k(d, -radius);
  for (;;) {
    if (!S.contains(k)) sites.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[c] == radius) k[c--] = -radius;
    if (c < 0) break;
    ++k[c];
  }
  return make(S.sites(), sites);
}

int PhaseSpace::site(const IVec& k) const {
  auto it = index.find(k);
  return it == index.end() ? -1 : it->second;
}

int total(const SparseExp& e) {
  int t = 0;
  for (const auto& [k, p] : e) t += p;
  return t;
}

int power(const SparseExp& e, int site) {
  auto it = std::lower_bound(e.begin(), e.end(), std::make_pair(site, 0));
  return it != e.end() && it->first == site ? it->second : 0;
}

SparseExp add_exp(const SparseExp& a, const SparseExp& b) {
  SparseExp r;
  r.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

SparseExp add_exp_minus(const SparseExp& a, const SparseExp& b, int k) {
  SparseExp r = add_exp(a, b);
  auto it = std::lower_bound(r.begin(), r.end(), std::make_pair(k, 0));
  if (it == r.end() || it->first != k) throw std::logic_error("add_exp_minus: missing factor");
  if (--it->second == 0) r.erase(it);
  return r;
}

Monomial make_monomial(int n, IVec nu, IVec y, SparseExp alpha, SparseExp beta) {
  Monomial m;
  m.nu = nu.empty() ? IVec(n, 0) : std::move(nu);
  m.y = y.empty() ? IVec(n, 0) : std::move(y);
  if (static_cast<int>(m.nu.size()) != n || static_cast<int>(m.y.size()) != n)
    throw std::invalid_argument("make_monomial: wrong length");
  std::sort(alpha.begin(), alpha.end());
  std::sort(beta.begin(), beta.end());
  auto merge = [](SparseExp e) {
    SparseExp r;
    for (auto [k, p] : e) {
      if (p < 0) throw std::invalid_argument("make_monomial: negative power");
      if (p == 0) continue;
      if (!r.empty() && r.back().first == k)
        r.back().second += p;
      else
        r.emplace_back(k, p);
    }
    return r;
  };
  m.alpha = merge(std::move(alpha));
  m.beta = merge(std::move(beta));
  return m;
}

int degree(const Monomial& m) {
  Int yd = 0;
  for (Int v : m.y) yd += v;
  return static_cast<int>(2 * yd) + total(m.alpha) + total(m.beta);
}

int w_degree(const Monomial& m) { return total(m.alpha) + total(m.beta); }

Int frequency(const Monomial& m) { return norm1(m.nu); }

Monomial conjugate(const Monomial& m) {
  Monomial c;
  c.nu = neg(m.nu);
  c.y = m.y;
  c.alpha = m.beta;
  c.beta = m.alpha;
  return c;
}

Int mass_of(const Monomial& m, const PhaseSpace& sp) {
  Int t = 0;
  for (Int v : m.nu) t += v;
  for (const auto& [k, p] : m.alpha) t += p * sp.mass[k];
  for (const auto& [k, p] : m.beta) t -= p * sp.mass[k];
  return t;
}

IVec momentum_of(const Monomial& m, const PhaseSpace& sp) {
  IVec t(sp.d, 0);
  for (int i = 0; i < sp.n; ++i)
    for (int c = 0; c < sp.d; ++c) t[c] += m.nu[i] * sp.tangential[i][c];
  for (const auto& [k, p] : m.alpha)
    for (int c = 0; c < sp.d; ++c) t[c] += p * sp.momentum[k][c];
  for (const auto& [k, p] : m.beta)
    for (int c = 0; c < sp.d; ++c) t[c] -= p * sp.momentum[k][c];
  return t;
}

Int energy_of(const Monomial& m, const PhaseSpace& sp) {
  Int t = 0;
  for (int i = 0; i < sp.n; ++i) t += m.nu[i] * norm2(sp.tangential[i]);
  for (const auto& [k, p] : m.alpha) t += p * sp.energy[k];
  for (const auto& [k, p] : m.beta) t -= p * sp.energy[k];
  return t;
}

bool conserves(const Monomial& m, const PhaseSpace& sp, bool energy) {
  if (mass_of(m, sp) != 0 || !is_zero(momentum_of(m, sp))) return false;
  return !energy || energy_of(m, sp) == 0;
}

std::string to_string(const Monomial& m, const PhaseSpace& sp) {
  std::string s = "e^{i" + rnf::to_string(m.nu) + ".x} y^" + rnf::to_string(m.y);
  for (const auto& [k, p] : m.alpha) s += " z" + rnf::to_string(sp.sites[k]) + "^" + std::to_string(p);
  for (const auto& [k, p] : m.beta) s += " zb" + rnf::to_string(sp.sites[k]) + "^" + std::to_string(p);
  return s;
}

bool TruncatedHamiltonian::within(const Monomial& m) const {
  return frequency(m) <= cut_.K_x && degree(m) <= cut_.max_degree;
}

void TruncatedHamiltonian::add(const Monomial& m, cplx c) {
  if (c == cplx(0)) return;
  if (!within(m)) {
    debt_ += std::abs(c);
    return;
  }
  auto [it, fresh] = terms_.emplace(m, c);
  if (!fresh) {
    it->second += c;
    if (it->second == cplx(0)) terms_.erase(it);
  }
}

cplx TruncatedHamiltonian::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? cplx(0) : it->second;
}

void TruncatedHamiltonian::drop_zeros() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == cplx(0); });
}

TruncatedHamiltonian& TruncatedHamiltonian::operator+=(const TruncatedHamiltonian& o) {
  if (!sp_) {
    sp_ = o.sp_;
    cut_ = o.cut_;
  } else if (o.sp_ && o.sp_ != sp_) {
    throw std::invalid_argument("TruncatedHamiltonian: phase space mismatch");
  }
  for (const auto& [m, c] : o.terms_) add(m, c);
  debt_ += o.debt_;
  real_flag = real_flag && o.real_flag;
  return *this;
}

TruncatedHamiltonian& TruncatedHamiltonian::operator-=(const TruncatedHamiltonian& o) {
  if (!sp_) {
    sp_ = o.sp_;
    cut_ = o.cut_;
  } else if (o.sp_ && o.sp_ != sp_) {
    throw std::invalid_argument("TruncatedHamiltonian: phase space mismatch");
  }
  for (const auto& [m, c] : o.terms_) add(m, -c);
  debt_ += o.debt_;
  real_flag = real_flag && o.real_flag;
  return *this;
}

TruncatedHamiltonian& TruncatedHamiltonian::operator*=(cplx c) {
  if (c == cplx(0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  debt_ *= std::abs(c);
  if (c.imag() != 0) real_flag = false;
  return *this;
}

TruncatedHamiltonian TruncatedHamiltonian::filtered(const std::function<bool(const Monomial&)>& keep) const {
  TruncatedHamiltonian r = zero_like();
  r.real_flag = real_flag;
  for (const auto& [m, c] : terms_)
    if (keep(m)) r.terms_.emplace_hint(r.terms_.end(), m, c);
  return r;
}

TruncatedHamiltonian TruncatedHamiltonian::zero_like() const { return TruncatedHamiltonian(sp_, cut_); }

TruncatedHamiltonian operator+(TruncatedHamiltonian a, const TruncatedHamiltonian& b) { return a += b; }
TruncatedHamiltonian operator-(TruncatedHamiltonian a, const TruncatedHamiltonian& b) { return a -= b; }
TruncatedHamiltonian operator*(cplx c, TruncatedHamiltonian a) { return a *= c; }

double reality_defect(const TruncatedHamiltonian& H) {
  double worst = 0;
  for (const auto& [m, c] : H.terms()) worst = std::max(worst, std::abs(H.coeff(conjugate(m)) - std::conj(c)));
  return worst;
}

double max_coeff(const TruncatedHamiltonian& H) {
  double worst = 0;
  for (const auto& [m, c] : H.terms()) worst = std::max(worst, std::abs(c));
  return worst;
}

void add_bracket(const Monomial& mf, cplx cf, const Monomial& mg, cplx cg, TruncatedHamiltonian& out) {
  const int n = static_cast<int>(mf.nu.size());
  const cplx c = cf * cg;
  IVec nu = add_or_empty(mf.nu, mg.nu);
  for (int j = 0; j < n; ++j) {
    Int a = mf.y[j] * mg.nu[j] - mf.nu[j] * mg.y[j];
    if (a == 0) continue;
    Monomial r;
    r.nu = nu;
    r.y = add_or_empty(mf.y, mg.y);
    --r.y[j];
    r.alpha = add_exp(mf.alpha, mg.alpha);
    r.beta = add_exp(mf.beta, mg.beta);
    out.add(r, I * c * static_cast<double>(a));
  }
  auto w_term = [&](int k) {
    int s = power(mf.beta, k) * power(mg.alpha, k) - power(mf.alpha, k) * power(mg.beta, k);
    if (s == 0) return;
    Monomial r;
    r.nu = nu;
    r.y = add_or_empty(mf.y, mg.y);
    r.alpha = add_exp_minus(mf.alpha, mg.alpha, k);
    r.beta = add_exp_minus(mf.beta, mg.beta, k);
    out.add(r, I * c * static_cast<double>(s));
  };
  // each site of f once
  std::size_t i = 0, j = 0;
  while (i < mf.alpha.size() || j < mf.beta.size()) {
    int k;
    if (j == mf.beta.size() || (i < mf.alpha.size() && mf.alpha[i].first < mf.beta[j].first)) {
      k = mf.alpha[i++].first;
    } else if (i == mf.alpha.size() || mf.beta[j].first < mf.alpha[i].first) {
      k = mf.beta[j++].first;
    } else {
      k = mf.alpha[i].first;
      ++i;
      ++j;
    }
    w_term(k);
  }
}

TruncatedHamiltonian poisson(const TruncatedHamiltonian& F, const TruncatedHamiltonian& G, int workers) {
  if (F.space_ptr() != G.space_ptr() || !(F.cutoffs() == G.cutoffs()))
    throw std::invalid_argument("poisson: cutoff or phase space mismatch");
  const PhaseSpace& sp = F.space();
  using Term = std::pair<const Monomial*, cplx>;
  std::vector<Term> fs, gs;
  for (const auto& [m, c] : F.terms()) fs.emplace_back(&m, c);
  for (const auto& [m, c] : G.terms()) gs.emplace_back(&m, c);

  std::vector<std::vector<int>> g_alpha(sp.size()), g_beta(sp.size());
  std::vector<int> g_xdep, g_ydep;
  for (std::size_t gi = 0; gi < gs.size(); ++gi) {
    const Monomial& m = *gs[gi].first;
    for (const auto& [k, p] : m.alpha) g_alpha[k].push_back(static_cast<int>(gi));
    for (const auto& [k, p] : m.beta) g_beta[k].push_back(static_cast<int>(gi));
    if (!is_zero(m.nu)) g_xdep.push_back(static_cast<int>(gi));
    if (!is_zero(m.y)) g_ydep.push_back(static_cast<int>(gi));
  }

  constexpr std::size_t kChunks = 64;
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(1, fs.size()));
  std::vector<TruncatedHamiltonian> part(chunks, F.zero_like());
  parallel_for(chunks, workers, [&](std::size_t ch) {
    TruncatedHamiltonian& out = part[ch];
    std::vector<int> cand;
    const std::size_t lo = fs.size() * ch / chunks, hi = fs.size() * (ch + 1) / chunks;
    for (std::size_t fi = lo; fi < hi; ++fi) {
      const Monomial& mf = *fs[fi].first;
      cand.clear();
      for (const auto& [k, p] : mf.beta) cand.insert(cand.end(), g_alpha[k].begin(), g_alpha[k].end());
      for (const auto& [k, p] : mf.alpha) cand.insert(cand.end(), g_beta[k].begin(), g_beta[k].end());
      if (!is_zero(mf.y)) cand.insert(cand.end(), g_xdep.begin(), g_xdep.end());
      if (!is_zero(mf.nu)) cand.insert(cand.end(), g_ydep.begin(), g_ydep.end());
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      for (int gi : cand) add_bracket(mf, fs[fi].second, *gs[gi].first, gs[gi].second, out);
    }
  });
  TruncatedHamiltonian out = F.zero_like();
  for (const auto& p : part) out += p;
  out.real_flag = F.real_flag && G.real_flag;
  return out;
}

namespace {

struct NormParts {
  std::vector<double> x;  // per j
  double y = 0;
  double z = 0;
  double zb = 0;
};

NormParts norm_parts(const TruncatedHamiltonian& H, const NormParams& np) {
  const PhaseSpace& sp = H.space();
  NormParts out;
  out.x.assign(sp.n, 0);
  std::vector<double> w(sp.size());
  for (int k = 0; k < sp.size(); ++k) w[k] = site_weight(sp, k, np);
  const double r2 = np.r * np.r;
  for (const auto& [m, c] : H.terms()) {
    const double ac = std::abs(c);
    double b = std::exp(np.s * static_cast<double>(frequency(m)));
    for (Int v : m.y) b *= std::pow(r2, static_cast<double>(v));
    for (const auto& [k, p] : m.alpha) b *= std::pow(np.r / w[k], p);
    for (const auto& [k, p] : m.beta) b *= std::pow(np.r / w[k], p);
    for (int j = 0; j < sp.n; ++j) {
      if (m.y[j] > 0) out.x[j] += ac * static_cast<double>(m.y[j]) * b / r2;
      out.y += ac * std::abs(static_cast<double>(m.nu[j])) * b;
    }
    for (const auto& [k, p] : m.beta) out.z += ac * p * b * w[k] * w[k] / np.r;
    for (const auto& [k, p] : m.alpha) out.zb += ac * p * b * w[k] * w[k] / np.r;
  }
  return out;
}

}  // namespace

double majorant_norm(const TruncatedHamiltonian& H, const NormParams& np) {
  if (H.empty()) return 0;
  NormParts p = norm_parts(H, np);
  double xm = 0;
  for (double v : p.x) xm = std::max(xm, v);
  return xm / np.s + p.y / (np.r * np.r) + (p.z + p.zb) / np.r;
}

double majorant_norm_y(const TruncatedHamiltonian& H, const NormParams& np) {
  if (H.empty()) return 0;
  return norm_parts(H, np).y / (np.r * np.r);
}

double majorant_norm_w(const TruncatedHamiltonian& H, const NormParams& np) {
  if (H.empty()) return 0;
  NormParts p = norm_parts(H, np);
  return (p.z + p.zb) / np.r;
}

double lambda_norm(const std::function<TruncatedHamiltonian(const std::vector<double>&)>& H_of_xi,
                   const std::vector<double>& xi, double lambda, int ell, const NormParams& np) {
  const int n = static_cast<int>(xi.size());
  const double h = lambda / 100;
  double total_norm = 0;
  std::vector<int> k(n, 0);
  auto binom = [](int m, int j) {
    double r = 1;
    for (int i = 1; i <= j; ++i) r = r * (m - j + i) / i;
    return r;
  };
  // multi-indices with |k| <= ell
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == n) {
      int order = 0;
      for (int v : k) order += v;
      // tensor product of centered stencils
      std::vector<std::pair<std::vector<double>, double>> pts{{xi, 1.0}};
      for (int c = 0; c < n; ++c) {
        if (k[c] == 0) continue;
        std::vector<std::pair<std::vector<double>, double>> nxt;
        for (const auto& [x, wgt] : pts)
          for (int j = 0; j <= k[c]; ++j) {
            auto y = x;
            y[c] += (0.5 * k[c] - j) * h;
            double sgn = (j % 2) ? -1.0 : 1.0;
            nxt.emplace_back(y, wgt * sgn * binom(k[c], j) / std::pow(h, k[c]));
          }
        pts = std::move(nxt);
      }
      TruncatedHamiltonian acc;
      for (const auto& [x, wgt] : pts) acc += cplx(wgt) * H_of_xi(x);
      total_norm += std::pow(lambda, order) * majorant_norm(acc, np);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[i] = v;
      self(self, i + 1, left - v);
    }
    k[i] = 0;
  };
  rec(rec, 0, ell);
  return total_norm;
}

KamPartition KamPartition::singletons(int sites) {
  KamPartition p;
  p.block_of_site.resize(sites);
  p.s.assign(sites, 1);
  for (int i = 0; i < sites; ++i) p.block_of_site[i] = i;
  return p;
}

bool is_kernel(const Monomial& m, const KamPartition& part) {
  if (degree(m) > 2 || !is_zero(m.nu)) return false;
  const int wd = w_degree(m);
  if (wd == 0) return true;
  if (wd == 1 || !is_zero(m.y)) return false;
  // two factors (site, +1 for z, -1 for zbar)
  std::vector<std::pair<int, int>> f;
  for (const auto& [k, p] : m.alpha)
    for (int i = 0; i < p; ++i) f.emplace_back(k, 1);
  for (const auto& [k, p] : m.beta)
    for (int i = 0; i < p; ++i) f.emplace_back(k, -1);
  const auto [h, a1] = f[0];
  const auto [k, a2] = f[1];
  if (part.block_of_site[h] != part.block_of_site[k]) return false;
  return a1 * part.s[h] == -a2 * part.s[k];
}

bool is_range(const Monomial& m, const KamPartition& part) { return degree(m) <= 2 && !is_kernel(m, part); }

TruncatedHamiltonian project(const TruncatedHamiltonian& H, Selector sel, int j, const KamPartition* part) {
  if ((sel == Selector::kernel || sel == Selector::range) && (!part || part->empty()))
    throw std::invalid_argument("project: kernel/range selection needs a partition");
  switch (sel) {
    case Selector::degree_le:
      return H.filtered([&](const Monomial& m) { return degree(m) <= j; });
    case Selector::degree_eq:
      return H.filtered([&](const Monomial& m) { return degree(m) == j; });
    case Selector::degree_gt:
      return H.filtered([&](const Monomial& m) { return degree(m) > j; });
    case Selector::kernel:
      return H.filtered([&](const Monomial& m) { return is_kernel(m, *part); });
    case Selector::range:
      return H.filtered([&](const Monomial& m) { return is_range(m, *part); });
    case Selector::freq_le:
      return H.filtered([&](const Monomial& m) { return frequency(m) <= j; });
    case Selector::freq_gt:
      return H.filtered([&](const Monomial& m) { return frequency(m) > j; });
  }
  throw std::logic_error("project: unknown selector");
}

std::string to_jsonl(const TruncatedHamiltonian& H) {
  std::string out;
  for (const auto& [m, c] : H.terms()) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json nu = nlohmann::ordered_json::object(), y = nlohmann::ordered_json::object(),
                           a = nlohmann::ordered_json::object(), b = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < m.nu.size(); ++i)
      if (m.nu[i] != 0) nu[std::to_string(i)] = m.nu[i];
    for (std::size_t i = 0; i < m.y.size(); ++i)
      if (m.y[i] != 0) y[std::to_string(i)] = m.y[i];
    for (const auto& [k, p] : m.alpha) a[rnf::to_string(H.space().sites[k])] = p;
    for (const auto& [k, p] : m.beta) b[rnf::to_string(H.space().sites[k])] = p;
    j["nu"] = nu;
    j["i"] = y;
    j["alpha"] = a;
    j["beta"] = b;
    j["re"] = c.real();
    j["im"] = c.imag();
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace rnf
