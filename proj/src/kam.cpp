#include "rnf/kam.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "rnf/random.hpp"

namespace rnf {

namespace {

constexpr cplx I(0, 1);

// Nondecreasing index tuples of length m over [0, n).
void multisets(int n, int m, std::vector<std::vector<int>>& out) {
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == m) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i);
      cur.pop_back();
    }
  };
  rec(rec, 0);
}

SparseExp to_exp(const std::vector<int>& idx) {
  SparseExp e;
  for (int i : idx) {
    if (!e.empty() && e.back().first == i)
      ++e.back().second;
    else
      e.emplace_back(i, 1);
  }
  return e;
}

double factorial(int n) {
  double r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double gbinom(double p, int m) {
  double r = 1;
  for (int l = 0; l < m; ++l) r *= (p - l) / (l + 1);
  return r;
}

std::vector<IVec> ball(int n, int K) {
  std::vector<IVec> out;
  IVec v(n, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == n) {
      out.push_back(v);
      return;
    }
    for (int x = -left; x <= left; ++x) {
      v[i] = x;
      self(self, i + 1, left - std::abs(x));
    }
    v[i] = 0;
  };
  rec(rec, 0, K);
  return out;
}

// (site, +1 for z / -1 for zbar) factors
Monomial from_factors(int n, const IVec& nu, const IVec& y, const std::vector<std::pair<int, int>>& f) {
  SparseExp a, b;
  for (auto [k, s] : f) (s > 0 ? a : b).emplace_back(k, 1);
  return make_monomial(n, nu, y, a, b);
}

}  // namespace

NlsModel build_nls(int q, const TangentialSites& S, Int box) {
  if (q < 1) throw std::invalid_argument("build_nls: q must be >= 1");
  const int d = S.d();
  std::vector<IVec> sites;
  IVec k(d, -box);
  for (;;) {
    sites.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[c] == box) k[c--] = -box;
    if (c < 0) break;
    ++k[c];
  }
  for (const auto& j : S.sites())
    if (norm_inf(j) > box) throw std::invalid_argument("build_nls: tangential site outside the box");
  auto sp = PhaseSpace::make({}, sites);
  NlsModel out;
  out.H = TruncatedHamiltonian(sp, {});
  out.H_birk = out.H.zero_like();
  out.F_birk = out.H.zero_like();
  out.P_rest = out.H.zero_like();
  for (int i = 0; i < sp->size(); ++i) {
    Monomial m = make_monomial(0, {}, {}, {{i, 1}}, {{i, 1}});
    cplx c = static_cast<double>(norm2(sites[i]));
    out.H.add(m, c);
    out.H_birk.add(m, c);
  }
  std::vector<std::vector<int>> ms;
  multisets(sp->size(), q + 1, ms);
  std::map<IVec, std::vector<std::pair<SparseExp, double>>> by_momentum;
  for (const auto& t : ms) {
    IVec mom(d, 0);
    for (int i : t) mom = add(mom, sites[i]);
    SparseExp e = to_exp(t);
    double w = factorial(q + 1);
    for (const auto& [i, p] : e) w /= factorial(p);
    by_momentum[mom].emplace_back(std::move(e), w);
  }
  const bool split = S.n() > 0;
  for (const auto& [mom, group] : by_momentum)
    for (const auto& [a, wa] : group)
      for (const auto& [b, wb] : group) {
        Monomial m = make_monomial(0, {}, {}, a, b);
        const cplx c = wa * wb;
        out.H.add(m, c);
        const Int D = energy_of(m, *sp);
        if (D != 0) {
          out.F_birk.add(m, c / (I * static_cast<double>(D)));
          continue;
        }
        int normal = 0;
        for (const auto& [i, p] : a)
          if (!S.contains(sites[i])) normal += p;
        for (const auto& [i, p] : b)
          if (!S.contains(sites[i])) normal += p;
        if (!split || normal <= 2)
          out.H_birk.add(m, c);
        else
          out.P_rest.add(m, c);
      }
  return out;
}

TruncatedHamiltonian to_action_angle(const TruncatedHamiltonian& H_u, const TangentialSites& S,
                                     const std::vector<double>& xi, int y_order, Cutoffs cut) {
  const int n = S.n();
  if (static_cast<int>(xi.size()) != n) throw std::invalid_argument("to_action_angle: xi length");
  if (y_order < 1) throw std::invalid_argument("to_action_angle: y_order must be >= 1");
  for (double v : xi)
    if (!(v > 0)) throw std::invalid_argument("to_action_angle: xi must be positive");
  const PhaseSpace& old = H_u.space();
  std::vector<IVec> normal;
  std::vector<int> tang_of(old.size(), -1), normal_of(old.size(), -1);
  for (int i = 0; i < old.size(); ++i) {
    const IVec& kk = old.sites[i];
    int t = -1;
    for (int j = 0; j < n; ++j)
      if (S[j] == kk) t = j;
    if (t >= 0) {
      tang_of[i] = t;
    } else {
      normal_of[i] = static_cast<int>(normal.size());
      normal.push_back(kk);
    }
  }
  auto sp = PhaseSpace::make(S.sites(), normal);
  TruncatedHamiltonian out(sp, cut);
  for (const auto& [m, c] : H_u.terms()) {
    std::vector<int> a(n, 0), b(n, 0);
    SparseExp al, be;
    for (const auto& [i, p] : m.alpha) {
      if (tang_of[i] >= 0)
        a[tang_of[i]] += p;
      else
        al.emplace_back(normal_of[i], p);
    }
    for (const auto& [i, p] : m.beta) {
      if (tang_of[i] >= 0)
        b[tang_of[i]] += p;
      else
        be.emplace_back(normal_of[i], p);
    }
    IVec nu(n);
    std::vector<std::vector<std::pair<int, double>>> series(n);
    for (int i = 0; i < n; ++i) {
      nu[i] = a[i] - b[i];
      const double p = 0.5 * (a[i] + b[i]);
      if (a[i] + b[i] == 0) {
        series[i].emplace_back(0, 1.0);
        continue;
      }
      for (int e = 0; e <= y_order; ++e) {
        double g = gbinom(p, e);
        if (g != 0) series[i].emplace_back(e, g * std::pow(xi[i], p - e));
      }
    }
    IVec y(n, 0);
    auto rec = [&](auto&& self, int i, cplx acc) -> void {
      if (i == n) {
        Monomial r = make_monomial(n, nu, y, al, be);
        if (is_zero(r.nu) && is_zero(r.y) && r.alpha.empty() && r.beta.empty()) return;
        out.add(r, acc);
        return;
      }
      for (const auto& [e, g] : series[i]) {
        y[i] = e;
        self(self, i + 1, acc * g);
      }
      y[i] = 0;
    };
    rec(rec, 0, c);
  }
  return out;
}

ConservedQuantities conserved_quantities(const std::shared_ptr<const PhaseSpace>& sp, Cutoffs cut) {
  ConservedQuantities q;
  q.L = TruncatedHamiltonian(sp, cut);
  q.K = q.L.zero_like();
  q.M.assign(sp->d, q.L.zero_like());
  const int n = sp->n;
  for (int i = 0; i < n; ++i) {
    Monomial m = make_monomial(n, {}, unit(n, i));
    q.L.add(m, 1.0);
    q.K.add(m, static_cast<double>(norm2(sp->tangential[i])));
    for (int c = 0; c < sp->d; ++c) q.M[c].add(m, static_cast<double>(sp->tangential[i][c]));
  }
  for (int k = 0; k < sp->size(); ++k) {
    Monomial m = make_monomial(n, {}, {}, {{k, 1}}, {{k, 1}});
    q.L.add(m, static_cast<double>(sp->mass[k]));
    q.K.add(m, static_cast<double>(sp->energy[k]));
    for (int c = 0; c < sp->d; ++c) q.M[c].add(m, static_cast<double>(sp->momentum[k][c]));
  }
  return q;
}

double conservation_defect(const TruncatedHamiltonian& H, const ConservedQuantities& q) {
  double worst = max_coeff(poisson(H, q.L));
  worst = std::max(worst, max_coeff(poisson(H, q.K)));
  for (const auto& M : q.M) worst = std::max(worst, max_coeff(poisson(H, M)));
  return worst;
}

NormalFormHamiltonian normal_form_hamiltonian(const NormalForm& nf, const Partition& p, const TangentialSites& S) {
  const int n = S.n();
  std::vector<IVec> sites;
  std::vector<Int> mass;
  std::vector<IVec> mom;
  std::vector<Int> energy;
  NormalFormHamiltonian out;
  for (const auto& s : p.sites) {
    auto im = linear_maps(s.ell, S);
    sites.push_back(s.k);
    mass.push_back(s.sigma * (1 + im.eta));
    mom.push_back(scale(s.sigma, add(im.pi, s.r)));
    energy.push_back(s.sigma * (im.pi2 + norm2(s.r)));
    out.partition.block_of_site.push_back(s.t);
    out.partition.s.push_back(s.s);
  }
  out.space = PhaseSpace::with_charges(S.sites(), sites, mass, mom, energy);
  out.N = TruncatedHamiltonian(out.space, {});
  for (int i = 0; i < n; ++i) out.N.add(make_monomial(n, {}, unit(n, i)), nf.omega[i]);
  for (std::size_t t = 0; t < p.roots.size(); ++t) {
    const auto& D = p.roots[t].sites;
    const auto& W = nf.blocks[t].omega;
    for (std::size_t a = 0; a < D.size(); ++a)
      for (std::size_t b = 0; b < D.size(); ++b) {
        if (W(a, b) == cplx(0)) continue;
        const int sa = p.sites[D[a]].s, sb = p.sites[D[b]].s;
        out.N.add(from_factors(n, {}, {}, {{D[a], sa}, {D[b], -sb}}), W(a, b));
      }
  }
  return out;
}

std::vector<Monomial> range_basis(const PhaseSpace& sp, const KamPartition& part, int K) {
  const int n = sp.n;
  std::map<IVec, std::vector<int>> by_mom;
  for (int k = 0; k < sp.size(); ++k) by_mom[sp.momentum[k]].push_back(k);
  std::set<Monomial> out;
  auto keep = [&](const Monomial& m) {
    if (conserves(m, sp) && is_range(m, part)) out.insert(m);
  };
  const IVec zero(n, 0);
  for (const IVec& nu : ball(n, K)) {
    if (!is_zero(nu)) {
      keep(make_monomial(n, nu));
      for (int j = 0; j < n; ++j) keep(make_monomial(n, nu, unit(n, j)));
    }
    IVec mnu(sp.d, 0);
    Int mass_nu = 0;
    for (int i = 0; i < n; ++i) {
      mass_nu += nu[i];
      mnu = add(mnu, scale(nu[i], sp.tangential[i]));
    }
    for (int h = 0; h < sp.size(); ++h)
      for (int a1 : {1, -1}) {
        keep(from_factors(n, nu, zero, {{h, a1}}));
        IVec rest = add(mnu, scale(a1, sp.momentum[h]));
        for (int a2 : {1, -1}) {
          auto it = by_mom.find(scale(-a2, rest));
          if (it == by_mom.end()) continue;
          for (int k : it->second) {
            if (std::make_pair(k, -a2) < std::make_pair(h, -a1)) continue;
            if (mass_nu + a1 * sp.mass[h] + a2 * sp.mass[k] != 0) continue;
            keep(from_factors(n, nu, zero, {{h, a1}, {k, a2}}));
          }
        }
      }
  }
  return {out.begin(), out.end()};
}

AdNInverse::AdNInverse(const TruncatedHamiltonian& N, const KamPartition& part, int K, double singular_tol)
    : N_(&N), part_(&part), K_(K), tol_(singular_tol), min_sigma_(std::numeric_limits<double>::infinity()) {
  int nb = 0;
  for (int b : part.block_of_site) nb = std::max(nb, b + 1);
  sites_of_block_.assign(nb, {});
  for (std::size_t k = 0; k < part.block_of_site.size(); ++k)
    sites_of_block_[part.block_of_site[k]].push_back(static_cast<int>(k));
}

AdNInverse::Key AdNInverse::key_of(const Monomial& m) const {
  std::vector<int> bl;
  for (const auto& [k, p] : m.alpha)
    for (int i = 0; i < p; ++i) bl.push_back(part_->block_of_site[k]);
  for (const auto& [k, p] : m.beta)
    for (int i = 0; i < p; ++i) bl.push_back(part_->block_of_site[k]);
  std::sort(bl.begin(), bl.end());
  return {m.nu, m.y, bl};
}

const AdNInverse::Block& AdNInverse::block(const Key& key) {
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const auto& [nu, y, bl] = key;
  const PhaseSpace& sp = N_->space();
  const int n = sp.n;
  Block B;
  auto consider = [&](const Monomial& m) {
    if (!conserves(m, sp) || !is_range(m, *part_) || frequency(m) > K_ || !N_->within(m)) return;
    if (B.pos.emplace(m, static_cast<int>(B.members.size())).second) B.members.push_back(m);
  };
  std::vector<std::vector<std::pair<int, int>>> opts;
  for (int t : bl) {
    std::vector<std::pair<int, int>> o;
    for (int k : sites_of_block_[t])
      for (int a : {1, -1}) o.emplace_back(k, a);
    opts.push_back(std::move(o));
  }
  if (bl.empty()) {
    consider(make_monomial(n, nu, y));
  } else if (bl.size() == 1) {
    for (const auto& f : opts[0]) consider(from_factors(n, nu, y, {f}));
  } else if (bl.size() == 2) {
    for (std::size_t i = 0; i < opts[0].size(); ++i)
      for (std::size_t j = (bl[0] == bl[1] ? i : 0); j < opts[1].size(); ++j)
        consider(from_factors(n, nu, y, {opts[0][i], opts[1][j]}));
  } else {
    throw std::invalid_argument("AdNInverse: degree above 2");
  }
  const int dim = static_cast<int>(B.members.size());
  std::ostringstream label;
  label << "nu=" << to_string(nu) << " y=" << to_string(y) << " D_t=[";
  for (std::size_t i = 0; i < bl.size(); ++i) label << (i ? "," : "") << bl[i];
  label << "]";
  if (dim == 0) throw std::invalid_argument("AdNInverse: empty block " + label.str());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    TruncatedHamiltonian col = N_->zero_like();
    for (const auto& [mn, cn] : N_->terms()) add_bracket(mn, cn, B.members[j], 1.0, col);
    for (const auto& [mo, c] : col.terms()) {
      auto p = B.pos.find(mo);
      if (p == B.pos.end())
        throw std::logic_error("AdNInverse: ad(N) leaves block " + label.str() + " via " + to_string(mo, sp));
      M(p->second, j) = c;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(dim - 1);
  min_sigma_ = std::min(min_sigma_, smin);
  if (smin < tol_ * std::max(1.0, smax)) throw SingularBlockError(label.str(), smin);
  B.lu.compute(M);
  max_block_ = std::max<std::size_t>(max_block_, dim);
  return cache_.emplace(key, std::move(B)).first->second;
}

TruncatedHamiltonian AdNInverse::apply(const TruncatedHamiltonian& b) {
  std::map<Key, std::vector<std::pair<const Monomial*, cplx>>> groups;
  for (const auto& [m, c] : b.terms()) groups[key_of(m)].emplace_back(&m, c);
  TruncatedHamiltonian out = b.zero_like();
  for (const auto& [key, items] : groups) {
    const Block& B = block(key);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<int>(B.members.size()));
    for (const auto& [m, c] : items) {
      auto p = B.pos.find(*m);
      if (p == B.pos.end())
        throw std::invalid_argument("AdNInverse: monomial outside the range basis: " + to_string(*m, b.space()));
      rhs(p->second) = c;
    }
    Eigen::VectorXcd x = B.lu.solve(rhs);
    for (int i = 0; i < x.size(); ++i) out.add(B.members[i], x(i));
  }
  out.real_flag = b.real_flag;
  return out;
}

HomologicalResult solve_homological(const TruncatedHamiltonian& N, const TruncatedHamiltonian& P_gt2,
                                    const TruncatedHamiltonian& P_rg, const KamPartition& part,
                                    const HomologicalOptions& opt) {
  HomologicalResult res;
  auto rg_low = [&](const TruncatedHamiltonian& h) {
    return h.filtered([&](const Monomial& m) { return is_range(m, part) && frequency(m) <= opt.K; });
  };
  const TruncatedHamiltonian b = rg_low(P_rg);
  res.rhs_norm = majorant_norm(P_rg, opt.norm);
  AdNInverse Dinv(N, part, opt.K, opt.singular_tol);
  auto A = [&](const TruncatedHamiltonian& G) { return Dinv.apply(rg_low(poisson(P_gt2, G, opt.workers))); };
  TruncatedHamiltonian G0 = Dinv.apply(b);
  TruncatedHamiltonian G1 = A(G0);
  TruncatedHamiltonian G2 = A(G1);
  TruncatedHamiltonian G3 = A(G2);
  res.cube_zero = G3.empty();
  res.F = G0 - G1 + G2;
  res.F.real_flag = P_rg.real_flag && P_gt2.real_flag && N.real_flag;
  TruncatedHamiltonian R = poisson(N, res.F, opt.workers) + rg_low(poisson(P_gt2, res.F, opt.workers)) - b;
  res.residual = majorant_norm(R, opt.norm);
  res.blocks = Dinv.blocks();
  res.max_block = Dinv.max_block();
  res.min_singular = Dinv.min_singular();
  return res;
}

LieSeriesResult lie_transform(const TruncatedHamiltonian& F, const TruncatedHamiltonian& H, const NormParams& np,
                              double rel_tol, int max_order, int workers) {
  LieSeriesResult out{H, 0};
  if (F.empty()) return out;
  const double Hn = std::max(majorant_norm(H, np), std::numeric_limits<double>::min());
  TruncatedHamiltonian term = H;
  for (int k = 1; k <= max_order; ++k) {
    term = poisson(F, term, workers);
    term *= cplx(1.0 / k);
    out.order = k;
    if (term.empty()) return out;
    const double tn = majorant_norm(term, np);
    out.H += term;
    if (tn < rel_tol * Hn) return out;
  }
  throw std::runtime_error("lie_transform: series did not converge within " + std::to_string(max_order) +
                           " orders; step size too large");
}

KamStepResult kam_step(const TruncatedHamiltonian& H, int K, const KamPartition& part, const KamOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  KamStepResult out{H, {}};
  KamStepReport& rep = out.report;
  rep.K = K;
  const TruncatedHamiltonian N = project(H, Selector::kernel, 0, &part);
  const TruncatedHamiltonian Prg = project(H, Selector::range, 0, &part);
  const TruncatedHamiltonian P = project(H, Selector::degree_gt, 2);
  rep.prg_before = majorant_norm(Prg, opt.norm);
  auto finish = [&](const TruncatedHamiltonian& Hp) {
    TruncatedHamiltonian Pp = project(Hp, Selector::range, 0, &part);
    rep.prg_after = majorant_norm(Pp, opt.norm);
    rep.prg_after_low = majorant_norm(project(Pp, Selector::freq_le, K), opt.norm);
    rep.prg_after_uv = majorant_norm(project(Pp, Selector::freq_gt, K), opt.norm);
    rep.ratio = rep.prg_before > 0 ? rep.prg_after / (rep.prg_before * rep.prg_before) : 0;
    rep.truncation_debt = Hp.debt() - H.debt();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  if (project(Prg, Selector::freq_le, K).empty()) {
    finish(H);
    return out;
  }
  HomologicalResult hom = solve_homological(N, P, Prg, part, {K, opt.singular_tol, opt.workers, opt.norm});
  rep.F_norm = majorant_norm(hom.F, opt.norm);
  rep.residual = hom.residual;
  rep.cube_zero = hom.cube_zero;
  LieSeriesResult lie = lie_transform(hom.F, H, opt.norm, opt.lie_tol, opt.lie_max_order, opt.workers);
  rep.lie_order = lie.order;
  out.H = std::move(lie.H);
  finish(out.H);
  return out;
}

std::optional<double> loglog_slope(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    if (a[i] > 0 && b[i] > 0) pts.emplace_back(std::log(a[i]), std::log(b[i]));
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= pts.size();
  my /= pts.size();
  double sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

DecayTable kam_iterate(const TruncatedHamiltonian& H0, const KamPartition& part, int steps, int K0,
                       const Schedule& sched, const KamOptions& opt, int max_steps) {
  if (steps > max_steps) throw std::invalid_argument("kam_iterate: steps above the configured maximum");
  DecayTable t;
  TruncatedHamiltonian H = H0;
  double s = sched.s0, r = sched.r0;
  auto cq = conserved_quantities(H0.space_ptr(), H0.cutoffs());
  auto prg_norm = [&](const TruncatedHamiltonian& h, double s_, double r_) {
    NormParams np = opt.norm;
    np.s = s_;
    np.r = r_;
    return majorant_norm(project(h, Selector::range, 0, &part), np);
  };
  t.prg.push_back(prg_norm(H, s, r));
  t.conservation_defect = conservation_defect(project(H, Selector::kernel, 0, &part), cq);
  int K = K0;
  for (int m = 0; m < steps; ++m) {
    KamOptions o = opt;
    o.norm.s = s;
    o.norm.r = r;
    DecayRow row;
    row.m = m;
    row.K = K;
    row.s = s;
    row.r = r;
    row.prg = t.prg.back();
    try {
      KamStepResult st = kam_step(H, K, part, o);
      row.step = st.report;
      H = std::move(st.H);
    } catch (const SingularBlockError& e) {
      t.excluded = "step " + std::to_string(m) + ": " + e.block();
      break;
    }
    t.rows.push_back(row);
    const double f = 1.0 - std::pow(2.0, -m - 3);
    s *= f;
    r *= f;
    K *= 4;
    t.prg.push_back(prg_norm(H, s, r));
    t.conservation_defect =
        std::max(t.conservation_defect, conservation_defect(project(H, Selector::kernel, 0, &part), cq));
  }
  std::vector<double> a(t.prg.begin(), t.prg.end() - 1), b(t.prg.begin() + 1, t.prg.end());
  if (auto sl = loglog_slope(a, b)) {
    t.exponent = *sl;
    t.exponent_defined = true;
  }
  return t;
}

std::string decay_csv(const DecayTable& t) {
  std::ostringstream os;
  os.precision(17);
  os << "m,K,s,r,prg,prg_next,F_norm,ratio,residual,truncation_debt,lie_order\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    os << r.m << "," << r.K << "," << r.s << "," << r.r << "," << r.prg << "," << t.prg[i + 1] << ","
       << r.step.F_norm << "," << r.step.ratio << "," << r.step.residual << "," << r.step.truncation_debt << ","
       << r.step.lie_order << "\n";
  }
  return os.str();
}

ToyInstance make_toy(const ToyParams& p) {
  ToyInstance toy;
  TangentialSites S({{0, 0}, {1, 0}});
  toy.space = PhaseSpace::box(S, p.box);
  const auto& sp = *toy.space;
  const int n = 2;
  toy.partition = KamPartition::singletons(sp.size());
  const Cutoffs cut{1 << 20, 3};
  toy.N = TruncatedHamiltonian(toy.space, cut);
  toy.P_rg = toy.N.zero_like();
  toy.P3 = toy.N.zero_like();
  // frequencies: integer parts plus fixed incommensurate shifts
  toy.omega = {0.21, 1.57};
  for (int i = 0; i < n; ++i) toy.N.add(make_monomial(n, {}, unit(n, i)), toy.omega[i]);
  for (int k = 0; k < sp.size(); ++k) {
    toy.Omega.push_back(static_cast<double>(norm2(sp.sites[k])) + 0.3141);
    toy.N.add(make_monomial(n, {}, {}, {{k, 1}}, {{k, 1}}), toy.Omega.back());
  }
  std::mt19937_64 rng(p.seed);
  auto rc = [&](double eps) { return eps * cplx(uniform(rng, -1, 1), uniform(rng, -1, 1)); };
  auto add_real = [](TruncatedHamiltonian& h, const Monomial& m, cplx c) {
    Monomial mc = conjugate(m);
    if (mc == m) {
      h.add(m, 2 * c.real());
    } else {
      h.add(m, c);
      h.add(mc, std::conj(c));
    }
  };
  auto basis = range_basis(sp, toy.partition, p.K0 - 1);
  if (!basis.empty())
    for (int t = 0; t < p.rg_terms; ++t) {
      const auto& m = basis[rng() % basis.size()];
      add_real(toy.P_rg, m, rc(p.eps_rg));
    }
  int accepted = 0;
  for (int attempt = 0; attempt < 100000 && accepted < p.p3_terms; ++attempt) {
    const int i = static_cast<int>(rng() % n);
    const int sg = (rng() % 2) ? 1 : -1;
    const int a = static_cast<int>(rng() % sp.size());
    const int b = static_cast<int>(rng() % sp.size());
    IVec nu(n, 0);
    nu[i] = sg;
    // +e_i: z_a zb_b zb_c with c = j_i + a - b; -e_i: z_a z_b zb_c with c = a + b - j_i
    IVec cpos = sg > 0 ? sub(add(S[i], sp.sites[a]), sp.sites[b]) : sub(add(sp.sites[a], sp.sites[b]), S[i]);
    const int c = sp.site(cpos);
    if (c < 0) continue;
    Monomial m = sg > 0 ? from_factors(n, nu, {}, {{a, 1}, {b, -1}, {c, -1}})
                        : from_factors(n, nu, {}, {{a, 1}, {b, 1}, {c, -1}});
    if (!conserves(m, sp)) throw std::logic_error("make_toy: nonconserving cubic term");
    add_real(toy.P3, m, rc(p.eps_p3));
    ++accepted;
  }
  return toy;
}

}  // namespace rnf
