#include "rnf/final_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "rnf/birkhoff.hpp"

namespace rnf {

std::vector<int> assign_sites(const CombinatorialBlock& cb, const BlockSpectrum& sp) {
  std::vector<int> out(cb.size(), -1);
  std::vector<int> plus, minus;
  for (int i = 0; i < cb.size(); ++i) (cb.sigma[i] > 0 ? plus : minus).push_back(i);
  std::size_t ip = 0, im = 0;
  for (std::size_t c = 0; c < sp.branch.size(); ++c) {
    for (int k = 0; k < sp.plus[c]; ++k) {
      if (ip >= plus.size()) throw std::logic_error("assign_sites: cluster signature exceeds sigma=+1 count");
      out[plus[ip++]] = static_cast<int>(c);
    }
    for (int k = 0; k < sp.minus[c]; ++k) {
      if (im >= minus.size()) throw std::logic_error("assign_sites: cluster signature exceeds sigma=-1 count");
      out[minus[im++]] = static_cast<int>(c);
    }
  }
  if (ip != plus.size() || im != minus.size())
    throw std::logic_error("assign_sites: cluster signature does not match sigma");
  return out;
}

BlockAtlas build_atlas(const std::vector<GeometricBlock>& blocks, int n, int q,
                       const std::vector<std::vector<double>>& samples, double tol, int workers) {
  BlockAtlas a;
  a.q = q;
  a.n = n;
  std::map<CombinatorialBlock, int> seen;
  for (const auto& b : blocks) {
    if (b.boundary) continue;
    std::vector<int> order;
    auto cb = combinatorialize(b, n, &order);
    auto [it, fresh] = seen.emplace(cb, static_cast<int>(a.combs.size()));
    if (fresh) a.combs.push_back(cb);
    a.blocks.push_back(b);
    a.comb_of.push_back(it->second);
    a.order.push_back(std::move(order));
  }
  a.catalog = eigenvalue_catalog(a.combs, q, samples, tol, workers);
  for (std::size_t c = 0; c < a.combs.size(); ++c)
    a.cluster_of_position.push_back(assign_sites(a.combs[c], a.catalog.blocks[c]));
  return a;
}

BranchEvaluator::BranchEvaluator(const BlockAtlas& atlas, double tol) : atlas_(&atlas), tol_(tol) {
  for (const auto& cb : atlas.combs) mats_.push_back(matrix_of_block(cb, atlas.q));
}

FittingResult BranchEvaluator::fit(int comb, const std::vector<double>& xi) const {
  auto f = fitting(mats_[comb], atlas_->combs[comb].sigma, xi, tol_, "block " + std::to_string(comb));
  const auto& sp = atlas_->catalog.blocks[comb];
  if (f.clusters.size() != sp.branch.size()) throw RegionError("xi outside the catalog region (cluster count changes)");
  for (std::size_t c = 0; c < sp.branch.size(); ++c)
    if (f.clusters[c].mult != sp.mult[c] || f.clusters[c].plus != sp.plus[c])
      throw RegionError("xi outside the catalog region (cluster pattern changes)");
  return f;
}

std::vector<cdouble> BranchEvaluator::values(const std::vector<double>& xi) const {
  const auto& cat = atlas_->catalog;
  std::vector<cdouble> out(cat.branches.size());
  std::map<int, FittingResult> fits;
  for (const auto& br : cat.branches) {
    int comb = br.source_block;
    auto it = fits.find(comb);
    if (it == fits.end()) it = fits.emplace(comb, fit(comb, xi)).first;
    const auto& sp = cat.blocks[comb];
    auto pos = std::find(sp.branch.begin(), sp.branch.end(), br.id) - sp.branch.begin();
    out[br.id] = it->second.clusters[pos].value;
  }
  return out;
}

namespace {

struct RelationSolver {
  Eigen::MatrixXd W;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  std::vector<double> rowscale;
  double tol;

  RelationSolver(const std::vector<std::vector<double>>& w, double t) : tol(t) {
    const int ns = static_cast<int>(w.size());
    const int n = ns ? static_cast<int>(w[0].size()) : 0;
    W.resize(ns, n);
    rowscale.assign(ns, 0);
    for (int s = 0; s < ns; ++s)
      for (int i = 0; i < n; ++i) {
        W(s, i) = w[s][i];
        rowscale[s] += std::abs(w[s][i]);
      }
    qr.compute(W);
  }

  std::optional<IVec> solve(const std::vector<cdouble>& delta, Diagnostics* diag, const std::string& what) const {
    const int ns = static_cast<int>(W.rows());
    Eigen::VectorXd rhs(ns);
    for (int s = 0; s < ns; ++s) {
      double sc = rowscale[s] + std::abs(delta[s]);
      if (std::abs(delta[s].imag()) > tol * sc) return std::nullopt;
      rhs(s) = delta[s].real();
    }
    Eigen::VectorXd est = qr.solve(rhs);
    IVec ell(est.size());
    bool integral = true;
    for (int i = 0; i < est.size(); ++i) {
      if (!std::isfinite(est(i)) || std::abs(est(i)) > 1e9) return std::nullopt;
      ell[i] = static_cast<Int>(std::llround(est(i)));
      if (std::abs(est(i) - static_cast<double>(ell[i])) > 1e-4) integral = false;
    }
    auto fits = [&](auto&& coef) {
      for (int s = 0; s < ns; ++s) {
        double v = 0, mag = 0;
        for (int i = 0; i < W.cols(); ++i) {
          v += W(s, i) * coef(i);
          mag += std::abs(W(s, i) * coef(i));
        }
        if (std::abs(v - rhs(s)) > tol * (mag + std::abs(rhs(s)) + rowscale[s])) return false;
      }
      return true;
    };
    if (!integral) {
      if (diag && fits([&](int i) { return est(i); }))
        diag->push_back({"y-edge-nonint", what + ": relation holds only for a non-integer label"});
      return std::nullopt;
    }
    if (!fits([&](int i) { return static_cast<double>(ell[i]); })) return std::nullopt;
    return ell;
  }
};

std::vector<std::vector<double>> omega1_rows(const std::vector<HalfPoly>& w, const EigenCatalog& cat) {
  std::vector<std::vector<double>> rows;
  auto eval = [&](const std::vector<double>& xi) {
    std::vector<double> r;
    for (const auto& p : w) r.push_back(p.evaluate(xi));
    return r;
  };
  for (const auto& xi : cat.samples) rows.push_back(eval(xi));
  std::vector<double> scaled = cat.samples[0];
  for (double& x : scaled) x *= cat.scale;
  rows.push_back(eval(scaled));
  return rows;
}

std::vector<cdouble> branch_row(const Branch& b) {
  std::vector<cdouble> v = b.values;
  v.push_back(b.scaled_value);
  return v;
}

}  // namespace

std::optional<IVec> solve_relation(const std::vector<std::vector<double>>& w_samples,
                                   const std::vector<cdouble>& delta, double tol, Diagnostics* diag,
                                   const std::string& what) {
  RelationSolver rs(w_samples, tol);
  return rs.solve(delta, diag, what);
}

YTable y_edges(const EigenCatalog& cat, int q, int n, double tol) {
  YTable y;
  const int nb = static_cast<int>(cat.branches.size());
  y.nb = nb;
  y.black.assign(nb * nb, std::nullopt);
  y.red.assign(nb * nb, std::nullopt);
  y.linear.assign(nb, std::nullopt);
  if (nb == 0) return y;
  RelationSolver rs(omega1_rows(omega1(q, n), cat), tol);
  std::vector<std::vector<cdouble>> vals;
  for (const auto& b : cat.branches) vals.push_back(branch_row(b));
  const std::size_t m = vals[0].size();
  std::vector<cdouble> delta(m);
  std::map<std::pair<int, IVec>, std::size_t> edge_of;
  auto record = [&](const IVec& ell, Color color, int a, int b) {
    if (!EdgeLabel::admissible(ell)) return;
    if ((color == Color::black) != (mass(ell) == 0)) return;
    auto key = std::make_pair(static_cast<int>(color), ell);
    auto [it, fresh] = edge_of.emplace(key, y.edges.size());
    if (fresh) y.edges.push_back({ell, color, {}});
    y.edges[it->second].witnesses.push_back({a, b});
  };
  for (int a = 0; a < nb; ++a) {
    for (std::size_t s = 0; s < m; ++s) delta[s] = -vals[a][s];
    y.linear[a] = rs.solve(delta, &y.diagnostics, "branch " + std::to_string(a));
    for (int b = 0; b < nb; ++b) {
      std::string what = "branches " + std::to_string(a) + "," + std::to_string(b);
      for (std::size_t s = 0; s < m; ++s) delta[s] = vals[b][s] - vals[a][s];
      y.black[a * nb + b] = a == b ? std::optional<IVec>(IVec(n, 0)) : rs.solve(delta, &y.diagnostics, what);
      if (a != b && y.black[a * nb + b]) record(*y.black[a * nb + b], Color::black, a, b);
      if (b < a) {
        y.red[a * nb + b] = y.red[b * nb + a];
        continue;
      }
      for (std::size_t s = 0; s < m; ++s) delta[s] = -(vals[a][s] + vals[b][s]);
      y.red[a * nb + b] = rs.solve(delta, &y.diagnostics, what);
      if (y.red[a * nb + b]) record(*y.red[a * nb + b], Color::red, a, b);
    }
  }
  std::vector<std::size_t> idx(y.edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    const auto &x = y.edges[i], &z = y.edges[j];
    if (x.color != z.color) return x.color < z.color;
    return x.ell < z.ell;
  });
  std::vector<YEdge> sorted;
  for (auto i : idx) sorted.push_back(y.edges[i]);
  y.edges = std::move(sorted);
  return y;
}

FinalGraph build_final_graph(const BlockAtlas& atlas, const YTable& y, const TangentialSites& S) {
  FinalGraph g;
  for (std::size_t b = 0; b < atlas.blocks.size(); ++b) {
    const auto& sp = atlas.catalog.blocks[atlas.comb_of[b]];
    for (std::size_t c = 0; c < sp.branch.size(); ++c) {
      FinalVertex v{atlas.blocks[b].root, sp.branch[c], static_cast<int>(b), static_cast<int>(c)};
      g.index.emplace(std::make_pair(v.r, v.theta), static_cast<int>(g.vertices.size()));
      g.vertices.push_back(v);
    }
  }
  const int nb = y.nb;
  for (int a = 0; a < static_cast<int>(g.vertices.size()); ++a) {
    const auto& A = g.vertices[a];
    const Int r2 = norm2(A.r);
    for (int th = 0; th < nb; ++th) {
      const auto& bl = y.black_rel(A.theta, th);
      if (th != A.theta && bl && EdgeLabel::admissible(*bl) && mass(*bl) == 0) {
        auto im = linear_maps(*bl, S);
        IVec r1 = add(A.r, im.pi);
        if (im.pi2 + r2 - norm2(r1) == 0) {
          auto it = g.index.find({r1, th});
          if (it != g.index.end() && a < it->second) g.edges.push_back({a, it->second, *bl, Color::black});
        }
      }
      const auto& rd = y.red_rel(A.theta, th);
      if (rd && EdgeLabel::admissible(*rd) && mass(*rd) == -2) {
        auto im = linear_maps(*rd, S);
        IVec r1 = sub(neg(im.pi), A.r);
        if (im.pi2 + r2 + norm2(r1) == 0) {
          auto it = g.index.find({r1, th});
          if (it == g.index.end()) continue;
          if (it->second == a)
            g.diagnostics.push_back({"final-red-loop", "vertex (" + to_string(A.r) + ", " + std::to_string(th) +
                                                           ") carries a red loop"});
          else if (a < it->second)
            g.edges.push_back({a, it->second, *rd, Color::red});
        }
      }
    }
  }

  const int nv = static_cast<int>(g.vertices.size());
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges) {
    int x = find(e.a), z = find(e.b);
    if (x != z) parent[std::max(x, z)] = std::min(x, z);
  }
  std::map<int, int> comp_id;
  g.component_of.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    auto [it, fresh] = comp_id.emplace(find(v), static_cast<int>(g.components.size()));
    if (fresh) g.components.emplace_back();
    g.components[it->second].push_back(v);
    g.component_of[v] = it->second;
  }
  for (auto& comp : g.components)
    std::sort(comp.begin(), comp.end(), [&](int x, int z) {
      const auto &X = g.vertices[x], &Z = g.vertices[z];
      return std::tie(X.r, X.theta) < std::tie(Z.r, Z.theta);
    });

  std::set<std::pair<int, int>> direct;
  for (const auto& e : g.edges) direct.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
  for (const auto& comp : g.components) {
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (std::size_t j = i + 1; j < comp.size(); ++j) {
        const auto &X = g.vertices[comp[i]], &Z = g.vertices[comp[j]];
        if (X.r == Z.r)
          g.diagnostics.push_back({"final-same-root", "(" + to_string(X.r) + ", " + std::to_string(X.theta) +
                                                          ") and (" + to_string(Z.r) + ", " +
                                                          std::to_string(Z.theta) + ") are connected"});
        if (!direct.count({std::min(comp[i], comp[j]), std::max(comp[i], comp[j])})) {
          g.closure_ok = false;
          g.consistency.push_back({"closure", "path-connected pair (" + to_string(X.r) + ", " +
                                                  std::to_string(X.theta) + ") ~ (" + to_string(Z.r) + ", " +
                                                  std::to_string(Z.theta) + ") lacks a direct edge"});
        }
      }
  }
  return g;
}

Partition finalize_partition(const BlockAtlas& atlas, const FinalGraph& g, const TangentialSites& S, int d,
                             double tol) {
  Partition p;
  std::map<std::pair<int, int>, const FinalEdge*> edge_at;
  for (const auto& e : g.edges) edge_at[{std::min(e.a, e.b), std::max(e.a, e.b)}] = &e;

  std::vector<int> root_of_comp(g.components.size());
  for (std::size_t c = 0; c < g.components.size(); ++c) {
    FinalRoot fr;
    fr.vertex = g.components[c].front();
    fr.r = g.vertices[fr.vertex].r;
    fr.theta = g.vertices[fr.vertex].theta;
    for (int v : g.components[c])
      if (atlas.blocks[g.vertices[v].block].has_red()) fr.finite = true;
    root_of_comp[c] = static_cast<int>(p.roots.size());
    p.roots.push_back(fr);
  }
  for (const auto& e : g.edges)
    if (e.color == Color::red) p.roots[root_of_comp[g.component_of[e.a]]].finite = true;

  // ell of every final vertex towards its root
  std::vector<IVec> vell(g.vertices.size(), IVec(atlas.n, 0));
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    int t = p.roots[root_of_comp[g.component_of[v]]].vertex;
    if (static_cast<int>(v) == t) continue;
    auto it = edge_at.find({std::min<int>(v, t), std::max<int>(v, t)});
    if (it == edge_at.end()) {
      p.failures.push_back({"closure", "vertex without a direct edge to its root"});
      continue;
    }
    const FinalEdge& e = *it->second;
    vell[v] = (e.color == Color::black && e.a == t) ? neg(e.ell) : e.ell;
  }

  for (std::size_t b = 0; b < atlas.blocks.size(); ++b) {
    const auto& gb = atlas.blocks[b];
    const int comb = atlas.comb_of[b];
    const auto& sp = atlas.catalog.blocks[comb];
    for (int i = 0; i < gb.size(); ++i) {
      SiteInfo s;
      s.k = gb.vertices[i];
      s.r = gb.root;
      s.sigma = gb.sigma[i];
      s.L = gb.L[i];
      s.block = static_cast<int>(b);
      s.cluster = atlas.cluster_of_position[comb][atlas.order[b][i]];
      s.theta = sp.branch[s.cluster];
      s.vertex = g.index.at({s.r, s.theta});
      s.t = root_of_comp[g.component_of[s.vertex]];
      s.ell = vell[s.vertex];
      s.s = s.sigma * (static_cast<int>(mass(s.ell)) + 1);
      if (!p.site_index.emplace(s.k, static_cast<int>(p.sites.size())).second)
        p.failures.push_back({"cover", "site " + to_string(s.k) + " appears in two blocks"});
      p.roots[s.t].sites.push_back(static_cast<int>(p.sites.size()));
      p.sites.push_back(std::move(s));
    }
  }
  // D_t order: by final vertex, plus sites before minus sites, then canonical position
  for (auto& fr : p.roots) {
    std::sort(fr.sites.begin(), fr.sites.end(), [&](int x, int z) {
      const auto &X = p.sites[x], &Z = p.sites[z];
      if (X.vertex != Z.vertex) {
        const auto &VX = g.vertices[X.vertex], &VZ = g.vertices[Z.vertex];
        return std::tie(VX.r, VX.theta) < std::tie(VZ.r, VZ.theta);
      }
      if (X.sigma != Z.sigma) return X.sigma > Z.sigma;
      return atlas.order[X.block][atlas.blocks[X.block].index_of(X.k)] <
             atlas.order[Z.block][atlas.blocks[Z.block].index_of(Z.k)];
    });
  }

  auto w = omega1(atlas.q, atlas.n);
  const auto& cat = atlas.catalog;
  std::vector<std::vector<double>> wv;
  for (const auto& xi : cat.samples) {
    std::vector<double> r;
    for (const auto& pw : w) r.push_back(pw.evaluate(xi));
    wv.push_back(r);
  }
  for (const auto& s : p.sites) {
    const auto& fr = p.roots[s.t];
    auto im = linear_maps(s.ell, S);
    const Int f = im.eta + 1;
    if (add(im.pi, s.r) != scale(f, fr.r))
      p.failures.push_back({"alcf", "momentum identity fails at site " + to_string(s.k)});
    for (std::size_t si = 0; si < cat.samples.size(); ++si) {
      double lw = 0, mag = 0;
      for (int i = 0; i < atlas.n; ++i) {
        lw += wv[si][i] * static_cast<double>(s.ell[i]);
        mag += std::abs(wv[si][i] * static_cast<double>(s.ell[i]));
      }
      cdouble lhs = lw + cat.branches[s.theta].values[si];
      cdouble rhs = static_cast<double>(f) * cat.branches[fr.theta].values[si];
      if (std::abs(lhs - rhs) > 1e3 * tol * (mag + std::abs(rhs) + std::abs(lhs) + 1e-300)) {
        p.failures.push_back({"alcf", "eigenvalue identity fails at site " + to_string(s.k)});
        break;
      }
    }
  }
  for (const auto& fr : p.roots) {
    const int dt = static_cast<int>(fr.sites.size());
    const int bound = fr.finite ? 2 * d + 1 : d + 1;
    if (dt > bound)
      p.diagnostics.push_back({"dt-bound", "D_t at root " + to_string(fr.r) + " has " + std::to_string(dt) +
                                               " sites, bound " + std::to_string(bound)});
    if (!fr.finite)
      for (int si : fr.sites)
        if (p.sites[si].s != 1) p.failures.push_back({"good-sign", "s != +1 on a good block at " + to_string(fr.r)});
  }
  return p;
}

NormalForm assemble_normal_form(const Partition& p, const BlockAtlas& atlas, const FinalGraph& g,
                                const TangentialSites& S, int q, const std::vector<double>& xi, double tol) {
  NormalForm nf;
  nf.xi = xi;
  BranchEvaluator ev(atlas, tol);
  nf.theta = ev.values(xi);
  auto w = omega1(q, atlas.n);
  std::vector<double> w1(atlas.n);
  auto nn = S.norms2();
  for (int i = 0; i < atlas.n; ++i) {
    w1[i] = w[i].evaluate(xi);
    nf.omega.push_back(static_cast<double>(nn[i]) + w1[i]);
  }
  std::map<int, FittingResult> fits;
  auto fit_of = [&](int comb) -> const FittingResult& {
    auto it = fits.find(comb);
    if (it == fits.end()) it = fits.emplace(comb, ev.fit(comb, xi)).first;
    return it->second;
  };

  double fres = 0, nres = 0;
  for (std::size_t ti = 0; ti < p.roots.size(); ++ti) {
    const auto& fr = p.roots[ti];
    const int dt = static_cast<int>(fr.sites.size());
    NormalFormBlock blk;
    blk.t = static_cast<int>(ti);
    blk.nil = Eigen::MatrixXcd::Zero(dt, dt);
    int o = 0;
    while (o < dt) {
      const auto& s0 = p.sites[fr.sites[o]];
      const auto& fv = g.vertices[s0.vertex];
      const auto& f = fit_of(atlas.comb_of[fv.block]);
      const auto& cl = f.clusters[fv.cluster];
      Eigen::MatrixXcd nb = f.nil_blocks[fv.cluster];
      if (mass(s0.ell) == -2) {
        Eigen::MatrixXcd sig = Eigen::MatrixXcd::Zero(cl.mult, cl.mult);
        for (int k = 0; k < cl.mult; ++k) sig(k, k) = k < cl.plus ? 1.0 : -1.0;
        nb = -sig * nb.transpose() * sig;
      }
      if (o + cl.mult > dt) throw std::logic_error("assemble_normal_form: cluster overruns D_t");
      blk.nil.block(o, o, cl.mult, cl.mult) = nb;
      o += cl.mult;
    }
    cdouble scalar = static_cast<double>(norm2(fr.r)) + nf.theta[fr.theta];
    blk.omega = scalar * Eigen::MatrixXcd::Identity(dt, dt) + blk.nil;
    if (dt > 0) {
      double ref = std::max(1.0, std::abs(scalar));
      Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(dt, dt);
      for (int k = 0; k < dt; ++k) pw = pw * blk.nil / ref;
      nres = std::max(nres, pw.norm());
    }
    for (int si : fr.sites) {
      const auto& s = p.sites[si];
      auto im = linear_maps(s.ell, S);
      if (s.sigma * (1 + im.eta) != s.s || scale(s.sigma, add(im.pi, s.r)) != scale(s.s, fr.r) ||
          s.sigma * (im.pi2 + norm2(s.r)) != s.s * norm2(fr.r)) {
        nf.conservation_exact = false;
        nf.failures.push_back({"conservation", "shifted L, M, K coefficients disagree at " + to_string(s.k)});
      }
      double lw = 0;
      for (int i = 0; i < atlas.n; ++i) lw += w1[i] * static_cast<double>(s.ell[i]);
      cdouble pre = static_cast<double>(s.sigma) *
                    (static_cast<double>(norm2(s.r) + im.pi2) + nf.theta[s.theta] + lw);
      cdouble post = static_cast<double>(s.s) * scalar;
      fres = std::max(fres, std::abs(pre - post) / std::max(1.0, std::abs(post)));
    }
    nf.blocks.push_back(std::move(blk));
  }
  nf.frequency_residual = fres;
  nf.nilpotent_residual = nres;
  if (nres > tol) nf.failures.push_back({"nilpotent", "Omega^nil is not nilpotent to tolerance"});
  return nf;
}

IVec phase_shift(const IVec& nu, const std::vector<std::pair<int, int>>& factors, const Partition& p) {
  IVec out = nu;
  for (const auto& [site, a] : factors) {
    const auto& s = p.sites[site];
    out = sub(out, scale(static_cast<Int>(a) * s.sigma, s.ell));
  }
  return out;
}

std::vector<std::pair<int, Int>> y_shift(int i, const Partition& p) {
  std::vector<std::pair<int, Int>> out;
  for (std::size_t k = 0; k < p.sites.size(); ++k) {
    Int c = p.sites[k].sigma * p.sites[k].ell[i];
    if (c != 0) out.push_back({static_cast<int>(k), c});
  }
  return out;
}

KernelCheck check_kernel_phase_shift(const Partition& p, const YTable& y, const TangentialSites& S) {
  KernelCheck kc;
  const int ns = static_cast<int>(p.sites.size());
  struct Rel {
    IVec nu;
    LinearImage im;
  };
  auto make_rel = [&](const std::optional<IVec>& r) -> std::optional<Rel> {
    if (!r) return std::nullopt;
    return Rel{*r, linear_maps(*r, S)};
  };
  std::vector<std::optional<Rel>> black(y.black.size()), red(y.red.size()), lin(y.linear.size());
  for (std::size_t i = 0; i < y.black.size(); ++i) black[i] = make_rel(y.black[i]);
  for (std::size_t i = 0; i < y.red.size(); ++i) red[i] = make_rel(y.red[i]);
  for (std::size_t i = 0; i < y.linear.size(); ++i) lin[i] = make_rel(y.linear[i]);
  std::vector<Int> r2(ns);
  for (int i = 0; i < ns; ++i) r2[i] = norm2(p.sites[i].r);
  const int d = S.d();

  // linear monomials exp(i nu.x) z_k^a
  for (int h = 0; h < ns; ++h) {
    const auto& sh = p.sites[h];
    if (!lin[sh.theta]) continue;
    for (int a : {1, -1}) {
      const int al = a * sh.sigma;
      const auto& R = *lin[sh.theta];
      if (al * R.im.eta + al != 0) continue;  // nu = al * R.nu
      bool mom = true;
      for (int j = 0; j < d && mom; ++j) mom = al * R.im.pi[j] + al * sh.r[j] == 0;
      if (!mom || al * R.im.pi2 + al * r2[h] != 0) continue;
      ++kc.linear_kernel;
      kc.failures.push_back({"linear-kernel", "linear monomial in the kernel at " + to_string(sh.k)});
    }
  }

  for (int h = 0; h < ns; ++h) {
    const auto& sh = p.sites[h];
    for (int k = h; k < ns; ++k) {
      const auto& sk = p.sites[k];
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          if (h == k && a > b) continue;
          ++kc.pairs_tested;
          const int al = a * sh.sigma, be = b * sk.sigma;
          Int sgn;
          const Rel* R;
          Rel zero;
          if (al == -be) {
            if (sh.theta == sk.theta) {
              zero.nu = IVec(S.n(), 0);
              zero.im = {0, IVec(d, 0), 0};
              R = &zero;
            } else {
              const auto& o = black[sh.theta * y.nb + sk.theta];
              if (!o) continue;
              R = &*o;
            }
            sgn = al;
          } else {
            const auto& o = red[sh.theta * y.nb + sk.theta];
            if (!o) continue;
            R = &*o;
            sgn = al;
          }
          if (sgn * R->im.eta + al + be != 0) continue;
          bool mom = true;
          for (int j = 0; j < d && mom; ++j) mom = sgn * R->im.pi[j] + al * sh.r[j] + be * sk.r[j] == 0;
          if (!mom || sgn * R->im.pi2 + al * r2[h] + be * r2[k] != 0) continue;
          ++kc.quadratic_kernel;
          IVec nu = scale(sgn, R->nu);
          IVec shifted = phase_shift(nu, {{h, a}, {k, b}}, p);
          if (!is_zero(shifted)) {
            ++kc.x_dependent;
            if (kc.failures.size() < 20)
              kc.failures.push_back({"x-dependent", "kernel monomial on " + to_string(sh.k) + ", " + to_string(sk.k) +
                                                        " keeps Fourier index " + to_string(shifted)});
          }
          if (sh.t != sk.t) {
            ++kc.cross_block;
            if (kc.failures.size() < 20)
              kc.failures.push_back({"cross-block", "kernel monomial couples " + to_string(sh.k) + " and " +
                                                        to_string(sk.k) + " from different D_t"});
          }
        }
    }
  }
  return kc;
}

}  // namespace rnf
