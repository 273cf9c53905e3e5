#include "rnf/resonance_graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

#include "rnf/parallel.hpp"

namespace rnf {

bool GeometricGraph::in_box(const IVec& k) const { return norm_inf(k) <= box_radius; }

namespace {

std::vector<IVec> box_points(int d, Int R) {
  std::vector<IVec> pts;
  IVec k(d, -R);
  for (;;) {
    pts.push_back(k);
    int c = d - 1;
    while (c >= 0 && k[c] == R) {
      k[c] = -R;
      --c;
    }
    if (c < 0) break;
    ++k[c];
  }
  return pts;
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

GeometricGraph build_graph(const TangentialSites& S, int q, Int box_radius, int workers) {
  if (box_radius < S.max_norm_inf())
    throw std::invalid_argument("build_graph: box radius smaller than max |j_i|_inf");
  GeometricGraph g;
  g.d = S.d();
  g.q = q;
  g.box_radius = box_radius;
  g.vertices = box_points(S.d(), box_radius);
  if (S.n() < 2) return g;

  auto X = enumerate_edges(q, S.n());
  std::vector<std::vector<BlackEdge>> blacks(X.black.size());
  std::vector<std::vector<RedEdge>> reds(X.red.size());

  parallel_for(X.black.size(), workers, [&](std::size_t e) {
    auto im = linear_maps(X.black[e].ell, S);
    for (const auto& h : g.vertices) {
      IVec k = add(h, im.pi);
      // h -> k marked ell is k -> h marked -ell; keep one orientation
      if (k < h || (k == h && X.black[e].ell < neg(X.black[e].ell)) || !g.in_box(k)) continue;
      if (im.pi2 + norm2(h) - norm2(k) == 0) blacks[e].push_back({h, k, X.black[e].ell});
    }
  });
  // Red partners lie on the sphere |x|^2 + x.pi = K(ell); scanning h and
  // setting k = -pi - h is the same exact integer search.
  parallel_for(X.red.size(), workers, [&](std::size_t e) {
    auto im = linear_maps(X.red[e].ell, S);
    for (const auto& h : g.vertices) {
      IVec k = sub(neg(im.pi), h);
      if (k < h || !g.in_box(k)) continue;
      if (im.pi2 + norm2(h) + norm2(k) == 0) reds[e].push_back({h, k, X.red[e].ell});
    }
  });
  for (auto& v : blacks) g.black.insert(g.black.end(), v.begin(), v.end());
  for (auto& v : reds) g.red.insert(g.red.end(), v.begin(), v.end());
  return g;
}

int GeometricBlock::index_of(const IVec& k) const {
  auto it = std::lower_bound(vertices.begin(), vertices.end(), k);
  if (it == vertices.end() || *it != k) return -1;
  return static_cast<int>(it - vertices.begin());
}

ComponentSet components(const GeometricGraph& g, const TangentialSites& S) {
  std::map<IVec, int> idx;
  for (int i = 0; i < static_cast<int>(g.vertices.size()); ++i) idx[g.vertices[i]] = i;
  UnionFind uf(static_cast<int>(g.vertices.size()));
  for (const auto& e : g.black) uf.unite(idx.at(e.h), idx.at(e.k));
  for (const auto& e : g.red) uf.unite(idx.at(e.h), idx.at(e.k));

  std::map<int, int> comp_of_rep;
  std::vector<GeometricBlock> comps;
  std::vector<int> comp(g.vertices.size());
  for (int i = 0; i < static_cast<int>(g.vertices.size()); ++i) {
    int r = uf.find(i);
    auto [it, fresh] = comp_of_rep.emplace(r, static_cast<int>(comps.size()));
    if (fresh) comps.emplace_back();
    comp[i] = it->second;
    comps[it->second].vertices.push_back(g.vertices[i]);
  }
  for (const auto& e : g.black) comps[comp[idx.at(e.h)]].black.push_back(e);
  for (const auto& e : g.red) comps[comp[idx.at(e.h)]].red.push_back(e);

  Int width = 2 * static_cast<Int>(g.q) * S.max_norm_inf();
  ComponentSet out;
  int special = comp[idx.at(S[0])];
  for (int c = 0; c < static_cast<int>(comps.size()); ++c) {
    auto& b = comps[c];
    b.boundary = std::any_of(b.vertices.begin(), b.vertices.end(),
                             [&](const IVec& k) { return norm_inf(k) > g.box_radius - width; });
    b.root = b.vertices.front();
    if (c == special) {
      out.special = b;
      continue;
    }
    root_data(b, S, g.q, out.diagnostics);
    out.blocks.push_back(std::move(b));
  }
  std::set<IVec> sset(S.sites().begin(), S.sites().end());
  std::set<IVec> spec(out.special.vertices.begin(), out.special.vertices.end());
  out.special_is_S = sset == spec;
  if (!out.special_is_S)
    out.diagnostics.push_back({"special-component",
                               "component of j_1 has " + std::to_string(spec.size()) +
                                   " vertices and differs from S"});
  return out;
}

void root_data(GeometricBlock& b, const TangentialSites& S, int q, Diagnostics& diag) {
  const int n = S.n();
  const int a = b.size();
  b.root = b.vertices.front();
  b.sigma.assign(a, 0);
  b.L.assign(a, IVec(n, 0));

  struct Arc {
    int to;
    const IVec* ell;
    bool red;
    bool forward;  // black arc in its stored orientation
  };
  std::vector<std::vector<Arc>> adj(a);
  for (const auto& e : b.black) {
    int h = b.index_of(e.h), k = b.index_of(e.k);
    adj[h].push_back({k, &e.ell, false, true});
    adj[k].push_back({h, &e.ell, false, false});
  }
  for (const auto& e : b.red) {
    int h = b.index_of(e.h), k = b.index_of(e.k);
    adj[h].push_back({k, &e.ell, true, true});
    if (h != k) adj[k].push_back({h, &e.ell, true, true});
  }

  std::vector<bool> seen(a, false);
  std::queue<int> bfs;
  seen[0] = true;
  b.sigma[0] = 1;
  bfs.push(0);
  while (!bfs.empty()) {
    int h = bfs.front();
    bfs.pop();
    for (const auto& arc : adj[h]) {
      if (seen[arc.to]) continue;
      seen[arc.to] = true;
      if (arc.red) {
        b.sigma[arc.to] = -b.sigma[h];
        b.L[arc.to] = sub(*arc.ell, b.L[h]);
      } else {
        b.sigma[arc.to] = b.sigma[h];
        b.L[arc.to] = arc.forward ? sub(b.L[h], *arc.ell) : add(b.L[h], *arc.ell);
      }
      bfs.push(arc.to);
    }
  }

  auto fail = [&](const std::string& what) {
    diag.push_back({"root-data", "block rooted at " + to_string(b.root) + ": " + what});
  };
  for (const auto& e : b.black) {
    int h = b.index_of(e.h), k = b.index_of(e.k);
    if (b.sigma[h] != b.sigma[k] || b.L[k] != sub(b.L[h], e.ell))
      fail("path dependence along black edge " + to_string(e.h) + "->" + to_string(e.k));
  }
  for (const auto& e : b.red) {
    int h = b.index_of(e.h), k = b.index_of(e.k);
    if (b.sigma[h] != -b.sigma[k] || b.L[k] != sub(e.ell, b.L[h]))
      fail("path dependence along red edge " + to_string(e.h) + "-" + to_string(e.k));
  }
  const Int bound = 4 * static_cast<Int>(q) * S.d();
  const Int r2 = norm2(b.root);
  for (int i = 0; i < a; ++i) {
    auto im = linear_maps(b.L[i], S);
    const IVec& k = b.vertices[i];
    int s = b.sigma[i];
    if (add(k, im.pi) != scale(s, b.root) || norm2(k) + im.pi2 != s * r2 || 1 + im.eta != s)
      fail("root identities fail at " + to_string(k));
    if (norm1(b.L[i]) > bound) fail("|L| exceeds 4qd at " + to_string(k));
  }
}

GenericityReport genericity_report(const std::vector<GeometricBlock>& blocks, int d) {
  GenericityReport rep;
  for (const auto& b : blocks) {
    if (b.boundary) continue;
    ++rep.checked;
    if (b.has_red()) ++rep.red_blocks;
    if (b.size() > 2 * d + 1) {
      rep.pass = false;
      rep.failures.push_back({"block-size", "block rooted at " + to_string(b.root) + " has " +
                                                std::to_string(b.size()) + " > 2d+1 vertices"});
    }
    if (!b.has_red() && !affinely_independent(b.vertices)) {
      std::string w;
      for (const auto& v : b.vertices) w += to_string(v);
      rep.pass = false;
      rep.failures.push_back({"affine-dependence", "red-free block with affinely dependent vertices " + w});
    }
  }
  // Red edges live on spheres of bounded radius, so every red block must be
  // complete inside the box.
  for (const auto& b : blocks) {
    if (b.boundary && b.has_red()) {
      rep.pass = false;
      rep.failures.push_back({"red-boundary", "red block rooted at " + to_string(b.root) +
                                                  " touches the box shell; enlarge the box"});
    }
  }
  return rep;
}

std::vector<Int> shape_key(const GeometricBlock& b) {
  std::vector<Int> key;
  key.push_back(b.size());
  for (const auto& v : b.vertices) {
    auto o = sub(v, b.root);
    key.insert(key.end(), o.begin(), o.end());
  }
  std::vector<std::vector<Int>> edges;
  for (const auto& e : b.black) {
    std::vector<Int> r{0};
    for (const auto* part : {&e.h, &e.k}) {
      auto o = sub(*part, b.root);
      r.insert(r.end(), o.begin(), o.end());
    }
    r.insert(r.end(), e.ell.begin(), e.ell.end());
    edges.push_back(r);
  }
  for (const auto& e : b.red) {
    std::vector<Int> r{1};
    for (const auto* part : {&e.h, &e.k}) {
      auto o = sub(*part, b.root);
      r.insert(r.end(), o.begin(), o.end());
    }
    r.insert(r.end(), e.ell.begin(), e.ell.end());
    edges.push_back(r);
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& r : edges) key.insert(key.end(), r.begin(), r.end());
  return key;
}

std::vector<TranslationFamily> translation_classes(const std::vector<GeometricBlock>& blocks, int d,
                                                   Diagnostics& diag) {
  std::map<std::vector<Int>, std::size_t> fam_of;
  std::vector<TranslationFamily> fams;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.boundary || b.has_red()) continue;
    auto [it, fresh] = fam_of.emplace(shape_key(b), fams.size());
    if (fresh) {
      fams.emplace_back();
      fams.back().representative = i;
    }
    fams[it->second].members.push_back(i);
  }
  for (auto& f : fams) {
    const auto& rep = blocks[f.representative];
    f.expected_rank = d - rep.size() + 1;
    std::vector<IVec> diffs;
    for (auto m : f.members)
      if (m != f.representative) diffs.push_back(sub(blocks[m].root, rep.root));
    f.generators = lattice_basis(diffs);
    f.rank = static_cast<int>(f.generators.size());
    f.flagged = f.members.size() == 1;
    if (!f.flagged && f.rank != f.expected_rank)
      diag.push_back({"family-rank", "family of block rooted at " + to_string(rep.root) + " has rank " +
                                         std::to_string(f.rank) + ", expected " +
                                         std::to_string(f.expected_rank)});
  }
  return fams;
}

}  // namespace rnf
