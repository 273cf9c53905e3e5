#include "rnf/block_matrices.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rnf/birkhoff.hpp"
#include "rnf/parallel.hpp"

namespace rnf {

bool CombinatorialBlock::has_red() const {
  return std::any_of(edges.begin(), edges.end(), [](const CombEdge& e) { return e.color == Color::red; });
}

CombinatorialBlock combinatorialize(const GeometricBlock& b, int n, std::vector<int>* order) {
  const int a = b.size();
  std::vector<int> perm(a);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin() + 1, perm.end(), [&](int x, int y) { return b.L[x] < b.L[y]; });
  std::vector<int> pos(a);
  for (int i = 0; i < a; ++i) pos[perm[i]] = i;

  CombinatorialBlock cb;
  cb.n = n;
  for (int i = 0; i < a; ++i) {
    cb.sigma.push_back(b.sigma[perm[i]]);
    cb.L.push_back(b.L[perm[i]]);
  }
  for (const auto& e : b.black) {
    int i = pos[b.index_of(e.h)], j = pos[b.index_of(e.k)];
    if (i <= j)
      cb.edges.push_back({i, j, e.ell, Color::black});
    else
      cb.edges.push_back({j, i, neg(e.ell), Color::black});
  }
  for (const auto& e : b.red) {
    int i = pos[b.index_of(e.h)], j = pos[b.index_of(e.k)];
    cb.edges.push_back({std::min(i, j), std::max(i, j), e.ell, Color::red});
  }
  std::sort(cb.edges.begin(), cb.edges.end());
  if (order) *order = pos;
  return cb;
}

Eigen::MatrixXd BlockMatrixC::numeric(const std::vector<double>& xi) const {
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = entries[i][j].is_zero() ? 0.0 : entries[i][j].evaluate(xi);
  return m;
}

bool BlockMatrixC::symmetric() const {
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j)
      if (!(entries[i][j] == entries[j][i])) return false;
  return true;
}

BlockMatrixC matrix_of_block(const CombinatorialBlock& cb, int q) {
  const int a = cb.size();
  BlockMatrixC m;
  m.dim = a;
  m.entries.assign(a, std::vector<HalfPoly>(a, HalfPoly(cb.n)));
  auto w = omega1(q, cb.n);
  for (int k = 0; k < a; ++k) m.entries[k][k] = dot(w, cb.L[k]) * mpq_class(cb.sigma[k]);
  for (const auto& e : cb.edges) {
    HalfPoly c = edge_coeff(EdgeLabel::make(e.ell), q);
    m.entries[e.i][e.j] += c * mpq_class(cb.sigma[e.j]);
    if (e.i != e.j) m.entries[e.j][e.i] += c * mpq_class(cb.sigma[e.i]);
  }
  return m;
}

namespace {

// real parts within `gap` count as equal so conjugate pairs sort stably
void sort_clusters(std::vector<EigenCluster>& cl, double gap) {
  std::sort(cl.begin(), cl.end(), [gap](const EigenCluster& a, const EigenCluster& b) {
    if (std::abs(a.value.real() - b.value.real()) > gap) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
}

void finish_residuals(FittingResult& f, const Eigen::MatrixXcd& C, double ref) {
  const int n = static_cast<int>(C.rows());
  Eigen::MatrixXcd Vinv = f.V.partialPivLu().inverse();
  Eigen::MatrixXcd B = Vinv * C * f.V;
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd Nloc = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd off = B;
  f.nil_blocks.clear();
  for (std::size_t c = 0; c < f.clusters.size(); ++c) {
    int o = f.offset[c], m = f.clusters[c].mult;
    D.block(o, o, m, m) = f.clusters[c].value * Eigen::MatrixXcd::Identity(m, m);
    Eigen::MatrixXcd nb = B.block(o, o, m, m) - D.block(o, o, m, m);
    f.nil_blocks.push_back(nb);
    Nloc.block(o, o, m, m) = nb;
    off.block(o, o, m, m).setZero();
  }
  f.semisimple = f.V * D * Vinv;
  f.nilpotent = f.V * Nloc * Vinv;
  f.block_residual = off.norm() / ref;
  f.split_residual = (f.semisimple + f.nilpotent - C).norm() / ref;
  f.commutator_residual = (f.semisimple * f.nilpotent - f.nilpotent * f.semisimple).norm() / (ref * ref);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(n, n);
  for (int i = 0; i < n; ++i) p = p * f.nilpotent / ref;
  f.nilpotent_residual = p.norm();
}

}  // namespace

FittingResult fitting(const Eigen::MatrixXd& Creal, const std::vector<int>& sigma, double tol,
                      const std::string& name) {
  const int n = static_cast<int>(Creal.rows());
  if (static_cast<int>(sigma.size()) != n) throw std::invalid_argument("fitting: sigma size mismatch");
  FittingResult f;
  f.tol = tol;
  if (n == 0) return f;
  const double normC = Creal.norm();
  const double ref = normC > 0 ? normC : 1.0;
  const double gap = tol * ref;
  Eigen::MatrixXcd C = Creal.cast<cdouble>();

  const bool same_sign = std::all_of(sigma.begin(), sigma.end(), [&](int s) { return s == sigma[0]; });
  const bool symmetric = same_sign && (Creal - Creal.transpose()).norm() <= 1e-14 * ref;

  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Creal);
    const auto& ev = es.eigenvalues();
    int start = 0;
    f.V = es.eigenvectors().cast<cdouble>();
    for (int i = 1; i <= n; ++i) {
      if (i < n && ev(i) - ev(i - 1) <= gap) continue;
      if (i < n && ev(i) - ev(i - 1) < 10 * gap)
        throw RegionError(name + ": near-discriminant xi, eigenvalue gap " + std::to_string(ev(i) - ev(i - 1)));
      EigenCluster c;
      c.mult = i - start;
      c.value = ev.segment(start, c.mult).mean();
      c.real = true;
      (sigma[0] > 0 ? c.plus : c.minus) = c.mult;
      f.offset.push_back(start);
      f.clusters.push_back(c);
      start = i;
    }
    finish_residuals(f, C, ref);
    // N = 0 for self-adjoint blocks
    f.nilpotent.setZero();
    for (auto& nb : f.nil_blocks) nb.setZero();
    f.split_residual = (f.semisimple - C).norm() / ref;
    f.commutator_residual = 0;
    f.nilpotent_residual = 0;
    f.sigma_residual = (f.V.adjoint() * f.V - Eigen::MatrixXcd::Identity(n, n)).norm();
    return f;
  }

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  Eigen::VectorXcd ev = es.eigenvalues();
  // single-linkage clustering
  std::vector<int> label(n, -1);
  int nc = 0;
  for (int i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    label[i] = nc;
    std::vector<int> stack{i};
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < n; ++b)
        if (label[b] < 0 && std::abs(ev(a) - ev(b)) <= gap) {
          label[b] = nc;
          stack.push_back(b);
        }
    }
    ++nc;
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (label[a] != label[b] && std::abs(ev(a) - ev(b)) < 10 * gap)
        throw RegionError(name + ": near-discriminant xi, eigenvalues " + std::to_string(std::abs(ev(a) - ev(b))) +
                          " apart");
  std::vector<EigenCluster> cl(nc);
  for (int i = 0; i < n; ++i) {
    cl[label[i]].value += ev(i);
    cl[label[i]].mult += 1;
  }
  for (auto& c : cl) {
    c.value /= static_cast<double>(c.mult);
    c.real = std::abs(c.value.imag()) <= gap;
    if (c.real) c.value = c.value.real();
  }
  sort_clusters(cl, gap);

  Eigen::MatrixXd Sig = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) Sig(i, i) = sigma[i];

  f.V.resize(n, n);
  int o = 0;
  std::vector<int> real_cols;
  std::vector<double> real_sign;
  for (auto& c : cl) {
    const int m = c.mult;
    f.offset.push_back(o);
    if (c.real) {
      Eigen::MatrixXd A = Creal - c.value.real() * Eigen::MatrixXd::Identity(n, n);
      Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
      for (int k = 0; k < m; ++k) P = P * A;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullV);
      Eigen::MatrixXd W = svd.matrixV().rightCols(m);
      Eigen::MatrixXd G = W.transpose() * Sig * W;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(G);
      // plus directions first
      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int x, int y) { return gs.eigenvalues()(x) > gs.eigenvalues()(y); });
      const double gmax = gs.eigenvalues().cwiseAbs().maxCoeff();
      for (int k = 0; k < m; ++k) {
        double dk = gs.eigenvalues()(idx[k]);
        double sc = std::abs(dk) > 1e-12 * gmax && gmax > 0 ? 1.0 / std::sqrt(std::abs(dk)) : 1.0;
        f.V.col(o + k) = (W * gs.eigenvectors().col(idx[k]) * sc).cast<cdouble>();
        if (dk >= 0)
          ++c.plus;
        else
          ++c.minus;
        real_cols.push_back(o + k);
        real_sign.push_back(dk >= 0 ? 1.0 : -1.0);
      }
    } else {
      Eigen::MatrixXcd A = C - c.value * Eigen::MatrixXcd::Identity(n, n);
      Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(n, n);
      for (int k = 0; k < m; ++k) P = P * A;
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P, Eigen::ComputeFullV);
      f.V.middleCols(o, m) = svd.matrixV().rightCols(m);
      (c.value.imag() > 0 ? c.plus : c.minus) = m;
    }
    o += m;
  }
  f.clusters = cl;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(f.V);
  if (lu.rank() < n) throw RegionError(name + ": generalized eigenspaces do not span; xi too close to a discriminant");
  finish_residuals(f, C, ref);

  double sres = 0;
  for (std::size_t a = 0; a < real_cols.size(); ++a)
    for (std::size_t b = 0; b < real_cols.size(); ++b) {
      cdouble g = f.V.col(real_cols[a]).adjoint() * Sig.cast<cdouble>() * f.V.col(real_cols[b]);
      double target = a == b ? real_sign[a] : 0.0;
      sres += std::norm(g - target);
    }
  f.sigma_residual = std::sqrt(sres);
  return f;
}

FittingResult fitting(const BlockMatrixC& C, const std::vector<int>& sigma, const std::vector<double>& xi, double tol,
                      const std::string& name) {
  FittingResult f = fitting(C.numeric(xi), sigma, tol, name);
  f.xi = xi;
  return f;
}

namespace {

double xi_scale(const std::vector<double>& xi, int q) {
  double s = 0;
  for (double x : xi) s += x;
  return std::pow(s, q);
}

}  // namespace

EigenCatalog eigenvalue_catalog(const std::vector<CombinatorialBlock>& cbs, int q,
                                const std::vector<std::vector<double>>& samples, double tol, int workers) {
  if (samples.empty()) throw std::invalid_argument("eigenvalue_catalog: no samples");
  EigenCatalog cat;
  cat.q = q;
  cat.samples = samples;
  std::vector<double> scaled = samples[0];
  for (double& x : scaled) x *= cat.scale;
  const double hom = std::pow(cat.scale, q);

  cat.blocks.resize(cbs.size());
  std::vector<std::vector<FittingResult>> scaled_fit(cbs.size());
  parallel_for(cbs.size(), workers, [&](std::size_t b) {
    auto C = matrix_of_block(cbs[b], q);
    std::string name = "block " + std::to_string(b);
    auto& bs = cat.blocks[b];
    for (const auto& xi : samples) bs.fits.push_back(fitting(C, cbs[b].sigma, xi, tol, name));
    scaled_fit[b].push_back(fitting(C, cbs[b].sigma, scaled, tol, name));
    const auto& f0 = bs.fits[0];
    auto pattern_ok = [&](const FittingResult& f) {
      if (f.clusters.size() != f0.clusters.size()) return false;
      for (std::size_t c = 0; c < f.clusters.size(); ++c) {
        const auto &x = f.clusters[c], &y = f0.clusters[c];
        if (x.mult != y.mult || x.real != y.real || x.plus != y.plus || x.minus != y.minus) return false;
      }
      return true;
    };
    for (const auto& f : bs.fits)
      if (!pattern_ok(f))
        throw RegionError(name + ": eigenvalue pattern changes across samples; samples straddle a region boundary");
    const auto& fs = scaled_fit[b][0];
    if (!pattern_ok(fs)) throw RegionError(name + ": eigenvalue pattern changes under scaling");
    const double floor = tol * xi_scale(samples[0], q) * hom;
    for (std::size_t c = 0; c < fs.clusters.size(); ++c) {
      cdouble want = hom * f0.clusters[c].value;
      if (std::abs(fs.clusters[c].value - want) > std::max(floor, tol * std::abs(want)) * 100)
        throw RegionError(name + ": eigenvalue branch is not homogeneous of degree q");
    }
  });

  const std::size_t ns = samples.size();
  std::vector<double> floors(ns);
  for (std::size_t s = 0; s < ns; ++s) floors[s] = tol * xi_scale(samples[s], q);
  for (std::size_t b = 0; b < cbs.size(); ++b) {
    auto& bs = cat.blocks[b];
    const auto& f0 = bs.fits[0];
    for (std::size_t c = 0; c < f0.clusters.size(); ++c) {
      std::vector<cdouble> vals(ns);
      for (std::size_t s = 0; s < ns; ++s) vals[s] = bs.fits[s].clusters[c].value;
      int found = -1;
      for (const auto& br : cat.branches) {
        std::size_t agree = 0;
        for (std::size_t s = 0; s < ns; ++s) {
          double t = std::max(floors[s], tol * std::max(std::abs(vals[s]), std::abs(br.values[s])));
          if (std::abs(vals[s] - br.values[s]) <= 100 * t) ++agree;
        }
        if (agree == ns) {
          found = br.id;
          break;
        }
        if (agree > 0)
          throw RegionError("block " + std::to_string(b) + ": eigenvalue branch agrees with branch " +
                            std::to_string(br.id) + " at some samples only");
      }
      if (found < 0) {
        Branch br;
        br.id = static_cast<int>(cat.branches.size());
        br.real = f0.clusters[c].real;
        br.source_block = static_cast<int>(b);
        br.values = vals;
        br.scaled_value = scaled_fit[b][0].clusters[c].value;
        cat.branches.push_back(br);
        found = br.id;
      }
      bs.branch.push_back(found);
      bs.mult.push_back(f0.clusters[c].mult);
      bs.plus.push_back(f0.clusters[c].plus);
      bs.minus.push_back(f0.clusters[c].minus);
    }
  }
  return cat;
}

Eigen::MatrixXd ad_block(const CombinatorialBlock& cb, Int root_norm2, const IVec& nu, int q,
                         const std::vector<double>& xi, const TangentialSites& S) {
  Eigen::MatrixXd C = matrix_of_block(cb, q).numeric(xi);
  auto w = omega1(q, cb.n);
  double shift = static_cast<double>(root_norm2);
  auto nn = S.norms2();
  for (int i = 0; i < cb.n; ++i) {
    if (nu[i] == 0) continue;
    shift += static_cast<double>(nu[i] * nn[i]) + static_cast<double>(nu[i]) * w[i].evaluate(xi);
  }
  C.diagonal().array() += shift;
  return C;
}

}  // namespace rnf
