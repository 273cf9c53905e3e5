#include "rnf/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <tuple>

#include "rnf/parallel.hpp"
#include "rnf/random.hpp"

namespace rnf {

double normal01(std::mt19937_64& rng) {
  double u1 = uniform01(rng), u2 = uniform01(rng);
  if (u1 <= 0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

bool satisfies_conservation(const MelnikovBlockId& id, const Partition& p, const TangentialSites& S) {
  auto im = linear_maps(id.nu, S);
  if (id.sigma == 0) return id.sigma_p == 0 && im.eta == 0 && is_zero(im.pi) && !is_zero(id.nu);
  if (id.t < 0) return false;
  const IVec& rt = p.roots[id.t].r;
  if (id.sigma_p == 0) return im.eta + 1 == 0 && is_zero(add(im.pi, rt));
  if (id.tp < 0) return false;
  const int ss = id.sigma * id.sigma_p;
  return im.eta + 1 + ss == 0 && is_zero(add(add(im.pi, rt), scale(ss, p.roots[id.tp].r)));
}

Eigen::MatrixXcd left_mult(const Eigen::MatrixXcd& A, int cols) {
  const int r = static_cast<int>(A.rows());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(r * cols, r * cols);
  for (int c = 0; c < cols; ++c) out.block(c * r, c * r, r, r) = A;
  return out;
}

Eigen::MatrixXcd right_mult(const Eigen::MatrixXcd& B, int rows) {
  const int c = static_cast<int>(B.rows());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rows * c, rows * c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      if (B(i, j) != cdouble(0)) out.block(i * rows, j * rows, rows, rows).diagonal().setConstant(B(i, j));
  return out;
}

namespace {

double omega_dot(const NormalForm& nf, const IVec& nu) {
  double s = 0;
  for (std::size_t i = 0; i < nu.size(); ++i) s += nf.omega[i] * static_cast<double>(nu[i]);
  return s;
}

}  // namespace

Eigen::MatrixXcd block_operator(const MelnikovBlockId& id, const NormalForm& nf) {
  const double wn = omega_dot(nf, id.nu);
  if (id.sigma == 0) return Eigen::MatrixXcd::Constant(1, 1, wn);
  const auto& A = nf.blocks[id.t].omega;
  const int dt = static_cast<int>(A.rows());
  if (id.sigma_p == 0)
    return static_cast<double>(id.sigma) * (wn * Eigen::MatrixXcd::Identity(dt, dt) + A);
  const auto& B = nf.blocks[id.tp].omega;
  const int dp = static_cast<int>(B.rows());
  Eigen::MatrixXcd op = wn * Eigen::MatrixXcd::Identity(dt * dp, dt * dp) + left_mult(A, dp) +
                        static_cast<double>(id.sigma * id.sigma_p) * right_mult(B, dt);
  return static_cast<double>(id.sigma) * op;
}

Int integer_part(const MelnikovBlockId& id, const Partition& p, const TangentialSites& S) {
  Int u = linear_maps(id.nu, S).pi2;
  if (id.sigma != 0) u += id.sigma * norm2(p.roots[id.t].r);
  if (id.sigma_p != 0) u += id.sigma_p * norm2(p.roots[id.tp].r);
  return u;
}

const char* screen_name(Screen s) {
  switch (s) {
    case Screen::invertible_fast: return "invertible_fast";
    case Screen::needs_full_check: return "needs_full_check";
    case Screen::singular: return "singular";
  }
  return "?";
}

namespace {

double max_block_deviation(const NormalForm& nf, const Partition& p) {
  double m = 0;
  for (std::size_t t = 0; t < nf.blocks.size(); ++t) {
    const auto& A = nf.blocks[t].omega;
    const double r2 = static_cast<double>(norm2(p.roots[t].r));
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) m = std::max(m, std::abs(A(i, j) - (i == j ? r2 : 0.0)));
  }
  return m;
}

}  // namespace

double measure_M(const NormalForm& nf, const Partition& p, const TangentialSites& S, double epsilon, int q) {
  double m = max_block_deviation(nf, p);
  auto nn = S.norms2();
  for (std::size_t i = 0; i < nf.omega.size(); ++i)
    m = std::max(m, std::abs(nf.omega[i] - static_cast<double>(nn[i])));
  return m / std::pow(epsilon, 2 * q);
}

Screen invertibility_screen(const MelnikovBlockId& id, const NormalForm& nf, const Partition& p,
                            const TangentialSites& S, const ScreenParams& prm) {
  if (id.is_kernel()) return Screen::singular;
  auto nn = S.norms2();
  double u = static_cast<double>(integer_part(id, p, S));
  for (std::size_t i = 0; i < id.nu.size(); ++i)
    u += (nf.omega[i] - static_cast<double>(nn[i])) * static_cast<double>(id.nu[i]);
  const double ell = (2.0 * prm.d + 1) * (2.0 * prm.d + 1);
  if (std::abs(u) > 2 * ell * prm.M * std::pow(prm.epsilon, 2 * prm.q)) return Screen::invertible_fast;
  return Screen::needs_full_check;
}

RootLookup::RootLookup(const Partition& p) {
  for (std::size_t t = 0; t < p.roots.size(); ++t) by_r_[p.roots[t].r].push_back(static_cast<int>(t));
}

const std::vector<int>& RootLookup::at(const IVec& r) const {
  auto it = by_r_.find(r);
  return it == by_r_.end() ? empty_ : it->second;
}

std::vector<IVec> nu_ball(int n, int K) {
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

std::vector<MelnikovBlockId> enumerate_blocks(const Partition& p, const TangentialSites& S, int K,
                                              const std::vector<int>& ts, bool include_constant) {
  RootLookup look(p);
  std::vector<MelnikovBlockId> out;
  auto ball = nu_ball(S.n(), K);
  std::vector<LinearImage> ims;
  for (const auto& nu : ball) ims.push_back(linear_maps(nu, S));
  if (include_constant)
    for (std::size_t v = 0; v < ball.size(); ++v)
      if (!is_zero(ball[v]) && ims[v].eta == 0 && is_zero(ims[v].pi)) out.push_back({ball[v], -1, -1, 0, 0});
  for (int t : ts) {
    const IVec& rt = p.roots[t].r;
    for (std::size_t v = 0; v < ball.size(); ++v) {
      const auto& im = ims[v];
      IVec m = add(im.pi, rt);
      for (int sg : {1, -1}) {
        if (im.eta + 1 == 0 && is_zero(m)) out.push_back({ball[v], t, -1, sg, 0});
        for (int sp : {1, -1}) {
          const int ss = sg * sp;
          if (im.eta + 1 + ss != 0) continue;
          for (int tp : look.at(scale(-ss, m))) out.push_back({ball[v], t, tp, sg, sp});
        }
      }
    }
  }
  return out;
}

KernelVerifyReport kernel_verify(const std::vector<NormalForm>& nfs, const Partition& p, const TangentialSites& S,
                                 int q, double epsilon, int nu_max, const std::vector<int>& ts, double det_factor) {
  KernelVerifyReport rep;
  rep.samples = nfs.size();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  auto blocks = enumerate_blocks(p, S, nu_max, ts);
  const double e2q = std::pow(epsilon, 2 * q);
  for (const auto& nf : nfs) {
    for (const auto& id : blocks) {
      ++rep.tested;
      Eigen::MatrixXcd op = block_operator(id, nf);
      const int dim = static_cast<int>(op.rows());
      if (id.is_kernel()) {
        ++rep.kernel_blocks;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op);
        double smin = svd.singularValues()(dim - 1);
        if (smin <= 1e-9 * std::max(1.0, op.norm()))
          ++rep.kernel_singular;
        else if (rep.failures.size() < 20)
          rep.failures.push_back({"kernel-regular", "kernel block at root " + to_string(p.roots[id.t].r) +
                                                        " is invertible"});
        continue;
      }
      double det = std::abs(op.partialPivLu().determinant());
      double ratio = det / std::pow(e2q, dim);
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      if (!(ratio > det_factor)) {
        ++rep.unexpected_singular;
        if (rep.failures.size() < 20)
          rep.failures.push_back({"singular-block", "nu=" + to_string(id.nu) + " sigma=" + std::to_string(id.sigma) +
                                                        "," + std::to_string(id.sigma_p) +
                                                        " ratio=" + std::to_string(ratio)});
      }
    }
  }
  return rep;
}

ResonantScanReport resonant_scan(const std::vector<NormalForm>& grid, const Partition& p, const TangentialSites& S,
                                 int q, double epsilon, int K, const std::vector<double>& rhos,
                                 const std::vector<int>& ts, std::size_t min_points, int workers) {
  ResonantScanReport rep;
  rep.K = K;
  rep.rhos = rhos;
  rep.grid_points = grid.size();
  rep.census_bound = std::pow(static_cast<double>(K), S.n() + S.d() / 2.0 + 1.0);
  const std::size_t nr = rhos.size();
  rep.fraction.assign(nr, 0);
  rep.census.assign(nr, 0);
  if (grid.size() < min_points) {
    rep.failures.push_back({"grid-too-coarse", "resonant scan needs at least " + std::to_string(min_points) +
                                                   " grid points, got " + std::to_string(grid.size())});
    return rep;
  }
  auto all = enumerate_blocks(p, S, K, ts);
  std::vector<MelnikovBlockId> blocks;
  for (auto& b : all)
    if (!b.is_kernel()) blocks.push_back(std::move(b));

  // class key: (nu, sigma, sigma', integer part, type_t, type_t')
  using Type = std::tuple<int, int, int>;  // finite, theta, d_t
  auto type_of = [&](int t) -> Type {
    if (t < 0) return {-1, -1, 0};
    return {p.roots[t].finite ? 1 : 0, p.roots[t].theta, static_cast<int>(p.roots[t].sites.size())};
  };
  using Key = std::tuple<IVec, int, int, Int, Type, Type>;
  std::map<Key, int> class_of;
  std::vector<int> cls(blocks.size());
  std::vector<double> upart(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& id = blocks[b];
    Int u = integer_part(id, p, S);
    upart[b] = static_cast<double>(u);
    Key key{id.nu, id.sigma, id.sigma_p, u, type_of(id.t), type_of(id.tp)};
    cls[b] = class_of.emplace(key, static_cast<int>(class_of.size())).first->second;
  }
  rep.classes_examined = class_of.size();

  std::vector<double> thr(nr);
  for (std::size_t r = 0; r < nr; ++r) thr[r] = std::pow(epsilon, 2 * q) * std::pow(static_cast<double>(K), -rhos[r]);
  const double thr_max = *std::max_element(thr.begin(), thr.end());
  const int d = S.d();
  const double ell = (2.0 * d + 1) * (2.0 * d + 1);
  auto nn = S.norms2();

  // per grid point: smallest singular value of each candidate block
  std::vector<std::vector<std::pair<int, double>>> hits(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    const auto& nf = grid[g];
    const double rem = 2 * ell * max_block_deviation(nf, p);
    std::vector<double> w1(nf.omega.size());
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = nf.omega[i] - static_cast<double>(nn[i]);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      double u = upart[b];
      for (std::size_t i = 0; i < w1.size(); ++i) u += w1[i] * static_cast<double>(blocks[b].nu[i]);
      if (std::abs(u) - rem > thr_max) continue;
      Eigen::MatrixXcd op = block_operator(blocks[b], nf);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op);
      double smin = svd.singularValues()(op.rows() - 1);
      if (smin < thr_max) hits[g].push_back({static_cast<int>(b), smin});
    }
  });

  std::vector<std::set<int>> nonempty(nr);
  std::vector<std::size_t> points(nr, 0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<bool> res(nr, false);
    for (const auto& [b, smin] : hits[g])
      for (std::size_t r = 0; r < nr; ++r)
        if (smin < thr[r]) {
          res[r] = true;
          nonempty[r].insert(cls[b]);
        }
    for (std::size_t r = 0; r < nr; ++r) points[r] += res[r];
  }
  for (std::size_t r = 0; r < nr; ++r) {
    rep.fraction[r] = static_cast<double>(points[r]) / static_cast<double>(grid.size());
    rep.census[r] = nonempty[r].size();
  }
  std::vector<std::size_t> idx(nr);
  for (std::size_t r = 0; r < nr; ++r) idx[r] = r;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rhos[a] < rhos[b]; });
  for (std::size_t k = 1; k < nr; ++k)
    if (rep.fraction[idx[k]] > rep.fraction[idx[k - 1]]) rep.monotone = false;
  return rep;
}

TecnicoResult tecnico_check(const std::function<double(const std::vector<double>&)>& f, int k_abs, double c,
                            double alpha, const std::vector<double>& lo, const std::vector<double>& hi,
                            std::size_t samples, std::mt19937_64& rng) {
  const std::size_t n = lo.size();
  double vol = 1, zeta = 0;
  for (std::size_t i = 0; i < n; ++i) {
    vol *= hi[i] - lo[i];
    zeta = std::max(zeta, hi[i] - lo[i]);
  }
  const double level = std::pow(alpha, k_abs);
  std::size_t hit = 0;
  std::vector<double> x(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) x[i] = uniform(rng, lo[i], hi[i]);
    if (std::abs(f(x)) <= level) ++hit;
  }
  TecnicoResult r;
  const double ph = static_cast<double>(hit) / static_cast<double>(samples);
  r.measure = ph * vol;
  r.stderr_ = vol * std::sqrt(ph * (1 - ph) / static_cast<double>(samples));
  r.bound = 2.0 * k_abs * std::pow(zeta, static_cast<double>(n) - 1) * alpha / c;
  r.pass = r.measure <= r.bound + 3 * r.stderr_;
  return r;
}

}  // namespace rnf
