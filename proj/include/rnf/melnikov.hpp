#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <random>
#include <vector>

#include "rnf/final_graph.hpp"

namespace rnf {

// Block of ad(N) acting on exp(i sigma nu.x) w_t^sigma w_t'^sigma'.
struct MelnikovBlockId {
  IVec nu;
  int t = -1;   // index into Partition::roots, -1 when sigma = 0
  int tp = -1;  // -1 when sigma' = 0
  int sigma = 0;
  int sigma_p = 0;

  bool is_kernel() const { return is_zero(nu) && sigma != 0 && sigma_p == -sigma && t == tp; }
};

bool satisfies_conservation(const MelnikovBlockId& id, const Partition& p, const TangentialSites& S);

// L(A) X = A X and R(B) X = X B^T on column-major vec(X).
Eigen::MatrixXcd left_mult(const Eigen::MatrixXcd& A, int cols);
Eigen::MatrixXcd right_mult(const Eigen::MatrixXcd& B, int rows);

Eigen::MatrixXcd block_operator(const MelnikovBlockId& id, const NormalForm& nf);

// j2 . nu + sigma |r_t|^2 + sigma' |r_t'|^2
Int integer_part(const MelnikovBlockId& id, const Partition& p, const TangentialSites& S);

enum class Screen { invertible_fast, needs_full_check, singular };
const char* screen_name(Screen s);

struct ScreenParams {
  double epsilon = 0.1;
  double M = 1;
  int q = 1;
  int d = 1;
};

// max(|Omega_t - |r_t|^2|, |omega - j2|) entrywise, over eps^{2q}
double measure_M(const NormalForm& nf, const Partition& p, const TangentialSites& S, double epsilon, int q);

Screen invertibility_screen(const MelnikovBlockId& id, const NormalForm& nf, const Partition& p,
                            const TangentialSites& S, const ScreenParams& prm);

// Roots by position, for pinning t' from momentum conservation.
class RootLookup {
 public:
  explicit RootLookup(const Partition& p);
  const std::vector<int>& at(const IVec& r) const;

 private:
  std::map<IVec, std::vector<int>> by_r_;
  std::vector<int> empty_;
};

// All block ids with |nu|_1 <= K and t in `ts`, partners pinned by conservation.
std::vector<MelnikovBlockId> enumerate_blocks(const Partition& p, const TangentialSites& S, int K,
                                              const std::vector<int>& ts, bool include_constant = true);

std::vector<IVec> nu_ball(int n, int K);

struct KernelVerifyReport {
  std::size_t samples = 0;
  std::size_t tested = 0;
  std::size_t kernel_blocks = 0;
  std::size_t kernel_singular = 0;
  std::size_t unexpected_singular = 0;
  double min_ratio = 0;  // min |det| / eps^{2q dim} over non-kernel blocks
  Diagnostics failures;
  bool pass() const { return kernel_blocks == kernel_singular && unexpected_singular == 0 && tested > 0; }
};

KernelVerifyReport kernel_verify(const std::vector<NormalForm>& nfs, const Partition& p, const TangentialSites& S,
                                 int q, double epsilon, int nu_max, const std::vector<int>& ts,
                                 double det_factor = 1e-8);

struct ResonantScanReport {
  int K = 0;
  std::size_t grid_points = 0;
  std::size_t classes_examined = 0;
  std::vector<double> rhos;
  std::vector<double> fraction;     // per rho: share of grid points resonant for some class
  std::vector<std::size_t> census;  // per rho: classes with a resonant grid point
  double census_bound = 0;          // K^{n + d/2 + 1}
  bool monotone = true;
  Diagnostics failures;
};

ResonantScanReport resonant_scan(const std::vector<NormalForm>& grid, const Partition& p, const TangentialSites& S,
                                 int q, double epsilon, int K, const std::vector<double>& rhos,
                                 const std::vector<int>& ts, std::size_t min_points = 4, int workers = 1);

struct TecnicoResult {
  double measure = 0;
  double stderr_ = 0;
  double bound = 0;
  bool pass = false;
};

// Monte Carlo estimate of meas{x in box : |f(x)| <= alpha^{|k|}} against 2|k| zeta^{n-1} alpha / c.
TecnicoResult tecnico_check(const std::function<double(const std::vector<double>&)>& f, int k_abs, double c,
                            double alpha, const std::vector<double>& lo, const std::vector<double>& hi,
                            std::size_t samples, std::mt19937_64& rng);

}  // namespace rnf
