#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rnf/final_graph.hpp"
#include "rnf/hamiltonian.hpp"

namespace rnf {

// NLS truncated to a box, in the u variables (no angles; every box point is a site).
struct NlsModel {
  TruncatedHamiltonian H;      // quadratic energy + full degree 2q+2 part
  TruncatedHamiltonian H_birk;  // quadratic energy + resonant, tangentially split part
  TruncatedHamiltonian F_birk;  // generator removing the non-resonant part
  TruncatedHamiltonian P_rest;  // resonant terms at least cubic in the normal sites
};

NlsModel build_nls(int q, const TangentialSites& S, Int box);

// u_{j_i} = sqrt(xi_i + y_i) e^{i x_i}, series in y_i truncated at y_order; constants dropped.
TruncatedHamiltonian to_action_angle(const TruncatedHamiltonian& H_u, const TangentialSites& S,
                                     const std::vector<double>& xi, int y_order, Cutoffs cut = {});

// L, M (one per lattice direction) and K built from the charges of the phase space.
struct ConservedQuantities {
  TruncatedHamiltonian L;
  std::vector<TruncatedHamiltonian> M;
  TruncatedHamiltonian K;
};
ConservedQuantities conserved_quantities(const std::shared_ptr<const PhaseSpace>& sp, Cutoffs cut = {});

// Largest coefficient among {H, L}, {H, M_c}, {H, K}; zero means exact conservation.
double conservation_defect(const TruncatedHamiltonian& H, const ConservedQuantities& q);

// Assembled normal form as a Hamiltonian in the shifted coordinates. Each site
// carries the charges of its shifted variable, computed from its shift data.
struct NormalFormHamiltonian {
  std::shared_ptr<const PhaseSpace> space;
  KamPartition partition;
  TruncatedHamiltonian N;
};
NormalFormHamiltonian normal_form_hamiltonian(const NormalForm& nf, const Partition& p, const TangentialSites& S);

// Range basis of degree <= 2 with |nu|_1 <= K, conserving mass and momentum.
std::vector<Monomial> range_basis(const PhaseSpace& sp, const KamPartition& part, int K);

class SingularBlockError : public std::runtime_error {
 public:
  SingularBlockError(const std::string& block, double sigma_min)
      : std::runtime_error("ad(N) singular on block " + block), block_(block), sigma_min_(sigma_min) {}
  const std::string& block() const { return block_; }
  double sigma_min() const { return sigma_min_; }

 private:
  std::string block_;
  double sigma_min_;
};

// ad(N) = {N, .} restricted to the range, inverted block by block. Blocks are
// labelled by (nu, y, blocks D_t of the w-factors).
class AdNInverse {
 public:
  AdNInverse(const TruncatedHamiltonian& N, const KamPartition& part, int K, double singular_tol = 1e-10);
  TruncatedHamiltonian apply(const TruncatedHamiltonian& b);
  std::size_t blocks() const { return cache_.size(); }
  std::size_t max_block() const { return max_block_; }
  double min_singular() const { return min_sigma_; }

 private:
  using Key = std::tuple<IVec, IVec, std::vector<int>>;
  struct Block {
    std::vector<Monomial> members;
    std::map<Monomial, int> pos;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  };
  Key key_of(const Monomial& m) const;
  const Block& block(const Key& key);

  const TruncatedHamiltonian* N_;
  const KamPartition* part_;
  int K_;
  double tol_;
  std::vector<std::vector<int>> sites_of_block_;
  std::map<Key, Block> cache_;
  std::size_t max_block_ = 0;
  double min_sigma_ = 0;
};

struct HomologicalOptions {
  int K = 4;
  double singular_tol = 1e-10;
  int workers = 1;
  NormParams norm;
};

struct HomologicalResult {
  TruncatedHamiltonian F;
  double residual = 0;  // || ad(N)F + Pi_rg,K {P>2, F} - Pi_K P_rg ||
  double rhs_norm = 0;  // || P_rg ||
  bool cube_zero = false;  // A^3 = 0 on the solution chain
  std::size_t blocks = 0;
  std::size_t max_block = 0;
  double min_singular = 0;
};

// Solves {N, F} + Pi_{rg,<=K} {P>2, F} = Pi_{<=K} P_rg with F = (1 - A + A^2) ad(N)^{-1} b.
HomologicalResult solve_homological(const TruncatedHamiltonian& N, const TruncatedHamiltonian& P_gt2,
                                    const TruncatedHamiltonian& P_rg, const KamPartition& part,
                                    const HomologicalOptions& opt);

// Lie series e^{ad F} H; stops when the increment is below rel_tol ||H||.
struct LieSeriesResult {
  TruncatedHamiltonian H;
  int order = 0;
};
LieSeriesResult lie_transform(const TruncatedHamiltonian& F, const TruncatedHamiltonian& H, const NormParams& np,
                              double rel_tol = 1e-14, int max_order = 40, int workers = 1);

struct KamOptions {
  NormParams norm;
  double singular_tol = 1e-10;
  double lie_tol = 1e-14;
  int lie_max_order = 40;
  int workers = 1;
};

struct KamStepReport {
  int K = 0;
  double prg_before = 0;
  double prg_after = 0;
  double prg_after_low = 0;  // Pi_{<=K} part
  double prg_after_uv = 0;   // Pi_{>K} part carried over
  double F_norm = 0;
  double ratio = 0;  // prg_after / prg_before^2
  double residual = 0;
  double truncation_debt = 0;
  bool cube_zero = true;
  int lie_order = 0;
  double wall_seconds = 0;
};

struct KamStepResult {
  TruncatedHamiltonian H;
  KamStepReport report;
};

KamStepResult kam_step(const TruncatedHamiltonian& H, int K, const KamPartition& part, const KamOptions& opt);

struct DecayRow {
  int m = 0;
  int K = 0;
  double s = 0;
  double r = 0;
  double prg = 0;  // ||P_rg,m|| at the step's (s, r)
  KamStepReport step;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  std::vector<double> prg;  // ||P_rg,m||, m = 0..steps, measured with the initial (s, r)
  double exponent = 0;      // slope of log prg_{m+1} against log prg_m
  bool exponent_defined = false;
  std::optional<std::string> excluded;  // resonant block that stopped the iteration
  double conservation_defect = 0;       // max over iterates of {N_m, L}, {N_m, M}
};

struct Schedule {
  double s0 = 0.5;
  double r0 = 0.5;
};

// K_m = 4^m K0, s_{m+1} = (1 - 2^{-m-3}) s_m, same for r.
DecayTable kam_iterate(const TruncatedHamiltonian& H0, const KamPartition& part, int steps, int K0,
                       const Schedule& sched, const KamOptions& opt, int max_steps = 4);

std::string decay_csv(const DecayTable& t);

// Least-squares slope of log b against log a over pairs with positive entries.
std::optional<double> loglog_slope(const std::vector<double>& a, const std::vector<double>& b);

// Toy instance: n = 2, d = 2, S = {(0,0), (1,0)}, diagonal N, random range
// perturbation with |nu|_1 <= K0 - 1 and cubic terms with |nu|_1 = 1.
struct ToyParams {
  Int box = 6;
  int K0 = 4;
  double eps_rg = 1e-3;
  double eps_p3 = 0.05;
  int rg_terms = 40;
  int p3_terms = 30;
  std::uint64_t seed = 1;
};

struct ToyInstance {
  std::shared_ptr<const PhaseSpace> space;
  KamPartition partition;
  std::vector<double> omega;
  std::vector<double> Omega;
  TruncatedHamiltonian N;
  TruncatedHamiltonian P_rg;
  TruncatedHamiltonian P3;
  TruncatedHamiltonian H() const { return N + P_rg + P3; }
};

ToyInstance make_toy(const ToyParams& p);

}  // namespace rnf
