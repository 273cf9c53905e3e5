#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnf/block_matrices.hpp"
#include "rnf/diagnostics.hpp"
#include "rnf/lattice.hpp"
#include "rnf/resonance_graph.hpp"

namespace rnf {

// Non-boundary blocks with their canonical forms and eigenvalue catalog.
struct BlockAtlas {
  int q = 0;
  int n = 0;
  std::vector<GeometricBlock> blocks;
  std::vector<CombinatorialBlock> combs;  // distinct canonical forms
  std::vector<int> comb_of;               // per block
  std::vector<std::vector<int>> order;    // per block: canonical position of each vertex
  std::vector<std::vector<int>> cluster_of_position;  // per comb: cluster of each canonical position
  EigenCatalog catalog;                   // parallel to combs
};

BlockAtlas build_atlas(const std::vector<GeometricBlock>& blocks, int n, int q,
                       const std::vector<std::vector<double>>& samples, double tol, int workers = 1);

// Cluster of each canonical position: clusters in order, each taking its
// plus-count of sigma=+1 positions and minus-count of sigma=-1 positions.
std::vector<int> assign_sites(const CombinatorialBlock& cb, const BlockSpectrum& sp);

// Branch values at arbitrary xi via the source blocks of the catalog.
class BranchEvaluator {
 public:
  BranchEvaluator(const BlockAtlas& atlas, double tol);
  std::vector<cdouble> values(const std::vector<double>& xi) const;
  FittingResult fit(int comb, const std::vector<double>& xi) const;

 private:
  const BlockAtlas* atlas_;
  double tol_;
  std::vector<BlockMatrixC> mats_;
};

struct YEdge {
  IVec ell;
  Color color = Color::black;
  std::vector<std::pair<int, int>> witnesses;  // branch pairs
};

// Integer relations omega1 . ell = delta between branches.
struct YTable {
  int nb = 0;
  std::vector<std::optional<IVec>> black;   // [a*nb+b]: omega1.ell = theta_b - theta_a
  std::vector<std::optional<IVec>> red;     // [a*nb+b]: omega1.ell = -(theta_a + theta_b)
  std::vector<std::optional<IVec>> linear;  // [a]: omega1.ell = -theta_a
  std::vector<YEdge> edges;                 // admissible labels only, sorted by (color, ell)
  Diagnostics diagnostics;

  const std::optional<IVec>& black_rel(int a, int b) const { return black[a * nb + b]; }
  const std::optional<IVec>& red_rel(int a, int b) const { return red[a * nb + b]; }
};

// Recovers ell from sampled values of omega1 . ell; nullopt when no integer
// solution fits every sample.
std::optional<IVec> solve_relation(const std::vector<std::vector<double>>& w_samples,
                                   const std::vector<cdouble>& delta, double tol, Diagnostics* diag = nullptr,
                                   const std::string& what = "");

YTable y_edges(const EigenCatalog& cat, int q, int n, double tol);

struct FinalVertex {
  IVec r;
  int theta = 0;
  int block = 0;    // index into atlas.blocks
  int cluster = 0;  // cluster index within the block spectrum
};

struct FinalEdge {
  int a = 0, b = 0;  // black: r_b = r_a + pi(ell); red: a <= b, r_b = -pi(ell) - r_a
  IVec ell;
  Color color = Color::black;
};

struct FinalGraph {
  std::vector<FinalVertex> vertices;
  std::map<std::pair<IVec, int>, int> index;
  std::vector<FinalEdge> edges;
  std::vector<std::vector<int>> components;  // vertex ids, sorted by (r, theta)
  std::vector<int> component_of;
  bool closure_ok = true;
  Diagnostics diagnostics;   // non-genericity findings
  Diagnostics consistency;   // closure failures (internal errors)
};

FinalGraph build_final_graph(const BlockAtlas& atlas, const YTable& y, const TangentialSites& S);

struct SiteInfo {
  IVec k;
  IVec r;         // root of its geometric block
  int theta = 0;  // branch id
  int sigma = 1;
  IVec L;
  int block = 0;
  int cluster = 0;
  int vertex = 0;  // final vertex
  int t = 0;       // index into Partition::roots
  IVec ell;        // ell_k
  int s = 1;
};

struct FinalRoot {
  IVec r;
  int theta = 0;
  int vertex = 0;
  bool finite = false;     // member of T_f
  std::vector<int> sites;  // D_t as indices into Partition::sites
};

struct Partition {
  std::vector<SiteInfo> sites;
  std::map<IVec, int> site_index;
  std::vector<FinalRoot> roots;
  Diagnostics diagnostics;  // non-genericity (size bounds)
  Diagnostics failures;     // identity violations (internal errors)
};

Partition finalize_partition(const BlockAtlas& atlas, const FinalGraph& g, const TangentialSites& S, int d,
                             double tol);

struct NormalFormBlock {
  int t = 0;
  Eigen::MatrixXcd omega;  // (|r_t|^2 + theta_t) I + nilpotent
  Eigen::MatrixXcd nil;
};

struct NormalForm {
  std::vector<double> xi;
  std::vector<double> omega;  // |j_i|^2 + omega1_i(xi)
  std::vector<NormalFormBlock> blocks;  // parallel to Partition::roots
  std::vector<cdouble> theta;           // branch values at xi
  double frequency_residual = 0;        // shifted diagonal vs (|r_t|^2 + theta_t), relative
  double nilpotent_residual = 0;
  bool conservation_exact = true;       // L, M, K coefficients after the shift
  Diagnostics failures;
};

NormalForm assemble_normal_form(const Partition& p, const BlockAtlas& atlas, const FinalGraph& g,
                                const TangentialSites& S, int q, const std::vector<double>& xi, double tol);

// Phase shift z_k -> exp(-i sigma(k) ell_k . x) z_k: new Fourier index of
// exp(i nu.x) prod z_k^{a_k}, with factors (site index, a = +1 for z, -1 for zbar).
IVec phase_shift(const IVec& nu, const std::vector<std::pair<int, int>>& factors, const Partition& p);
// y_i = y'_i + sum_k sigma(k) (ell_k)_i |z'_k|^2, returned as (site index, coefficient).
std::vector<std::pair<int, Int>> y_shift(int i, const Partition& p);

struct KernelCheck {
  std::size_t pairs_tested = 0;
  std::size_t linear_kernel = 0;
  std::size_t quadratic_kernel = 0;
  std::size_t x_dependent = 0;
  std::size_t cross_block = 0;
  Diagnostics failures;
  bool pass() const { return x_dependent == 0 && cross_block == 0 && linear_kernel == 0; }
};

// Exhaustive search of kernel monomials of degree <= 2 over the partition sites.
KernelCheck check_kernel_phase_shift(const Partition& p, const YTable& y, const TangentialSites& S);

}  // namespace rnf
