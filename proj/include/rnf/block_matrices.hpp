#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "rnf/half_poly.hpp"
#include "rnf/lattice.hpp"
#include "rnf/resonance_graph.hpp"

namespace rnf {

using cdouble = std::complex<double>;

struct CombEdge {
  int i = 0, j = 0;  // i <= j; black edges run i -> j with label ell
  IVec ell;
  Color color = Color::black;

  auto operator<=>(const CombEdge&) const = default;
};

// Block up to translation: vertex 0 is the root, the rest sorted by L.
struct CombinatorialBlock {
  int n = 0;
  std::vector<int> sigma;
  std::vector<IVec> L;
  std::vector<CombEdge> edges;  // sorted

  int size() const { return static_cast<int>(sigma.size()); }
  bool has_red() const;
  auto operator<=>(const CombinatorialBlock&) const = default;
};

// `order[v]` receives the canonical position of geometric vertex v.
CombinatorialBlock combinatorialize(const GeometricBlock& b, int n, std::vector<int>* order = nullptr);

struct BlockMatrixC {
  int dim = 0;
  std::vector<std::vector<HalfPoly>> entries;

  Eigen::MatrixXd numeric(const std::vector<double>& xi) const;
  bool symmetric() const;
};

BlockMatrixC matrix_of_block(const CombinatorialBlock& cb, int q);

struct EigenCluster {
  cdouble value;
  int mult = 0;
  bool real = true;
  int plus = 0;   // vertices taking s = +1 in this cluster
  int minus = 0;  // vertices taking s = -1
};

struct FittingResult {
  std::vector<double> xi;
  std::vector<EigenCluster> clusters;  // sorted by (re, im)
  std::vector<int> offset;             // first column of each cluster in V
  Eigen::MatrixXcd V;                  // adapted basis, C V = V blockdiag
  Eigen::MatrixXcd semisimple;
  Eigen::MatrixXcd nilpotent;
  std::vector<Eigen::MatrixXcd> nil_blocks;  // nilpotent part in cluster coordinates
  double tol = 0;
  double block_residual = 0;       // off-block part of V^-1 C V, relative
  double split_residual = 0;       // |S + N - C| relative
  double commutator_residual = 0;  // |SN - NS| relative
  double nilpotent_residual = 0;   // |N^dim| relative
  double sigma_residual = 0;       // Sigma-unitarity of the real clusters
};

// Jordan-Fitting decomposition of a Sigma-selfadjoint matrix C = M Sigma.
FittingResult fitting(const Eigen::MatrixXd& C, const std::vector<int>& sigma, double tol,
                      const std::string& name = "block");
FittingResult fitting(const BlockMatrixC& C, const std::vector<int>& sigma, const std::vector<double>& xi,
                      double tol, const std::string& name = "block");

struct Branch {
  int id = 0;
  bool real = true;
  int source_block = 0;
  std::vector<cdouble> values;  // one per sample
  cdouble scaled_value;         // at the scaled copy of sample 0
};

struct BlockSpectrum {
  std::vector<int> branch;  // per cluster
  std::vector<int> mult;
  std::vector<int> plus;
  std::vector<int> minus;
  std::vector<FittingResult> fits;  // per sample
};

struct EigenCatalog {
  int q = 0;
  std::vector<std::vector<double>> samples;
  double scale = 4;  // scaled copy is scale * samples[0]
  std::vector<Branch> branches;
  std::vector<BlockSpectrum> blocks;  // parallel to the input blocks
};

EigenCatalog eigenvalue_catalog(const std::vector<CombinatorialBlock>& cbs, int q,
                                const std::vector<std::vector<double>>& samples, double tol, int workers = 1);

// C(xi) + (|r|^2 + sum nu_i |j_i|^2 + omega1(xi).nu) I
Eigen::MatrixXd ad_block(const CombinatorialBlock& cb, Int root_norm2, const IVec& nu, int q,
                         const std::vector<double>& xi, const TangentialSites& S);

}  // namespace rnf
