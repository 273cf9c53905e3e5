#include <cmath>
#include <random>

#include "doctest.h"
#include "rnf/block_matrices.hpp"
#include "rnf/diagnostics.hpp"

using namespace rnf;

namespace {

const GeometricBlock& block_with_root(const ComponentSet& cs, const IVec& root) {
  for (const auto& b : cs.blocks)
    if (b.root == root) return b;
  throw std::runtime_error("no block with that root");
}

ComponentSet cubic_components(Int box) {
  TangentialSites S({{0, 0}, {1, 0}});
  return components(build_graph(S, 1, box), S);
}

}  // namespace

TEST_CASE("cubic pair matrix") {
  auto cs = cubic_components(8);
  auto cb = combinatorialize(block_with_root(cs, {0, 3}), 2);
  REQUIRE(cb.size() == 2);
  auto C = matrix_of_block(cb, 1);
  CHECK(C.symmetric());
  CHECK(C.entries[0][0].is_zero());
  CHECK(C.entries[0][1] == HalfPoly::monomial({1, 1}, 4));
  CHECK(C.entries[1][1] == HalfPoly::xi_power({1, 0}, -2) + HalfPoly::xi_power({0, 1}, 2));
  auto M = C.numeric({4.0, 9.0});
  CHECK(M(0, 1) == doctest::Approx(24.0));
  CHECK(M(1, 1) == doctest::Approx(10.0));
}

TEST_CASE("red pair matrix: trace and determinant") {
  TangentialSites S({{0, 0}, {2, 0}});
  auto cs = components(build_graph(S, 1, 8), S);
  auto cb = combinatorialize(block_with_root(cs, {1, -1}), 2);
  REQUIRE(cb.has_red());
  auto C = matrix_of_block(cb, 1);
  CHECK_FALSE(C.symmetric());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> xi{u(rng), u(rng)};
    auto M = C.numeric(xi);
    CHECK(M.trace() == doctest::Approx(-2 * (xi[0] + xi[1])));
    CHECK(M.determinant() == doctest::Approx(16 * xi[0] * xi[1]));
    // Sigma-selfadjoint: M Sigma is symmetric
    Eigen::MatrixXd Sig = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < 2; ++i) Sig(i, i) = cb.sigma[i];
    Eigen::MatrixXd MS = M * Sig;
    CHECK((MS - MS.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("combinatorial shape is translation invariant") {
  auto cs = cubic_components(10);
  auto a = combinatorialize(block_with_root(cs, {0, 2}), 2);
  auto b = combinatorialize(block_with_root(cs, {0, -7}), 2);
  CHECK(a == b);
  std::vector<int> order;
  combinatorialize(block_with_root(cs, {0, 4}), 2, &order);
  CHECK(order == std::vector<int>{0, 1});
}

TEST_CASE("fitting of a multiple of the identity") {
  Eigen::MatrixXd I = 3 * Eigen::MatrixXd::Identity(3, 3);
  auto f = fitting(I, {1, 1, 1}, 1e-10);
  REQUIRE(f.clusters.size() == 1);
  CHECK(f.clusters[0].mult == 3);
  CHECK(f.clusters[0].value.real() == doctest::Approx(3.0));
  CHECK(f.nilpotent.norm() < 1e-12);
  CHECK(f.split_residual < 1e-12);
}

TEST_CASE("fitting of a Sigma-selfadjoint Jordan block") {
  // M = [[1,-1],[-1,1]] symmetric, Sigma = diag(1,-1), C = M Sigma squares to zero
  Eigen::MatrixXd C(2, 2);
  C << 1, 1, -1, -1;
  auto f = fitting(C, {1, -1}, 1e-6);
  REQUIRE(f.clusters.size() == 1);
  CHECK(f.clusters[0].mult == 2);
  CHECK(std::abs(f.clusters[0].value) < 1e-6);
  CHECK((f.nilpotent - C.cast<cdouble>()).norm() < 1e-6);
  CHECK(f.split_residual < 1e-10);
  CHECK(f.commutator_residual < 1e-6);
}

TEST_CASE("fitting of the red pair gives a complex conjugate pair") {
  TangentialSites S({{0, 0}, {2, 0}});
  auto cs = components(build_graph(S, 1, 8), S);
  auto cb = combinatorialize(block_with_root(cs, {1, -1}), 2);
  std::vector<double> xi{1.0, 1.3};
  auto f = fitting(matrix_of_block(cb, 1), cb.sigma, xi, 1e-8);
  // trace^2 - 4 det < 0 on this sample
  REQUIRE(f.clusters.size() == 2);
  CHECK_FALSE(f.clusters[0].real);
  CHECK(std::abs(f.clusters[0].value - std::conj(f.clusters[1].value)) < 1e-10);
  CHECK(f.clusters[0].value.real() == doctest::Approx(-(xi[0] + xi[1])));
  CHECK(std::norm(f.clusters[0].value) == doctest::Approx(16 * xi[0] * xi[1]));
  CHECK(f.split_residual < 1e-10);
}

TEST_CASE("fitting refuses a near-discriminant sample") {
  Eigen::MatrixXd C(2, 2);
  C << 1, 0, 0, 1 + 5e-9;
  CHECK_THROWS_AS(fitting(C, {1, 1}, 1e-9), RegionError);
}

TEST_CASE("eigenvalue catalog: cubic branches are homogeneous of degree one") {
  auto cs = cubic_components(6);
  std::vector<CombinatorialBlock> cbs;
  for (const auto& b : cs.blocks)
    if (!b.boundary) {
      auto cb = combinatorialize(b, 2);
      if (std::find(cbs.begin(), cbs.end(), cb) == cbs.end()) cbs.push_back(cb);
    }
  REQUIRE(cbs.size() == 2);
  std::vector<std::vector<double>> samples{{1.0, 1.7}, {1.2, 2.5}, {2.1, 1.4}, {0.8, 0.9}};
  auto cat = eigenvalue_catalog(cbs, 1, samples, 1e-8);
  // singleton: 0; pair: roots of x^2 - (2 xi2 - 2 xi1) x - 16 xi1 xi2
  CHECK(cat.branches.size() == 3);
  for (const auto& br : cat.branches) {
    CHECK(br.real);
    CHECK(std::abs(br.scaled_value - cat.scale * br.values[0]) <= 1e-8 * (1 + std::abs(br.scaled_value)));
  }
  for (std::size_t s = 0; s < samples.size(); ++s) {
    double x1 = samples[s][0], x2 = samples[s][1];
    double t = 2 * x2 - 2 * x1, disc = std::sqrt(t * t + 64 * x1 * x2);
    std::vector<double> want{0.0, (t - disc) / 2, (t + disc) / 2}, got;
    for (const auto& br : cat.branches) got.push_back(br.values[s].real());
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  }
}

TEST_CASE("ad block adds the scalar shift") {
  TangentialSites S({{0, 0}, {1, 0}});
  auto cs = cubic_components(6);
  auto cb = combinatorialize(block_with_root(cs, {0, 2}), 2);
  std::vector<double> xi{1.1, 1.9};
  IVec nu{2, -3};
  auto A = ad_block(cb, 4, nu, 1, xi, S);
  auto C = matrix_of_block(cb, 1).numeric(xi);
  // |r|^2 + nu.|j|^2 + omega1.nu with omega1 = -2 xi
  double shift = 4 + (-3) * 1 + (-2 * 1.1) * 2 + (-2 * 1.9) * (-3);
  Eigen::MatrixXd D = A - C;
  CHECK(D(0, 1) == 0);
  CHECK(D(1, 0) == 0);
  CHECK(D(0, 0) == doctest::Approx(shift));
  CHECK(D(1, 1) == doctest::Approx(shift));
}
