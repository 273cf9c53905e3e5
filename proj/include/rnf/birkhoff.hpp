#pragma once

#include <vector>

#include "rnf/half_poly.hpp"
#include "rnf/lattice.hpp"

namespace rnf {

// A_r = sum over |k| = r of multinomial(r; k)^2 xi^k.
HalfPoly symmetric_A(int r, int n);

// Frequency modulation grad A_{q+1} - (q+1)^2 A_q (1, ..., 1).
std::vector<HalfPoly> omega1(int q, int n);

// Edge coefficient c_q(ell) for ell in X_q.
HalfPoly edge_coeff(const EdgeLabel& ell, int q);

// All compositions of m into n nonnegative parts, lexicographic.
std::vector<std::vector<int>> compositions(int m, int n);

}  // namespace rnf
