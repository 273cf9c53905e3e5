#pragma once

#include <gmpxx.h>

#include <map>
#include <vector>

#include "rnf/diagnostics.hpp"
#include "rnf/lattice.hpp"
#include "rnf/resonance_graph.hpp"

namespace rnf {

// Optimal presentation of m at scale N: d independent v with |v|_1 <= N,
// minimal under (|v.m|, |v|_1, lex v), sign-normalized (first nonzero entry > 0).
struct Presentation {
  int N = 0;
  std::vector<IVec> v;
  std::vector<Int> p;  // p_i = v_i . m
};

// Candidate directions in the declared order for a given m.
std::vector<IVec> presentation_candidates(int d, int N);
Presentation optimal_presentation(const IVec& m, int N);
// Same selection from an explicitly ordered-or-not candidate list.
Presentation optimal_presentation(const IVec& m, int N, std::vector<IVec> candidates);

// rho0 as a/b with small b; exact for short decimals.
mpq_class rational_rho(double rho0);

struct CutResult {
  int ell = 0;    // equations kept
  int level = 0;  // j in 1..d+1
};

CutResult find_cut(const Presentation& pres, int N, double rho0);

struct Stratum {
  int ell = 0;
  int level = 0;
  std::vector<IVec> v;
  std::vector<Int> p;
  IVec basepoint;               // lex-min member
  std::vector<IVec> generators;  // integer kernel of the kept v
  std::size_t members = 0;
};

struct Stratification {
  int N = 0;
  double rho0 = 0;
  int d = 0;
  Int box = 0;
  std::vector<Stratum> strata;
  std::map<IVec, int> stratum_of;
  std::vector<std::size_t> per_level;  // index j = 1..d+1 (0 unused)
  std::vector<double> level_bound;     // N^{(2d-1) rho_j}
  bool partition_ok = true;
  bool counts_ok = true;
  Diagnostics refinement;  // families that are not unions of strata
};

Stratification stratify(Int box, int d, int N, double rho0, int workers = 1);

// Reports translation families whose root sets are not unions of strata in the box.
void refinement_check(Stratification& st, const std::vector<GeometricBlock>& blocks,
                      const std::vector<TranslationFamily>& families);

}  // namespace rnf
