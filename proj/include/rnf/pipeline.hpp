#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnf/diagnostics.hpp"
#include "rnf/final_graph.hpp"
#include "rnf/kam.hpp"
#include "rnf/melnikov.hpp"
#include "rnf/resonance_graph.hpp"
#include "rnf/stratification.hpp"

namespace rnf {

struct XiGrid {
  std::vector<double> lo, hi;
  int count = 0;  // points per axis
};

struct MelnikovConfig {
  int nu_max = 8;        // kernel sweep |nu|_1
  int K = 8;             // resonant scan
  std::vector<double> rhos{2, 4, 8};
  int min_points = 4;
  Int root_radius = 2;   // roots with |r|_inf below this join T_f in the sweeps
  std::optional<double> epsilon;
};

struct StratifyConfig {
  Int box = 8;
  std::vector<int> N{8, 16};
};

struct KamConfig {
  int steps = 3;
  std::vector<std::uint64_t> seeds;  // empty: five consecutive seeds from the session seed
  Int box = 6;
  double eps_rg = 1e-3;
  double eps_p3 = 0.05;
  int rg_terms = 40;
  int p3_terms = 30;
  double s0 = 0.5;
  double r0 = 0.5;
};

struct SessionConfig {
  int d = 0, n = 0, q = 1;
  std::vector<IVec> S;
  Int box_radius = 0;
  std::vector<std::vector<double>> xi_samples;  // samples mode
  std::optional<XiGrid> xi_grid;                 // grid mode
  int atlas_samples = 6;  // at least n + 2
  int K0 = 4;
  double tau = 2;
  double rho0 = 0.5;
  double S0 = 8;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 1;
  MelnikovConfig melnikov;
  StratifyConfig stratify;
  KamConfig kam;

  double tol(const std::string& name) const { return tolerances.at(name); }
};

// Names and defaults of the recognised tolerances.
const std::map<std::string, double>& default_tolerances();

std::vector<std::uint64_t> kam_seeds(const SessionConfig& c);

// Every xi point the run evaluates: the samples, or the grid in lexicographic order.
std::vector<std::vector<double>> xi_points(const SessionConfig& c);

// Findings, split by how they affect the exit status.
struct Findings {
  Diagnostics nongeneric;  // exit 2
  Diagnostics errors;      // exit 1
  Diagnostics warnings;
  void absorb(const Diagnostics& ds);
};

// Sorts a diagnostic by its code.
enum class Severity { nongeneric, error, warning };
Severity severity(const std::string& code);

struct GraphStage {
  GeometricGraph graph;
  ComponentSet comps;
  GenericityReport genericity;
  std::vector<TranslationFamily> families;
  Diagnostics family_diag;
};

GraphStage run_graph(const SessionConfig& c, int workers);

struct NormalFormStage {
  std::vector<std::vector<double>> atlas_samples;
  BlockAtlas atlas;
  YTable y;
  FinalGraph fg;
  Partition partition;
  std::vector<NormalForm> forms;  // one per xi point
  KernelCheck kernel;
  double frequency_residual = 0;  // worst over the xi points
  double nilpotent_residual = 0;
  double conservation_defect = 0;  // {N, L}, {N, M}, {N, K} on the first form
  bool conservation_exact = true;
};

NormalFormStage run_normal_form(const SessionConfig& c, const GraphStage& g, int workers);

struct ScreenCensus {
  std::size_t fast = 0, full = 0, singular = 0;
  std::size_t unsound = 0;  // fast verdict on a numerically singular block
};

struct MelnikovStage {
  double epsilon = 0;
  double M = 0;
  double rho_tau = 0;  // (tau - 1) / (3((2d+1)^2 + 4))
  std::vector<int> ts;
  KernelVerifyReport kernel;
  ResonantScanReport scan;
  ResonantScanReport scan_coarse;  // every other grid point
  ScreenCensus screen;
  std::vector<TecnicoResult> tecnico;  // canonical functions at alpha 0.1, 0.01
};

MelnikovStage run_melnikov(const SessionConfig& c, const NormalFormStage& nf, int workers);

struct StratifyStage {
  std::vector<Stratification> levels;  // one per N
};

StratifyStage run_stratify(const SessionConfig& c, const GraphStage* g, int workers);

struct KamRun {
  std::uint64_t seed = 0;
  DecayTable table;
  bool decreasing = false;
  std::optional<double> linear_exponent;  // leading power of Pi_{<=K} P_rg,+ in the scale of P_rg
};

struct KamStage {
  std::vector<KamRun> runs;
  double worst_ratio = 0;
};

KamStage run_kam(const SessionConfig& c, int workers);

// One kam_step with P_rg scaled by t for each t; slope of log ||Pi_{<=K} P_rg,+|| in log t.
std::optional<double> linear_order_exponent(const ToyInstance& toy, int K, const std::vector<double>& ts,
                                            const KamOptions& opt);

}  // namespace rnf
