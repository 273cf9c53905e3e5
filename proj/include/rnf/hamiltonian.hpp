#pragma once

#include <complex>
#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rnf/lattice.hpp"

namespace rnf {

using cplx = std::complex<double>;

// Variables: n angle/action pairs (x_i, y_i) and complex normal coordinates
// z_k, zbar_k. Each variable carries integer charges for mass, momentum and
// quadratic energy; z carries +charge, zbar -charge, e^{i x_i} the charge of j_i.
struct PhaseSpace {
  int n = 0;
  int d = 0;
  std::vector<IVec> tangential;  // j_i
  std::vector<IVec> sites;       // positions of the normal sites
  std::vector<Int> mass;         // per site
  std::vector<IVec> momentum;    // per site
  std::vector<Int> energy;       // per site
  std::map<IVec, int> index;

  // Standard charges (1, k, |k|^2) on the given sites.
  static std::shared_ptr<const PhaseSpace> make(const std::vector<IVec>& tangential, const std::vector<IVec>& sites);
  static std::shared_ptr<const PhaseSpace> with_charges(const std::vector<IVec>& tangential,
                                                        const std::vector<IVec>& sites, std::vector<Int> mass,
                                                        std::vector<IVec> momentum, std::vector<Int> energy);
  // Normal sites = box minus the tangential sites.
  static std::shared_ptr<const PhaseSpace> box(const TangentialSites& S, Int radius);
  int site(const IVec& k) const;  // -1 if absent
  int size() const { return static_cast<int>(sites.size()); }
};

// Sparse exponent vector: (site, power) sorted by site, powers > 0.
using SparseExp = std::vector<std::pair<int, int>>;

int total(const SparseExp& e);
int power(const SparseExp& e, int site);
SparseExp add_exp(const SparseExp& a, const SparseExp& b);
// a + b - e_k; caller guarantees the result is nonnegative.
SparseExp add_exp_minus(const SparseExp& a, const SparseExp& b, int k);

// e^{i nu.x} y^i z^alpha zbar^beta
struct Monomial {
  IVec nu;
  IVec y;
  SparseExp alpha;
  SparseExp beta;

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

Monomial make_monomial(int n, IVec nu = {}, IVec y = {}, SparseExp alpha = {}, SparseExp beta = {});
int degree(const Monomial& m);  // 2|i| + |alpha| + |beta|
int w_degree(const Monomial& m);
Int frequency(const Monomial& m);  // |nu|_1
Monomial conjugate(const Monomial& m);
// Charges (mass, momentum, energy) carried by the monomial; all zero means conserving.
Int mass_of(const Monomial& m, const PhaseSpace& sp);
IVec momentum_of(const Monomial& m, const PhaseSpace& sp);
Int energy_of(const Monomial& m, const PhaseSpace& sp);
bool conserves(const Monomial& m, const PhaseSpace& sp, bool energy = false);
std::string to_string(const Monomial& m, const PhaseSpace& sp);

struct Cutoffs {
  Int K_x = 1 << 20;
  int max_degree = 1 << 20;
  bool operator==(const Cutoffs&) const = default;
};

class TruncatedHamiltonian {
 public:
  using Terms = std::map<Monomial, cplx>;

  TruncatedHamiltonian() = default;
  TruncatedHamiltonian(std::shared_ptr<const PhaseSpace> sp, Cutoffs cut) : sp_(std::move(sp)), cut_(cut) {}

  const PhaseSpace& space() const { return *sp_; }
  const std::shared_ptr<const PhaseSpace>& space_ptr() const { return sp_; }
  const Cutoffs& cutoffs() const { return cut_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  bool within(const Monomial& m) const;

  // Adds c to the coefficient; monomials beyond the cutoffs go to the debt.
  void add(const Monomial& m, cplx c);
  cplx coeff(const Monomial& m) const;
  void drop_zeros();

  // Coefficient l1 mass of monomials dropped by the cutoffs.
  double debt() const { return debt_; }
  void add_debt(double x) { debt_ += x; }

  bool real_flag = true;

  TruncatedHamiltonian& operator+=(const TruncatedHamiltonian& o);
  TruncatedHamiltonian& operator-=(const TruncatedHamiltonian& o);
  TruncatedHamiltonian& operator*=(cplx c);
  TruncatedHamiltonian filtered(const std::function<bool(const Monomial&)>& keep) const;
  TruncatedHamiltonian zero_like() const;

 private:
  std::shared_ptr<const PhaseSpace> sp_;
  Cutoffs cut_;
  Terms terms_;
  double debt_ = 0;
};

TruncatedHamiltonian operator+(TruncatedHamiltonian a, const TruncatedHamiltonian& b);
TruncatedHamiltonian operator-(TruncatedHamiltonian a, const TruncatedHamiltonian& b);
TruncatedHamiltonian operator*(cplx c, TruncatedHamiltonian a);

// max |coeff(conj m) - conj(coeff m)|
double reality_defect(const TruncatedHamiltonian& H);
// Largest |coeff|.
double max_coeff(const TruncatedHamiltonian& H);

// {F, G} with {y_j, e^{i nu.x}} = i nu_j e^{i nu.x} and {|z_k|^2, z_k} = i z_k.
// Output is sharded over fixed chunks of F, so the result does not depend on `workers`.
// Adds {c_f f, c_g g} to out.
void add_bracket(const Monomial& f, cplx cf, const Monomial& g, cplx cg, TruncatedHamiltonian& out);
TruncatedHamiltonian poisson(const TruncatedHamiltonian& F, const TruncatedHamiltonian& G, int workers = 1);

struct NormParams {
  double s = 0.5;
  double r = 0.5;
  double a = 0;
  double p = 0;
};

// Majorant norm of X_H with (s, r)-weights, each monomial bounded on the
// boundary of the polydisc |y_i| = r^2, |z_k| = r / w_k.
double majorant_norm(const TruncatedHamiltonian& H, const NormParams& np);
// Same norm restricted to the y-component (d/dx part) or w-component of X_H.
double majorant_norm_y(const TruncatedHamiltonian& H, const NormParams& np);
double majorant_norm_w(const TruncatedHamiltonian& H, const NormParams& np);

// sum_{|k| <= ell} lambda^{|k|} || d_xi^k X ||, derivatives by centered differences with step lambda/100.
double lambda_norm(const std::function<TruncatedHamiltonian(const std::vector<double>&)>& H_of_xi,
                   const std::vector<double>& xi, double lambda, int ell, const NormParams& np);

// Blocks D_t of the normal sites and the signs s(k) fixing the Lagrangian splitting.
struct KamPartition {
  std::vector<int> block_of_site;
  std::vector<int> s;

  static KamPartition singletons(int sites);
  bool empty() const { return block_of_site.empty(); }
};

enum class Selector { degree_le, degree_eq, degree_gt, kernel, range, freq_le, freq_gt };

bool is_kernel(const Monomial& m, const KamPartition& part);
bool is_range(const Monomial& m, const KamPartition& part);
// `j` is the degree or frequency bound; kernel/range need a nonempty partition.
TruncatedHamiltonian project(const TruncatedHamiltonian& H, Selector sel, int j = 0,
                             const KamPartition* part = nullptr);

// One JSON object per monomial.
std::string to_jsonl(const TruncatedHamiltonian& H);

}  // namespace rnf
