#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rnf {

using Int = long long;
// Element of Z^d (lattice site) or Z^n (edge label / Fourier index).
using IVec = std::vector<Int>;

IVec add(const IVec& a, const IVec& b);
IVec sub(const IVec& a, const IVec& b);
IVec neg(const IVec& a);
IVec scale(Int c, const IVec& a);
Int dot(const IVec& a, const IVec& b);
Int norm2(const IVec& a);
Int norm1(const IVec& a);
Int norm_inf(const IVec& a);
IVec unit(int n, int i, Int value = 1);
bool is_zero(const IVec& a);
std::string to_string(const IVec& a);

class TangentialSites {
 public:
  TangentialSites() = default;
  explicit TangentialSites(std::vector<IVec> sites);

  int n() const { return static_cast<int>(sites_.size()); }
  int d() const { return d_; }
  const IVec& operator[](int i) const { return sites_[i]; }
  const std::vector<IVec>& sites() const { return sites_; }
  bool contains(const IVec& k) const;
  Int max_norm_inf() const;
  // |j_i|^2 for every site
  IVec norms2() const;

 private:
  std::vector<IVec> sites_;
  int d_ = 0;
};

enum class Color { black, red };

const char* color_name(Color c);

struct EdgeLabel {
  IVec ell;
  Color color = Color::black;

  // Validates mass in {0,-2}, ell != 0 and ell != -2 e_i.
  static EdgeLabel make(const IVec& ell);
  static bool admissible(const IVec& ell);

  bool operator==(const EdgeLabel& o) const { return ell == o.ell; }
  bool operator<(const EdgeLabel& o) const { return ell < o.ell; }
};

struct LinearImage {
  Int eta = 0;
  IVec pi;
  Int pi2 = 0;
};

Int mass(const IVec& ell);
LinearImage linear_maps(const IVec& ell, const TangentialSites& S);

struct EdgeSets {
  std::vector<EdgeLabel> black;  // eta = 0
  std::vector<EdgeLabel> red;    // eta = -2
};

EdgeSets enumerate_edges(int q, int n);

Int quadratic_energy(const EdgeLabel& ell, const TangentialSites& S);

// Exact integer linear algebra on small matrices given as rows.
int integer_rank(const std::vector<IVec>& rows);
bool affinely_independent(const std::vector<IVec>& points);
// Reduced basis (echelon form) of the lattice spanned by the rows.
std::vector<IVec> lattice_basis(const std::vector<IVec>& rows);
// Basis of {u in Z^d : row . u = 0 for all rows}.
std::vector<IVec> integer_kernel(const std::vector<IVec>& rows, int d);

}  // namespace rnf
