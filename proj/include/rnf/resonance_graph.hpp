#pragma once

#include <map>
#include <vector>

#include "rnf/diagnostics.hpp"
#include "rnf/lattice.hpp"

namespace rnf {

// Black edge h -> k marked ell, k = h + pi(ell); stored with h <= k.
struct BlackEdge {
  IVec h, k, ell;
};

// Unoriented red edge {h, k} marked ell, stored with h <= k.
struct RedEdge {
  IVec h, k, ell;
};

struct GeometricGraph {
  int d = 0;
  int q = 0;
  Int box_radius = 0;
  std::vector<IVec> vertices;  // lexicographic
  std::vector<BlackEdge> black;
  std::vector<RedEdge> red;

  bool in_box(const IVec& k) const;
};

GeometricGraph build_graph(const TangentialSites& S, int q, Int box_radius, int workers = 1);

struct GeometricBlock {
  std::vector<IVec> vertices;  // lexicographic, so vertices[0] is the root
  std::vector<BlackEdge> black;
  std::vector<RedEdge> red;
  IVec root;
  std::vector<int> sigma;  // parallel to vertices
  std::vector<IVec> L;     // parallel to vertices
  bool boundary = false;

  int size() const { return static_cast<int>(vertices.size()); }
  bool has_red() const { return !red.empty(); }
  int index_of(const IVec& k) const;
};

struct ComponentSet {
  GeometricBlock special;
  bool special_is_S = false;
  std::vector<GeometricBlock> blocks;  // every component except the special one
  Diagnostics diagnostics;
};

ComponentSet components(const GeometricGraph& g, const TangentialSites& S);

// Fills root, sigma and L and checks the root identities on every vertex and
// every edge. Violations are appended to `diag`.
void root_data(GeometricBlock& block, const TangentialSites& S, int q, Diagnostics& diag);

struct GenericityReport {
  bool pass = true;
  std::size_t checked = 0;
  std::size_t red_blocks = 0;
  Diagnostics failures;
};

GenericityReport genericity_report(const std::vector<GeometricBlock>& blocks, int d);

struct TranslationFamily {
  std::size_t representative = 0;     // index into the block list
  std::vector<std::size_t> members;    // indices into the block list
  std::vector<IVec> generators;        // basis of root differences
  int rank = 0;
  int expected_rank = 0;
  bool flagged = false;                // single member, no generators
};

std::vector<TranslationFamily> translation_classes(const std::vector<GeometricBlock>& blocks, int d,
                                                   Diagnostics& diag);

// Shape key of a block relative to its root; translates share the key.
std::vector<Int> shape_key(const GeometricBlock& b);

}  // namespace rnf
