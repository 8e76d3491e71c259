#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "mmw/gf2.hpp"

namespace mmw {

enum class Identification { none, periodic, antipodal };

/// Cell of the 3^-j lattice in I^m: base corner in lattice units and the set of
/// axes it spans.
struct CubeCell {
  std::vector<int> base;
  unsigned axes = 0;
  int dim() const;
  auto operator<=>(const CubeCell&) const = default;
};

/// Cubical complex X in I(m, j), closed under faces, optionally with the
/// periodic (torus) or antipodal (projective space) identification of the
/// lattice. Immutable after construction; cell indices are deterministic.
class ParamComplex {
 public:
  ParamComplex(int m, int level, Identification ident, const std::vector<CubeCell>& generators);

  int ambient_dim() const { return m_; }
  int level() const { return level_; }
  int resolution() const { return N_; }
  Identification identification() const { return ident_; }
  int dim() const { return static_cast<int>(cells_.size()) - 1; }
  int num_cells(int q) const { return q < 0 || q > dim() ? 0 : static_cast<int>(cells_[q].size()); }
  int num_vertices() const { return num_cells(0); }
  const CubeCell& cell(int q, int i) const { return cells_[q][i]; }
  bool empty() const { return cells_.empty() || cells_[0].empty(); }

  CubeCell canonical(CubeCell c) const;
  /// Index of the cell, or -1 when absent.
  int find(const CubeCell& c) const;
  std::span<const int> faces(int q, int i) const { return chains_->boundary[q][i]; }
  /// Vertex indices of a cell.
  std::vector<int> cell_vertices(int q, int i) const;

  /// Coordinates of a vertex in I^m (representative in [0,1]^m).
  Eigen::VectorXd vertex_coords(int v) const;
  /// Endpoints of each edge.
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  int edge_between(int a, int b) const;

  const std::shared_ptr<const ChainComplexZ2>& chain_complex() const { return chains_; }
  /// Cells of this complex that belong to the subcomplex `sub` (same lattice).
  CellMask mask_of(const ParamComplex& sub) const;
  std::vector<CubeCell> all_cells() const;

 private:
  int m_, level_, N_;
  Identification ident_;
  std::vector<std::vector<CubeCell>> cells_;
  std::map<CubeCell, int> index_;
  std::shared_ptr<const ChainComplexZ2> chains_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

using ParamPtr = std::shared_ptr<const ParamComplex>;

ParamPtr build_cube(int m, int j);
/// m-torus (R/Z)^m at level j; the circle is m = 1.
ParamPtr build_param_torus(int m, int j);
ParamPtr build_circle(int j);

struct ProjectiveModel {
  ParamPtr complex;
  std::vector<int> gamma;  // closed vertex loop (last vertex joins the first)
};

/// RP^p as the j-subdivided boundary of [0,1]^(p+1) modulo x -> 1 - x.
ProjectiveModel build_rp(int p, int j);

/// X(level + k).
ParamPtr subdivide(const ParamComplex& X, int k);
/// Nearest vertex at level j of each vertex of the level-i lattice, for i >= j.
/// `fine` must be X(i) and `coarse` X(j) for the same complex.
std::vector<int> nearest_vertex_map(const ParamComplex& fine, const ParamComplex& coarse);

ParamPtr subcomplex_where(const ParamComplex& X, const std::function<bool(int vertex)>& keep);
ParamPtr closure_complement(const ParamComplex& X, const ParamComplex& Y);

/// Edge loop (closed vertex sequence) decomposition of a mod-2 1-cycle.
std::vector<std::vector<int>> cycle_to_loops(const ParamComplex& X, const gf2::Vec& cycle);
/// The 1-chain traversed by a closed vertex loop.
gf2::Vec loop_chain(const ParamComplex& X, const std::vector<int>& loop);

/// Freudenthal triangulation of every cube, simplices identified through the
/// quotient. Vertex order for the front/back-face formula is given by `rank`.
class Triangulation {
 public:
  explicit Triangulation(ParamPtr X, std::vector<int> rank = {});

  const ParamComplex& cubical() const { return *X_; }
  int dim() const { return static_cast<int>(simplices_.size()) - 1; }
  int num_simplices(int q) const { return q > dim() ? 0 : static_cast<int>(simplices_[q].size()); }
  /// Vertices of a simplex, increasing in rank.
  const std::vector<int>& simplex(int q, int i) const { return simplices_[q][i]; }
  int find(const std::vector<int>& vertices) const;
  /// (dimension, index) of the smallest cube containing the simplex.
  std::pair<int, int> carrier(int q, int i) const { return carriers_[q][i]; }
  const std::shared_ptr<const ChainComplexZ2>& chain_complex() const { return chains_; }

  /// Simplices whose carrier cube is in the subcomplex.
  CellMask mask_of(const ParamComplex& sub) const;

  /// Pushes a cubical 1-cochain to the triangulation along monotone edge paths.
  CohomologyClass from_cubical(const CohomologyClass& cubical,
                               const std::shared_ptr<const CellMask>& relative = nullptr) const;
  /// Front face / back face product. Relative masks are united.
  CohomologyClass cup(const CohomologyClass& a, const CohomologyClass& b) const;
  CohomologyClass cup_power(const CohomologyClass& a, int p) const;
  /// The unit class (constant 1 on vertices).
  CohomologyClass unit() const;

 private:
  ParamPtr X_;
  std::vector<int> rank_;
  std::vector<std::vector<std::vector<int>>> simplices_;
  std::vector<std::vector<std::pair<int, int>>> carriers_;
  std::map<std::vector<int>, int> index_;
  std::vector<std::vector<int>> edge_paths_;  // cubical edges under each simplicial edge
  std::shared_ptr<const ChainComplexZ2> chains_;
};

}  // namespace mmw
