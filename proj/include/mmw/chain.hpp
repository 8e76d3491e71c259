#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mmw/errors.hpp"

namespace mmw {

enum class Geometry { flat_torus, round_sphere, euclidean };

using PointRef = Eigen::Ref<const Eigen::VectorXd>;
using PointPredicate = std::function<bool(const PointRef&)>;

// Indicator of a set of top-dimensional cells.
using Region = std::vector<std::uint8_t>;

// Compressed row storage for face lists.
class Incidence {
 public:
  void push(std::span<const int> row);
  std::span<const int> operator[](int i) const {
    return {index_.data() + offsets_[i], index_.data() + offsets_[i + 1]};
  }
  int size() const { return static_cast<int>(offsets_.size()) - 1; }

 private:
  std::vector<int> offsets_{0};
  std::vector<int> index_;
};

struct ComplexData {
  std::string id;
  int dim = 0;  // n + 1
  Geometry geometry = Geometry::euclidean;
  std::vector<int> counts;                    // cells per dimension 0..dim
  std::vector<Incidence> faces;               // faces[k] lists (k-1)-faces; faces[0] unused
  std::vector<std::vector<double>> weights;   // k-dimensional measure per cell
  std::vector<Eigen::MatrixXd> barycenters;   // one column per cell
};

/// Metrized cell complex modelling a closed (n+1)-manifold.
///
/// Construction validates that boundary-of-boundary vanishes, that every
/// n-cell has exactly two distinct (n+1)-cofaces, and that all weights are
/// positive. Instances are immutable.
class AmbientComplex {
 public:
  explicit AmbientComplex(ComplexData data);

  const std::string& id() const { return data_.id; }
  int dim() const { return data_.dim; }
  Geometry geometry() const { return data_.geometry; }
  int num_cells(int k) const { return data_.counts.at(k); }
  int num_top() const { return data_.counts[data_.dim]; }
  int num_facets() const { return data_.counts[data_.dim - 1]; }

  std::span<const int> faces(int k, int cell) const { return data_.faces[k][cell]; }
  const std::array<int, 2>& cofaces(int facet) const { return cofaces_[facet]; }

  double weight(int k, int cell) const { return data_.weights[k][cell]; }
  std::span<const double> weights(int k) const { return data_.weights[k]; }
  double total_volume() const { return total_volume_; }

  const Eigen::MatrixXd& barycenters(int k) const { return data_.barycenters[k]; }
  auto barycenter(int k, int cell) const { return data_.barycenters[k].col(cell); }

  double distance(const PointRef& a, const PointRef& b) const;
  double diameter() const { return diameter_; }
  bool dual_connected() const { return dual_connected_; }

  const ComplexData& data() const { return data_; }

 private:
  ComplexData data_;
  std::vector<std::array<int, 2>> cofaces_;
  double total_volume_ = 0.0;
  double diameter_ = 0.0;
  bool dual_connected_ = false;
};

using ComplexPtr = std::shared_ptr<const AmbientComplex>;

/// Chain with Z2 coefficients. Cells are kept sorted; repeated indices cancel.
class Mod2Chain {
 public:
  Mod2Chain(ComplexPtr complex, int dim, std::vector<int> cells = {});

  static Mod2Chain from_region(ComplexPtr complex, const Region& region);
  static Mod2Chain from_indicator(ComplexPtr complex, int dim, std::span<const std::uint8_t> ind);
  static Mod2Chain fundamental(ComplexPtr complex);

  int dim() const { return dim_; }
  const std::vector<int>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  bool contains(int cell) const;
  const ComplexPtr& complex() const { return complex_; }

  std::vector<std::uint8_t> indicator() const;

  friend bool operator==(const Mod2Chain& a, const Mod2Chain& b) {
    return a.complex_ == b.complex_ && a.dim_ == b.dim_ && a.cells_ == b.cells_;
  }

 private:
  ComplexPtr complex_;
  int dim_ = 0;
  std::vector<int> cells_;
};

Mod2Chain operator+(const Mod2Chain& a, const Mod2Chain& b);
Mod2Chain boundary(const Mod2Chain& c);
double mass(const Mod2Chain& c);

// Boundary and volume of a top-cell region, without building the chain first.
Mod2Chain region_boundary(const ComplexPtr& complex, const Region& region);
double region_volume(const AmbientComplex& complex, const Region& region);

struct Filling {
  Mod2Chain chain;   // (n+1)-chain
  Mod2Chain defect;  // n-chain; boundary(chain) + defect == target
  double cost = 0.0;
};

/// Some (n+1)-region whose boundary is `cycle`, found by two-colouring the
/// dual graph. Throws EssentialCycle if none exists.
Region solve_filling(const Mod2Chain& cycle);

/// Exact flat norm of a null-homologous n-cycle, via s-t min cut on the dual graph.
Filling flat_norm(const Mod2Chain& cycle);
double flat_distance(const Mod2Chain& a, const Mod2Chain& b);

/// The strictly lighter of the two fillings of s + t.
Mod2Chain isoperimetric_choice(const Mod2Chain& s, const Mod2Chain& t);

Mod2Chain restrict(const Mod2Chain& c, const PointPredicate& region);

struct SliceResult {
  double radius = 0.0;
  double cut_mass = 0.0;
  double mean_cut_mass = 0.0;  // average of the cut mass over s in [r/2, r]
};

SliceResult slice_radius(const Mod2Chain& q, const Eigen::VectorXd& center, double r);

}  // namespace mmw
