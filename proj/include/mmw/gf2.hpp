#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

namespace mmw::gf2 {

/// Sparse GF(2) vector: sorted list of nonzero coordinates.
using Vec = std::vector<int>;

void add_into(Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
/// Parity of the common support.
int dot(const Vec& a, const Vec& b);
Vec from_indicator(std::span<const std::uint8_t> ind);

/// Row-echelon basis keyed by the largest coordinate of each vector.
class Basis {
 public:
  /// Reduces v in place; true if v is in the span.
  bool reduce(Vec& v) const;
  bool in_span(Vec v) const { return reduce(v); }
  /// Adds v if independent; returns true when the rank grew.
  bool insert(Vec v);
  std::size_t rank() const { return pivots_.size(); }
  /// Pivot coordinate of every basis vector, in increasing order.
  std::vector<int> pivots() const;

 private:
  std::map<int, Vec> pivots_;
};

/// Solves x * M = rhs for square invertible M given by rows; throws if singular.
std::vector<std::uint8_t> solve_left(const std::vector<std::vector<std::uint8_t>>& rows,
                                     const std::vector<std::uint8_t>& rhs);

}  // namespace mmw::gf2

namespace mmw {

/// Finite chain complex over Z2: cells per degree and their boundaries.
struct ChainComplexZ2 {
  std::vector<int> counts;
  std::vector<std::vector<gf2::Vec>> boundary;  // boundary[q][cell], q >= 1

  int top() const { return static_cast<int>(counts.size()) - 1; }
  int count(int q) const { return q < 0 || q > top() ? 0 : counts[q]; }
  /// coboundary[q][cell] lists the (q+1)-cells having `cell` as a face.
  std::vector<std::vector<gf2::Vec>> coboundary() const;
};

/// Per-degree indicator of a subcomplex; empty vectors mean "nothing".
using CellMask = std::vector<std::vector<std::uint8_t>>;

bool is_subcomplex(const ChainComplexZ2& X, const CellMask& A);
CellMask mask_union(const CellMask& a, const CellMask& b);

struct HomologyBasis {
  int degree = 0;
  std::vector<gf2::Vec> cycles;  // representatives
  gf2::Basis boundaries;         // image of the boundary map, for zero tests
  std::vector<int> pivots;       // pivot rows of the reduced boundary map
};

/// H_q(X, A; Z2). With A given, chains supported in A are dropped.
HomologyBasis homology(const ChainComplexZ2& X, int q, const CellMask* A = nullptr);

/// A cohomology class with a chosen cocycle representative, possibly relative.
struct CohomologyClass {
  std::shared_ptr<const ChainComplexZ2> complex;
  std::shared_ptr<const CellMask> relative;  // cochains vanish on these cells
  int degree = 0;
  gf2::Vec cochain;
};

struct CohomologyBasis {
  int degree = 0;
  std::vector<CohomologyClass> classes;
  gf2::Basis coboundaries;
  std::vector<int> pivots;
};

CohomologyBasis cohomology(const std::shared_ptr<const ChainComplexZ2>& X, int q,
                           const std::shared_ptr<const CellMask>& A = nullptr);

gf2::Vec coboundary_of(const ChainComplexZ2& X, int q, const gf2::Vec& cochain);
bool is_cocycle(const CohomologyClass& a);
/// Zero in cohomology, i.e. the representative is a (relative) coboundary.
bool is_zero(const CohomologyClass& a);
bool cohomologous(const CohomologyClass& a, const CohomologyClass& b);
int evaluate(const CohomologyClass& a, const gf2::Vec& cycle);
int euler_characteristic(const ChainComplexZ2& X);

}  // namespace mmw
