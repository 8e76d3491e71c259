#include "mmw/gf2.hpp"

#include <algorithm>
#include <iterator>

#include "mmw/errors.hpp"

namespace mmw::gf2 {

void add_into(Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  a.swap(out);
}

Vec add(const Vec& a, const Vec& b) {
  Vec out = a;
  add_into(out, b);
  return out;
}

int dot(const Vec& a, const Vec& b) {
  int n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n & 1;
}

Vec from_indicator(std::span<const std::uint8_t> ind) {
  Vec v;
  for (std::size_t i = 0; i < ind.size(); ++i)
    if (ind[i]) v.push_back(static_cast<int>(i));
  return v;
}

bool Basis::reduce(Vec& v) const {
  while (!v.empty()) {
    auto it = pivots_.find(v.back());
    if (it == pivots_.end()) return false;
    add_into(v, it->second);
  }
  return true;
}

bool Basis::insert(Vec v) {
  if (reduce(v)) return false;
  const int low = v.back();
  pivots_.emplace(low, std::move(v));
  return true;
}

std::vector<int> Basis::pivots() const {
  std::vector<int> out;
  for (const auto& [k, v] : pivots_) out.push_back(k);
  return out;
}

std::vector<std::uint8_t> solve_left(const std::vector<std::vector<std::uint8_t>>& rows,
                                     const std::vector<std::uint8_t>& rhs) {
  // x * M = rhs  <=>  M^T x^T = rhs^T
  const std::size_t n = rows.size();
  std::vector<std::vector<std::uint8_t>> A(n, std::vector<std::uint8_t>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw DimensionMismatch("solve_left expects a square matrix");
    for (std::size_t j = 0; j < n; ++j) A[j][i] = rows[i][j];
  }
  for (std::size_t j = 0; j < n; ++j) A[j][n] = rhs.at(j);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && !A[piv][col]) ++piv;
    if (piv == n) throw PreconditionFailed("singular GF(2) system");
    std::swap(A[piv], A[col]);
    for (std::size_t r = 0; r < n; ++r)
      if (r != col && A[r][col])
        for (std::size_t c = col; c <= n; ++c) A[r][c] ^= A[col][c];
  }
  std::vector<std::uint8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = A[i][n];
  return x;
}

}  // namespace mmw::gf2

namespace mmw {

using gf2::Vec;

std::vector<std::vector<Vec>> ChainComplexZ2::coboundary() const {
  std::vector<std::vector<Vec>> out(counts.size());
  for (int q = 0; q <= top(); ++q) out[q].assign(counts[q], {});
  for (int q = 1; q <= top(); ++q)
    for (int c = 0; c < counts[q]; ++c)
      for (int f : boundary[q][c]) out[q - 1][f].push_back(c);
  return out;  // cells visited in increasing order, so lists are sorted
}

bool is_subcomplex(const ChainComplexZ2& X, const CellMask& A) {
  for (int q = 1; q <= X.top(); ++q) {
    if (q >= static_cast<int>(A.size()) || A[q].empty()) continue;
    for (int c = 0; c < X.counts[q]; ++c) {
      if (!A[q][c]) continue;
      for (int f : X.boundary[q][c])
        if (q - 1 >= static_cast<int>(A.size()) || A[q - 1].empty() || !A[q - 1][f]) return false;
    }
  }
  return true;
}

CellMask mask_union(const CellMask& a, const CellMask& b) {
  CellMask out(std::max(a.size(), b.size()));
  for (std::size_t q = 0; q < out.size(); ++q) {
    const auto* x = q < a.size() ? &a[q] : nullptr;
    const auto* y = q < b.size() ? &b[q] : nullptr;
    const std::size_t n = std::max(x ? x->size() : 0, y ? y->size() : 0);
    out[q].assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      out[q][i] = (x && i < x->size() && (*x)[i]) || (y && i < y->size() && (*y)[i]);
  }
  return out;
}

namespace {

bool masked(const CellMask* A, int q, int c) {
  return A && q >= 0 && q < static_cast<int>(A->size()) && !(*A)[q].empty() && (*A)[q][c];
}

Vec filtered(const Vec& v, const CellMask* A, int q) {
  if (!A) return v;
  Vec out;
  for (int x : v)
    if (!masked(A, q, x)) out.push_back(x);
  return out;
}

// Kernel and image bases of a map given by columns (one per source cell).
struct Reduced {
  std::vector<Vec> kernel;
  gf2::Basis image;
};

Reduced reduce_map(const std::vector<Vec>& columns, const std::vector<int>& sources) {
  Reduced out;
  std::map<int, std::pair<Vec, Vec>> pivots;  // low -> (reduced column, source combination)
  for (int s : sources) {
    Vec col = columns[s], comb{s};
    while (!col.empty()) {
      auto it = pivots.find(col.back());
      if (it == pivots.end()) break;
      gf2::add_into(col, it->second.first);
      gf2::add_into(comb, it->second.second);
    }
    if (col.empty()) {
      out.kernel.push_back(std::move(comb));
    } else {
      out.image.insert(col);
      const int low = col.back();
      pivots.emplace(low, std::make_pair(std::move(col), std::move(comb)));
    }
  }
  return out;
}

std::vector<int> unmasked_cells(int count, const CellMask* A, int q) {
  std::vector<int> out;
  for (int c = 0; c < count; ++c)
    if (!masked(A, q, c)) out.push_back(c);
  return out;
}

}  // namespace

HomologyBasis homology(const ChainComplexZ2& X, int q, const CellMask* A) {
  if (q < 0) throw OutOfRange("negative degree");
  HomologyBasis out;
  out.degree = q;
  if (q > X.top()) return out;
  std::vector<Vec> cols(X.count(q));
  if (q >= 1)
    for (int c = 0; c < X.count(q); ++c) cols[c] = filtered(X.boundary[q][c], A, q - 1);
  auto ker = reduce_map(cols, unmasked_cells(X.count(q), A, q)).kernel;
  if (q + 1 <= X.top()) {
    std::vector<Vec> up(X.count(q + 1));
    for (int c = 0; c < X.count(q + 1); ++c) up[c] = filtered(X.boundary[q + 1][c], A, q);
    out.boundaries = reduce_map(up, unmasked_cells(X.count(q + 1), A, q + 1)).image;
  }
  out.pivots = out.boundaries.pivots();
  gf2::Basis span = out.boundaries;
  for (auto& z : ker)
    if (span.insert(z)) out.cycles.push_back(z);
  return out;
}

namespace {

gf2::Basis coboundary_image(const ChainComplexZ2& X, int q, const CellMask* A,
                            const std::vector<std::vector<Vec>>& cob) {
  // image of delta_{q-1}: C^{q-1} -> C^q
  if (q < 1) return {};
  std::vector<Vec> cols(X.count(q - 1));
  for (int c = 0; c < X.count(q - 1); ++c) cols[c] = filtered(cob[q - 1][c], A, q);
  return reduce_map(cols, unmasked_cells(X.count(q - 1), A, q - 1)).image;
}

}  // namespace

CohomologyBasis cohomology(const std::shared_ptr<const ChainComplexZ2>& X, int q,
                           const std::shared_ptr<const CellMask>& A) {
  if (q < 0) throw OutOfRange("negative degree");
  CohomologyBasis out;
  out.degree = q;
  if (q > X->top()) return out;
  const auto cob = X->coboundary();
  std::vector<Vec> cols(X->count(q));
  if (q + 1 <= X->top())
    for (int c = 0; c < X->count(q); ++c) cols[c] = filtered(cob[q][c], A.get(), q + 1);
  auto ker = reduce_map(cols, unmasked_cells(X->count(q), A.get(), q)).kernel;
  out.coboundaries = coboundary_image(*X, q, A.get(), cob);
  out.pivots = out.coboundaries.pivots();
  gf2::Basis span = out.coboundaries;
  for (auto& z : ker)
    if (span.insert(z)) out.classes.push_back({X, A, q, z});
  return out;
}

Vec coboundary_of(const ChainComplexZ2& X, int q, const Vec& cochain) {
  if (q + 1 > X.top()) return {};
  std::vector<std::uint8_t> hit(X.count(q + 1), 0);
  std::vector<std::uint8_t> in(X.count(q), 0);
  for (int c : cochain) in[c] = 1;
  for (int t = 0; t < X.count(q + 1); ++t) {
    int s = 0;
    for (int f : X.boundary[q + 1][t]) s ^= in[f];
    hit[t] = static_cast<std::uint8_t>(s);
  }
  return gf2::from_indicator(hit);
}

bool is_cocycle(const CohomologyClass& a) {
  return filtered(coboundary_of(*a.complex, a.degree, a.cochain), a.relative.get(), a.degree + 1).empty();
}

bool is_zero(const CohomologyClass& a) {
  if (a.cochain.empty()) return true;
  const auto cob = a.complex->coboundary();
  auto image = coboundary_image(*a.complex, a.degree, a.relative.get(), cob);
  return image.in_span(filtered(a.cochain, a.relative.get(), a.degree));
}

bool cohomologous(const CohomologyClass& a, const CohomologyClass& b) {
  if (a.complex != b.complex || a.degree != b.degree) throw DimensionMismatch("classes live in different groups");
  CohomologyClass d = a;
  d.cochain = gf2::add(a.cochain, b.cochain);
  return is_zero(d);
}

int evaluate(const CohomologyClass& a, const Vec& cycle) { return gf2::dot(a.cochain, cycle); }

int euler_characteristic(const ChainComplexZ2& X) {
  int chi = 0;
  for (int q = 0; q <= X.top(); ++q) chi += (q % 2 ? -1 : 1) * X.counts[q];
  return chi;
}

}  // namespace mmw
