#include "mmw/param_complex.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <numeric>
#include <set>

#include "mmw/errors.hpp"

namespace mmw {

int CubeCell::dim() const { return std::popcount(axes); }

namespace {

int pow3(int k) {
  int r = 1;
  while (k-- > 0) r *= 3;
  return r;
}

}  // namespace

CubeCell ParamComplex::canonical(CubeCell c) const {
  switch (ident_) {
    case Identification::none:
      break;
    case Identification::periodic:
      for (auto& x : c.base) x = ((x % N_) + N_) % N_;
      break;
    case Identification::antipodal: {
      CubeCell a = c;
      for (int i = 0; i < m_; ++i) a.base[i] = N_ - c.base[i] - ((c.axes >> i) & 1u);
      if (a.base < c.base) c = std::move(a);
      break;
    }
  }
  return c;
}

ParamComplex::ParamComplex(int m, int level, Identification ident, const std::vector<CubeCell>& generators)
    : m_(m), level_(level), N_(pow3(level)), ident_(ident) {
  if (m < 1 || m > 16) throw OutOfRange("ambient cube dimension out of range");
  if (level < 0 || level > 8) throw OutOfRange("subdivision level out of range");
  if (ident == Identification::antipodal && level < 1) throw OutOfRange("projective model needs level >= 1");
  std::set<CubeCell> all;
  std::deque<CubeCell> queue;
  for (const auto& g : generators) {
    if (static_cast<int>(g.base.size()) != m) throw DimensionMismatch("cell base has the wrong dimension");
    for (int i = 0; i < m; ++i) {
      const int hi = ((g.axes >> i) & 1u) ? N_ - 1 : N_;
      if (ident != Identification::periodic && (g.base[i] < 0 || g.base[i] > hi))
        throw OutOfRange("cell outside the unit cube");
    }
    auto c = canonical(g);
    if (all.insert(c).second) queue.push_back(std::move(c));
  }
  while (!queue.empty()) {
    CubeCell c = std::move(queue.front());
    queue.pop_front();
    for (int a = 0; a < m; ++a) {
      if (!((c.axes >> a) & 1u)) continue;
      CubeCell lo{c.base, c.axes & ~(1u << a)}, hi = lo;
      hi.base[a] += 1;
      for (auto* f : {&lo, &hi}) {
        auto cf = canonical(*f);
        if (all.insert(cf).second) queue.push_back(std::move(cf));
      }
    }
  }
  int top = -1;
  for (const auto& c : all) top = std::max(top, c.dim());
  cells_.assign(top + 1, {});
  // std::set order gives deterministic indices
  for (const auto& c : all) cells_[c.dim()].push_back(c);
  for (int q = 0; q <= top; ++q)
    for (int i = 0; i < static_cast<int>(cells_[q].size()); ++i) index_.emplace(cells_[q][i], i);

  auto chains = std::make_shared<ChainComplexZ2>();
  chains->counts.resize(top + 1);
  chains->boundary.resize(top + 1);
  for (int q = 0; q <= top; ++q) {
    chains->counts[q] = static_cast<int>(cells_[q].size());
    if (q == 0) continue;
    chains->boundary[q].resize(cells_[q].size());
    for (std::size_t i = 0; i < cells_[q].size(); ++i) {
      const auto& c = cells_[q][i];
      gf2::Vec faces;
      for (int a = 0; a < m; ++a) {
        if (!((c.axes >> a) & 1u)) continue;
        CubeCell lo{c.base, c.axes & ~(1u << a)}, hi = lo;
        hi.base[a] += 1;
        gf2::add_into(faces, {find(lo)});
        gf2::add_into(faces, {find(hi)});
      }
      chains->boundary[q][i] = std::move(faces);
    }
  }
  chains_ = chains;

  neighbors_.assign(num_vertices(), {});
  if (top >= 1) {
    for (const auto& b : chains_->boundary[1]) {
      if (b.size() != 2) throw Error("degenerate edge in parameter complex");
      edges_.push_back({b[0], b[1]});
      neighbors_[b[0]].push_back(b[1]);
      neighbors_[b[1]].push_back(b[0]);
    }
  }
}

int ParamComplex::find(const CubeCell& c) const {
  if (static_cast<int>(c.base.size()) != m_) return -1;
  auto it = index_.find(canonical(c));
  return it == index_.end() ? -1 : it->second;
}

std::vector<int> ParamComplex::cell_vertices(int q, int i) const {
  const auto& c = cells_[q][i];
  std::vector<int> axes;
  for (int a = 0; a < m_; ++a)
    if ((c.axes >> a) & 1u) axes.push_back(a);
  std::vector<int> out;
  for (unsigned sub = 0; sub < (1u << axes.size()); ++sub) {
    CubeCell v{c.base, 0};
    for (std::size_t t = 0; t < axes.size(); ++t)
      if ((sub >> t) & 1u) v.base[axes[t]] += 1;
    out.push_back(find(v));
  }
  return out;
}

Eigen::VectorXd ParamComplex::vertex_coords(int v) const {
  Eigen::VectorXd x(m_);
  for (int i = 0; i < m_; ++i) x[i] = static_cast<double>(cells_[0][v].base[i]) / N_;
  return x;
}

int ParamComplex::edge_between(int a, int b) const {
  for (int a_axis = 0; a_axis < m_; ++a_axis) {
    // try both orientations of a unit step
    for (int dir : {1, -1}) {
      CubeCell v = cells_[0][a];
      v.base[a_axis] += dir;
      if (find(v) != b) continue;
      CubeCell e{dir > 0 ? cells_[0][a].base : v.base, 1u << a_axis};
      const int idx = find(e);
      if (idx >= 0) return idx;
    }
  }
  // representatives may need the antipodal copy of the first endpoint
  if (ident_ == Identification::antipodal) {
    CubeCell va = cells_[0][a];
    for (auto& x : va.base) x = N_ - x;
    for (int a_axis = 0; a_axis < m_; ++a_axis)
      for (int dir : {1, -1}) {
        CubeCell v = va;
        v.base[a_axis] += dir;
        if (find(v) != b) continue;
        CubeCell e{dir > 0 ? va.base : v.base, 1u << a_axis};
        const int idx = find(e);
        if (idx >= 0) return idx;
      }
  }
  return -1;
}

CellMask ParamComplex::mask_of(const ParamComplex& sub) const {
  if (sub.m_ != m_ || sub.level_ != level_ || sub.ident_ != ident_)
    throw DimensionMismatch("subcomplex lives on a different lattice");
  CellMask mask(dim() + 1);
  for (int q = 0; q <= dim(); ++q) {
    mask[q].assign(num_cells(q), 0);
    for (int i = 0; i < num_cells(q); ++i) mask[q][i] = sub.find(cells_[q][i]) >= 0;
  }
  for (int q = 0; q <= sub.dim(); ++q)
    for (const auto& c : sub.cells_[q])
      if (find(c) < 0) throw PreconditionFailed("not a subcomplex");
  return mask;
}

std::vector<CubeCell> ParamComplex::all_cells() const {
  std::vector<CubeCell> out;
  for (const auto& level : cells_) out.insert(out.end(), level.begin(), level.end());
  return out;
}

ParamPtr build_cube(int m, int j) {
  const int N = pow3(j);
  std::vector<CubeCell> gens;
  std::vector<int> base(m, 0);
  const unsigned all = (1u << m) - 1;
  while (true) {
    gens.push_back({base, all});
    int a = 0;
    for (; a < m; ++a) {
      if (++base[a] < N) break;
      base[a] = 0;
    }
    if (a == m) break;
  }
  return std::make_shared<ParamComplex>(m, j, Identification::none, gens);
}

ParamPtr build_param_torus(int m, int j) {
  if (j < 1) throw OutOfRange("torus parameter complex needs level >= 1");
  const int N = pow3(j);
  std::vector<CubeCell> gens;
  std::vector<int> base(m, 0);
  const unsigned all = (1u << m) - 1;
  while (true) {
    gens.push_back({base, all});
    int a = 0;
    for (; a < m; ++a) {
      if (++base[a] < N) break;
      base[a] = 0;
    }
    if (a == m) break;
  }
  return std::make_shared<ParamComplex>(m, j, Identification::periodic, gens);
}

ParamPtr build_circle(int j) { return build_param_torus(1, j); }

ProjectiveModel build_rp(int p, int j) {
  if (p < 1) throw OutOfRange("build_rp needs p >= 1");
  if (j < 1) throw OutOfRange("build_rp needs j >= 1");
  const int m = p + 1, N = pow3(j);
  std::vector<CubeCell> gens;
  for (int fixed = 0; fixed < m; ++fixed) {
    const unsigned axes = ((1u << m) - 1) & ~(1u << fixed);
    std::vector<int> base(m, 0);
    // only the side at 0: the side at N is its antipodal image
    while (true) {
      gens.push_back({base, axes});
      int a = 0;
      for (; a < m; ++a) {
        if (a == fixed) continue;
        if (++base[a] < N) break;
        base[a] = 0;
      }
      if (a == m) break;
    }
  }
  ProjectiveModel out;
  out.complex = std::make_shared<ParamComplex>(m, j, Identification::antipodal, gens);
  std::vector<int> x(m, 0);
  for (int a = 0; a < m; ++a)
    for (int t = 0; t < N; ++t) {
      out.gamma.push_back(out.complex->find({x, 0}));
      x[a] += 1;
    }
  return out;
}

ParamPtr subdivide(const ParamComplex& X, int k) {
  if (k < 0) throw OutOfRange("negative subdivision");
  if (k == 0) return std::make_shared<ParamComplex>(X);
  const int F = pow3(k), m = X.ambient_dim();
  std::vector<CubeCell> gens;
  for (int q = 0; q <= X.dim(); ++q)
    for (int i = 0; i < X.num_cells(q); ++i) {
      const auto& c = X.cell(q, i);
      std::vector<int> axes;
      for (int a = 0; a < m; ++a)
        if ((c.axes >> a) & 1u) axes.push_back(a);
      std::vector<int> off(axes.size(), 0);
      while (true) {
        CubeCell f{c.base, c.axes};
        for (auto& x : f.base) x *= F;
        for (std::size_t t = 0; t < axes.size(); ++t) f.base[axes[t]] += off[t];
        gens.push_back(std::move(f));
        std::size_t t = 0;
        for (; t < axes.size(); ++t) {
          if (++off[t] < F) break;
          off[t] = 0;
        }
        if (t == axes.size()) break;
      }
    }
  return std::make_shared<ParamComplex>(m, X.level() + k, X.identification(), gens);
}

std::vector<int> nearest_vertex_map(const ParamComplex& fine, const ParamComplex& coarse) {
  if (fine.level() < coarse.level()) throw OutOfRange("nearest_vertex_map needs i >= j");
  const int F = pow3(fine.level() - coarse.level());
  std::vector<int> out(fine.num_vertices());
  for (int v = 0; v < fine.num_vertices(); ++v) {
    CubeCell c{fine.cell(0, v).base, 0};
    for (auto& x : c.base) x = (x + F / 2) / F;  // F odd: no ties
    out[v] = coarse.find(c);
    if (out[v] < 0) throw PreconditionFailed("nearest coarse vertex missing from the coarse complex");
  }
  return out;
}

ParamPtr subcomplex_where(const ParamComplex& X, const std::function<bool(int)>& keep) {
  std::vector<std::uint8_t> ok(X.num_vertices());
  for (int v = 0; v < X.num_vertices(); ++v) ok[v] = keep(v);
  std::vector<CubeCell> gens;
  for (int q = 0; q <= X.dim(); ++q)
    for (int i = 0; i < X.num_cells(q); ++i) {
      auto vs = X.cell_vertices(q, i);
      if (std::all_of(vs.begin(), vs.end(), [&](int v) { return ok[v]; })) gens.push_back(X.cell(q, i));
    }
  return std::make_shared<ParamComplex>(X.ambient_dim(), X.level(), X.identification(), gens);
}

ParamPtr closure_complement(const ParamComplex& X, const ParamComplex& Y) {
  std::vector<CubeCell> gens;
  for (int q = 0; q <= X.dim(); ++q)
    for (int i = 0; i < X.num_cells(q); ++i)
      if (Y.find(X.cell(q, i)) < 0) gens.push_back(X.cell(q, i));
  return std::make_shared<ParamComplex>(X.ambient_dim(), X.level(), X.identification(), gens);
}

std::vector<std::vector<int>> cycle_to_loops(const ParamComplex& X, const gf2::Vec& cycle) {
  std::vector<std::vector<std::pair<int, int>>> adj(X.num_vertices());  // (neighbor, edge)
  for (int e : cycle) {
    const auto& [a, b] = X.edges()[e];
    adj[a].push_back({b, e});
    adj[b].push_back({a, e});
  }
  for (const auto& list : adj)
    if (list.size() % 2) throw NotACycle("1-chain has odd vertex degree");
  std::vector<std::uint8_t> used(X.num_cells(1), 0);
  std::vector<std::size_t> next(X.num_vertices(), 0);
  std::vector<std::vector<int>> loops;
  for (int start = 0; start < X.num_vertices(); ++start) {
    while (true) {
      while (next[start] < adj[start].size() && used[adj[start][next[start]].second]) ++next[start];
      if (next[start] == adj[start].size()) break;
      std::vector<int> loop{start};
      int cur = start;
      while (true) {
        while (next[cur] < adj[cur].size() && used[adj[cur][next[cur]].second]) ++next[cur];
        if (next[cur] == adj[cur].size()) break;
        auto [to, e] = adj[cur][next[cur]];
        used[e] = 1;
        cur = to;
        if (cur == start) break;
        loop.push_back(cur);
      }
      loops.push_back(std::move(loop));
    }
  }
  return loops;
}

gf2::Vec loop_chain(const ParamComplex& X, const std::vector<int>& loop) {
  gf2::Vec out;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const int a = loop[i], b = loop[(i + 1) % loop.size()];
    if (a == b) continue;
    const int e = X.edge_between(a, b);
    if (e < 0) throw PreconditionFailed("loop steps between non-adjacent vertices");
    gf2::add_into(out, {e});
  }
  return out;
}

Triangulation::Triangulation(ParamPtr X, std::vector<int> rank) : X_(std::move(X)), rank_(std::move(rank)) {
  const auto& K = *X_;
  const int m = K.ambient_dim();
  if (rank_.empty()) {
    rank_.resize(K.num_vertices());
    std::iota(rank_.begin(), rank_.end(), 0);
  }
  if (static_cast<int>(rank_.size()) != K.num_vertices()) throw DimensionMismatch("vertex rank has wrong size");
  const int top = K.dim();
  simplices_.assign(top + 1, {});
  carriers_.assign(top + 1, {});
  auto by_rank = [&](int a, int b) { return rank_[a] < rank_[b]; };

  for (int q = 0; q <= top; ++q)
    for (int i = 0; i < K.num_cells(q); ++i) {
      const auto& c = K.cell(q, i);
      std::vector<int> perm;
      for (int a = 0; a < m; ++a)
        if ((c.axes >> a) & 1u) perm.push_back(a);
      do {
        // Freudenthal chain of lattice points and its vertex ids
        std::vector<std::vector<int>> pts{c.base};
        for (int a : perm) {
          auto nxt = pts.back();
          nxt[a] += 1;
          pts.push_back(std::move(nxt));
        }
        std::vector<int> ids;
        for (const auto& pnt : pts) ids.push_back(K.find({pnt, 0}));
        const unsigned nsub = 1u << (q + 1);
        for (unsigned sub = 1; sub < nsub; ++sub) {
          std::vector<int> pos;
          for (int t = 0; t <= q; ++t)
            if ((sub >> t) & 1u) pos.push_back(t);
          std::vector<int> verts;
          for (int t : pos) verts.push_back(ids[t]);
          std::sort(verts.begin(), verts.end(), by_rank);
          if (index_.count(verts)) continue;
          const int d = static_cast<int>(pos.size()) - 1;
          unsigned axes = 0;
          for (int t = pos.front(); t < pos.back(); ++t) axes |= 1u << perm[t];
          const int carrier = K.find({pts[pos.front()], axes});
          if (carrier < 0) throw Error("triangulation carrier missing");
          index_.emplace(verts, static_cast<int>(simplices_[d].size()));
          simplices_[d].push_back(verts);
          carriers_[d].push_back({std::popcount(axes), carrier});
          if (d == 1) {
            std::vector<int> path;
            for (int t = pos.front(); t < pos.back(); ++t) path.push_back(K.find({pts[t], 1u << perm[t]}));
            edge_paths_.push_back(std::move(path));
          }
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }

  auto chains = std::make_shared<ChainComplexZ2>();
  chains->counts.resize(top + 1);
  chains->boundary.resize(top + 1);
  for (int q = 0; q <= top; ++q) {
    chains->counts[q] = static_cast<int>(simplices_[q].size());
    if (q == 0) continue;
    for (const auto& s : simplices_[q]) {
      gf2::Vec faces;
      for (int drop = 0; drop <= q; ++drop) {
        std::vector<int> f;
        for (int t = 0; t <= q; ++t)
          if (t != drop) f.push_back(s[t]);
        faces.push_back(find(f));
      }
      std::sort(faces.begin(), faces.end());
      if (std::adjacent_find(faces.begin(), faces.end()) != faces.end()) throw Error("degenerate simplex");
      chains->boundary[q].push_back(std::move(faces));
    }
  }
  chains_ = chains;
}

int Triangulation::find(const std::vector<int>& vertices) const {
  auto it = index_.find(vertices);
  return it == index_.end() ? -1 : it->second;
}

CellMask Triangulation::mask_of(const ParamComplex& sub) const {
  const auto cube_mask = X_->mask_of(sub);
  CellMask mask(dim() + 1);
  for (int q = 0; q <= dim(); ++q) {
    mask[q].resize(num_simplices(q));
    for (int i = 0; i < num_simplices(q); ++i) {
      auto [d, c] = carriers_[q][i];
      mask[q][i] = cube_mask[d][c];
    }
  }
  return mask;
}

CohomologyClass Triangulation::from_cubical(const CohomologyClass& cubical,
                                            const std::shared_ptr<const CellMask>& relative) const {
  if (cubical.complex != X_->chain_complex()) throw DimensionMismatch("class is not on this cubical complex");
  if (cubical.degree != 1) throw PreconditionFailed("only degree-1 classes are transferred");
  std::vector<std::uint8_t> val(X_->num_cells(1), 0);
  for (int e : cubical.cochain) val[e] = 1;
  CohomologyClass out{chains_, relative, 1, {}};
  for (int e = 0; e < num_simplices(1); ++e) {
    int s = 0;
    for (int c : edge_paths_[e]) s ^= val[c];
    if (s) out.cochain.push_back(e);
  }
  return out;
}

CohomologyClass Triangulation::cup(const CohomologyClass& a, const CohomologyClass& b) const {
  if (a.complex != chains_ || b.complex != chains_) throw DimensionMismatch("classes are not on this triangulation");
  const int deg = a.degree + b.degree;
  std::shared_ptr<const CellMask> rel;
  if (a.relative && b.relative)
    rel = std::make_shared<CellMask>(mask_union(*a.relative, *b.relative));
  else
    rel = a.relative ? a.relative : b.relative;
  CohomologyClass out{chains_, rel, deg, {}};
  if (deg > dim()) return out;
  std::vector<std::uint8_t> va(num_simplices(a.degree), 0), vb(num_simplices(b.degree), 0);
  for (int c : a.cochain) va[c] = 1;
  for (int c : b.cochain) vb[c] = 1;
  for (int i = 0; i < num_simplices(deg); ++i) {
    const auto& s = simplices_[deg][i];
    std::vector<int> front(s.begin(), s.begin() + a.degree + 1), back(s.begin() + a.degree, s.end());
    if (va[find(front)] && vb[find(back)]) out.cochain.push_back(i);
  }
  return out;
}

CohomologyClass Triangulation::cup_power(const CohomologyClass& a, int p) const {
  if (p < 0) throw OutOfRange("negative cup power");
  CohomologyClass out = unit();
  out.relative = a.relative;
  for (int i = 0; i < p; ++i) out = cup(out, a);
  return out;
}

CohomologyClass Triangulation::unit() const {
  CohomologyClass out{chains_, nullptr, 0, {}};
  out.cochain.resize(num_simplices(0));
  std::iota(out.cochain.begin(), out.cochain.end(), 0);
  return out;
}

}  // namespace mmw
