#pragma once

// Brute-force reference computations shared by unit and acceptance tests.

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mmw/chain.hpp"

namespace oracle {

struct Exhaustive {
  double cost = std::numeric_limits<double>::infinity();
  std::uint64_t best = 0;  // bitmask over top cells
};

// Minimises mass(t + boundary A) + mass(A) over all 2^N top-cell subsets A,
// walking the subsets in Gray-code order.
inline Exhaustive exhaustive_flat_norm(const mmw::Mod2Chain& t) {
  const auto& K = *t.complex();
  const int n = K.num_top();
  const int top = K.dim();
  std::vector<std::uint8_t> facet = t.indicator();
  double defect = mmw::mass(t), vol = 0.0;
  std::uint64_t mask = 0;
  Exhaustive out{defect + vol, 0};
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
    const int c = __builtin_ctzll(step);
    mask ^= std::uint64_t{1} << c;
    vol += (mask >> c & 1u) ? K.weight(top, c) : -K.weight(top, c);
    for (int f : K.faces(top, c)) {
      facet[f] ^= 1u;
      defect += facet[f] ? K.weight(top - 1, f) : -K.weight(top - 1, f);
    }
    if (defect + vol < out.cost - 1e-12) out = {defect + vol, mask};
  }
  // the running sums drift; price the winner from scratch
  mmw::Region a(n);
  for (int c = 0; c < n; ++c) a[c] = out.best >> c & 1u;
  const auto chain = mmw::Mod2Chain::from_region(t.complex(), a);
  out.cost = mmw::mass(chain) + mmw::mass(t + mmw::boundary(chain));
  return out;
}

// Random null-homologous cycle: boundary of a random region.
inline mmw::Mod2Chain random_boundary(const mmw::ComplexPtr& K, std::mt19937_64& rng, double density = 0.4) {
  std::bernoulli_distribution coin(density);
  mmw::Region r(K->num_top());
  for (auto& x : r) x = coin(rng);
  return mmw::region_boundary(K, r);
}

inline mmw::Mod2Chain random_chain(const mmw::ComplexPtr& K, int dim, std::mt19937_64& rng, double density = 0.3) {
  std::bernoulli_distribution coin(density);
  std::vector<int> cells;
  for (int c = 0; c < K->num_cells(dim); ++c)
    if (coin(rng)) cells.push_back(c);
  return mmw::Mod2Chain(K, dim, cells);
}

}  // namespace oracle
