#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boykov_kolmogorov_max_flow.hpp>

#include "mmw/chain.hpp"

namespace mmw {

namespace {

using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;

struct VertexProps {
  boost::default_color_type color{};
  double distance = 0.0;
  Traits::edge_descriptor predecessor{};
};

struct EdgeProps {
  double capacity = 0.0;
  double residual = 0.0;
  Traits::edge_descriptor reverse{};
};

using FlowGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS, VertexProps, EdgeProps>;

void add_arc(FlowGraph& g, int u, int v, double cap_uv, double cap_vu) {
  auto e = boost::add_edge(u, v, g).first;
  auto r = boost::add_edge(v, u, g).first;
  g[e].capacity = cap_uv;
  g[r].capacity = cap_vu;
  g[e].reverse = r;
  g[r].reverse = e;
}

}  // namespace

// With R any filling of the cycle, every competitor is R + A and the defect is
// the boundary of U = R + A. The cost mass(boundary U) + mass(U + R) is a cut
// function on the dual graph: facet weights between adjacent cells, and the
// volume of each cell as the price of disagreeing with R.
Filling flat_norm(const Mod2Chain& cycle) {
  const auto& K = *cycle.complex();
  const int top = K.dim();
  if (cycle.dim() != top - 1) throw DimensionMismatch("flat_norm expects an n-cycle");
  if (!boundary(cycle).empty()) throw NotACycle("flat_norm input is not a cycle");

  const Region fill = solve_filling(cycle);
  if (cycle.empty())
    return {Mod2Chain(cycle.complex(), top), cycle, 0.0};

  const int n = K.num_top();
  const int source = n, sink = n + 1;
  FlowGraph g(n + 2);
  const auto vol = K.weights(top);
  for (int c = 0; c < n; ++c) {
    if (fill[c])
      add_arc(g, source, c, vol[c], 0.0);
    else
      add_arc(g, c, sink, vol[c], 0.0);
  }
  const auto area = K.weights(top - 1);
  for (int f = 0; f < K.num_facets(); ++f) {
    const auto& cf = K.cofaces(f);
    add_arc(g, cf[0], cf[1], area[f], area[f]);
  }

  boost::boykov_kolmogorov_max_flow(g, boost::get(&EdgeProps::capacity, g), boost::get(&EdgeProps::residual, g),
                                    boost::get(&EdgeProps::reverse, g), boost::get(&VertexProps::predecessor, g),
                                    boost::get(&VertexProps::color, g), boost::get(&VertexProps::distance, g),
                                    boost::get(boost::vertex_index, g), source, sink);

  Region u(n, 0), a(n, 0);
  for (int c = 0; c < n; ++c) {
    u[c] = g[c].color == boost::black_color ? 1 : 0;
    a[c] = u[c] ^ fill[c];
  }
  Filling out{Mod2Chain::from_region(cycle.complex(), a), region_boundary(cycle.complex(), u), 0.0};
  out.cost = mass(out.defect) + mass(out.chain);
  return out;
}

}  // namespace mmw
