#include "evotrade/layered.hpp"

#include <cmath>
#include <stdexcept>

namespace evotrade {

namespace {

double xavier(std::mt19937_64& rng, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return std::uniform_real_distribution<double>(-limit, limit)(rng);
}

}  // namespace

Genome build_layered(CellKind cell, std::mt19937_64& rng, int inputs, int layer_width, int layers) {
  if (cell == CellKind::simple) throw std::invalid_argument("layered networks need an LSTM, GRU or MGU cell");
  if (inputs != kGenomeInputs) throw std::invalid_argument("layered networks take exactly 7 inputs");
  if (layer_width < 1 || layers < 1) throw std::invalid_argument("layer width and count must be positive");

  Genome g;
  GeneId next_id = 0;
  std::vector<GeneId> previous;
  for (int i = 0; i < inputs; ++i) {
    g.nodes.push_back({next_id, NodeKind::input, CellKind::simple, 0.0, true, {}});
    previous.push_back(next_id++);
  }
  const GeneId output_id = next_id++;
  g.nodes.push_back({output_id, NodeKind::output, CellKind::simple, 1.0, true, {0.0}});

  // Memory-cell gates see two inputs (edge sum and own state) and feed one activation.
  const std::size_t cell_params = cell_parameter_count(NodeKind::hidden, cell);
  for (int layer = 1; layer <= layers; ++layer) {
    const double depth = static_cast<double>(layer) / static_cast<double>(layers + 1);
    std::vector<GeneId> current;
    for (int k = 0; k < layer_width; ++k) {
      NodeGene node{next_id++, NodeKind::hidden, cell, depth, true, std::vector<double>(cell_params, 0.0)};
      for (std::size_t p = 0; p < cell_params; p += 3) {
        node.params[p] = xavier(rng, 2, 1);
        node.params[p + 1] = xavier(rng, 2, 1);
      }
      current.push_back(node.id);
      g.nodes.push_back(std::move(node));
    }
    const int fan_in = static_cast<int>(previous.size());
    for (GeneId target : current)
      for (GeneId source : previous)
        g.edges.push_back({next_id++, source, target, xavier(rng, fan_in, layer_width), true});
    for (GeneId id : current)
      g.recurrent_edges.push_back({next_id++, id, id, xavier(rng, layer_width, layer_width), true, 1});
    previous = std::move(current);
  }
  for (GeneId source : previous)
    g.edges.push_back({next_id++, source, output_id, xavier(rng, layer_width, 1), true});
  g.origin = "layered_" + std::string(to_string(cell));
  validate(g);
  return g;
}

}  // namespace evotrade
