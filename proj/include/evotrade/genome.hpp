#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "evotrade/cell.hpp"

namespace evotrade {

using GeneId = std::int64_t;

inline constexpr int kGenomeInputs = 7;
inline constexpr int kGenomeOutputs = 1;
inline constexpr int kMaxTimeSkip = 10;

class GenomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeGene {
  GeneId id = 0;
  NodeKind kind = NodeKind::hidden;
  CellKind cell = CellKind::simple;
  double depth = 0.5;
  bool enabled = true;
  std::vector<double> params;
};

struct EdgeGene {
  GeneId innovation = 0;
  GeneId source = 0;
  GeneId target = 0;
  double weight = 0.0;
  bool enabled = true;
};

struct RecurrentEdgeGene {
  GeneId innovation = 0;
  GeneId source = 0;
  GeneId target = 0;
  double weight = 0.0;
  bool enabled = true;
  int time_skip = 1;
};

/// Graph-encoded recurrent network.
///
/// Feed-forward edges always point from lower to higher depth, so one timestep is a DAG.
/// Recurrent edges read the source value from `time_skip` steps earlier.
/// Input nodes map to features in ascending id order.
struct Genome {
  GeneId genome_id = -1;
  std::vector<NodeGene> nodes;
  std::vector<EdgeGene> edges;
  std::vector<RecurrentEdgeGene> recurrent_edges;
  int island = -1;
  std::optional<double> fitness;
  std::vector<GeneId> parents;
  std::string origin;

  const NodeGene* find_node(GeneId id) const;
  NodeGene* find_node(GeneId id);

  std::size_t hidden_count() const;
  std::size_t enabled_edge_count() const;

  /// Flat parameter layout: edge weights, recurrent edge weights, then node params, each in
  /// storage order. Gradients use the same layout.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
};

/// Which genes take part in evaluation. A node is active when it is enabled and lies on an
/// enabled path from an input to the output; everything else is dormant.
struct ActiveSet {
  std::vector<bool> node;            // indexed like Genome::nodes
  std::vector<bool> edge;            // indexed like Genome::edges
  std::vector<bool> recurrent_edge;  // indexed like Genome::recurrent_edges
};

ActiveSet compute_active(const Genome& genome);

/// Throws GenomeError describing the first broken invariant.
void validate(const Genome& genome);

/// Non-throwing form of validate; empty when the genome is sound.
std::optional<std::string> check_invariants(const Genome& genome);

}  // namespace evotrade
