#include "evotrade/genome.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

namespace evotrade {

const NodeGene* Genome::find_node(GeneId id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

NodeGene* Genome::find_node(GeneId id) {
  for (auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::size_t Genome::hidden_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const NodeGene& n) { return n.kind == NodeKind::hidden; }));
}

std::size_t Genome::enabled_edge_count() const {
  return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](const EdgeGene& e) { return e.enabled; }));
}

std::size_t Genome::parameter_count() const {
  std::size_t count = edges.size() + recurrent_edges.size();
  for (const auto& n : nodes) count += n.params.size();
  return count;
}

std::vector<double> Genome::parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const auto& e : edges) out.push_back(e.weight);
  for (const auto& e : recurrent_edges) out.push_back(e.weight);
  for (const auto& n : nodes) out.insert(out.end(), n.params.begin(), n.params.end());
  return out;
}

void Genome::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw GenomeError(fmt::format("parameter count mismatch: {} given, {} expected", values.size(),
                                  parameter_count()));
  }
  std::size_t k = 0;
  for (auto& e : edges) e.weight = values[k++];
  for (auto& e : recurrent_edges) e.weight = values[k++];
  for (auto& n : nodes)
    for (auto& p : n.params) p = values[k++];
}

ActiveSet compute_active(const Genome& genome) {
  const std::size_t n = genome.nodes.size();
  std::unordered_map<GeneId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(genome.nodes[i].id, i);

  // Adjacency over enabled edges between enabled nodes, both kinds.
  std::vector<std::vector<std::size_t>> out_adj(n), in_adj(n);
  auto link = [&](GeneId s, GeneId t, bool enabled) {
    if (!enabled) return;
    auto si = index.find(s);
    auto ti = index.find(t);
    if (si == index.end() || ti == index.end()) return;
    if (!genome.nodes[si->second].enabled || !genome.nodes[ti->second].enabled) return;
    out_adj[si->second].push_back(ti->second);
    in_adj[ti->second].push_back(si->second);
  };
  for (const auto& e : genome.edges) link(e.source, e.target, e.enabled);
  for (const auto& e : genome.recurrent_edges) link(e.source, e.target, e.enabled);

  auto flood = [&](const std::vector<std::vector<std::size_t>>& adj, NodeKind start_kind) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
      if (genome.nodes[i].kind == start_kind && genome.nodes[i].enabled) {
        seen[i] = true;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    return seen;
  };
  const auto from_inputs = flood(out_adj, NodeKind::input);
  const auto to_output = flood(in_adj, NodeKind::output);

  ActiveSet active;
  active.node.resize(n);
  for (std::size_t i = 0; i < n; ++i) active.node[i] = from_inputs[i] && to_output[i];
  auto edge_active = [&](GeneId s, GeneId t, bool enabled) {
    if (!enabled) return false;
    auto si = index.find(s);
    auto ti = index.find(t);
    return si != index.end() && ti != index.end() && active.node[si->second] && active.node[ti->second];
  };
  for (const auto& e : genome.edges) active.edge.push_back(edge_active(e.source, e.target, e.enabled));
  for (const auto& e : genome.recurrent_edges)
    active.recurrent_edge.push_back(edge_active(e.source, e.target, e.enabled));
  return active;
}

std::optional<std::string> check_invariants(const Genome& g) {
  int inputs = 0;
  int outputs = 0;
  std::unordered_map<GeneId, const NodeGene*> by_id;
  for (const auto& node : g.nodes) {
    if (!by_id.emplace(node.id, &node).second) return fmt::format("duplicate node id {}", node.id);
    switch (node.kind) {
      case NodeKind::input:
        ++inputs;
        if (node.depth != 0.0) return fmt::format("input node {} has depth {}", node.id, node.depth);
        if (!node.enabled) return fmt::format("input node {} is disabled", node.id);
        break;
      case NodeKind::output:
        ++outputs;
        if (node.depth != 1.0) return fmt::format("output node {} has depth {}", node.id, node.depth);
        if (!node.enabled) return fmt::format("output node {} is disabled", node.id);
        break;
      case NodeKind::hidden:
        if (!(node.depth > 0.0 && node.depth < 1.0))
          return fmt::format("hidden node {} has depth {} outside (0,1)", node.id, node.depth);
        break;
    }
    if (node.params.size() != cell_parameter_count(node.kind, node.cell))
      return fmt::format("node {} has {} params, {} cell needs {}", node.id, node.params.size(),
                         to_string(node.cell), cell_parameter_count(node.kind, node.cell));
    for (double p : node.params)
      if (!std::isfinite(p)) return fmt::format("node {} has a non-finite parameter", node.id);
  }
  if (inputs != kGenomeInputs) return fmt::format("expected {} input nodes, found {}", kGenomeInputs, inputs);
  if (outputs != kGenomeOutputs) return fmt::format("expected {} output node, found {}", kGenomeOutputs, outputs);

  std::unordered_set<GeneId> innovations;
  for (const auto& e : g.edges) {
    if (!innovations.insert(e.innovation).second) return fmt::format("duplicate innovation {}", e.innovation);
    auto s = by_id.find(e.source);
    auto t = by_id.find(e.target);
    if (s == by_id.end() || t == by_id.end())
      return fmt::format("edge {} references a missing node", e.innovation);
    if (!(s->second->depth < t->second->depth))
      return fmt::format("edge {} runs from depth {} to depth {}", e.innovation, s->second->depth,
                         t->second->depth);
    if (!std::isfinite(e.weight)) return fmt::format("edge {} has a non-finite weight", e.innovation);
  }
  for (const auto& e : g.recurrent_edges) {
    if (!innovations.insert(e.innovation).second) return fmt::format("duplicate innovation {}", e.innovation);
    auto s = by_id.find(e.source);
    auto t = by_id.find(e.target);
    if (s == by_id.end() || t == by_id.end())
      return fmt::format("recurrent edge {} references a missing node", e.innovation);
    if (t->second->kind == NodeKind::input)
      return fmt::format("recurrent edge {} targets an input node", e.innovation);
    if (e.time_skip < 1 || e.time_skip > kMaxTimeSkip)
      return fmt::format("recurrent edge {} has time skip {}", e.innovation, e.time_skip);
    if (!std::isfinite(e.weight)) return fmt::format("recurrent edge {} has a non-finite weight", e.innovation);
  }

  const auto active = compute_active(g);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].kind == NodeKind::output && !active.node[i])
      return std::string("output is not reachable from any input");
  }
  return std::nullopt;
}

void validate(const Genome& genome) {
  if (auto problem = check_invariants(genome)) throw GenomeError(*problem);
}

}  // namespace evotrade
