#include "evotrade/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

namespace evotrade {

CompiledNetwork::CompiledNetwork(const Genome& genome) {
  validate(genome);
  params_ = genome.parameters();
  const auto active = compute_active(genome);

  // Node parameter offsets follow the flat layout: edges, recurrent edges, node params.
  std::vector<std::size_t> node_offset(genome.nodes.size());
  std::size_t offset = genome.edges.size() + genome.recurrent_edges.size();
  for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
    node_offset[i] = offset;
    offset += genome.nodes[i].params.size();
  }

  // Features bind to input nodes in ascending id order.
  std::vector<GeneId> input_ids;
  for (const auto& n : genome.nodes)
    if (n.kind == NodeKind::input) input_ids.push_back(n.id);
  std::sort(input_ids.begin(), input_ids.end());

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < genome.nodes.size(); ++i)
    if (active.node[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& na = genome.nodes[a];
    const auto& nb = genome.nodes[b];
    return na.depth != nb.depth ? na.depth < nb.depth : na.id < nb.id;
  });

  std::unordered_map<GeneId, std::size_t> unit_of;
  for (std::size_t u = 0; u < order.size(); ++u) {
    const auto& node = genome.nodes[order[u]];
    unit_of.emplace(node.id, u);
    int feature = -1;
    if (node.kind == NodeKind::input) {
      feature = static_cast<int>(std::find(input_ids.begin(), input_ids.end(), node.id) - input_ids.begin());
    }
    units_.push_back({node.id, node.kind, node.cell, node_offset[order[u]], node.params.size(), feature, {}});
    if (node.kind == NodeKind::output) output_unit_ = u;
  }
  for (std::size_t e = 0; e < genome.edges.size(); ++e) {
    if (!active.edge[e]) continue;
    const auto& edge = genome.edges[e];
    units_[unit_of.at(edge.target)].incoming.push_back({unit_of.at(edge.source), e, 0});
  }
  for (std::size_t e = 0; e < genome.recurrent_edges.size(); ++e) {
    if (!active.recurrent_edge[e]) continue;
    const auto& edge = genome.recurrent_edges[e];
    units_[unit_of.at(edge.target)].incoming.push_back(
        {unit_of.at(edge.source), genome.edges.size() + e, edge.time_skip});
  }
}

void CompiledNetwork::run(std::span<const FeatureVector> inputs, std::vector<CellTrace>& traces) const {
  const std::size_t n = units_.size();
  const std::size_t steps = inputs.size();
  traces.assign(steps * n, CellTrace{});
  for (std::size_t t = 0; t < steps; ++t) {
    CellTrace* row = traces.data() + t * n;
    for (std::size_t u = 0; u < n; ++u) {
      const auto& unit = units_[u];
      double sum = 0.0;
      if (unit.kind == NodeKind::input) {
        sum = inputs[t][static_cast<std::size_t>(unit.feature)];
      } else {
        for (const auto& in : unit.incoming) {
          if (in.skip == 0) {
            sum += params_[in.param] * row[in.source].h;
          } else if (t >= static_cast<std::size_t>(in.skip)) {
            sum += params_[in.param] * traces[(t - in.skip) * n + in.source].h;
          }
        }
      }
      const double h_prev = t > 0 ? traces[(t - 1) * n + u].h : 0.0;
      const double c_prev = t > 0 ? traces[(t - 1) * n + u].c : 0.0;
      cell_forward(unit.kind, unit.cell, std::span(params_).subspan(unit.param_offset, unit.param_count),
                   sum, h_prev, c_prev, row[u]);
      if (!std::isfinite(row[u].h) || !std::isfinite(row[u].c)) {
        throw NumericError(fmt::format("non-finite value at node {}, timestep {}", unit.id, t));
      }
    }
  }
}

std::vector<double> CompiledNetwork::forward(std::span<const FeatureVector> inputs) const {
  std::vector<CellTrace> traces;
  run(inputs, traces);
  std::vector<double> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) out[t] = traces[t * units_.size() + output_unit_].h;
  return out;
}

double CompiledNetwork::loss(std::span<const FeatureVector> inputs, std::span<const double> targets) const {
  if (inputs.size() != targets.size()) throw std::invalid_argument("inputs and targets differ in length");
  if (targets.empty()) throw std::invalid_argument("cannot compute loss on an empty series");
  const auto predictions = forward(inputs);
  double sum = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double err = predictions[t] - targets[t];
    sum += err * err;
  }
  return sum / static_cast<double>(targets.size());
}

double CompiledNetwork::loss_and_gradient(std::span<const FeatureVector> inputs,
                                          std::span<const double> targets,
                                          std::vector<double>& gradient) const {
  if (inputs.size() != targets.size()) throw std::invalid_argument("inputs and targets differ in length");
  if (targets.empty()) throw std::invalid_argument("cannot compute loss on an empty series");
  const std::size_t n = units_.size();
  const std::size_t steps = inputs.size();
  const double scale = 1.0 / static_cast<double>(steps);

  std::vector<CellTrace> traces;
  run(inputs, traces);

  double loss = 0.0;
  std::vector<double> dh(steps * n, 0.0);
  std::vector<double> dc(steps * n, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double err = traces[t * n + output_unit_].h - targets[t];
    loss += err * err;
    dh[t * n + output_unit_] = 2.0 * err * scale;
  }
  loss *= scale;

  gradient.assign(params_.size(), 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    for (std::size_t u = n; u-- > 0;) {
      const auto& unit = units_[u];
      if (unit.kind == NodeKind::input) continue;
      const std::size_t here = t * n + u;
      const double h_prev = t > 0 ? traces[here - n].h : 0.0;
      const double c_prev = t > 0 ? traces[here - n].c : 0.0;
      const auto g = cell_backward(unit.kind, unit.cell,
                                   std::span(params_).subspan(unit.param_offset, unit.param_count), h_prev,
                                   c_prev, traces[here], dh[here], dc[here],
                                   std::span(gradient).subspan(unit.param_offset, unit.param_count));
      if (t > 0) {
        dh[here - n] += g.h_prev;
        dc[here - n] += g.c_prev;
      }
      for (const auto& in : unit.incoming) {
        if (static_cast<std::size_t>(in.skip) > t) continue;
        const std::size_t src = (t - in.skip) * n + in.source;
        gradient[in.param] += g.input * traces[src].h;
        dh[src] += g.input * params_[in.param];
      }
    }
  }
  if (!std::isfinite(loss)) throw NumericError("non-finite loss");
  return loss;
}

std::vector<double> forward_pass(const Genome& genome, std::span<const FeatureVector> inputs) {
  return CompiledNetwork(genome).forward(inputs);
}

double evaluate(const Genome& genome, const SeriesSplit& split) {
  if (split.size() == 0) throw std::invalid_argument("cannot evaluate on an empty split");
  return CompiledNetwork(genome).loss(split.inputs, split.targets);
}

double evaluate_validation(Genome& genome, const SeriesSplit& validation) {
  const double mse = evaluate(genome, validation);
  genome.fitness = mse;
  return mse;
}

}  // namespace evotrade
