#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "evotrade/genome.hpp"
#include "evotrade/market_data.hpp"

namespace evotrade {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A genome flattened for evaluation: active nodes in (depth, id) order with their incoming
/// edges resolved to unit and parameter indices. Parameters use Genome::parameters() layout.
class CompiledNetwork {
 public:
  explicit CompiledNetwork(const Genome& genome);

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  void write_parameters(Genome& genome) const { genome.set_parameters(params_); }

  std::vector<double> forward(std::span<const FeatureVector> inputs) const;
  double loss(std::span<const FeatureVector> inputs, std::span<const double> targets) const;

  /// Mean squared error over every step, with its full BPTT gradient written to `gradient`.
  /// Dormant genes get exactly zero.
  double loss_and_gradient(std::span<const FeatureVector> inputs, std::span<const double> targets,
                           std::vector<double>& gradient) const;

  std::size_t unit_count() const { return units_.size(); }

 private:
  struct Incoming {
    std::size_t source;
    std::size_t param;
    int skip;  // 0 for feed-forward
  };
  struct Unit {
    GeneId id;
    NodeKind kind;
    CellKind cell;
    std::size_t param_offset;
    std::size_t param_count;
    int feature;  // inputs only
    std::vector<Incoming> incoming;
  };

  void run(std::span<const FeatureVector> inputs, std::vector<CellTrace>& traces) const;

  std::vector<Unit> units_;
  std::size_t output_unit_ = 0;
  std::vector<double> params_;
};

std::vector<double> forward_pass(const Genome& genome, std::span<const FeatureVector> inputs);

/// MSE of the genome's predictions on a split. Throws on an empty split.
double evaluate(const Genome& genome, const SeriesSplit& split);

/// evaluate() on the validation split; records the result as the genome's fitness.
double evaluate_validation(Genome& genome, const SeriesSplit& validation);

}  // namespace evotrade
