#pragma once

#include <span>
#include <vector>

#include "evotrade/genome.hpp"
#include "evotrade/market_data.hpp"

namespace evotrade {

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.001;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double clip_low = 0.05;   // smaller nonzero norms are boosted up to this
  double clip_high = 1.0;   // larger norms are scaled down to this

  void check() const;
};

/// Rescales the whole gradient so its L2 norm lands in [clip_low, clip_high].
/// In-band and zero gradients are left untouched.
void gradient_rescale(std::span<double> gradient, double clip_low, double clip_high);

class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon);
  void step(std::span<double> params, std::span<const double> gradient);

 private:
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  double beta1_power_ = 1.0;
  double beta2_power_ = 1.0;
  std::vector<double> m_;
  std::vector<double> v_;
};

struct TrainResult {
  Genome genome;
  std::vector<double> loss_trace;  // training MSE before each epoch's update
};

/// Full-sequence BPTT: one forward/backward over the whole series, one Adam step per epoch.
TrainResult bptt_train(Genome genome, const SeriesSplit& train, const TrainConfig& config);

}  // namespace evotrade
