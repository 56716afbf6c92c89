#include "evotrade/training.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "evotrade/network.hpp"

namespace evotrade {

void TrainConfig::check() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(clip_low > 0.0 && clip_low < clip_high))
    throw std::invalid_argument("gradient thresholds must satisfy 0 < clip_low < clip_high");
}

void gradient_rescale(std::span<double> gradient, double clip_low, double clip_high) {
  double sq = 0.0;
  for (double g : gradient) sq += g * g;
  const double norm = std::sqrt(sq);
  double factor = 1.0;
  if (norm > clip_high) {
    factor = clip_high / norm;
  } else if (norm > 0.0 && norm < clip_low) {
    factor = clip_low / norm;
  } else {
    return;
  }
  for (double& g : gradient) g *= factor;
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> gradient) {
  beta1_power_ *= beta1_;
  beta2_power_ *= beta2_;
  const double m_correction = 1.0 - beta1_power_;
  const double v_correction = 1.0 - beta2_power_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    params[i] -= learning_rate_ * (m_[i] / m_correction) / (std::sqrt(v_[i] / v_correction) + epsilon_);
  }
}

TrainResult bptt_train(Genome genome, const SeriesSplit& train, const TrainConfig& config) {
  config.check();
  if (train.size() < 2) throw std::invalid_argument("training needs at least 2 rows with targets");
  CompiledNetwork net(genome);
  TrainResult result;
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs));
  Adam adam(net.parameters().size(), config.learning_rate, config.adam_beta1, config.adam_beta2,
            config.adam_epsilon);
  std::vector<double> gradient;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = net.loss_and_gradient(train.inputs, train.targets, gradient);
    if (std::isnan(loss)) throw NumericError(fmt::format("NaN loss at epoch {}", epoch));
    result.loss_trace.push_back(loss);
    gradient_rescale(gradient, config.clip_low, config.clip_high);
    adam.step(net.parameters(), gradient);
  }
  net.write_parameters(genome);
  result.genome = std::move(genome);
  return result;
}

}  // namespace evotrade
