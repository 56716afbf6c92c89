#pragma once

#include <random>

#include "evotrade/genome.hpp"

namespace evotrade {

/// Fully connected stack of memory-cell layers with a self-recurrent edge (skip 1) on every
/// hidden cell. Layer k sits at depth k / (layers + 1). Weights use Xavier-uniform limits,
/// biases start at zero. Only LSTM, GRU and MGU cells are accepted.
Genome build_layered(CellKind cell, std::mt19937_64& rng, int inputs = kGenomeInputs,
                     int layer_width = kGenomeInputs, int layers = 2);

}  // namespace evotrade
