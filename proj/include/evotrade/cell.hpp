#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>

namespace evotrade {

enum class NodeKind { input, output, hidden };
enum class CellKind { simple, lstm, gru, mgu };

std::string_view to_string(NodeKind kind);
std::string_view to_string(CellKind kind);
NodeKind parse_node_kind(std::string_view text);
CellKind parse_cell_kind(std::string_view text);

/// Internal weights and biases a node carries. Inputs have none; the output node has one bias.
std::size_t cell_parameter_count(NodeKind node, CellKind cell);

/// Everything the backward step of one cell at one timestep needs.
struct CellTrace {
  double input = 0.0;   // summed edge contributions
  double h = 0.0;       // node output
  double c = 0.0;       // LSTM memory
  std::array<double, 4> gate{};
};

/// Advances one node by one timestep. h_prev / c_prev are the node's own state at t - 1.
void cell_forward(NodeKind node, CellKind cell, std::span<const double> params, double input,
                  double h_prev, double c_prev, CellTrace& out);

struct CellGradient {
  double input = 0.0;
  double h_prev = 0.0;
  double c_prev = 0.0;
};

/// Reverse of cell_forward. dh / dc are the full loss derivatives w.r.t. this step's h and c.
/// Parameter derivatives are accumulated into dparams.
CellGradient cell_backward(NodeKind node, CellKind cell, std::span<const double> params,
                           double h_prev, double c_prev, const CellTrace& trace, double dh,
                           double dc, std::span<double> dparams);

}  // namespace evotrade
