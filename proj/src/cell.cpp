#include "evotrade/cell.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evotrade {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// Gate k reads params[3k .. 3k+2] as (input weight, state weight, bias).
double gate_pre(std::span<const double> p, int k, double x, double h) {
  return p[3 * k] * x + p[3 * k + 1] * h + p[3 * k + 2];
}

void gate_accumulate(std::span<double> dp, int k, double da, double x, double h) {
  dp[3 * k] += da * x;
  dp[3 * k + 1] += da * h;
  dp[3 * k + 2] += da;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::input: return "input";
    case NodeKind::output: return "output";
    case NodeKind::hidden: return "hidden";
  }
  return "?";
}

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::simple: return "simple";
    case CellKind::lstm: return "lstm";
    case CellKind::gru: return "gru";
    case CellKind::mgu: return "mgu";
  }
  return "?";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "input") return NodeKind::input;
  if (text == "output") return NodeKind::output;
  if (text == "hidden") return NodeKind::hidden;
  throw std::invalid_argument("unknown node kind '" + std::string(text) + "'");
}

CellKind parse_cell_kind(std::string_view text) {
  if (text == "simple") return CellKind::simple;
  if (text == "lstm" || text == "LSTM") return CellKind::lstm;
  if (text == "gru" || text == "GRU") return CellKind::gru;
  if (text == "mgu" || text == "MGU") return CellKind::mgu;
  throw std::invalid_argument("unknown cell kind '" + std::string(text) + "'");
}

std::size_t cell_parameter_count(NodeKind node, CellKind cell) {
  if (node == NodeKind::input) return 0;
  if (node == NodeKind::output) return 1;
  switch (cell) {
    case CellKind::simple: return 1;
    case CellKind::lstm: return 12;
    case CellKind::gru: return 9;
    case CellKind::mgu: return 6;
  }
  return 0;
}

void cell_forward(NodeKind node, CellKind cell, std::span<const double> p, double x,
                  double h_prev, double c_prev, CellTrace& out) {
  out.input = x;
  out.c = 0.0;
  if (node == NodeKind::input) {
    out.h = x;
    return;
  }
  if (node == NodeKind::output) {
    out.h = x + p[0];
    return;
  }
  switch (cell) {
    case CellKind::simple:
      out.h = std::tanh(x + p[0]);
      break;
    case CellKind::lstm: {
      // gates: input, forget, output, candidate
      const double i = sigmoid(gate_pre(p, 0, x, h_prev));
      const double f = sigmoid(gate_pre(p, 1, x, h_prev));
      const double o = sigmoid(gate_pre(p, 2, x, h_prev));
      const double g = std::tanh(gate_pre(p, 3, x, h_prev));
      out.c = f * c_prev + i * g;
      out.h = o * std::tanh(out.c);
      out.gate = {i, f, o, g};
      break;
    }
    case CellKind::gru: {
      const double z = sigmoid(gate_pre(p, 0, x, h_prev));
      const double r = sigmoid(gate_pre(p, 1, x, h_prev));
      const double hh = std::tanh(gate_pre(p, 2, x, r * h_prev));
      out.h = (1.0 - z) * h_prev + z * hh;
      out.gate = {z, r, hh, 0.0};
      break;
    }
    case CellKind::mgu: {
      const double f = sigmoid(gate_pre(p, 0, x, h_prev));
      const double hh = std::tanh(gate_pre(p, 1, x, f * h_prev));
      out.h = (1.0 - f) * h_prev + f * hh;
      out.gate = {f, hh, 0.0, 0.0};
      break;
    }
  }
}

CellGradient cell_backward(NodeKind node, CellKind cell, std::span<const double> p,
                           double h_prev, double c_prev, const CellTrace& s, double dh, double dc,
                           std::span<double> dp) {
  CellGradient g;
  if (node == NodeKind::input) return g;
  if (node == NodeKind::output) {
    dp[0] += dh;
    g.input = dh;
    return g;
  }
  const double x = s.input;
  switch (cell) {
    case CellKind::simple: {
      const double da = dh * (1.0 - s.h * s.h);
      dp[0] += da;
      g.input = da;
      break;
    }
    case CellKind::lstm: {
      const auto [i, f, o, cand] = s.gate;
      const double tc = std::tanh(s.c);
      const double dc_total = dc + dh * o * (1.0 - tc * tc);
      const double da[4] = {dc_total * cand * i * (1.0 - i), dc_total * c_prev * f * (1.0 - f),
                            dh * tc * o * (1.0 - o), dc_total * i * (1.0 - cand * cand)};
      for (int k = 0; k < 4; ++k) {
        gate_accumulate(dp, k, da[k], x, h_prev);
        g.input += da[k] * p[3 * k];
        g.h_prev += da[k] * p[3 * k + 1];
      }
      g.c_prev = dc_total * f;
      break;
    }
    case CellKind::gru: {
      const auto [z, r, hh, unused] = s.gate;
      (void)unused;
      const double dz = dh * (hh - h_prev);
      const double dhh = dh * z;
      g.h_prev = dh * (1.0 - z);
      const double dah = dhh * (1.0 - hh * hh);
      gate_accumulate(dp, 2, dah, x, r * h_prev);
      g.input += dah * p[6];
      const double drh = dah * p[7];
      g.h_prev += drh * r;
      const double daz = dz * z * (1.0 - z);
      const double dar = drh * h_prev * r * (1.0 - r);
      gate_accumulate(dp, 0, daz, x, h_prev);
      gate_accumulate(dp, 1, dar, x, h_prev);
      g.input += daz * p[0] + dar * p[3];
      g.h_prev += daz * p[1] + dar * p[4];
      break;
    }
    case CellKind::mgu: {
      const double f = s.gate[0];
      const double hh = s.gate[1];
      double df = dh * (hh - h_prev);
      const double dhh = dh * f;
      g.h_prev = dh * (1.0 - f);
      const double dah = dhh * (1.0 - hh * hh);
      gate_accumulate(dp, 1, dah, x, f * h_prev);
      g.input += dah * p[3];
      const double dfh = dah * p[4];
      df += dfh * h_prev;
      g.h_prev += dfh * f;
      const double daf = df * f * (1.0 - f);
      gate_accumulate(dp, 0, daf, x, h_prev);
      g.input += daf * p[0];
      g.h_prev += daf * p[1];
      break;
    }
  }
  return g;
}

}  // namespace evotrade
