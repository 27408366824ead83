#pragma once

#include <cmath>
#include <functional>
#include <numbers>

#include "formcalc/form_field.hpp"

namespace testing_util {

using formcalc::Complex;
using formcalc::FormField;
using formcalc::GridSpec;
using formcalc::NodeCoords;

inline GridSpec box(int dim, int n, double half_length = std::numbers::pi) {
  GridSpec g{dim, half_length, n, true};
  g.validate();
  return g;
}

/// Fills every component c at every node from f(c, x).
inline FormField sampled(const GridSpec& grid, int rank, const std::function<Complex(std::size_t, const NodeCoords&)>& f) {
  FormField out(grid, rank);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const NodeCoords x = grid.position(node);
    for (std::size_t c = 0; c < out.component_count(); ++c) out.at(c, node) = f(c, x);
  }
  return out;
}

inline double rel_diff(const FormField& a, const FormField& b) {
  const double scale = formcalc::l2_norm(b);
  const double diff = formcalc::l2_norm(a - b);
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace testing_util
