#include "formcalc/grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace formcalc {

void GridSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("GridSpec: dimension out of range");
  if (!(half_length > 0.0)) throw std::invalid_argument("GridSpec: half-length must be positive");
  if (points < 2 || points % 2 != 0) throw std::invalid_argument("GridSpec: points per axis must be even and >= 2");
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::node_count() const {
  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(points);
  return total;
}

std::size_t GridSpec::stride(int axis) const {
  std::size_t s = 1;
  for (int a = axis + 1; a < dim; ++a) s *= static_cast<std::size_t>(points);
  return s;
}

double GridSpec::wavenumber(int k) const {
  if (k == points / 2) return 0.0;
  const int signed_k = k < points / 2 ? k : k - points;
  return std::numbers::pi / half_length * signed_k;
}

NodeCoords GridSpec::position(std::size_t node) const {
  NodeCoords x{};
  for (int a = dim - 1; a >= 0; --a) {
    x[a] = coordinate(static_cast<int>(node % static_cast<std::size_t>(points)));
    node /= static_cast<std::size_t>(points);
  }
  return x;
}

double GridSpec::radius(std::size_t node) const {
  const NodeCoords x = position(node);
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
  return std::sqrt(r2);
}

GridSpec GridSpec::boundary() const {
  if (dim < 2) throw std::invalid_argument("GridSpec::boundary: need dim >= 2");
  GridSpec b = *this;
  b.dim = dim - 1;
  return b;
}

GridSpec GridSpec::refined() const {
  GridSpec r = *this;
  r.points = 2 * points;
  return r;
}

std::vector<double> axis_positions(const GridSpec& grid) {
  std::vector<double> v(grid.points);
  for (int k = 0; k < grid.points; ++k) v[k] = grid.coordinate(k);
  return v;
}

std::vector<double> axis_wavenumbers(const GridSpec& grid) {
  std::vector<double> v(grid.points);
  for (int k = 0; k < grid.points; ++k) v[k] = grid.wavenumber(k);
  return v;
}

bool Region::contains(const NodeCoords& x, int dim) const {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
  const double r = std::sqrt(r2);
  switch (kind) {
    case RegionKind::full: return true;
    case RegionKind::ball: return r < outer;
    case RegionKind::lower_half: return x[dim - 1] < 0.0;
    case RegionKind::annulus: return inner < r && r < outer;
  }
  return false;
}

std::vector<char> Region::mask(const GridSpec& grid) const {
  std::vector<char> m(grid.node_count());
  for (std::size_t node = 0; node < m.size(); ++node) {
    m[node] = contains(grid.position(node), grid.dim) ? 1 : 0;
  }
  return m;
}

double Region::bounding_radius() const {
  switch (kind) {
    case RegionKind::ball:
    case RegionKind::annulus: return outer;
    default: return std::numeric_limits<double>::infinity();
  }
}

}  // namespace formcalc
