#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "formcalc/multi_index.hpp"

namespace formcalc {

using NodeCoords = std::array<double, kMaxDim>;

/// Uniform box [-L, L)^N sampled with n points per axis.
///
/// Nodes are stored row-major: axis 0 varies slowest, axis N-1 fastest. The
/// coordinate of index k along any axis is -L + k h with h = 2L/n.
struct GridSpec {
  int dim = 1;
  double half_length = 1.0;
  int points = 16;
  bool periodic = true;

  /// Throws std::invalid_argument on N < 1, N > kMaxDim, L <= 0 or odd/non-positive n.
  void validate() const;

  double spacing() const { return 2.0 * half_length / points; }
  double cell_volume() const;
  std::size_t node_count() const;
  std::size_t stride(int axis) const;

  double coordinate(int k) const { return -half_length + k * spacing(); }
  /// Angular frequency of FFT bin k, (pi/L) * k~ with k~ in {-n/2, ..., n/2-1}.
  /// The Nyquist bin returns 0 (odd-derivative convention).
  double wavenumber(int k) const;

  int axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / stride(axis)) % static_cast<std::size_t>(points));
  }
  NodeCoords position(std::size_t node) const;
  double radius(std::size_t node) const;

  /// Same box one dimension lower (the boundary plane x_N = 0).
  GridSpec boundary() const;
  /// Same box with twice as many points per axis.
  GridSpec refined() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Per-axis table of coordinate values, indexed by grid index.
std::vector<double> axis_positions(const GridSpec& grid);
std::vector<double> axis_wavenumbers(const GridSpec& grid);

enum class RegionKind { full, ball, lower_half, annulus };

/// Sub-region masks over a grid: ball {|x| < r}, half-space {x_N < 0},
/// annulus {t < |x| < T}.
struct Region {
  RegionKind kind = RegionKind::full;
  double inner = 0.0;
  double outer = 0.0;

  static Region full() { return {}; }
  static Region ball(double radius) { return {RegionKind::ball, 0.0, radius}; }
  static Region lower_half() { return {RegionKind::lower_half, 0.0, 0.0}; }
  static Region annulus(double t, double T) { return {RegionKind::annulus, t, T}; }

  bool contains(const NodeCoords& x, int dim) const;
  std::vector<char> mask(const GridSpec& grid) const;
  /// Largest radius a point of the region may have; infinite for unbounded kinds.
  double bounding_radius() const;
};

}  // namespace formcalc
