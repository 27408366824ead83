#include "formcalc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fft.hpp"

namespace formcalc {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_periodic(const GridSpec& grid) {
  if (!grid.periodic) throw std::invalid_argument("spectral: grid must be periodic");
}

}  // namespace

SpectralField fourier(const FormField& e) {
  require_periodic(e.grid());
  SpectralField out(e.grid(), e.rank());
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    detail::fft_component(e.grid(), e.component(c), out.component(c), true);
  }
  return out;
}

FormField fourier_inverse(const SpectralField& e) {
  require_periodic(e.grid());
  FormField out(e.grid(), e.rank());
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    detail::fft_component(e.grid(), e.component(c), out.component(c), false);
  }
  return out;
}

FormField exterior_d(const FormField& e) {
  if (e.rank() >= e.dim()) throw std::invalid_argument("exterior_d: rank overflow (q must be < N)");
  SpectralField s = apply_R(fourier(e), Coordinates::frequency);
  s *= kI;
  return fourier_inverse(s);
}

FormField coderivative_delta(const FormField& e) {
  if (e.rank() == 0) throw std::invalid_argument("coderivative_delta: rank underflow (q must be > 0)");
  SpectralField s = apply_T(fourier(e), Coordinates::frequency);
  s *= kI;
  return fourier_inverse(s);
}

FormField laplacian(const FormField& e) {
  FormField out(e.grid(), e.rank());
  if (e.rank() > 0) out += exterior_d(coderivative_delta(e));
  if (e.rank() < e.dim()) out += coderivative_delta(exterior_d(e));
  return out;
}

FormField laplacian_symbol(const FormField& e) {
  SpectralField s = multiply_radius_squared(fourier(e), Coordinates::frequency);
  s *= -1.0;
  return fourier_inverse(s);
}

namespace detail {

SpectralField spectral_partial(const SpectralField& e, int axis) {
  const GridSpec& grid = e.grid();
  if (axis < 0 || axis >= grid.dim) throw std::invalid_argument("partial: axis out of range");
  const std::vector<double> xi = axis_wavenumbers(grid);
  const std::size_t stride = grid.stride(axis);
  const auto points = static_cast<std::size_t>(grid.points);
  SpectralField out = e;
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    auto dst = out.component(c);
    for (std::size_t node = 0; node < dst.size(); ++node) dst[node] *= kI * xi[(node / stride) % points];
  }
  return out;
}

}  // namespace detail

FormField partial(const FormField& e, int axis) { return fourier_inverse(detail::spectral_partial(fourier(e), axis)); }

FormField partial(const FormField& e, std::span<const int> alpha) {
  if (static_cast<int>(alpha.size()) != e.dim()) throw std::invalid_argument("partial: alpha must have N entries");
  SpectralField s = fourier(e);
  for (int axis = 0; axis < e.dim(); ++axis) {
    if (alpha[axis] < 0) throw std::invalid_argument("partial: negative derivative order");
    for (int k = 0; k < alpha[axis]; ++k) s = detail::spectral_partial(s, axis);
  }
  return fourier_inverse(s);
}

double spectral_sobolev_norm(const FormField& e, double s) {
  const SpectralField hat = fourier(e);
  const GridSpec& grid = e.grid();
  const std::vector<double> xi = axis_wavenumbers(grid);
  const auto points = static_cast<std::size_t>(grid.points);
  const std::size_t nodes = hat.node_count();
  std::vector<double> weight(nodes, 0.0);
  for (int axis = 0; axis < grid.dim; ++axis) {
    const std::size_t stride = grid.stride(axis);
    for (std::size_t node = 0; node < nodes; ++node) {
      const double v = xi[(node / stride) % points];
      weight[node] += v * v;
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < hat.component_count(); ++c) {
    auto comp = hat.component(c);
    for (std::size_t node = 0; node < nodes; ++node) sum += std::pow(1.0 + weight[node], s) * std::norm(comp[node]);
  }
  return std::sqrt(sum * grid.cell_volume());
}

GaffneyReport gaffney_identity_check(const FormField& phi) {
  GaffneyReport report;
  for (int axis = 0; axis < phi.dim(); ++axis) {
    const double v = l2_norm(partial(phi, axis));
    report.gradient_sq += v * v;
  }
  if (phi.rank() < phi.dim()) {
    const double v = l2_norm(exterior_d(phi));
    report.maxwell_sq += v * v;
  }
  if (phi.rank() > 0) {
    const double v = l2_norm(coderivative_delta(phi));
    report.maxwell_sq += v * v;
  }
  const double scale = std::max(report.gradient_sq, report.maxwell_sq);
  report.relative_gap = scale > 0.0 ? std::abs(report.gradient_sq - report.maxwell_sq) / scale : 0.0;
  return report;
}

}  // namespace formcalc
