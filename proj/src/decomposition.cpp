#include "formcalc/decomposition.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "formcalc/spectral.hpp"

namespace formcalc {

namespace {

constexpr Complex kI{0.0, 1.0};

/// |xi|^2 at every frequency node.
std::vector<double> symbol_radius_squared(const GridSpec& grid) {
  const std::vector<double> xi = axis_wavenumbers(grid);
  const auto n = static_cast<std::size_t>(grid.points);
  std::vector<double> r2(grid.node_count(), 0.0);
  for (int axis = 0; axis < grid.dim; ++axis) {
    const std::size_t stride = grid.stride(axis);
    for (std::size_t node = 0; node < r2.size(); ++node) {
      const double v = xi[(node / stride) % n];
      r2[node] += v * v;
    }
  }
  return r2;
}

/// Divides by |xi|^2 where it is nonzero and clears the harmonic modes.
void divide_radius_squared(SpectralField& s, const std::vector<double>& r2) {
  for (std::size_t c = 0; c < s.component_count(); ++c) {
    auto comp = s.component(c);
    for (std::size_t node = 0; node < comp.size(); ++node) comp[node] = r2[node] > 0.0 ? comp[node] / r2[node] : 0.0;
  }
}

SpectralField exact_symbol(const SpectralField& hat, const std::vector<double>& r2) {
  if (hat.rank() == 0) return SpectralField(hat.grid(), 0);
  SpectralField s = apply_R(apply_T(hat, Coordinates::frequency), Coordinates::frequency);
  divide_radius_squared(s, r2);
  return s;
}

SpectralField coexact_symbol(const SpectralField& hat, const std::vector<double>& r2) {
  if (hat.rank() == hat.dim()) return SpectralField(hat.grid(), hat.rank());
  SpectralField s = apply_T(apply_R(hat, Coordinates::frequency), Coordinates::frequency);
  divide_radius_squared(s, r2);
  return s;
}

double relative_defect(const FormField& a, const FormField& b) {
  const double scale = l2_norm(b);
  const double defect = l2_norm(a - b);
  return scale > 0.0 ? defect / scale : defect;
}

}  // namespace

FormField project_exact(const FormField& e) {
  return fourier_inverse(exact_symbol(fourier(e), symbol_radius_squared(e.grid())));
}

FormField project_coexact(const FormField& e) {
  return fourier_inverse(coexact_symbol(fourier(e), symbol_radius_squared(e.grid())));
}

FormField harmonic_part(const FormField& e) {
  SpectralField hat = fourier(e);
  const std::vector<double> r2 = symbol_radius_squared(e.grid());
  for (std::size_t c = 0; c < hat.component_count(); ++c) {
    auto comp = hat.component(c);
    for (std::size_t node = 0; node < comp.size(); ++node) {
      if (r2[node] > 0.0) comp[node] = 0.0;
    }
  }
  return fourier_inverse(hat);
}

HodgeSplit hodge_decompose(const FormField& e) {
  const SpectralField hat = fourier(e);
  const std::vector<double> r2 = symbol_radius_squared(e.grid());
  HodgeSplit split;
  split.exact_part = fourier_inverse(exact_symbol(hat, r2));
  split.coexact_part = fourier_inverse(coexact_symbol(hat, r2));
  split.mean_part = harmonic_part(e);
  return split;
}

FormField potential_for_exact(const FormField& e, double tolerance) {
  if (e.rank() == 0) throw std::invalid_argument("potential_for_exact: rank-0 forms have no potential");
  SpectralField s = apply_T(fourier(e), Coordinates::frequency);
  divide_radius_squared(s, symbol_radius_squared(e.grid()));
  s *= -kI;
  FormField phi = fourier_inverse(s);
  const double defect = relative_defect(exterior_d(phi), e);
  if (defect > tolerance) {
    throw ResidualError("potential_for_exact: input is not closed with zero mean (defect " + std::to_string(defect) + ")",
                        defect);
  }
  return phi;
}

CoderivativeSolution solve_coderivative(const FormField& e, double tolerance) {
  if (e.rank() >= e.dim()) throw std::invalid_argument("solve_coderivative: need q < N");
  const SpectralField hat = fourier(e);
  SpectralField s = apply_R(hat, Coordinates::frequency);
  divide_radius_squared(s, symbol_radius_squared(e.grid()));
  s *= -kI;
  CoderivativeSolution out;
  out.h = fourier_inverse(s);
  out.outside_hypothesis = e.dim() == 2;
  out.residual = relative_defect(coderivative_delta(out.h), e);
  if (out.residual > tolerance) {
    throw ResidualError("solve_coderivative: input is not co-closed with zero mean (defect " +
                            std::to_string(out.residual) + ")",
                        out.residual);
  }
  const double norm_e = l2_norm(e);
  if (norm_e > 0.0) {
    out.h1_ratio = spectral_sobolev_norm(out.h, 1.0) / norm_e;
    out.l2_ratio = l2_norm(out.h) / norm_e;
    const double grad = std::sqrt(std::max(0.0, std::pow(spectral_sobolev_norm(out.h, 1.0), 2) - std::pow(l2_norm(out.h), 2)));
    out.frequency_ratio = grad / norm_e;
  }
  return out;
}

WeightedHodgeSplit weighted_hodge_decompose(const FormField& e, const Transformation& eps, double tolerance,
                                            double damping, int max_iterations) {
  if (eps.dim() != e.dim() || eps.rank() != e.rank()) throw std::invalid_argument("weighted_hodge_decompose: mismatch");
  if (!(damping > 0.0 && damping < 2.0)) throw std::invalid_argument("weighted_hodge_decompose: damping must lie in (0, 2)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(eps.size());
  for (std::size_t node = 0; node < e.node_count(); ++node) {
    solver.compute(eps.matrix_at(e.grid(), node), Eigen::EigenvaluesOnly);
    lo = std::min(lo, solver.eigenvalues().minCoeff());
    hi = std::max(hi, solver.eigenvalues().maxCoeff());
  }
  if (!(lo > 0.0)) throw std::invalid_argument("weighted_hodge_decompose: transformation is not positive definite");

  WeightedHodgeSplit out;
  out.relaxation = damping * 2.0 / (lo + hi);
  const double scale = l2_norm(apply(eps, e));
  FormField x = project_exact(e);
  for (int it = 0; it <= max_iterations; ++it) {
    const FormField correction = project_exact(apply(eps, e - x));
    out.residual = scale > 0.0 ? l2_norm(correction) / scale : 0.0;
    out.iterations = it;
    if (out.residual <= tolerance) {
      out.converged = true;
      break;
    }
    if (it == max_iterations || !std::isfinite(out.residual)) break;
    FormField step = correction;
    step *= out.relaxation;
    x += step;
  }
  out.remainder = e - x;
  out.exact_part = std::move(x);
  return out;
}

}  // namespace formcalc
