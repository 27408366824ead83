#include "formcalc/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "formcalc/spectral.hpp"

namespace formcalc {

std::vector<std::vector<int>> derivative_multi_indices(int dim, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
  for (int order = 0; order <= max_order; ++order) {
    auto rec = [&](auto&& self, int axis, int left) -> void {
      if (axis == dim - 1) {
        alpha[axis] = left;
        out.push_back(alpha);
        return;
      }
      for (int k = left; k >= 0; --k) {
        alpha[axis] = k;
        self(self, axis + 1, left - k);
      }
    };
    rec(rec, 0, order);
  }
  return out;
}

double weighted_sobolev_norm(const FormField& e, const NormSpec& spec, int max_order) {
  if (spec.order < 0) throw std::invalid_argument("weighted_sobolev_norm: negative order");
  if (spec.order > max_order) {
    throw std::invalid_argument("weighted_sobolev_norm: order " + std::to_string(spec.order) +
                                " exceeds the supported derivative order " + std::to_string(max_order));
  }
  if (e.grid().points < 4 * spec.order) {
    throw std::invalid_argument("weighted_sobolev_norm: grid too coarse for order " + std::to_string(spec.order));
  }
  const SpectralField hat = fourier(e);
  double sum = 0.0;
  for (const auto& alpha : derivative_multi_indices(e.dim(), spec.order)) {
    const int length = std::accumulate(alpha.begin(), alpha.end(), 0);
    SpectralField s = hat;
    for (int axis = 0; axis < e.dim(); ++axis)
      for (int k = 0; k < alpha[axis]; ++k) s = detail::spectral_partial(s, axis);
    const double w = spec.weight + (spec.scale == Scale::bold ? length : 0);
    const double v = l2_norm(fourier_inverse(s), w);
    sum += v * v;
  }
  return std::sqrt(sum);
}

namespace {

double graph_norm_impl(const FormField& e, GraphKind kind, double weight, Scale scale, const Transformation* eps) {
  const double base = l2_norm(e, weight);
  const double image_weight = weight + (scale == Scale::bold ? 1.0 : 0.0);
  double image = 0.0;
  if (kind == GraphKind::D) {
    if (e.rank() < e.dim()) image = l2_norm(exterior_d(e), image_weight);
  } else if (e.rank() > 0) {
    image = l2_norm(coderivative_delta(eps ? apply(*eps, e) : e), image_weight);
  }
  return std::sqrt(base * base + image * image);
}

CommutatorResidual finish(const FormField& lhs, const FormField& a, const FormField& b) {
  CommutatorResidual r;
  r.residual = l2_norm(lhs - a - b);
  r.scale = std::max({l2_norm(lhs), l2_norm(a), l2_norm(b)});
  r.relative = r.scale > 0.0 ? r.residual / r.scale : 0.0;
  return r;
}

}  // namespace

double graph_norm(const FormField& e, GraphKind kind, double weight, Scale scale) {
  return graph_norm_impl(e, kind, weight, scale, nullptr);
}

double graph_norm(const FormField& e, GraphKind kind, double weight, Scale scale, const Transformation& eps) {
  return graph_norm_impl(e, kind, weight, scale, &eps);
}

CommutatorResidual d_commutator_residual(const FormField& e, double s) {
  const std::vector<double> rho_s = rho_power(e.grid(), s);
  const std::vector<double> rho_s2 = rho_power(e.grid(), s - 2.0);
  const FormField lhs = exterior_d(scale_pointwise(e, rho_s));
  const FormField a = scale_pointwise(exterior_d(e), rho_s);
  FormField b = scale_pointwise(apply_R(e, Coordinates::position), rho_s2);
  b *= s;
  return finish(lhs, a, b);
}

CommutatorResidual delta_commutator_residual(const FormField& e, double s) {
  const std::vector<double> rho_s = rho_power(e.grid(), s);
  const std::vector<double> rho_s2 = rho_power(e.grid(), s - 2.0);
  const FormField lhs = coderivative_delta(scale_pointwise(e, rho_s));
  const FormField a = scale_pointwise(coderivative_delta(e), rho_s);
  FormField b = scale_pointwise(apply_T(e, Coordinates::position), rho_s2);
  b *= s;
  return finish(lhs, a, b);
}

AnnulusEstimate annulus_estimate(const FormField& f, double s, double tau, double theta) {
  if (tau < 0.0 || theta < 0.0) throw std::invalid_argument("annulus_estimate: tau and theta must be nonnegative");
  AnnulusEstimate out;
  // (1+r^2)^{1-tau} is monotone in r, so the sup sits at an endpoint
  out.c_theta = std::max(1.0, std::pow(1.0 + theta * theta, 1.0 - tau));
  const double lhs = l2_norm(f, s + 1.0 - tau);
  const double low = l2_norm(f, s);
  const double high = l2_norm(f, s + 1.0);
  out.lhs = lhs * lhs;
  out.rhs = out.c_theta * low * low + std::pow(1.0 + theta * theta, -tau) * high * high;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12);
  return out;
}

InclusionCheck monotone_inclusion_check(const FormField& e, int order, double s) {
  InclusionCheck c;
  c.bold = weighted_sobolev_norm(e, {order, s, Scale::bold});
  c.roman = weighted_sobolev_norm(e, {order, s, Scale::roman});
  c.bold_lower = weighted_sobolev_norm(e, {order, s - order, Scale::bold});
  const double slack = 1e-12 * c.bold;
  c.ordered = c.bold + slack >= c.roman && c.roman + slack >= c.bold_lower;
  return c;
}

}  // namespace formcalc
