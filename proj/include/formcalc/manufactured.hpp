#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "formcalc/form_field.hpp"
#include "formcalc/halfspace.hpp"
#include "formcalc/media.hpp"

namespace formcalc {

/// coefficient * prod_j (x_j - c_j)^{k_j} * exp(-|x - c|^2 / width^2).
/// Closed under differentiation, so derivatives of every order are exact.
struct GaussMonomial {
  double coefficient = 1.0;
  double width = 1.0;
  NodeCoords center{};
  std::array<int, kMaxDim> powers{};

  double value(const NodeCoords& x, int dim) const;
  std::vector<GaussMonomial> derivative(int axis, int dim) const;
};

/// amplitude * prod_j cos(k_j pi x_j / L + phase_j).
struct TrigProduct {
  double amplitude = 1.0;
  double half_length = 1.0;
  std::array<int, kMaxDim> wavenumbers{};
  std::array<double, kMaxDim> phases{};

  double value(const NodeCoords& x, int dim) const;
  TrigProduct derivative(int axis) const;
};

/// (offset + slope * (x_axis - c_axis)) * exp(-1 / (1 - |x - c|^2 / R^2)) inside the ball,
/// zero outside; smooth with every derivative vanishing on the sphere.
struct CompactBump {
  double offset = 1.0;
  double slope = 0.0;
  int axis = 0;
  double radius = 1.0;
  NodeCoords center{};

  double value(const NodeCoords& x, int dim) const;
  double derivative_value(const NodeCoords& x, int dim, int along) const;
};

using ScalarTerm = std::variant<GaussMonomial, TrigProduct, CompactBump>;

/// Closed-form q-form: each component is a sum of scalar terms.
class FormExpression {
 public:
  FormExpression() = default;
  FormExpression(int dim, int rank);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::vector<ScalarTerm>& terms(std::size_t component) { return terms_[component]; }
  const std::vector<ScalarTerm>& terms(std::size_t component) const { return terms_[component]; }
  std::size_t component_count() const { return terms_.size(); }

  FormField sample(const GridSpec& grid) const;
  /// Analytic d_axis E.
  FormField sample_partial(const GridSpec& grid, int axis) const;
  /// Analytic dE and delta E assembled from the analytic partials.
  FormField sample_d(const GridSpec& grid) const;
  FormField sample_delta(const GridSpec& grid) const;
  /// Analytic delta(eps E) using the closed-form derivatives of eps.
  FormField sample_delta_eps(const GridSpec& grid, const Transformation& eps) const;

  /// Mirror image under x_N -> -x_N with the parity of the chosen mirror.
  FormExpression reflected(MirrorKind kind) const;
  /// (E + P E) / 2.
  FormExpression symmetrized(MirrorKind kind) const;
  FormExpression scaled(double factor) const;

 private:
  int dim_ = 1;
  int rank_ = 0;
  std::vector<std::vector<ScalarTerm>> terms_;
};

/// d(E) and delta(E) from sampled first partials (shared by analytic and spectral paths).
FormField assemble_d(const std::vector<FormField>& partials);
FormField assemble_delta(const std::vector<FormField>& partials);

/// Real band-limited periodic form f = sum_{|k_j| <= band} c_k exp(i xi_k x) with
/// seeded coefficients. The coefficients do not depend on n, so refining the
/// grid samples the same continuum field. band = 0 selects n/4.
FormField band_limited_random(const GridSpec& grid, int rank, std::uint64_t seed, int band = 0);

/// Values k / 1024 with |k| <= 1024: sums and products of such values stay
/// exact in double precision, so algebraic identities can be checked for zero.
FormField dyadic_random(const GridSpec& grid, int rank, std::uint64_t seed, bool complex_values = false);

/// Random Gaussian-monomial form of width sigma centred within spread of c;
/// the seed fixes centres, powers and coefficients.
FormExpression gaussian_expression(int dim, int rank, std::uint64_t seed, double sigma, const NodeCoords& center = {},
                                   double spread = 0.0);

/// Deterministic catalog of periodic trigonometric forms, entry index in [0, trig_catalog_size).
inline constexpr int trig_catalog_size = 6;
FormExpression trig_catalog(int dim, int rank, int entry, double half_length);

enum class ManufacturedKind { bump, band_limited_random, trig_catalog };

struct Manufactured {
  FormField field;
  std::optional<FormExpression> expression;  ///< present for bump and trig kinds
};

/// Generator front end. Bumps live in the given ball (radius <= L/2 enforced);
/// band-limited and trig kinds are periodic and need Region::full.
Manufactured generate_manufactured(ManufacturedKind kind, const GridSpec& grid, int rank, const Region& support,
                                   std::uint64_t seed);

}  // namespace formcalc
