#pragma once

#include <span>

#include "formcalc/form_field.hpp"

namespace formcalc {

// Spectral calculus on the periodic box. The transform is the componentwise
// unitary DFT; derivatives are Fourier multipliers with the Nyquist bin's
// first-derivative coefficient set to zero, so d, delta and the Laplacian
// share one frequency table and their identities hold to round-off.

/// Throws std::invalid_argument for a non-periodic grid.
SpectralField fourier(const FormField& e);
FormField fourier_inverse(const SpectralField& e);

/// dE = F^{-1}( i R_xi F E ); requires q < N.
FormField exterior_d(const FormField& e);
/// deltaE = F^{-1}( i T_xi F E ); requires q > 0.
FormField coderivative_delta(const FormField& e);

/// d delta + delta d, with d on rank N and delta on rank 0 taken as zero.
FormField laplacian(const FormField& e);
/// F^{-1}( -|xi|^2 F E ), the symbol route to the same operator.
FormField laplacian_symbol(const FormField& e);

/// Spectral partial derivative along one axis.
FormField partial(const FormField& e, int axis);
/// Mixed partial d^alpha, alpha given as derivative counts per axis.
FormField partial(const FormField& e, std::span<const int> alpha);

/// || (1 + |xi|^2)^{s/2} F E ||.
double spectral_sobolev_norm(const FormField& e, double s);

struct GaffneyReport {
  double gradient_sq = 0.0;  ///< sum_n ||d_n Phi||^2
  double maxwell_sq = 0.0;   ///< ||d Phi||^2 + ||delta Phi||^2
  double relative_gap = 0.0; ///< |lhs - rhs| / max(lhs, rhs), 0 when both vanish
};

GaffneyReport gaffney_identity_check(const FormField& phi);

namespace detail {
/// Multiply each spectral component by i * xi_axis.
SpectralField spectral_partial(const SpectralField& e, int axis);
}  // namespace detail

}  // namespace formcalc
