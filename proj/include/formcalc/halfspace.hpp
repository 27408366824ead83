#pragma once

#include <vector>

#include "formcalc/form_field.hpp"
#include "formcalc/media.hpp"

namespace formcalc {

// Half-space model domain {x_N < 0} inside the periodic box. The last axis
// index k_N runs over [0, n/2]; k_N = n/2 is the boundary plane x_N = 0 and
// k_N = 0 is the far face x_N = -L. Reflection x_N -> -x_N maps index k to
// (n - k) mod n, so both end planes are fixed.

/// Rank-q form living on the lower half grid including the boundary plane.
/// Stored on the full grid with every node above the plane set to zero.
class HalfGridField {
 public:
  HalfGridField() = default;
  HalfGridField(const GridSpec& grid, int rank);
  /// Copies the nodes with k_N <= n/2 and zeroes the rest.
  static HalfGridField restrict_from(const FormField& full);

  const FormField& field() const { return field_; }
  const GridSpec& grid() const { return field_.grid(); }
  int rank() const { return field_.rank(); }
  int dim() const { return field_.dim(); }

  static bool in_half(const GridSpec& grid, std::size_t node);

 private:
  FormField field_;
};

/// Per-index weights along x_N for half-grid quadrature (length n; zero above the plane).
/// Trapezoid closure: 1/2 on both end planes, 1 in between.
std::vector<double> trapezoid_weights(const GridSpec& grid);
/// Trapezoid with a Gregory-type end correction of the given order at the
/// boundary plane (the far face carries weight 1/2; fields must vanish there).
std::vector<double> end_corrected_weights(const GridSpec& grid, int order = 8);

/// sum w(k_N) rho^{2s} E_I conj(H_I) h^N over the half grid.
Complex half_inner(const HalfGridField& e, const HalfGridField& h, std::span<const double> normal_weights,
                   double weight = 0.0);
Complex half_inner(const HalfGridField& e, const HalfGridField& h, double weight = 0.0);
double half_norm(const HalfGridField& e, double weight = 0.0);

/// Even/odd extension commuting with d: component I is reflected with sign (-1)^{[N in I]}.
FormField mirror_Sd(const HalfGridField& e);
/// (-1)^{q(N-q)} * S_d *, the extension commuting with delta.
FormField mirror_Sdelta(const HalfGridField& e);

enum class MirrorKind { d, delta };

/// Reflection of a full-grid form with the parity of the chosen mirror,
/// i.e. (P E)_I(x', x_N) = sign_I E_I(x', -x_N).
FormField reflect(const FormField& e, MirrorKind kind);
/// Half-grid form whose mirror extension is the smooth field (E + P E)/2.
/// MirrorKind::delta yields a vanishing tangential trace.
HalfGridField symmetrized(const FormField& e, MirrorKind kind);

/// Pullback by x -> x + h e_axis; h must be a multiple of the spacing.
/// Half-grid inputs only allow tangential axes.
FormField shift(const FormField& e, int axis, double h);
HalfGridField shift(const HalfGridField& e, int axis, double h);
/// (shift(E, axis, h) - E) / h.
FormField diff_quotient(const FormField& e, int axis, double h);
HalfGridField diff_quotient(const HalfGridField& e, int axis, double h);

/// Largest |lhs - rhs| entry of delta_h^*(eps F) = eps delta_h^* F + (delta_h eps) tau_h^* F.
double product_rule_residual(const Transformation& eps, const FormField& f, int axis, double h);

/// Tangential trace: components with N not in I on the plane x_N = 0, as a
/// rank-q form on the (N-1)-dimensional boundary grid.
FormField trace_tangential(const HalfGridField& e);
/// Boundary Hodge star with the induced (outward normal first) orientation:
/// (-1)^{N-1} times the standard star of the boundary coordinates.
FormField boundary_star(const FormField& boundary_form);
/// (-1)^{(q-1)N} *_b gamma_t *; requires q >= 1.
FormField trace_normal(const HalfGridField& e);

/// Boundary form extended constantly in x_N times a smooth cutoff that
/// equals 1 on the plane and vanishes for x_N <= -width.
HalfGridField extend_boundary_form(const FormField& boundary_form, const GridSpec& grid, double width);

struct StokesResidual {
  double volume = 0.0;    ///< <dE, H> + <E, delta H> over the half grid (real part)
  double boundary = 0.0;  ///< <gamma_t E, gamma_n H> over the plane (real part)
  double residual = 0.0;  ///< |volume - boundary|
};

/// Integration-by-parts defect for given E, H and their (analytic) dE, delta H.
StokesResidual stokes_pairing_residual(const HalfGridField& e, const HalfGridField& de, const HalfGridField& h,
                                       const HalfGridField& delta_h, int quadrature_order = 16);

/// All first partials of E from dE, delta(eps E), eps and the tangential
/// partials d_1 E .. d_{N-1} E. Entries not needed for the rank may be
/// default-constructed (dE for q = N, delta(eps E) for q = 0). Returns
/// N fields, the last being the reconstructed d_N E. Non-identity eps must
/// carry analytic derivatives.
std::vector<FormField> normal_derivative_reconstruct(const FormField& e, const FormField& de,
                                                     const FormField& delta_eps_e, const Transformation& eps,
                                                     const std::vector<FormField>& tangential_partials);

/// Node mask of the nonzero support (any component with |value| > threshold).
std::vector<char> support_mask(const FormField& e, double threshold = 0.0);

}  // namespace formcalc
