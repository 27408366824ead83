#pragma once

#include <stdexcept>
#include <string>

#include "formcalc/form_field.hpp"
#include "formcalc/media.hpp"

namespace formcalc {

/// Thrown when an input violates a solver precondition; carries the measured defect.
struct ResidualError : std::runtime_error {
  ResidualError(const std::string& what, double r) : std::runtime_error(what), residual(r) {}
  double residual;
};

/// E = exact + coexact + mean. The mean part holds every frequency whose
/// discrete symbol vanishes (the zero mode and the pure Nyquist modes): the
/// harmonic forms of the periodic grid.
struct HodgeSplit {
  FormField exact_part;
  FormField coexact_part;
  FormField mean_part;
};

HodgeSplit hodge_decompose(const FormField& e);
/// R T |xi|^{-2} in frequency space; zero on harmonic modes.
FormField project_exact(const FormField& e);
/// T R |xi|^{-2} in frequency space; zero on harmonic modes.
FormField project_coexact(const FormField& e);
FormField harmonic_part(const FormField& e);

/// Phi = -i F^{-1}(|xi|^{-2} T F E): d Phi = E and delta Phi = 0 for closed,
/// zero-mean E. Throws ResidualError when ||d Phi - E|| > tolerance ||E||.
FormField potential_for_exact(const FormField& e, double tolerance = 1e-8);

struct CoderivativeSolution {
  FormField h;
  double residual = 0.0;        ///< ||delta H - E|| / ||E||
  double h1_ratio = 0.0;        ///< ||H||_{H^1} / ||E||
  double l2_ratio = 0.0;        ///< ||H|| / ||E||
  double frequency_ratio = 0.0; ///< || |xi| H^ || / ||E||
  bool outside_hypothesis = false;  ///< N = 2, allowed on the torus but outside the whole-space estimate
};

/// H = -i F^{-1}(|xi|^{-2} R F E), so that delta H = E for co-closed zero-mean
/// E of rank q < N. Throws ResidualError when the defect exceeds tolerance.
CoderivativeSolution solve_coderivative(const FormField& e, double tolerance = 1e-8);

struct WeightedHodgeSplit {
  FormField exact_part;  ///< X = d Phi
  FormField remainder;   ///< Y = E - X, with eps Y co-closed up to harmonic modes
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;  ///< ||P_exact(eps Y)|| / ||eps E||
  double relaxation = 0.0;
};

/// E = X + Y with X exact and eps Y co-closed, by the damped Richardson
/// iteration X <- X + omega P_exact(eps (E - X)), omega = damping * 2 / (lambda_min + lambda_max).
WeightedHodgeSplit weighted_hodge_decompose(const FormField& e, const Transformation& eps, double tolerance = 1e-8,
                                            double damping = 1.0, int max_iterations = 1000);

}  // namespace formcalc
