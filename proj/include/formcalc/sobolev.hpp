#pragma once

#include <vector>

#include "formcalc/form_field.hpp"
#include "formcalc/media.hpp"

namespace formcalc {

/// roman: every derivative carries rho^s; bold: d^alpha carries rho^{s+|alpha|}.
enum class Scale { roman, bold };

struct NormSpec {
  int order = 0;
  double weight = 0.0;
  Scale scale = Scale::roman;
};

/// All derivative-count vectors alpha in N^dim with |alpha| <= max_order,
/// ordered by |alpha| and then lexicographically (descending in axis 0).
std::vector<std::vector<int>> derivative_multi_indices(int dim, int max_order);

/// sqrt( sum_{|alpha| <= m} || rho^{w(alpha)} d^alpha E ||^2 ); derivatives are
/// spectral, the weight is applied in physical space. Throws
/// std::invalid_argument when m exceeds max_order or the grid cannot carry m
/// derivatives (n < 4m).
double weighted_sobolev_norm(const FormField& e, const NormSpec& spec, int max_order = 3);

enum class GraphKind { D, Delta };

/// D:     (||E||_s^2 + ||dE||_{s+1}^2)^{1/2} (bold) or with ||dE||_s (roman).
/// Delta: the same with delta(eps E) in place of dE.
double graph_norm(const FormField& e, GraphKind kind, double weight, Scale scale);
double graph_norm(const FormField& e, GraphKind kind, double weight, Scale scale, const Transformation& eps);

struct CommutatorResidual {
  double residual = 0.0;  ///< || lhs - rhs ||
  double scale = 0.0;     ///< largest norm among the terms
  double relative = 0.0;  ///< residual / scale, 0 when everything vanishes
};

/// d(rho^s E) - rho^s dE - s rho^{s-2} R E.
CommutatorResidual d_commutator_residual(const FormField& e, double s);
/// delta(rho^s E) - rho^s delta E - s rho^{s-2} T E.
CommutatorResidual delta_commutator_residual(const FormField& e, double s);

struct AnnulusEstimate {
  double lhs = 0.0;       ///< ||F||^2 in L^2_{s+1-tau}
  double rhs = 0.0;       ///< c_theta ||F||_s^2 + (1+theta^2)^{-tau} ||F||_{s+1}^2
  double c_theta = 0.0;   ///< sup_{r <= theta} (1+r^2)^{1-tau}
  bool holds = false;
};

/// Weight-splitting inequality used to absorb the decaying perturbation; tau >= 0.
AnnulusEstimate annulus_estimate(const FormField& f, double s, double tau, double theta);

struct InclusionCheck {
  double bold = 0.0;        ///< bold H^m_s
  double roman = 0.0;       ///< roman H^m_s
  double bold_lower = 0.0;  ///< bold H^m_{s-m}
  bool ordered = false;     ///< bold >= roman >= bold_lower (up to round-off)
};

InclusionCheck monotone_inclusion_check(const FormField& e, int order, double s);

}  // namespace formcalc
