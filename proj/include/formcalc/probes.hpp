#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "formcalc/form_field.hpp"
#include "formcalc/media.hpp"

namespace formcalc {

struct ProbeParams {
  std::string variant;
  int dim = 3;
  int rank = 1;
  int order = 0;
  double weight = 0.0;
  double tau = 1.0;
  std::string media = "id";
  int ensemble = 50;
  int grid = 32;
  std::uint64_t seed = 1;
};

struct ProbeSample {
  std::size_t index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::optional<double> ratio_refined;  ///< same member on the doubled grid
};

/// One asserted invariant: worst residual against its pinned tolerance.
struct InvariantFlag {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ProbeReport {
  std::string probe;
  ProbeParams params;
  std::vector<ProbeSample> samples;
  std::vector<std::pair<std::string, double>> aggregates;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::vector<InvariantFlag> flags;

  /// Records worst <= tolerance (non-finite values fail).
  void check(const std::string& name, double worst, double tolerance);
  bool all_pass() const;
  /// Deterministic JSON document (no timings, fixed key order).
  std::string to_json() const;
  /// index,lhs,rhs,ratio,ratio_refined
  std::string samples_csv() const;
};

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Results must be written by index; the call order is unspecified.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

/// "id", "scalar" (1 + exp(-r^2)), "algebraic" (0.5 (1+r^2)^{-tau/2} M) or
/// "file:PATH"; verified on the grid.
Transformation resolve_media(const std::string& media, int dim, int rank, double tau, const GridSpec& grid);

/// Whole-space regularity probe in the roman scale:
/// ||E||_{H^{m+1}_s} / (||E||_{L^2_s} + ||dE||_{H^m_s} + ||delta eps E||_{H^m_s}).
ProbeReport estimate_probe_interior(const ProbeParams& params);
/// Bold-scale probe with data norms in H^m_{s+1}; requires tau > 0. Adds the
/// annulus weight-splitting diagnostics for sampled theta.
ProbeReport estimate_probe_weighted(const ProbeParams& params);
/// Half-space probe on members with vanishing tangential trace; also checks
/// the normal-derivative reconstruction and the Stokes pairing per member.
ProbeReport halfspace_probe(const ProbeParams& params);
/// Dispatch on params.variant ("interior", "weighted", "halfspace").
ProbeReport run_estimate(const ProbeParams& params);

/// Throws std::invalid_argument unless the member has ||gamma_t E|| <= 1e-10 ||E||.
void require_vanishing_tangential_trace(const FormField& e);

/// Three scalar fields on an N = 3 grid.
struct VectorFieldN3 {
  GridSpec grid;
  std::array<std::vector<Complex>, 3> v;
};

/// q = 1: v_1 dx^1 + v_2 dx^2 + v_3 dx^3; q = 2: v_1 dx^{23} + v_2 dx^{31} + v_3 dx^{12}.
FormField vector_bridge_n3(const VectorFieldN3& v, int rank);
VectorFieldN3 vector_bridge_inverse(const FormField& e);

VectorFieldN3 spectral_curl(const VectorFieldN3& v);
FormField spectral_div(const VectorFieldN3& v);
VectorFieldN3 spectral_grad(const FormField& f);

/// d <-> curl, delta <-> div, d <-> div, delta <-> -curl, curl grad = 0 and the
/// bijection, on `count` random band-limited fields.
ProbeReport bridge_check(int grid = 16, std::uint64_t seed = 1, int count = 50);

/// Every module invariant for all ranks 0..N on one grid.
ProbeReport run_identity_suite(int dim, int grid, std::uint64_t seed);

}  // namespace formcalc
