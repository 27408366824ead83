#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <random>

#include "formcalc/decomposition.hpp"
#include "formcalc/halfspace.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/probes.hpp"
#include "formcalc/sobolev.hpp"
#include "formcalc/spectral.hpp"

namespace formcalc {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr int kStokesGrid = 128;

/// Worst residual per identity, kept in first-seen order.
class Ledger {
 public:
  void record(const std::string& name, double value, double tolerance) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
    if (it == entries_.end()) {
      entries_.push_back({name, value, tolerance, false});
      return;
    }
    // a non-finite value sticks so the flag fails
    if (!std::isfinite(it->worst)) return;
    if (!std::isfinite(value) || value > it->worst) it->worst = value;
  }
  void flush(ProbeReport& report) const {
    for (const auto& e : entries_) report.check(e.name, e.worst, e.tolerance);
  }

 private:
  std::vector<InvariantFlag> entries_;
};

double rel(double num, double den) { return den > 0.0 ? num / den : num; }

double max_diff(const FormField& a, const FormField& b) { return (a - b).max_abs(); }

double spectral_max_diff(const SpectralField& a, const SpectralField& b) { return (a - b).max_abs(); }

std::uint64_t mix(std::uint64_t seed, int a, int b = 0, int c = 0) {
  return seed * 6364136223846793005ull + static_cast<std::uint64_t>(a) * 1442695040888963407ull +
         static_cast<std::uint64_t>(b) * 2654435761ull + static_cast<std::uint64_t>(c) * 40503ull + 1ull;
}

/// Narrow Gaussian-localized form. On a box with L = 1.25 and n = 32 the
/// wrap-around tail and the spectral tail of rho^s times E both sit near 1e-9.
FormField localized(const GridSpec& grid, int rank, std::uint64_t seed) {
  return gaussian_expression(grid.dim, rank, seed, 0.25, {}, 0.125).sample(grid);
}

// ---------------------------------------------------------------------------

void forms_core(Ledger& led, const GridSpec& grid, const GridSpec& dyadic, std::uint64_t seed) {
  const int n_dim = grid.dim;
  for (int q = 0; q <= n_dim; ++q) {
    const FormField e = band_limited_random(grid, q, mix(seed, 1, q));
    const FormField ed = dyadic_random(dyadic, q, mix(seed, 2, q), true);

    for (int p = 0; p + q <= n_dim; ++p) {
      const FormField f = dyadic_random(dyadic, p, mix(seed, 3, p, q), true);
      const double sign = (p * q) % 2 == 0 ? 1.0 : -1.0;
      FormField rhs = wedge(f, ed);
      rhs *= sign;
      led.record("wedge_graded_anticommutative", max_diff(wedge(ed, f), rhs), 0.0);
    }

    FormField ss = hodge_star(hodge_star(ed));
    ss *= ((q * (n_dim - q)) % 2 == 0) ? 1.0 : -1.0;
    led.record("star_star_sign", max_diff(ss, ed), 0.0);

    if (q + 2 <= n_dim) {
      led.record("RR_zero", apply_R(apply_R(ed, Coordinates::position), Coordinates::position).max_abs(), 0.0);
    }
    if (q >= 2) {
      led.record("TT_zero", apply_T(apply_T(ed, Coordinates::position), Coordinates::position).max_abs(), 0.0);
    }
    {
      FormField rt_tr(grid, q);
      if (q > 0) rt_tr += apply_R(apply_T(e, Coordinates::position), Coordinates::position);
      if (q < n_dim) rt_tr += apply_T(apply_R(e, Coordinates::position), Coordinates::position);
      const FormField r2 = multiply_radius_squared(e, Coordinates::position);
      led.record("RT_plus_TR_is_r2", rel(l2_norm(rt_tr - r2), l2_norm(r2)), 1e-12);
    }
    if (q < n_dim) {
      const FormField h = band_limited_random(grid, q + 1, mix(seed, 4, q));
      const FormField re = apply_R(e, Coordinates::position);
      const Complex gap = l2_inner(re, h) - l2_inner(e, apply_T(h, Coordinates::position));
      led.record("R_T_adjoint", rel(std::abs(gap), l2_norm(re) * l2_norm(h)), 1e-12);
    }

    const auto [tau, rho] = split_tangential_normal(ed);
    const auto [tau2, rho2] = split_tangential_normal(tau);
    led.record("split_sum_and_orthogonality",
               std::max(max_diff(tau + rho, ed), std::abs(l2_inner(tau, rho))), 0.0);
    led.record("split_idempotent", std::max(max_diff(tau2, tau), rho2.max_abs()), 0.0);
  }
  // constant 0-form integrates to the box volume
  const std::vector<Complex> one = {Complex(1.0)};
  const double volume = std::pow(2.0 * grid.half_length, n_dim);
  const FormField c = constant_form(grid, 0, one);
  led.record("l2_constant_volume", rel(std::abs(l2_inner(c, c) - volume), volume), 1e-12);
}

void spectral_checks(Ledger& led, const GridSpec& grid, std::uint64_t seed) {
  const int n_dim = grid.dim;
  const double xi_max = std::numbers::pi / grid.half_length * (grid.points / 2);
  for (int q = 0; q <= n_dim; ++q) {
    const FormField e = band_limited_random(grid, q, mix(seed, 10, q));
    const SpectralField hat = fourier(e);
    led.record("fourier_unitary", std::abs(l2_norm(hat) / l2_norm(e) - 1.0), 1e-12);
    led.record("fourier_roundtrip", rel(max_diff(fourier_inverse(hat), e), e.max_abs()), 1e-12);
    led.record("fourier_star_commute",
               rel(spectral_max_diff(fourier(hodge_star(e)), hodge_star(hat)), hat.max_abs()), 1e-12);

    if (q < n_dim) {
      const FormField de = exterior_d(e);
      SpectralField symbol = apply_R(hat, Coordinates::frequency);
      symbol *= kI;
      led.record("intertwining_d", rel(l2_norm(fourier(de) - symbol), l2_norm(de)), 1e-12);
      if (q + 2 <= n_dim) led.record("dd_zero", rel(l2_norm(exterior_d(de)), l2_norm(de) * xi_max), 1e-12);
      const FormField h = band_limited_random(grid, q + 1, mix(seed, 11, q));
      const Complex gap = l2_inner(de, h) + l2_inner(e, coderivative_delta(h));
      led.record("weak_stokes_duality", rel(std::abs(gap), l2_norm(de) * l2_norm(h)), 1e-12);
    }
    if (q > 0) {
      const FormField dl = coderivative_delta(e);
      SpectralField symbol = apply_T(hat, Coordinates::frequency);
      symbol *= kI;
      led.record("intertwining_delta", rel(l2_norm(fourier(dl) - symbol), l2_norm(dl)), 1e-12);
      if (q >= 2) led.record("deltadelta_zero", rel(l2_norm(coderivative_delta(dl)), l2_norm(dl) * xi_max), 1e-12);
    }
    const FormField lap = laplacian(e);
    const FormField lap_symbol = laplacian_symbol(e);
    led.record("laplacian_is_d_delta_plus_delta_d", rel(l2_norm(lap - lap_symbol), l2_norm(lap_symbol)), 1e-12);
    {
      SpectralField symbol = multiply_radius_squared(hat, Coordinates::frequency);
      symbol *= -1.0;
      led.record("intertwining_laplacian", rel(l2_norm(fourier(lap) - symbol), l2_norm(lap)), 1e-12);
    }
    for (const auto& alpha : derivative_multi_indices(n_dim, 3)) {
      int order = 0;
      for (int a : alpha) order += a;
      if (order == 0) continue;
      const FormField d_alpha = partial(e, alpha);
      SpectralField symbol = hat;
      for (int axis = 0; axis < n_dim; ++axis)
        for (int k = 0; k < alpha[axis]; ++k) symbol = detail::spectral_partial(symbol, axis);
      led.record("intertwining_partials_upto_3", rel(l2_norm(fourier(d_alpha) - symbol), l2_norm(d_alpha)), 1e-12);
    }
    led.record("gaffney_identity", gaffney_identity_check(e).relative_gap, 1e-10);
    const double s0 = spectral_sobolev_norm(e, 0.0);
    const double s1 = spectral_sobolev_norm(e, 1.0);
    const double s2 = spectral_sobolev_norm(e, 2.0);
    led.record("spectral_sobolev_s0_is_l2", rel(std::abs(s0 - l2_norm(e)), l2_norm(e)), 1e-12);
    led.record("spectral_sobolev_monotone", std::max({0.0, rel(s0 - s1, s1), rel(s1 - s2, s2)}), 0.0);
  }
}

void sobolev_checks(Ledger& led, const GridSpec& grid, const GridSpec& fine, std::uint64_t seed) {
  const int n_dim = grid.dim;
  for (int q = 0; q <= n_dim; ++q) {
    const FormField e = localized(fine, q, mix(seed, 20, q));
    for (double s : {-1.0, 0.0, 1.0}) {
      const double roman0 = weighted_sobolev_norm(e, {0, s, Scale::roman});
      const double bold0 = weighted_sobolev_norm(e, {0, s, Scale::bold});
      led.record("order0_roman_equals_bold_equals_l2",
                 rel(std::max(std::abs(roman0 - bold0), std::abs(roman0 - l2_norm(e, s))), roman0), 1e-14);
      for (int m : {1, 2}) {
        const InclusionCheck c = monotone_inclusion_check(e, m, s);
        const double violation = std::max({0.0, rel(c.roman - c.bold, c.bold), rel(c.bold_lower - c.roman, c.roman)});
        led.record("monotone_inclusion", violation, 1e-12);
      }
      if (q < n_dim) {
        const double bold = graph_norm(e, GraphKind::D, s, Scale::bold);
        const double roman = graph_norm(e, GraphKind::D, s, Scale::roman);
        led.record("graph_bold_dominates_roman", std::max(0.0, rel(roman - bold, bold)), 1e-14);
      }
      if (q > 0) {
        // exact forms are closed, so the D graph norm reduces to the weighted L2 norm
        const FormField closed = exterior_d(localized(fine, q - 1, mix(seed, 21, q)));
        if (q < n_dim) {
          const double g = graph_norm(closed, GraphKind::D, s, Scale::bold);
          led.record("graph_norm_of_closed_form", rel(std::abs(g - l2_norm(closed, s)), l2_norm(closed, s)), 1e-10);
        }
      }
    }
    for (double s : {-2.0, -1.0, 1.0, 2.0}) {
      if (q < n_dim) led.record("commutator_d_rho_s", d_commutator_residual(e, s).relative, 1e-8);
      if (q > 0) led.record("commutator_delta_rho_s", delta_commutator_residual(e, s).relative, 1e-8);
    }
    const FormField f = band_limited_random(grid, q, mix(seed, 22, q));
    for (double tau : {0.5, 1.0, 2.0}) {
      for (double theta : {0.5, 1.0, 2.0}) {
        const AnnulusEstimate a = annulus_estimate(f, 0.5, tau, theta);
        led.record("annulus_weight_splitting", rel(a.lhs, a.rhs), 1.0);
      }
    }
  }
}

Transformation random_media(const GridSpec& grid, int rank, std::uint64_t seed) {
  const int size = static_cast<int>(binomial(grid.dim, rank));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd a(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) a(i, j) = u(rng);
  Eigen::MatrixXd m = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  m /= std::max(1e-12, solver.eigenvalues().cwiseAbs().maxCoeff());
  NodeCoords c{};
  for (int k = 0; k < grid.dim; ++k) c[k] = 0.3 * u(rng);
  std::vector<PerturbationTerm> terms = {{RadialProfile::gaussian(0.6, 1.0, c), m}};
  return make_transformation(TransformationSpec::perturbation(grid.dim, rank, terms, {DecayKind::second_kind, 2.0}), grid);
}

/// Dense transformation with dyadic entries: I + small symmetric dyadic perturbation.
Transformation dyadic_media(const GridSpec& grid, int rank, std::uint64_t seed) {
  const int size = static_cast<int>(binomial(grid.dim, rank));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-64, 64);
  std::vector<double> data(grid.node_count() * static_cast<std::size_t>(size * size));
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    double* block = data.data() + node * static_cast<std::size_t>(size * size);
    for (int i = 0; i < size; ++i) {
      for (int j = i; j < size; ++j) {
        const double v = dist(rng) / 4096.0;
        block[i * size + j] = v + (i == j ? 1.0 : 0.0);
        block[j * size + i] = block[i * size + j];
      }
    }
  }
  return Transformation::dense(grid, rank, std::move(data), {}, 0);
}

double transformation_gap(const Transformation& a, const Transformation& b, const GridSpec& grid) {
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    worst = std::max(worst, (a.matrix_at(grid, node) - b.matrix_at(grid, node)).cwiseAbs().maxCoeff());
  }
  return worst;
}

void media_checks(Ledger& led, const GridSpec& grid, const GridSpec& dyadic, std::uint64_t seed) {
  const int n_dim = grid.dim;
  for (int q = 0; q <= n_dim; ++q) {
    const int size = static_cast<int>(binomial(n_dim, q));
    const Transformation id = make_transformation(TransformationSpec::identity(n_dim, q), grid);
    led.record("identity_positivity_one", std::abs(id.positivity() - 1.0), 0.0);

    const Transformation mu = make_transformation(catalog_spec("scalar-exp", n_dim, q, {DecayKind::second_kind, 3.0}, 3), grid);
    const AdmissibilityReport rep = verify_admissibility(mu, grid, 100, mix(seed, 30, q));
    led.record("scalar_media_positivity_at_least_one", std::max(0.0, 1.0 - rep.min_sampled_rayleigh), 1e-12);
    led.record("scalar_media_symmetric", rep.max_asymmetry, 0.0);
    led.record("scalar_media_decay_consistent", rep.decay_consistent ? 0.0 : 1.0, 0.0);

    const Transformation eps = random_media(grid, q, mix(seed, 31, q));
    const AdmissibilityReport rr = verify_admissibility(eps, grid, 100, mix(seed, 32, q));
    led.record("sampled_rayleigh_above_declared", std::max(0.0, eps.positivity() - rr.min_sampled_rayleigh), 1e-12);

    const FormField e = band_limited_random(grid, q, mix(seed, 33, q));
    const FormField h = band_limited_random(grid, q, mix(seed, 34, q));
    led.record("apply_inverse_roundtrip", rel(max_diff(apply(eps, apply_inverse(eps, e)), e), e.max_abs()), 1e-12);
    led.record("media_pairing_symmetric",
               rel(std::abs(l2_inner(apply(eps, e), h) - l2_inner(e, apply(eps, h))), l2_norm(e) * l2_norm(h)), 1e-12);
    const auto [tau, rho_unused] = split_tangential_normal(e);
    const auto [tau_img, rho_img] = split_tangential_normal(apply(eps, e));
    (void)rho_unused;
    (void)tau_img;
    led.record("split_reconstruction_roundtrip",
               rel(l2_norm(reconstruct_from_split(tau, rho_img, eps) - e), l2_norm(e)), 1e-10);

    led.record("reflection_involution", transformation_gap(reflected_transform(reflected_transform(eps)), eps, grid), 1e-12);
    led.record("reflection_of_identity", transformation_gap(reflected_transform(id), id, grid), 0.0);
    {
      // scalar mu reflects to mu(x', -x_N)
      const Transformation mu_r = reflected_transform(mu);
      double worst = 0.0;
      const auto n = static_cast<std::size_t>(grid.points);
      for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const std::size_t k = node % n;
        const std::size_t mirrored = node - k + (n - k) % n;
        worst = std::max(worst, (mu_r.matrix_at(grid, node) - mu.matrix_at(grid, mirrored)).cwiseAbs().maxCoeff());
      }
      led.record("reflection_of_scalar_media", worst, 1e-12);
    }

    // indefinite input is rejected with a report of the worst node
    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(size, size) * -1.1;
    bool rejected = false;
    try {
      make_transformation(TransformationSpec::perturbation(n_dim, q, {{RadialProfile::gaussian(1.0, 0.5), bad}}), grid);
    } catch (const AdmissibilityError& err) {
      rejected = std::abs(err.report.min_eigenvalue + 0.1) < 1e-12;
    }
    led.record("indefinite_media_rejected", rejected ? 0.0 : 1.0, 0.0);
    if (size > 1) {
      Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(size, size);
      skew(0, 1) = 0.1;
      bool asym = false;
      try {
        make_transformation(TransformationSpec::perturbation(n_dim, q, {{RadialProfile::gaussian(0.5, 1.0), skew}}), grid);
      } catch (const AdmissibilityError&) {
        asym = true;
      }
      led.record("asymmetric_media_rejected", asym ? 0.0 : 1.0, 0.0);
    }

    // difference-quotient product rule with dyadic data is exact
    const Transformation dy = dyadic_media(dyadic, q, mix(seed, 35, q));
    const FormField fd = dyadic_random(dyadic, q, mix(seed, 36, q), true);
    for (int axis = 0; axis < n_dim; ++axis) {
      led.record("difference_quotient_product_rule", product_rule_residual(dy, fd, axis, dyadic.spacing()), 0.0);
    }
  }
}

void halfspace_checks(Ledger& led, const GridSpec& grid, const GridSpec& fine, const GridSpec& dyadic,
                      const std::optional<GridSpec>& stokes, std::uint64_t seed) {
  const int n_dim = grid.dim;
  const int last = n_dim - 1;
  for (int q = 0; q <= n_dim; ++q) {
    // mirror isometry and parity on arbitrary half-grid data
    const HalfGridField half = HalfGridField::restrict_from(band_limited_random(grid, q, mix(seed, 40, q)));
    const double half_sq = std::pow(half_norm(half), 2);
    for (MirrorKind kind : {MirrorKind::d, MirrorKind::delta}) {
      const FormField ext = kind == MirrorKind::d ? mirror_Sd(half) : mirror_Sdelta(half);
      led.record("mirror_isometry_sqrt2", rel(std::abs(std::pow(l2_norm(ext), 2) - 2.0 * half_sq), 2.0 * half_sq), 1e-12);
      const FormField parity = reflect(ext, kind);
      double worst = 0.0;
      for (std::size_t node = 0; node < ext.node_count(); ++node) {
        if (HalfGridField::in_half(grid, node)) continue;
        for (std::size_t c = 0; c < ext.component_count(); ++c)
          worst = std::max(worst, std::abs(parity.at(c, node) - ext.at(c, node)));
      }
      led.record("mirror_even_odd_structure", worst, 0.0);
    }
    {
      const double radius = 0.4 * grid.half_length;
      const Manufactured bump = generate_manufactured(ManufacturedKind::bump, grid, q, Region::ball(radius), mix(seed, 41, q));
      const std::vector<char> ball = Region::ball(radius).mask(grid);
      const std::vector<char> supp = support_mask(mirror_Sd(HalfGridField::restrict_from(bump.field)));
      double outside = 0.0;
      for (std::size_t node = 0; node < supp.size(); ++node)
        if (supp[node] && !ball[node]) outside += 1.0;
      led.record("mirror_support_in_ball", outside, 0.0);
    }

    // commutation with d and delta on compatible smooth fields
    const FormField smooth = localized(fine, q, mix(seed, 42, q));
    if (q < n_dim) {
      const HalfGridField e = symmetrized(smooth, MirrorKind::d);
      const FormField de = exterior_d(mirror_Sd(e));
      const FormField sde = mirror_Sd(HalfGridField::restrict_from(de));
      led.record("mirror_Sd_commutes_with_d", rel(l2_norm(de - sde), l2_norm(de)), 1e-8);
    }
    if (q > 0) {
      const HalfGridField e = symmetrized(smooth, MirrorKind::delta);
      const FormField de = coderivative_delta(mirror_Sdelta(e));
      const FormField sde = mirror_Sdelta(HalfGridField::restrict_from(de));
      led.record("mirror_Sdelta_commutes_with_delta", rel(l2_norm(de - sde), l2_norm(de)), 1e-8);
    }

    // traces
    const HalfGridField sh = HalfGridField::restrict_from(smooth);
    if (q + 1 < n_dim) {
      const FormField lhs = exterior_d(trace_tangential(sh));
      const FormField rhs = trace_tangential(HalfGridField::restrict_from(exterior_d(smooth)));
      led.record("tangential_trace_commutes_with_d", rel(l2_norm(lhs - rhs), l2_norm(rhs)), 1e-8);
    }
    {
      // gamma_t and gamma_n together carry every boundary component once
      const FormField full = band_limited_random(grid, q, mix(seed, 43, q));
      const HalfGridField hf = HalfGridField::restrict_from(full);
      double plane_sq = 0.0;
      for (std::size_t c = 0; c < full.component_count(); ++c)
        for (std::size_t b = 0; b < grid.boundary().node_count(); ++b)
          plane_sq += std::norm(full.at(c, b * static_cast<std::size_t>(grid.points) + grid.points / 2));
      plane_sq *= grid.boundary().cell_volume();
      double pieces = 0.0;
      if (q < n_dim) pieces += std::pow(l2_norm(trace_tangential(hf)), 2);
      if (q > 0) pieces += std::pow(l2_norm(trace_normal(hf)), 2);
      led.record("trace_pair_bijective", rel(std::abs(pieces - plane_sq), plane_sq), 1e-12);
      const std::size_t count = (q < n_dim ? binomial(n_dim - 1, q) : 0) + (q > 0 ? binomial(n_dim - 1, q - 1) : 0);
      led.record("trace_dimension_count", std::abs(static_cast<double>(count) - static_cast<double>(binomial(n_dim, q))), 0.0);
    }
    if (q < n_dim && stokes.has_value()) {
      // Stokes pairing on members with vanishing tangential trace
      const GridSpec& sg = *stokes;
      NodeCoords center{};
      center[last] = -0.3;
      const FormExpression ex =
          gaussian_expression(n_dim, q, mix(seed, 44, q), 0.6, center, 0.3).symmetrized(MirrorKind::delta);
      const FormExpression hx = gaussian_expression(n_dim, q + 1, mix(seed, 45, q), 0.6, center, 0.3);
      const StokesResidual st = stokes_pairing_residual(
          HalfGridField::restrict_from(ex.sample(sg)), HalfGridField::restrict_from(ex.sample_d(sg)),
          HalfGridField::restrict_from(hx.sample(sg)), HalfGridField::restrict_from(hx.sample_delta(sg)));
      led.record("stokes_pairing_vanishing_trace", st.residual, 1e-8);
    }

    // difference quotients: exact anti-duality on dyadic data
    const FormField f = dyadic_random(dyadic, q, mix(seed, 46, q), true);
    const FormField g = dyadic_random(dyadic, q, mix(seed, 47, q), true);
    for (int axis = 0; axis < n_dim; ++axis) {
      for (int steps : {1, 2}) {
        const double h = steps * dyadic.spacing();
        const Complex gap = l2_inner(diff_quotient(f, axis, h), g) + l2_inner(f, diff_quotient(g, axis, -h));
        led.record("difference_quotient_anti_duality", std::abs(gap), 0.0);
        if (axis < last) {
          const HalfGridField hf = HalfGridField::restrict_from(f);
          const HalfGridField hg = HalfGridField::restrict_from(g);
          const Complex hgap = half_inner(diff_quotient(hf, axis, h), hg) + half_inner(hf, diff_quotient(hg, axis, -h));
          led.record("difference_quotient_anti_duality_half", std::abs(hgap), 0.0);
        }
      }
    }
    {
      // first-order convergence on the trig catalog
      const FormExpression t = trig_catalog(n_dim, q, static_cast<int>(mix(seed, 48, q) % trig_catalog_size), fine.half_length);
      const FormField tf = t.sample(fine);
      const FormField exact = t.sample_partial(fine, 0);
      const double e1 = l2_norm(diff_quotient(tf, 0, 2.0 * fine.spacing()) - exact);
      const double e2 = l2_norm(diff_quotient(tf, 0, fine.spacing()) - exact);
      led.record("difference_quotient_rate_O_h", std::abs(rel(e1, e2) - 2.0), 0.2);
    }

    // normal derivatives from d and delta(eps E), eps with closed-form derivatives
    {
      const Transformation eps = make_transformation(catalog_spec("scalar-exp", n_dim, q, {}, 3), fine);
      std::vector<FormField> tangential;
      for (int a = 0; a < last; ++a) tangential.push_back(partial(smooth, a));
      const FormField de = q < n_dim ? exterior_d(smooth) : FormField();
      const FormField dee = q > 0 ? coderivative_delta(apply(eps, smooth)) : FormField();
      const auto grad = normal_derivative_reconstruct(smooth, de, dee, eps, tangential);
      const FormField direct = partial(smooth, last);
      led.record("normal_derivative_reconstruction", rel(l2_norm(grad.back() - direct), l2_norm(direct)), 1e-8);
    }
  }
}

void decomposition_checks(Ledger& led, const GridSpec& grid, std::uint64_t seed) {
  const int n_dim = grid.dim;
  for (int q = 0; q <= n_dim; ++q) {
    const FormField e = band_limited_random(grid, q, mix(seed, 50, q));
    const double norm = l2_norm(e);
    const HodgeSplit split = hodge_decompose(e);
    led.record("hodge_resum", rel(l2_norm(split.exact_part + split.coexact_part + split.mean_part - e), norm), 1e-12);
    const double orth = std::max({std::abs(l2_inner(split.exact_part, split.coexact_part)),
                                  std::abs(l2_inner(split.exact_part, split.mean_part)),
                                  std::abs(l2_inner(split.coexact_part, split.mean_part))});
    led.record("hodge_orthogonality", rel(orth, norm * norm), 1e-10);
    if (q < n_dim) led.record("exact_part_closed", rel(l2_norm(exterior_d(split.exact_part)), norm), 1e-10);
    if (q > 0) led.record("coexact_part_coclosed", rel(l2_norm(coderivative_delta(split.coexact_part)), norm), 1e-10);

    const FormField pe = split.exact_part;
    const FormField pc = split.coexact_part;
    led.record("projector_idempotent",
               rel(std::max(l2_norm(project_exact(pe) - pe), l2_norm(project_coexact(pc) - pc)), norm), 1e-12);
    led.record("projector_complementary",
               rel(std::max(l2_norm(project_exact(pc)), l2_norm(project_coexact(pe))), norm), 1e-12);
    const FormField zero_mean = e - split.mean_part;
    led.record("projectors_sum_to_identity",
               rel(l2_norm(project_exact(zero_mean) + project_coexact(zero_mean) - zero_mean), norm), 1e-12);

    if (q > 0) {
      const FormField phi0 = project_coexact(band_limited_random(grid, q - 1, mix(seed, 51, q)));
      const FormField phi = potential_for_exact(exterior_d(phi0));
      led.record("potential_roundtrip", rel(l2_norm(phi - phi0), l2_norm(phi0)), 1e-10);
    }
    if (q < n_dim) {
      const FormField coclosed = q == 0 ? zero_mean : project_coexact(e);
      const CoderivativeSolution sol = solve_coderivative(coclosed);
      led.record("coderivative_solver_residual", sol.residual, 1e-10);
      const GaffneyReport gr = gaffney_identity_check(sol.h);
      const double dh = q + 1 < n_dim ? l2_norm(exterior_d(sol.h)) : 0.0;
      const double rhs = dh * dh + std::pow(l2_norm(coclosed), 2);
      led.record("coderivative_solution_gaffney", rel(std::abs(gr.gradient_sq - rhs), rhs), 1e-8);
    }

    const Transformation mu = make_transformation(catalog_spec("scalar-exp", n_dim, q, {}, 3), grid);
    const WeightedHodgeSplit w = weighted_hodge_decompose(e, mu);
    led.record("weighted_split_converged", w.converged ? w.residual : 1.0, 1e-8);
    led.record("weighted_split_orthogonality",
               rel(std::abs(l2_inner(w.exact_part, apply(mu, w.remainder))), norm * norm), 1e-7);
  }
}

}  // namespace

ProbeReport run_identity_suite(int dim, int n, std::uint64_t seed) {
  if (dim < 2 || dim > 4) throw std::invalid_argument("run_identity_suite: dimension must be 2, 3 or 4");
  const GridSpec grid{dim, std::numbers::pi, n, true};
  grid.validate();
  // dyadic box: coordinates and spacings are exact binary fractions
  const GridSpec dyadic{dim, 4.0, n, true};
  // small box for the localized fields: a wider frequency range at equal n
  const GridSpec fine{dim, 1.25, std::max(n, 32), true};
  // the half-box quadrature needs h ~ pi/64 against width 0.6; too large a grid for N = 4
  std::optional<GridSpec> stokes;
  if (dim <= 3) stokes = GridSpec{dim, std::numbers::pi, std::max(n, kStokesGrid), true};

  ProbeReport report;
  report.probe = "identities";
  report.params.dim = dim;
  report.params.grid = n;
  report.params.seed = seed;
  report.params.rank = -1;
  report.params.ensemble = 1;
  Ledger led;
  forms_core(led, grid, dyadic, seed);
  spectral_checks(led, grid, seed);
  sobolev_checks(led, grid, fine, seed);
  media_checks(led, grid, dyadic, seed);
  halfspace_checks(led, grid, fine, dyadic, stokes, seed);
  decomposition_checks(led, grid, seed);
  led.flush(report);
  report.diagnostics.emplace_back("resolved_grid", fine.points);
  report.diagnostics.emplace_back("dyadic_half_length", dyadic.half_length);
  report.diagnostics.emplace_back("stokes_grid", stokes ? stokes->points : 0);
  if (dim == 3) {
    const ProbeReport bridge = bridge_check(n, seed, 5);
    for (const auto& f : bridge.flags) report.flags.push_back(f);
  }
  return report;
}

}  // namespace formcalc
