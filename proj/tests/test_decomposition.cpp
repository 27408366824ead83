#include <doctest.h>

#include "formcalc/decomposition.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/spectral.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;
using testing_util::rel_diff;
using testing_util::sampled;

TEST_CASE("Hodge split of random forms") {
  for (int n_dim = 2; n_dim <= 4; ++n_dim) {
    const GridSpec g = box(n_dim, 8);
    for (int q = 0; q <= n_dim; ++q) {
      const FormField e = band_limited_random(g, q, 10 + q);
      const double n2 = std::pow(l2_norm(e), 2);
      const HodgeSplit s = hodge_decompose(e);
      CHECK(rel_diff(s.exact_part + s.coexact_part + s.mean_part, e) <= 1e-12);
      CHECK(std::abs(l2_inner(s.exact_part, s.coexact_part)) <= 1e-10 * n2);
      CHECK(std::abs(l2_inner(s.exact_part, s.mean_part)) <= 1e-10 * n2);
      CHECK(std::abs(l2_inner(s.coexact_part, s.mean_part)) <= 1e-10 * n2);
      if (q < n_dim) CHECK(l2_norm(exterior_d(s.exact_part)) <= 1e-10 * l2_norm(e));
      if (q > 0) CHECK(l2_norm(coderivative_delta(s.coexact_part)) <= 1e-10 * l2_norm(e));
      CHECK(rel_diff(project_exact(s.exact_part), s.exact_part) <= 1e-12);
      CHECK(rel_diff(project_coexact(s.coexact_part), s.coexact_part) <= 1e-12);
      CHECK(rel_diff(harmonic_part(e), s.mean_part) == 0.0);
    }
  }
}

TEST_CASE("fixed points of the projectors") {
  const GridSpec g = box(3, 16);
  const FormField phi = band_limited_random(g, 1, 3);
  const FormField exact = exterior_d(phi);
  const HodgeSplit s = hodge_decompose(exact);
  CHECK(rel_diff(s.exact_part, exact) <= 1e-12);
  CHECK(l2_norm(s.coexact_part) <= 1e-12 * l2_norm(exact));
  CHECK(l2_norm(s.mean_part) <= 1e-12 * l2_norm(exact));

  const FormField co = project_coexact(band_limited_random(g, 2, 4));
  CHECK(rel_diff(hodge_decompose(co).coexact_part, co) <= 1e-12);
}

TEST_CASE("potentials") {
  const GridSpec g = box(2, 16);
  const double k = std::numbers::pi / g.half_length;
  const FormField f = sampled(g, 0, [k](std::size_t, const NodeCoords& x) { return Complex(std::sin(k * x[0])); });
  CHECK(rel_diff(potential_for_exact(exterior_d(f)), f) <= 1e-12);
  CHECK(potential_for_exact(FormField(g, 1)).max_abs() == 0.0);

  const GridSpec g3 = box(3, 8);
  for (int q = 1; q <= 3; ++q) {
    const FormField phi0 = project_coexact(band_limited_random(g3, q - 1, 20 + q));
    CHECK(rel_diff(potential_for_exact(exterior_d(phi0)), phi0) <= 1e-10);
  }
  // a non-exact input is refused
  const FormField mixed = band_limited_random(g3, 1, 9);
  CHECK_THROWS_AS(potential_for_exact(mixed), ResidualError);
}

TEST_CASE("coderivative solver") {
  const GridSpec g = box(3, 16);
  const double k = std::numbers::pi / g.half_length;
  // cos(k x_3) dx^1 is co-closed with zero mean
  const FormField e = sampled(g, 1, [k](std::size_t c, const NodeCoords& x) { return Complex(c == 0 ? std::cos(k * x[2]) : 0.0); });
  const CoderivativeSolution sol = solve_coderivative(e);
  CHECK(sol.residual <= 1e-10);
  CHECK(rel_diff(coderivative_delta(sol.h), e) <= 1e-10);
  CHECK(solve_coderivative(FormField(g, 1)).h.max_abs() == 0.0);
  CHECK_THROWS_AS(solve_coderivative(band_limited_random(g, 1, 5)), ResidualError);
  CHECK(solve_coderivative(project_coexact(band_limited_random(box(2, 8), 0, 5))).outside_hypothesis);
}

TEST_CASE("weighted split") {
  const GridSpec g = box(2, 16);
  for (int q = 0; q <= 2; ++q) {
    const Transformation mu = make_transformation(catalog_spec("scalar-exp", 2, q, {}, 3), g);
    const FormField e = band_limited_random(g, q, 30 + q);
    const WeightedHodgeSplit w = weighted_hodge_decompose(e, mu);
    CHECK(w.converged);
    CHECK(w.residual <= 1e-8);
    CHECK(rel_diff(w.exact_part + w.remainder, e) <= 1e-14);
    if (q < 2) CHECK(l2_norm(exterior_d(w.exact_part)) <= 1e-10 * l2_norm(e));
    const double n2 = std::pow(l2_norm(e), 2);
    CHECK(std::abs(l2_inner(w.exact_part, apply(mu, w.remainder))) <= 1e-7 * n2);
    CHECK(w.relaxation > 0.0);
  }
}
