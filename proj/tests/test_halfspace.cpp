#include <doctest.h>

#include "formcalc/halfspace.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/spectral.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;
using testing_util::rel_diff;
using testing_util::sampled;

namespace {

std::size_t mirror_node(const GridSpec& g, std::size_t node) {
  const std::size_t n = static_cast<std::size_t>(g.points);
  const std::size_t k = node % n;
  return node - k + (n - k) % n;
}

}  // namespace

TEST_CASE("half grid restriction") {
  const GridSpec g = box(2, 8);
  const FormField e = band_limited_random(g, 1, 2);
  const HalfGridField h = HalfGridField::restrict_from(e);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const bool inside = HalfGridField::in_half(g, node);
    CHECK(inside == (g.position(node)[1] <= 0.0));
    if (!inside) CHECK(h.field().at(0, node) == Complex(0.0));
  }
  const auto w = trapezoid_weights(g);
  CHECK(w[0] == 0.5);
  CHECK(w[4] == 0.5);
  CHECK(w[2] == 1.0);
  CHECK(w[6] == 0.0);
}

TEST_CASE("mirror parity") {
  const GridSpec g = box(2, 8, 4.0);
  const HalfGridField f0 = HalfGridField::restrict_from(dyadic_random(g, 0, 1));
  const FormField even = mirror_Sd(f0);
  const FormField odd = mirror_Sdelta(f0);
  const FormField g1 = dyadic_random(g, 1, 2);
  const FormField s1 = mirror_Sd(HalfGridField::restrict_from(g1));
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    if (HalfGridField::in_half(g, node)) continue;
    const std::size_t m = mirror_node(g, node);
    CHECK(even.at(0, node) == even.at(0, m));
    CHECK(odd.at(0, node) == -odd.at(0, m));
    CHECK(s1.at(0, node) == s1.at(0, m));   // dx^1: even
    CHECK(s1.at(1, node) == -s1.at(1, m));  // dx^2: odd
  }
}

TEST_CASE("mirror isometry and support") {
  for (int n_dim = 2; n_dim <= 3; ++n_dim) {
    const GridSpec g = box(n_dim, 8);
    for (int q = 0; q <= n_dim; ++q) {
      const HalfGridField e = HalfGridField::restrict_from(band_limited_random(g, q, 30 + q));
      const double half_sq = std::pow(half_norm(e), 2);
      CHECK(std::abs(std::pow(l2_norm(mirror_Sd(e)), 2) - 2 * half_sq) <= 1e-12 * half_sq);
      CHECK(std::abs(std::pow(l2_norm(mirror_Sdelta(e)), 2) - 2 * half_sq) <= 1e-12 * half_sq);
    }
  }
  const GridSpec g = box(3, 16);
  const Manufactured bump = generate_manufactured(ManufacturedKind::bump, g, 1, Region::ball(1.2), 4);
  const auto supp = support_mask(mirror_Sd(HalfGridField::restrict_from(bump.field)));
  const auto ball = Region::ball(1.2).mask(g);
  for (std::size_t node = 0; node < supp.size(); ++node)
    if (supp[node]) CHECK(ball[node]);
}

TEST_CASE("mirrors commute with d and delta on compatible fields") {
  const GridSpec g = box(3, 32, 1.25);
  for (int q = 0; q <= 3; ++q) {
    const FormField smooth = gaussian_expression(3, q, 40 + q, 0.25, {}, 0.125).sample(g);
    if (q < 3) {
      const FormField de = exterior_d(mirror_Sd(symmetrized(smooth, MirrorKind::d)));
      CHECK(rel_diff(mirror_Sd(HalfGridField::restrict_from(de)), de) <= 1e-8);
    }
    if (q > 0) {
      const FormField de = coderivative_delta(mirror_Sdelta(symmetrized(smooth, MirrorKind::delta)));
      CHECK(rel_diff(mirror_Sdelta(HalfGridField::restrict_from(de)), de) <= 1e-8);
    }
  }
}

TEST_CASE("difference quotients") {
  const GridSpec g = box(2, 16);
  CHECK(diff_quotient(constant_form(g, 1, std::vector<Complex>{1.0, 2.0}), 0, g.spacing()).max_abs() == 0.0);
  CHECK_THROWS_AS(diff_quotient(constant_form(g, 0, std::vector<Complex>{1.0}), 0, 0.3), std::invalid_argument);

  const double k = std::numbers::pi / g.half_length;
  const FormField s = sampled(g, 0, [k](std::size_t, const NodeCoords& x) { return Complex(std::sin(k * x[0])); });
  const double h = 2 * g.spacing();
  const FormField expect = sampled(g, 0, [k, h](std::size_t, const NodeCoords& x) {
    return Complex((std::sin(k * (x[0] + h)) - std::sin(k * x[0])) / h);
  });
  CHECK((diff_quotient(s, 0, h) - expect).max_abs() < 1e-13);

  // dyadic data: anti-duality and the product rule hold exactly
  const GridSpec d = box(3, 8, 4.0);
  for (int q = 0; q <= 3; ++q) {
    const FormField f = dyadic_random(d, q, 50 + q, true);
    const FormField gg = dyadic_random(d, q, 60 + q, true);
    for (int axis = 0; axis < 3; ++axis) {
      for (double step : {d.spacing(), -2 * d.spacing()}) {
        CHECK(std::abs(l2_inner(diff_quotient(f, axis, step), gg) + l2_inner(f, diff_quotient(gg, axis, -step))) == 0.0);
      }
    }
    const HalfGridField hf = HalfGridField::restrict_from(f);
    const HalfGridField hg = HalfGridField::restrict_from(gg);
    CHECK(std::abs(half_inner(diff_quotient(hf, 0, d.spacing()), hg) + half_inner(hf, diff_quotient(hg, 0, -d.spacing()))) ==
          0.0);
    CHECK_THROWS_AS(diff_quotient(hf, 2, d.spacing()), std::invalid_argument);
  }
}

TEST_CASE("first-order convergence of difference quotients") {
  for (int entry = 0; entry < trig_catalog_size; ++entry) {
    const GridSpec g = box(2, 64);
    const FormExpression t = trig_catalog(2, 1, entry, g.half_length);
    const FormField f = t.sample(g);
    const FormField exact = t.sample_partial(g, 0);
    const double e1 = l2_norm(diff_quotient(f, 0, 2 * g.spacing()) - exact);
    const double e2 = l2_norm(diff_quotient(f, 0, g.spacing()) - exact);
    const double ratio = e1 / e2;
    CHECK(ratio >= 1.8);
    CHECK(ratio <= 2.2);
  }
}

TEST_CASE("traces") {
  const GridSpec g = box(2, 16, 2.0);
  // x_2 dx^1 + x_1 dx^2
  const FormField e = sampled(g, 1, [](std::size_t c, const NodeCoords& x) { return Complex(c == 0 ? x[1] : x[0]); });
  const HalfGridField he = HalfGridField::restrict_from(e);
  CHECK(trace_tangential(he).max_abs() == 0.0);
  const FormField gn = trace_normal(he);
  const GridSpec b = g.boundary();
  for (std::size_t node = 0; node < b.node_count(); ++node)
    CHECK(std::abs(std::abs(gn.at(0, node)) - std::abs(b.position(node)[0])) < 1e-14);

  // f(x') dx^1 passes through gamma_t and is invisible to gamma_n
  const FormField f = sampled(g, 1, [](std::size_t c, const NodeCoords& x) { return Complex(c == 0 ? std::cos(x[0]) : 0.0); });
  const HalfGridField hf = HalfGridField::restrict_from(f);
  const FormField tt = trace_tangential(hf);
  for (std::size_t node = 0; node < b.node_count(); ++node)
    CHECK(std::abs(tt.at(0, node) - std::cos(b.position(node)[0])) < 1e-15);
  CHECK(trace_normal(hf).max_abs() == 0.0);

  CHECK_THROWS(trace_tangential(HalfGridField::restrict_from(FormField(g, 2))));
}

TEST_CASE("tangential trace commutes with d") {
  const GridSpec g = box(3, 32, 1.25);
  for (int q = 0; q + 1 < 3; ++q) {
    const FormField smooth = gaussian_expression(3, q, 70 + q, 0.25, {}, 0.125).sample(g);
    const FormField lhs = exterior_d(trace_tangential(HalfGridField::restrict_from(smooth)));
    const FormField rhs = trace_tangential(HalfGridField::restrict_from(exterior_d(smooth)));
    CHECK(rel_diff(lhs, rhs) <= 1e-8);
  }
}

TEST_CASE("trace pair covers the boundary data") {
  const GridSpec g = box(4, 8);
  for (int q = 0; q <= 4; ++q) {
    const FormField e = band_limited_random(g, q, 80 + q);
    const HalfGridField he = HalfGridField::restrict_from(e);
    double plane = 0.0;
    for (std::size_t c = 0; c < e.component_count(); ++c)
      for (std::size_t bn = 0; bn < g.boundary().node_count(); ++bn)
        plane += std::norm(e.at(c, bn * 8 + 4));
    plane *= g.boundary().cell_volume();
    double pieces = 0.0;
    if (q < 4) pieces += std::pow(l2_norm(trace_tangential(he)), 2);
    if (q > 0) pieces += std::pow(l2_norm(trace_normal(he)), 2);
    CHECK(std::abs(pieces - plane) <= 1e-12 * plane);
  }
}

TEST_CASE("Stokes pairing") {
  NodeCoords center{};
  center[1] = -0.3;
  // vanishing tangential trace
  {
    const GridSpec g = box(2, 128);
    for (int q = 0; q < 2; ++q) {
      const FormExpression e = gaussian_expression(2, q, 90 + q, 0.6, center, 0.3).symmetrized(MirrorKind::delta);
      const FormExpression h = gaussian_expression(2, q + 1, 95 + q, 0.6, center, 0.3);
      const StokesResidual r = stokes_pairing_residual(
          HalfGridField::restrict_from(e.sample(g)), HalfGridField::restrict_from(e.sample_d(g)),
          HalfGridField::restrict_from(h.sample(g)), HalfGridField::restrict_from(h.sample_delta(g)));
      CHECK(std::abs(r.boundary) < 1e-14);
      CHECK(r.residual <= 1e-8);
    }
  }
  // nonzero boundary pairing converges at high order
  {
    const FormExpression e = gaussian_expression(2, 1, 97, 0.6, center, 0.3);
    const FormExpression h = gaussian_expression(2, 2, 98, 0.6, center, 0.3);
    std::vector<double> res;
    for (int n : {32, 64, 128}) {
      const GridSpec g = box(2, n);
      res.push_back(stokes_pairing_residual(HalfGridField::restrict_from(e.sample(g)),
                                            HalfGridField::restrict_from(e.sample_d(g)),
                                            HalfGridField::restrict_from(h.sample(g)),
                                            HalfGridField::restrict_from(h.sample_delta(g)))
                        .residual);
    }
    CHECK(res[0] / res[1] >= 8.0);
    CHECK(res[1] / res[2] >= 8.0);
  }
}

TEST_CASE("normal derivative reconstruction") {
  const GridSpec g = box(2, 32);
  const Transformation id = Transformation::identity(2, 1);
  const double k = std::numbers::pi / g.half_length;
  // sin(k x_2) dx^1: d_2 E_1 comes from (dE)_{12}
  const FormField e = sampled(g, 1, [k](std::size_t c, const NodeCoords& x) { return Complex(c == 0 ? std::sin(k * x[1]) : 0.0); });
  const auto grad = normal_derivative_reconstruct(e, exterior_d(e), coderivative_delta(e), id, {partial(e, 0)});
  const FormField expect =
      sampled(g, 1, [k](std::size_t c, const NodeCoords& x) { return Complex(c == 0 ? k * std::cos(k * x[1]) : 0.0); });
  CHECK((grad.back() - expect).max_abs() < 1e-12);

  // independent of x_N
  const FormField flat = sampled(g, 1, [](std::size_t c, const NodeCoords& x) { return Complex(std::cos(x[0] + c)); });
  const auto gf = normal_derivative_reconstruct(flat, exterior_d(flat), coderivative_delta(flat), id, {partial(flat, 0)});
  CHECK(gf.back().max_abs() < 1e-12);

  // random smooth E with scalar media and closed-form media derivatives
  const GridSpec s = box(3, 32, 1.25);
  for (int q = 0; q <= 3; ++q) {
    const Transformation eps = make_transformation(catalog_spec("scalar-exp", 3, q, {}, 3), s);
    const FormExpression ex = gaussian_expression(3, q, 100 + q, 0.25, {}, 0.125);
    const FormField f = ex.sample(s);
    std::vector<FormField> tangential = {partial(f, 0), partial(f, 1)};
    const FormField de = q < 3 ? exterior_d(f) : FormField();
    const FormField dee = q > 0 ? coderivative_delta(apply(eps, f)) : FormField();
    const auto r = normal_derivative_reconstruct(f, de, dee, eps, tangential);
    CHECK(rel_diff(r.back(), partial(f, 2)) <= 1e-8);
  }
}
