#include <doctest.h>

#include "formcalc/manufactured.hpp"
#include "formcalc/spectral.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;
using testing_util::rel_diff;
using testing_util::sampled;

namespace {

FormField sine0(const GridSpec& g) {
  const double k = std::numbers::pi / g.half_length;
  return sampled(g, 0, [k](std::size_t, const NodeCoords& x) { return Complex(std::sin(k * x[0])); });
}

}  // namespace

TEST_CASE("fourier of a constant sits on the zero mode") {
  const GridSpec g = box(2, 8);
  const SpectralField hat = fourier(constant_form(g, 0, std::vector<Complex>{1.0}));
  double off = 0.0;
  std::size_t peak = 0;
  for (std::size_t node = 0; node < hat.node_count(); ++node) {
    if (std::abs(hat.at(0, node)) > 1e-12) {
      peak = node;
    } else {
      off = std::max(off, std::abs(hat.at(0, node)));
    }
  }
  CHECK(g.wavenumber(g.axis_index(peak, 0)) == 0.0);
  CHECK(g.wavenumber(g.axis_index(peak, 1)) == 0.0);
  CHECK(off < 1e-14);
}

TEST_CASE("unitarity, roundtrip and star commutation") {
  for (int n_dim = 2; n_dim <= 4; ++n_dim) {
    const GridSpec g = box(n_dim, 8);
    for (int q = 0; q <= n_dim; ++q) {
      const FormField e = band_limited_random(g, q, 5 + q);
      const SpectralField hat = fourier(e);
      CHECK(std::abs(l2_norm(hat) / l2_norm(e) - 1.0) < 1e-12);
      CHECK(rel_diff(fourier_inverse(hat), e) < 1e-12);
      CHECK((fourier(hodge_star(e)) - hodge_star(hat)).max_abs() < 1e-12 * hat.max_abs());
    }
  }
}

TEST_CASE("derivatives of a single mode") {
  const GridSpec g = box(2, 16, 2.0);
  const double k = std::numbers::pi / g.half_length;
  const FormField f = sine0(g);
  const FormField df = exterior_d(f);
  const FormField expect = sampled(g, 1, [k](std::size_t c, const NodeCoords& x) {
    return c == 0 ? Complex(k * std::cos(k * x[0])) : Complex(0.0);
  });
  CHECK((df - expect).max_abs() < 1e-12);
  FormField lap_expect = f;
  lap_expect *= -k * k;
  CHECK((laplacian(f) - lap_expect).max_abs() < 1e-12);
  CHECK(laplacian(constant_form(g, 1, std::vector<Complex>{2.0, -1.0})).max_abs() < 1e-12);

  // sin(k x_1), s = 2: two modes at |xi| = k
  const double s2 = spectral_sobolev_norm(f, 2.0);
  CHECK(s2 == doctest::Approx((1.0 + k * k) * l2_norm(f)).epsilon(1e-12));
  CHECK(spectral_sobolev_norm(f, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-14));
}

TEST_CASE("complex identities dd = 0, delta delta = 0, Laplacian, duality") {
  for (int n_dim = 2; n_dim <= 4; ++n_dim) {
    const GridSpec g = box(n_dim, 8);
    for (int q = 0; q <= n_dim; ++q) {
      const FormField e = band_limited_random(g, q, 50 + q);
      if (q + 2 <= n_dim) CHECK(l2_norm(exterior_d(exterior_d(e))) < 1e-12 * l2_norm(exterior_d(e)) * 4);
      if (q >= 2) CHECK(l2_norm(coderivative_delta(coderivative_delta(e))) < 1e-12 * l2_norm(coderivative_delta(e)) * 4);
      CHECK(rel_diff(laplacian(e), laplacian_symbol(e)) < 1e-12);
      if (q < n_dim) {
        const FormField h = band_limited_random(g, q + 1, 60 + q);
        const FormField de = exterior_d(e);
        const Complex gap = l2_inner(de, h) + l2_inner(e, coderivative_delta(h));
        CHECK(std::abs(gap) < 1e-12 * l2_norm(de) * l2_norm(h));
      }
    }
  }
}

TEST_CASE("symbol intertwining") {
  const GridSpec g = box(3, 8);
  const Complex i{0.0, 1.0};
  for (int q = 0; q <= 3; ++q) {
    const FormField e = band_limited_random(g, q, 70 + q);
    const SpectralField hat = fourier(e);
    if (q < 3) {
      SpectralField sym = apply_R(hat, Coordinates::frequency);
      sym *= i;
      const FormField de = exterior_d(e);
      CHECK(l2_norm(fourier(de) - sym) < 1e-12 * l2_norm(de));
    }
    if (q > 0) {
      SpectralField sym = apply_T(hat, Coordinates::frequency);
      sym *= i;
      const FormField dl = coderivative_delta(e);
      CHECK(l2_norm(fourier(dl) - sym) < 1e-12 * l2_norm(dl));
    }
  }
}

TEST_CASE("Gaffney identity") {
  const GridSpec g2 = box(2, 16);
  const double k = std::numbers::pi / g2.half_length;
  const FormField phi = sampled(g2, 1, [k](std::size_t c, const NodeCoords& x) {
    return c == 1 ? Complex(std::sin(k * x[0])) : Complex(0.0);
  });
  CHECK(l2_norm(coderivative_delta(phi)) < 1e-13);
  const GaffneyReport r = gaffney_identity_check(phi);
  CHECK(r.relative_gap < 1e-13);
  CHECK(r.gradient_sq == doctest::Approx(std::pow(l2_norm(exterior_d(phi)), 2)).epsilon(1e-12));

  const GaffneyReport z = gaffney_identity_check(FormField(g2, 1));
  CHECK(z.gradient_sq == 0.0);
  CHECK(z.maxwell_sq == 0.0);
  CHECK(z.relative_gap == 0.0);

  for (int n_dim = 2; n_dim <= 4; ++n_dim) {
    const GridSpec g = box(n_dim, 8);
    for (int q = 0; q <= n_dim; ++q) {
      CHECK(gaffney_identity_check(band_limited_random(g, q, 90 + q)).relative_gap <= 1e-10);
    }
  }
}

TEST_CASE("sobolev norm monotone in s") {
  const FormField e = band_limited_random(box(2, 16), 1, 3);
  double last = 0.0;
  for (double s : {-2.0, -1.0, 0.0, 0.5, 1.0, 2.0}) {
    const double v = spectral_sobolev_norm(e, s);
    CHECK(v >= last);
    last = v;
  }
}
