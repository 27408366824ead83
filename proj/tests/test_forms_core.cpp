#include <doctest.h>

#include <sstream>

#include "formcalc/container_io.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/multi_index.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;

TEST_CASE("multi-index basics") {
  const MultiIndex i({0, 2});
  CHECK(i.rank() == 2);
  CHECK(i.label() == "dx^{13}");
  CHECK_THROWS_AS(MultiIndex({2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(MultiIndex({1, 1}), std::invalid_argument);
  const IndexTable& t = index_table(4, 2);
  CHECK(t.size() == 6);
  // lexicographic order: 12, 13, 14, 23, 24, 34
  CHECK(t[0] == MultiIndex({0, 1}));
  CHECK(t[2] == MultiIndex({0, 3}));
  CHECK(t[5] == MultiIndex({2, 3}));
  CHECK(binomial(4, 2) == 6);
  CHECK(merge_sign(MultiIndex({1}), MultiIndex({0})) == -1);
  CHECK(merge_sign(MultiIndex({0}), MultiIndex({1})) == 1);
}

TEST_CASE("grid geometry and regions") {
  const GridSpec g = box(2, 8, 2.0);
  CHECK(g.node_count() == 64);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coordinate(0) == doctest::Approx(-2.0));
  CHECK(g.coordinate(3) == doctest::Approx(-0.5));
  CHECK_THROWS_AS((GridSpec{2, 1.0, 7, true}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{0, 1.0, 8, true}.validate()), std::invalid_argument);
  const auto ball = Region::ball(1.0).mask(g);
  const auto half = Region::lower_half().mask(g);
  std::size_t in_ball = 0;
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    if (ball[node]) {
      ++in_ball;
      CHECK(g.radius(node) < 1.0);
    }
    CHECK(static_cast<bool>(half[node]) == (g.position(node)[1] < 0.0));
  }
  CHECK(in_ball > 0);
}

TEST_CASE("form field layout") {
  const GridSpec g = box(3, 4);
  for (int q = 0; q <= 3; ++q) CHECK(FormField(g, q).component_count() == binomial(3, q));
  CHECK(FormField(g, 0).component_count() == 1);
  CHECK(FormField(g, 3).component_count() == 1);
  CHECK_THROWS(FormField(g, 4));
}

TEST_CASE("wedge signs and graded commutativity") {
  const GridSpec g = box(2, 4);
  const std::vector<Complex> e1 = {1.0, 0.0};
  const std::vector<Complex> e2 = {0.0, 1.0};
  const FormField dx1 = constant_form(g, 1, e1);
  const FormField dx2 = constant_form(g, 1, e2);
  CHECK(wedge(dx1, dx2).at(0, 0) == Complex(1.0));
  CHECK(wedge(dx2, dx1).at(0, 0) == Complex(-1.0));

  const GridSpec d = box(4, 4, 4.0);
  for (int p = 0; p <= 4; ++p) {
    for (int q = 0; p + q <= 4; ++q) {
      const FormField e = dyadic_random(d, p, 10 + p, true);
      const FormField f = dyadic_random(d, q, 20 + q, true);
      FormField swapped = wedge(f, e);
      swapped *= ((p * q) % 2 == 0) ? 1.0 : -1.0;
      CHECK((wedge(e, f) - swapped).max_abs() == 0.0);
    }
  }
}

TEST_CASE("hodge star") {
  const GridSpec g = box(3, 4);
  const FormField dx1 = constant_form(g, 1, std::vector<Complex>{1.0, 0.0, 0.0});
  const FormField dx2 = constant_form(g, 1, std::vector<Complex>{0.0, 1.0, 0.0});
  // rank-2 order: 12, 13, 23
  const FormField s1 = hodge_star(dx1);
  CHECK(s1.at(2, 5) == Complex(1.0));
  CHECK(s1.at(0, 5) == Complex(0.0));
  const FormField s2 = hodge_star(dx2);
  CHECK(s2.at(1, 5) == Complex(-1.0));

  const GridSpec d = box(4, 4, 4.0);
  for (int q = 0; q <= 4; ++q) {
    const FormField e = dyadic_random(d, q, 30 + q, true);
    FormField ss = hodge_star(hodge_star(e));
    ss *= ((q * (4 - q)) % 2 == 0) ? 1.0 : -1.0;
    CHECK((ss - e).max_abs() == 0.0);
  }
}

TEST_CASE("R and T at a node") {
  // n = 8, L = 4: node (k0, k1) = (5, 6) sits at x = (1, 2)
  const GridSpec g = box(2, 8, 4.0);
  const std::size_t node = 5 * 8 + 6;
  CHECK(g.position(node)[0] == 1.0);
  CHECK(g.position(node)[1] == 2.0);
  const FormField one = constant_form(g, 0, std::vector<Complex>{1.0});
  const FormField re = apply_R(one, Coordinates::position);
  CHECK(re.at(0, node) == Complex(1.0));
  CHECK(re.at(1, node) == Complex(2.0));

  const FormField top = constant_form(g, 2, std::vector<Complex>{1.0});
  const FormField th = apply_T(top, Coordinates::position);
  // interior product with x: i_x dx^{12} = x_1 dx^2 - x_2 dx^1
  CHECK(th.at(0, node) == Complex(-2.0));
  CHECK(th.at(1, node) == Complex(1.0));
  // same value through the star composition, up to the rank sign
  const FormField via_star = hodge_star(apply_R(hodge_star(top), Coordinates::position));
  CHECK(std::abs(std::abs(via_star.at(0, node)) - 2.0) == 0.0);
  CHECK(std::abs(std::abs(via_star.at(1, node)) - 1.0) == 0.0);
}

TEST_CASE("operator algebra RR = TT = 0 and RT + TR = r^2") {
  for (int n_dim = 2; n_dim <= 4; ++n_dim) {
    const GridSpec d = box(n_dim, 4, 4.0);
    for (int q = 0; q <= n_dim; ++q) {
      const FormField e = dyadic_random(d, q, 40 + q, true);
      if (q + 2 <= n_dim) {
        CHECK(apply_R(apply_R(e, Coordinates::position), Coordinates::position).max_abs() == 0.0);
      }
      if (q >= 2) CHECK(apply_T(apply_T(e, Coordinates::position), Coordinates::position).max_abs() == 0.0);
      FormField sum(d, q);
      if (q > 0) sum += apply_R(apply_T(e, Coordinates::position), Coordinates::position);
      if (q < n_dim) sum += apply_T(apply_R(e, Coordinates::position), Coordinates::position);
      CHECK((sum - multiply_radius_squared(e, Coordinates::position)).max_abs() == 0.0);
    }
  }
}

TEST_CASE("tangential-normal split") {
  const GridSpec g = box(3, 4);
  const FormField e = constant_form(g, 1, std::vector<Complex>{2.0, 0.0, 5.0});
  const auto [tau, rho] = split_tangential_normal(e);
  CHECK(tau.at(0, 3) == Complex(2.0));
  CHECK(tau.at(2, 3) == Complex(0.0));
  CHECK(rho.at(2, 3) == Complex(5.0));
  CHECK(rho.at(0, 3) == Complex(0.0));
  const FormField f = dyadic_random(g, 0, 3);
  const auto [ft, fr] = split_tangential_normal(f);
  CHECK((ft - f).max_abs() == 0.0);
  CHECK(fr.max_abs() == 0.0);
}

TEST_CASE("L2 inner products") {
  const GridSpec g = box(2, 16, 1.5);
  const FormField one = constant_form(g, 0, std::vector<Complex>{1.0});
  CHECK(l2_inner(one, one).real() == doctest::Approx(9.0).epsilon(1e-14));
  const FormField a = constant_form(g, 1, std::vector<Complex>{1.0, 0.0});
  const FormField b = constant_form(g, 1, std::vector<Complex>{0.0, 1.0});
  CHECK(std::abs(l2_inner(a, b)) == 0.0);

  // weighted norm of a Gaussian against a fine-grid reference
  auto gauss = [](const GridSpec& grid) {
    return testing_util::sampled(grid, 0, [](std::size_t, const NodeCoords& x) {
      return Complex(std::exp(-(x[0] * x[0] + x[1] * x[1])));
    });
  };
  const GridSpec coarse = box(2, 32, 5.0);
  const double v = l2_norm(gauss(coarse), 1.0);
  const double ref = l2_norm(gauss(coarse.refined().refined()), 1.0);
  CHECK(std::abs(v - ref) / ref < 1e-6);
}

TEST_CASE("container roundtrip") {
  const GridSpec g = box(3, 4, 2.0);
  const FormField e = dyadic_random(g, 2, 77, true);
  std::stringstream buf;
  write_form(buf, e);
  const FormField back = read_form(buf);
  CHECK(back.compatible(e));
  CHECK((back - e).max_abs() == 0.0);
  std::stringstream bad("NOTAFORM");
  CHECK_THROWS_AS(read_form(bad), ContainerError);
}
