#include <doctest.h>

#include <filesystem>

#include "formcalc/manufactured.hpp"
#include "formcalc/media.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;
using testing_util::rel_diff;

namespace {

Transformation random_admissible(const GridSpec& g, int rank, unsigned seed) {
  const int size = static_cast<int>(binomial(g.dim, rank));
  Eigen::MatrixXd m = fixed_symmetric_matrix(size);
  // rotate the fixed matrix with a seeded permutation so members differ
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(size, size);
  for (int i = 0; i + 1 < size; ++i)
    if ((seed >> i) & 1u) p.row(i).swap(p.row(i + 1));
  m = p * m * p.transpose();
  NodeCoords c{};
  c[0] = 0.2 * (seed % 3);
  std::vector<PerturbationTerm> terms = {{RadialProfile::gaussian(0.7, 1.0, c), m}};
  return make_transformation(TransformationSpec::perturbation(g.dim, rank, terms, {DecayKind::second_kind, 1.0}), g);
}

double max_matrix_gap(const Transformation& a, const Transformation& b, const GridSpec& g) {
  double worst = 0.0;
  for (std::size_t node = 0; node < g.node_count(); ++node)
    worst = std::max(worst, (a.matrix_at(g, node) - b.matrix_at(g, node)).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("identity transformation") {
  const GridSpec g = box(3, 8);
  const Transformation id = make_transformation(TransformationSpec::identity(3, 1), g);
  CHECK(id.is_identity());
  CHECK(id.positivity() == 1.0);
  const FormField e = band_limited_random(g, 1, 1);
  CHECK((apply(id, e) - e).max_abs() == 0.0);
  const auto [tau, rho] = split_tangential_normal(e);
  CHECK((reconstruct_from_split(tau, rho, id) - e).max_abs() == 0.0);
  CHECK(max_matrix_gap(reflected_transform(id), id, g) == 0.0);
}

TEST_CASE("scalar 1 + exp(-r^2)") {
  const GridSpec g = box(3, 16);
  for (int q = 0; q <= 3; ++q) {
    const Transformation mu = make_transformation(catalog_spec("scalar-exp", 3, q, {DecayKind::second_kind, 4.0}, 3), g);
    const AdmissibilityReport r = verify_admissibility(mu, g, 20, 3);
    CHECK(r.max_asymmetry == 0.0);
    CHECK(r.min_sampled_rayleigh >= 1.0 - 1e-12);
    CHECK(mu.positivity() >= 1.0 - 1e-12);
    CHECK(r.decay_consistent);
    const FormField e = band_limited_random(g, q, 2);
    CHECK(rel_diff(apply_inverse(mu, apply(mu, e)), e) < 1e-12);

    // reflection evaluates mu at the mirrored node
    const Transformation mr = reflected_transform(mu);
    const std::size_t n = static_cast<std::size_t>(g.points);
    double worst = 0.0;
    for (std::size_t node = 0; node < g.node_count(); ++node) {
      const std::size_t k = node % n;
      const std::size_t mirrored = node - k + (n - k) % n;
      worst = std::max(worst, (mr.matrix_at(g, node) - mu.matrix_at(g, mirrored)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("rejections") {
  const GridSpec g = box(2, 8);
  // eigenvalue 1 - 1.1 = -0.1 at the origin node
  const Eigen::MatrixXd m = -1.1 * Eigen::MatrixXd::Identity(2, 2);
  try {
    make_transformation(TransformationSpec::perturbation(2, 1, {{RadialProfile::gaussian(1.0, 0.5), m}}), g);
    FAIL("indefinite media accepted");
  } catch (const AdmissibilityError& err) {
    CHECK(err.report.min_eigenvalue == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(g.radius(err.report.worst_node) == 0.0);
  }
  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(2, 2);
  skew(0, 1) = 0.2;
  CHECK_THROWS_AS(make_transformation(TransformationSpec::perturbation(2, 1, {{RadialProfile::gaussian(0.5, 1.0), skew}}), g),
                  AdmissibilityError);
}

TEST_CASE("random admissible media") {
  const GridSpec g = box(3, 8);
  for (int q = 0; q <= 3; ++q) {
    for (unsigned seed = 0; seed < 4; ++seed) {
      const Transformation eps = random_admissible(g, q, seed);
      const FormField e = band_limited_random(g, q, 10 + seed);
      const FormField h = band_limited_random(g, q, 20 + seed);
      const Complex gap = l2_inner(apply(eps, e), h) - l2_inner(e, apply(eps, h));
      CHECK(std::abs(gap) < 1e-12 * l2_norm(e) * l2_norm(h));
      CHECK(rel_diff(apply(eps, apply_inverse(eps, e)), e) < 1e-12);

      const auto [tau, rho] = split_tangential_normal(e);
      const auto [unused, image_rho] = split_tangential_normal(apply(eps, e));
      (void)unused;
      CHECK(rel_diff(reconstruct_from_split(tau, image_rho, eps), e) <= 1e-10);

      CHECK(max_matrix_gap(reflected_transform(reflected_transform(eps)), eps, g) < 1e-12);
    }
  }
}

TEST_CASE("full-rank reconstruction is the inverse") {
  const GridSpec g = box(3, 8);
  const Transformation eps = random_admissible(g, 3, 1);
  const FormField e = band_limited_random(g, 3, 5);
  const auto [tau, rho] = split_tangential_normal(e);
  CHECK(tau.max_abs() == 0.0);
  CHECK(rel_diff(reconstruct_from_split(tau, apply(eps, e), eps), apply_inverse(eps, apply(eps, e))) < 1e-13);
}

TEST_CASE("compound matrices and star") {
  Eigen::MatrixXd reflect = Eigen::MatrixXd::Identity(3, 3);
  reflect(2, 2) = -1.0;
  for (int q = 0; q <= 3; ++q) {
    const Eigen::MatrixXd c = pullback_compound(reflect, q);
    CHECK((c * c - Eigen::MatrixXd::Identity(c.rows(), c.cols())).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd s = star_matrix(3, q);
    const Eigen::MatrixXd back = star_matrix(3, 3 - q);
    CHECK(((back * s).cwiseAbs() - Eigen::MatrixXd::Identity(s.cols(), s.cols())).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("media files") {
  const auto dir = std::filesystem::temp_directory_path();
  const GridSpec g = box(2, 8);

  MediaFile cat;
  cat.spec = catalog_spec("algebraic", 2, 1, {DecayKind::second_kind, 1.0}, 2);
  cat.catalog_tag = "algebraic";
  save_media(dir / "formcalc_cat.eps", cat);
  const MediaFile cat_back = load_media(dir / "formcalc_cat.eps");
  CHECK(cat_back.catalog_tag == "algebraic");
  CHECK(cat_back.spec.decay.tau == 1.0);
  const Transformation a = transformation_from_file(cat_back, g);
  const Transformation b = make_transformation(cat.spec, g);
  CHECK(max_matrix_gap(a, b, g) == 0.0);

  MediaFile dense;
  dense.spec = TransformationSpec::identity(2, 1);
  dense.dense = true;
  dense.grid = g;
  dense.matrices.resize(g.node_count() * 4);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    dense.matrices[node * 4 + 0] = 2.0;
    dense.matrices[node * 4 + 1] = 0.25;
    dense.matrices[node * 4 + 2] = 0.25;
    dense.matrices[node * 4 + 3] = 1.0;
  }
  save_media(dir / "formcalc_dense.eps", dense);
  const Transformation d = transformation_from_file(load_media(dir / "formcalc_dense.eps"), g);
  CHECK(d.is_dense());
  CHECK(d.matrix_at(g, 7)(0, 1) == 0.25);
  CHECK(d.positivity() > 0.0);
  std::filesystem::remove(dir / "formcalc_cat.eps");
  std::filesystem::remove(dir / "formcalc_dense.eps");
}
