#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <json.hpp>

#include "formcalc/halfspace.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/probes.hpp"
#include "formcalc/spectral.hpp"
#include "helpers.hpp"

using namespace formcalc;
using testing_util::box;
using testing_util::rel_diff;

namespace {

ProbeParams small(const std::string& variant, int dim, int rank) {
  ProbeParams p;
  p.variant = variant;
  p.dim = dim;
  p.rank = rank;
  p.ensemble = 4;
  p.grid = 16;
  p.seed = 3;
  return p;
}

double aggregate(const ProbeReport& r, const std::string& name) {
  for (const auto& [k, v] : r.aggregates)
    if (k == name) return v;
  FAIL("missing aggregate " << name);
  return 0.0;
}

}  // namespace

TEST_CASE("manufactured generators") {
  const GridSpec g = box(2, 32);
  const Manufactured bump = generate_manufactured(ManufacturedKind::bump, g, 0, Region::ball(1.0), 1);
  const auto inside = Region::ball(1.0).mask(g);
  for (std::size_t node = 0; node < g.node_count(); ++node)
    if (!inside[node]) CHECK(bump.field.at(0, node) == Complex(0.0));
  REQUIRE(bump.expression.has_value());
  CHECK_THROWS_AS(generate_manufactured(ManufacturedKind::bump, g, 0, Region::ball(2.0), 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_manufactured(ManufacturedKind::band_limited_random, g, 0, Region::ball(1.0), 1),
                  std::invalid_argument);

  const Manufactured a = generate_manufactured(ManufacturedKind::band_limited_random, g, 1, Region::full(), 9);
  const Manufactured b = generate_manufactured(ManufacturedKind::band_limited_random, g, 1, Region::full(), 9);
  CHECK((a.field - b.field).max_abs() == 0.0);
  // spectrum confined to |k| <= n/4
  const SpectralField hat = fourier(a.field);
  const double kmax = std::numbers::pi / g.half_length * (g.points / 4);
  double outside = 0.0;
  for (std::size_t c = 0; c < hat.component_count(); ++c) {
    for (std::size_t node = 0; node < hat.node_count(); ++node) {
      bool high = false;
      for (int axis = 0; axis < 2; ++axis) high |= std::abs(g.wavenumber(g.axis_index(node, axis))) > kmax + 1e-12;
      if (high) outside = std::max(outside, std::abs(hat.at(c, node)));
    }
  }
  CHECK(outside < 1e-12);

  for (int entry = 0; entry < trig_catalog_size; ++entry) {
    const FormExpression t = trig_catalog(3, 1, entry, g.half_length);
    const GridSpec g3 = box(3, 16);
    for (int axis = 0; axis < 3; ++axis) CHECK(rel_diff(partial(t.sample(g3), axis), t.sample_partial(g3, axis)) <= 1e-12);
  }
}

TEST_CASE("parallel helper covers every index once") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for_index(hits.size(), [&](std::size_t i) { hits[i]++; }, 3);
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for_index(5, [](std::size_t i) {
    if (i == 3) throw std::runtime_error("boom");
  }));
}

TEST_CASE("interior probe with identity media is Gaffney-bounded") {
  const ProbeReport r = estimate_probe_interior(small("interior", 3, 1));
  CHECK(r.all_pass());
  CHECK(aggregate(r, "sup_ratio") <= 1.5);
  CHECK(r.samples.size() == 4);
  for (const auto& s : r.samples) CHECK(std::isfinite(s.ratio));
}

TEST_CASE("weighted probe") {
  ProbeParams p = small("weighted", 2, 1);
  p.tau = 1.0;
  p.media = "algebraic";
  const ProbeReport r = estimate_probe_weighted(p);
  CHECK(std::isfinite(aggregate(r, "sup_ratio")));
  p.tau = 0.0;
  CHECK_THROWS_AS(estimate_probe_weighted(p), std::invalid_argument);
}

TEST_CASE("halfspace probe and trace rejection") {
  for (int q : {0, 2}) {
    const ProbeReport r = halfspace_probe(small("halfspace", 2, q));
    CHECK(std::isfinite(aggregate(r, "sup_ratio")));
  }
  const FormField bad = band_limited_random(box(2, 16), 1, 4);
  CHECK_THROWS_AS(require_vanishing_tangential_trace(bad), std::invalid_argument);
}

TEST_CASE("reports are deterministic and well formed") {
  const ProbeParams p = small("interior", 2, 0);
  const ProbeReport a = run_estimate(p);
  const ProbeReport b = run_estimate(p);
  CHECK(a.to_json() == b.to_json());
  const auto doc = nlohmann::json::parse(a.to_json());
  CHECK(doc.contains("probe"));
  CHECK(doc.contains("params"));
  CHECK(doc["samples"].size() == 4);
  CHECK(doc.contains("aggregates"));
  CHECK(doc.contains("flags"));
  const std::string csv = a.samples_csv();
  CHECK(csv.rfind("index,lhs,rhs,ratio,ratio_refined", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  ProbeReport z;
  z.check("nan", std::nan(""), 1.0);
  CHECK_FALSE(z.all_pass());
  CHECK_THROWS_AS(run_estimate(small("exterior", 2, 0)), std::invalid_argument);
}

TEST_CASE("vector bridge") {
  const GridSpec g = box(3, 16);
  VectorFieldN3 v{g, {}};
  for (int k = 0; k < 3; ++k) {
    const FormField f = band_limited_random(g, 0, 10 + k);
    v.v[k].assign(f.component(0).begin(), f.component(0).end());
  }
  for (int q : {1, 2}) {
    const VectorFieldN3 back = vector_bridge_inverse(vector_bridge_n3(v, q));
    for (int k = 0; k < 3; ++k) CHECK(back.v[k] == v.v[k]);
  }
  // curl grad = 0
  const FormField f = band_limited_random(g, 0, 20);
  const FormField grad_form = vector_bridge_n3(spectral_grad(f), 1);
  CHECK(l2_norm(exterior_d(grad_form)) <= 1e-12 * l2_norm(grad_form));
  // d on 1-forms is curl
  const VectorFieldN3 curl = spectral_curl(v);
  CHECK(rel_diff(exterior_d(vector_bridge_n3(v, 1)), vector_bridge_n3(curl, 2)) <= 1e-10);
  // delta on 2-forms is -curl
  VectorFieldN3 minus = curl;
  for (auto& comp : minus.v)
    for (auto& x : comp) x = -x;
  CHECK(rel_diff(coderivative_delta(vector_bridge_n3(v, 2)), vector_bridge_n3(minus, 1)) <= 1e-10);
  CHECK_THROWS_AS(vector_bridge_n3(VectorFieldN3{box(2, 8), {}}, 1), std::invalid_argument);

  const ProbeReport r = bridge_check(16, 2, 5);
  CHECK(r.all_pass());
}

TEST_CASE("identity suite on a small grid") {
  const ProbeReport r = run_identity_suite(2, 16, 7);
  for (const auto& f : r.flags) {
    INFO(f.name << " worst " << f.worst << " tol " << f.tolerance);
    CHECK(f.pass);
  }
  CHECK(r.to_json() == run_identity_suite(2, 16, 7).to_json());
}
