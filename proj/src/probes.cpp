#include "formcalc/probes.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "formcalc/halfspace.hpp"
#include "formcalc/manufactured.hpp"
#include "formcalc/sobolev.hpp"
#include "formcalc/spectral.hpp"

namespace formcalc {

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

void ProbeReport::check(const std::string& name, double worst, double tolerance) {
  flags.push_back({name, worst, tolerance, std::isfinite(worst) && worst <= tolerance});
}

bool ProbeReport::all_pass() const {
  return std::all_of(flags.begin(), flags.end(), [](const InvariantFlag& f) { return f.pass; });
}

std::string ProbeReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["probe"] = probe;
  ordered_json p;
  if (!params.variant.empty()) p["variant"] = params.variant;
  p["dim"] = params.dim;
  p["rank"] = params.rank;
  p["order"] = params.order;
  p["weight"] = params.weight;
  p["tau"] = params.tau;
  p["media"] = params.media;
  p["ensemble"] = params.ensemble;
  p["grid"] = params.grid;
  p["seed"] = params.seed;
  doc["params"] = p;
  ordered_json samples_json = ordered_json::array();
  for (const auto& s : samples) {
    ordered_json row;
    row["index"] = s.index;
    row["lhs"] = s.lhs;
    row["rhs"] = s.rhs;
    row["ratio"] = s.ratio;
    if (s.ratio_refined) row["ratio_refined"] = *s.ratio_refined;
    samples_json.push_back(row);
  }
  doc["samples"] = samples_json;
  ordered_json agg = ordered_json::object();
  for (const auto& [k, v] : aggregates) agg[k] = v;
  doc["aggregates"] = agg;
  ordered_json diag = ordered_json::object();
  for (const auto& [k, v] : diagnostics) diag[k] = v;
  doc["diagnostics"] = diag;
  ordered_json flag_json = ordered_json::array();
  for (const auto& f : flags) {
    flag_json.push_back({{"name", f.name}, {"worst", f.worst}, {"tolerance", f.tolerance}, {"pass", f.pass}});
  }
  doc["flags"] = flag_json;
  doc["pass"] = all_pass();
  return doc.dump(2) + "\n";
}

std::string ProbeReport::samples_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "index,lhs,rhs,ratio,ratio_refined\n";
  for (const auto& s : samples) {
    out << s.index << ',' << s.lhs << ',' << s.rhs << ',' << s.ratio << ',';
    if (s.ratio_refined) out << *s.ratio_refined;
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Parallel ensemble helper
// ---------------------------------------------------------------------------

void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Media resolution
// ---------------------------------------------------------------------------

Transformation resolve_media(const std::string& media, int dim, int rank, double tau, const GridSpec& grid) {
  if (media == "id" || media == "identity") return Transformation::identity(dim, rank);
  if (media == "scalar") {
    return make_transformation(catalog_spec("scalar-exp", dim, rank, {DecayKind::second_kind, tau}, 3), grid);
  }
  if (media == "algebraic") {
    return make_transformation(catalog_spec("algebraic", dim, rank, {DecayKind::second_kind, tau}, 3), grid);
  }
  if (media.rfind("file:", 0) == 0) {
    const MediaFile file = load_media(media.substr(5));
    if (file.spec.dim != dim || file.spec.rank != rank) {
      throw std::invalid_argument("media file describes a different dimension or rank");
    }
    return transformation_from_file(file, grid);
  }
  throw std::invalid_argument("unknown media '" + media + "' (expected id, scalar, algebraic or file:PATH)");
}

// ---------------------------------------------------------------------------
// Estimate probes
// ---------------------------------------------------------------------------

namespace {

constexpr double kDriftTolerance = 0.10;
constexpr double kMemberWidth = 0.8;

GridSpec probe_grid(int dim, int n) {
  GridSpec g{dim, std::numbers::pi, n, true};
  g.validate();
  return g;
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t index) { return seed * 1000003ull + index * 7919ull + 17ull; }

double safe_ratio(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : 0.0; }

void validate_params(const ProbeParams& p) {
  if (p.dim < 2 || p.dim > 4) throw std::invalid_argument("probe: dimension must be 2, 3 or 4");
  if (p.rank < 0 || p.rank > p.dim) throw std::invalid_argument("probe: rank out of range");
  if (p.order < 0 || p.order > 2) throw std::invalid_argument("probe: order m must be 0, 1 or 2");
  if (p.ensemble < 1) throw std::invalid_argument("probe: ensemble must be positive");
}

struct RatioParts {
  double lhs = 0.0;
  double rhs = 0.0;
};

using MemberFn = std::function<RatioParts(std::size_t index, const GridSpec& grid, const Transformation& eps)>;

/// Runs the ensemble on the grid and on its refinement, filling samples and aggregates.
void run_ensemble(ProbeReport& report, const MemberFn& member, bool refine) {
  const ProbeParams& p = report.params;
  const GridSpec grid = probe_grid(p.dim, p.grid);
  const Transformation eps = resolve_media(p.media, p.dim, p.rank, p.tau, grid);
  std::optional<Transformation> eps_fine;
  if (refine) eps_fine = resolve_media(p.media, p.dim, p.rank, p.tau, grid.refined());

  report.samples.assign(static_cast<std::size_t>(p.ensemble), {});
  parallel_for_index(report.samples.size(), [&](std::size_t i) {
    ProbeSample& s = report.samples[i];
    s.index = i;
    const RatioParts parts = member(i, grid, eps);
    s.lhs = parts.lhs;
    s.rhs = parts.rhs;
    s.ratio = safe_ratio(parts.lhs, parts.rhs);
    if (refine) {
      const RatioParts fine = member(i, grid.refined(), *eps_fine);
      s.ratio_refined = safe_ratio(fine.lhs, fine.rhs);
    }
  });

  double sup = 0.0, mean = 0.0, sup_fine = 0.0;
  int non_finite = 0;
  for (const auto& s : report.samples) {
    if (!std::isfinite(s.ratio) || (s.ratio_refined && !std::isfinite(*s.ratio_refined))) ++non_finite;
    sup = std::max(sup, s.ratio);
    mean += s.ratio / static_cast<double>(report.samples.size());
    if (s.ratio_refined) sup_fine = std::max(sup_fine, *s.ratio_refined);
  }
  report.aggregates.emplace_back("sup_ratio", sup);
  report.aggregates.emplace_back("mean_ratio", mean);
  report.check("ratios_finite", non_finite, 0.0);
  if (refine) {
    const double drift = sup > 0.0 ? std::abs(sup_fine - sup) / sup : std::abs(sup_fine);
    report.aggregates.emplace_back("sup_ratio_refined", sup_fine);
    report.aggregates.emplace_back("refinement_drift", drift);
    report.check("refinement_drift", drift, kDriftTolerance);
  }
}

FormExpression interior_member(const ProbeParams& p, std::size_t i) {
  return gaussian_expression(p.dim, p.rank, member_seed(p.seed, i), kMemberWidth, {}, 0.5);
}

FormField delta_eps(const Transformation& eps, const FormField& e) {
  return coderivative_delta(eps.is_identity() ? e : apply(eps, e));
}

bool is_refinable(const std::string& media) { return media.rfind("file:", 0) != 0; }

}  // namespace

ProbeReport estimate_probe_interior(const ProbeParams& params) {
  validate_params(params);
  ProbeReport report;
  report.probe = "estimate_interior";
  report.params = params;
  report.params.variant = "interior";
  const int m = params.order;
  const double s = params.weight;
  const int q = params.rank;
  const int n_dim = params.dim;
  run_ensemble(
      report,
      [&](std::size_t i, const GridSpec& grid, const Transformation& eps) {
        const FormField e = interior_member(params, i).sample(grid);
        RatioParts r;
        r.lhs = weighted_sobolev_norm(e, {m + 1, s, Scale::roman});
        r.rhs = l2_norm(e, s);
        if (q < n_dim) r.rhs += weighted_sobolev_norm(exterior_d(e), {m, s, Scale::roman});
        if (q > 0) r.rhs += weighted_sobolev_norm(delta_eps(eps, e), {m, s, Scale::roman});
        return r;
      },
      is_refinable(params.media));
  if ((params.media == "id" || params.media == "identity") && m == 0 && s == 0.0) {
    report.check("gaffney_pinned_bound", report.aggregates.front().second, 1.5);
  }
  return report;
}

ProbeReport estimate_probe_weighted(const ProbeParams& params) {
  validate_params(params);
  if (!(params.tau > 0.0)) throw std::invalid_argument("estimate_probe_weighted: tau must be positive");
  ProbeReport report;
  report.probe = "estimate_weighted";
  report.params = params;
  report.params.variant = "weighted";
  const int m = params.order;
  const double s = params.weight;
  const int q = params.rank;
  const int n_dim = params.dim;
  run_ensemble(
      report,
      [&](std::size_t i, const GridSpec& grid, const Transformation& eps) {
        const FormField e = interior_member(params, i).sample(grid);
        RatioParts r;
        r.lhs = weighted_sobolev_norm(e, {m + 1, s, Scale::bold});
        r.rhs = l2_norm(e, s);
        if (q < n_dim) r.rhs += weighted_sobolev_norm(exterior_d(e), {m, s + 1.0, Scale::bold});
        if (q > 0) r.rhs += weighted_sobolev_norm(delta_eps(eps, e), {m, s + 1.0, Scale::bold});
        return r;
      },
      is_refinable(params.media));

  // annulus weight splitting and cutoff tails, on the base grid
  const GridSpec grid = probe_grid(params.dim, params.grid);
  const std::array<double, 3> thetas = {0.5, 1.0, 2.0};
  std::vector<double> worst(thetas.size(), 0.0);
  double tail = 0.0;
  const double t = 1.5;
  std::vector<double> outside(grid.node_count());
  for (std::size_t node = 0; node < outside.size(); ++node) {
    // 1 - eta_t with eta_t(x) = phi(r/t), phi = 1 on [0, 1], 0 beyond 2
    const double u = grid.radius(node) / t;
    double eta = 1.0;
    if (u >= 2.0) {
      eta = 0.0;
    } else if (u > 1.0) {
      const double a = std::exp(-1.0 / (2.0 - u));
      const double b = std::exp(-1.0 / (u - 1.0));
      eta = a / (a + b);
    }
    outside[node] = 1.0 - eta;
  }
  for (int i = 0; i < params.ensemble; ++i) {
    const FormField e = interior_member(params, static_cast<std::size_t>(i)).sample(grid);
    for (std::size_t k = 0; k < thetas.size(); ++k) {
      const AnnulusEstimate a = annulus_estimate(e, s, params.tau, thetas[k]);
      worst[k] = std::max(worst[k], safe_ratio(a.lhs, a.rhs));
    }
    const double full = l2_norm(e, s);
    tail = std::max(tail, safe_ratio(l2_norm(scale_pointwise(e, outside), s), full));
  }
  double worst_all = 0.0;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    report.diagnostics.emplace_back("annulus_ratio_theta_" + std::to_string(k), worst[k]);
    worst_all = std::max(worst_all, worst[k]);
  }
  report.diagnostics.emplace_back("cutoff_tail_sup", tail);
  report.check("annulus_estimate", worst_all, 1.0);
  return report;
}

void require_vanishing_tangential_trace(const FormField& e) {
  if (e.rank() == e.dim()) return;
  const double trace = l2_norm(trace_tangential(HalfGridField::restrict_from(e)));
  const double norm = half_norm(HalfGridField::restrict_from(e));
  if (trace > 1e-10 * norm) {
    throw std::invalid_argument("halfspace member violates gamma_t E = 0 (trace norm " + std::to_string(trace) +
                                ", field norm " + std::to_string(norm) + ")");
  }
}

namespace {

double half_sobolev_norm(const FormField& smooth, int order) {
  double sum = 0.0;
  for (const auto& alpha : derivative_multi_indices(smooth.dim(), order)) {
    const bool none = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; });
    const double v = half_norm(HalfGridField::restrict_from(none ? smooth : partial(smooth, alpha)));
    sum += v * v;
  }
  return std::sqrt(sum);
}

FormExpression halfspace_member(const ProbeParams& p, int rank, std::size_t i, std::uint64_t salt) {
  NodeCoords center{};
  center[p.dim - 1] = -0.4;
  return gaussian_expression(p.dim, rank, member_seed(p.seed + salt, i), kMemberWidth, center, 0.4)
      .symmetrized(MirrorKind::delta);
}

}  // namespace

ProbeReport halfspace_probe(const ProbeParams& params) {
  validate_params(params);
  ProbeReport report;
  report.probe = "estimate_halfspace";
  report.params = params;
  report.params.variant = "halfspace";
  const int m = params.order;
  const int q = params.rank;
  const int n_dim = params.dim;
  run_ensemble(
      report,
      [&](std::size_t i, const GridSpec& grid, const Transformation& eps) {
        // the member is smooth across the plane; its restriction is the half-space field
        const FormField g = halfspace_member(params, q, i, 0).sample(grid);
        require_vanishing_tangential_trace(g);
        RatioParts r;
        r.lhs = half_sobolev_norm(g, m + 1);
        r.rhs = half_norm(HalfGridField::restrict_from(g));
        if (q < n_dim) r.rhs += half_sobolev_norm(exterior_d(g), m);
        if (q > 0) r.rhs += half_sobolev_norm(delta_eps(eps, g), m);
        return r;
      },
      is_refinable(params.media));

  // per-member consistency on the base grid, from closed-form derivatives
  const GridSpec grid = probe_grid(params.dim, params.grid);
  const Transformation eps = resolve_media(params.media, params.dim, params.rank, params.tau, grid);
  double worst_reconstruct = 0.0;
  double worst_stokes = 0.0;
  for (int i = 0; i < params.ensemble; ++i) {
    const FormExpression expr = halfspace_member(params, q, static_cast<std::size_t>(i), 0);
    const FormField e = expr.sample(grid);
    if (eps.has_analytic_derivatives()) {
      std::vector<FormField> tangential;
      for (int a = 0; a + 1 < n_dim; ++a) tangential.push_back(expr.sample_partial(grid, a));
      const FormField de = q < n_dim ? expr.sample_d(grid) : FormField();
      const FormField dee = q > 0 ? expr.sample_delta_eps(grid, eps) : FormField();
      const auto grad = normal_derivative_reconstruct(e, de, dee, eps, tangential);
      const FormField direct = expr.sample_partial(grid, n_dim - 1);
      const HalfGridField diff = HalfGridField::restrict_from(grad.back() - direct);
      const double scale = half_norm(HalfGridField::restrict_from(direct));
      worst_reconstruct = std::max(worst_reconstruct, safe_ratio(half_norm(diff), scale));
    }
    if (q < n_dim) {
      const FormExpression h = halfspace_member(params, q + 1, static_cast<std::size_t>(i), 1);
      const StokesResidual st = stokes_pairing_residual(
          HalfGridField::restrict_from(e), HalfGridField::restrict_from(expr.sample_d(grid)),
          HalfGridField::restrict_from(h.sample(grid)), HalfGridField::restrict_from(h.sample_delta(grid)));
      worst_stokes = std::max(worst_stokes, st.residual);
    }
  }
  report.diagnostics.emplace_back("normal_derivative_relative_error", worst_reconstruct);
  report.diagnostics.emplace_back("stokes_residual_sup", worst_stokes);
  report.check("normal_derivative_reconstruction", worst_reconstruct, 1e-8);
  return report;
}

ProbeReport run_estimate(const ProbeParams& params) {
  if (params.variant == "interior") return estimate_probe_interior(params);
  if (params.variant == "weighted") return estimate_probe_weighted(params);
  if (params.variant == "halfspace") return halfspace_probe(params);
  throw std::invalid_argument("unknown probe variant '" + params.variant + "'");
}

// ---------------------------------------------------------------------------
// Classical vector bridge in three dimensions
// ---------------------------------------------------------------------------

namespace {

void require_n3(const GridSpec& grid) {
  if (grid.dim != 3) throw std::invalid_argument("vector bridge: N must be 3");
}

FormField scalar_field(const GridSpec& grid, const std::vector<Complex>& values) {
  return FormField(grid, 0, values);
}

}  // namespace

FormField vector_bridge_n3(const VectorFieldN3& v, int rank) {
  require_n3(v.grid);
  FormField e(v.grid, rank);
  if (rank == 1) {
    for (int a = 0; a < 3; ++a) std::copy(v.v[a].begin(), v.v[a].end(), e.component(a).begin());
  } else if (rank == 2) {
    // lexicographic basis dx^{12}, dx^{13}, dx^{23}; dx^{31} = -dx^{13}
    std::copy(v.v[2].begin(), v.v[2].end(), e.component(0).begin());
    std::transform(v.v[1].begin(), v.v[1].end(), e.component(1).begin(), [](Complex z) { return -z; });
    std::copy(v.v[0].begin(), v.v[0].end(), e.component(2).begin());
  } else {
    throw std::invalid_argument("vector bridge: rank must be 1 or 2");
  }
  return e;
}

VectorFieldN3 vector_bridge_inverse(const FormField& e) {
  require_n3(e.grid());
  VectorFieldN3 v{e.grid(), {}};
  auto take = [](std::span<const Complex> s) { return std::vector<Complex>(s.begin(), s.end()); };
  if (e.rank() == 1) {
    for (int a = 0; a < 3; ++a) v.v[a] = take(e.component(a));
  } else if (e.rank() == 2) {
    v.v[0] = take(e.component(2));
    v.v[1] = take(e.component(1));
    for (auto& z : v.v[1]) z = -z;
    v.v[2] = take(e.component(0));
  } else {
    throw std::invalid_argument("vector bridge: rank must be 1 or 2");
  }
  return v;
}

VectorFieldN3 spectral_grad(const FormField& f) {
  require_n3(f.grid());
  if (f.rank() != 0) throw std::invalid_argument("spectral_grad: need a scalar field");
  VectorFieldN3 out{f.grid(), {}};
  for (int a = 0; a < 3; ++a) {
    const FormField p = partial(f, a);
    out.v[a].assign(p.data().begin(), p.data().end());
  }
  return out;
}

VectorFieldN3 spectral_curl(const VectorFieldN3& v) {
  require_n3(v.grid);
  auto d = [&](int comp, int axis) { return partial(scalar_field(v.grid, v.v[comp]), axis); };
  VectorFieldN3 out{v.grid, {}};
  const FormField c0 = d(2, 1) - d(1, 2);
  const FormField c1 = d(0, 2) - d(2, 0);
  const FormField c2 = d(1, 0) - d(0, 1);
  out.v[0].assign(c0.data().begin(), c0.data().end());
  out.v[1].assign(c1.data().begin(), c1.data().end());
  out.v[2].assign(c2.data().begin(), c2.data().end());
  return out;
}

FormField spectral_div(const VectorFieldN3& v) {
  require_n3(v.grid);
  FormField out(v.grid, 0);
  for (int a = 0; a < 3; ++a) out += partial(scalar_field(v.grid, v.v[a]), a);
  return out;
}

namespace {

double vector_diff(const VectorFieldN3& a, const VectorFieldN3& b, double sign) {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < a.v[k].size(); ++i) worst = std::max(worst, std::abs(a.v[k][i] - sign * b.v[k][i]));
  return worst;
}

double vector_max(const VectorFieldN3& a) {
  double worst = 0.0;
  for (int k = 0; k < 3; ++k)
    for (const auto& z : a.v[k]) worst = std::max(worst, std::abs(z));
  return worst;
}

}  // namespace

ProbeReport bridge_check(int n, std::uint64_t seed, int count) {
  ProbeReport report;
  report.probe = "bridge";
  report.params.dim = 3;
  report.params.rank = 1;
  report.params.grid = n;
  report.params.seed = seed;
  report.params.ensemble = count;
  report.params.media = "id";
  const GridSpec grid = probe_grid(3, n);
  double curl_d = 0, div_delta = 0, div_d = 0, curl_delta = 0, curl_grad = 0, bijection = 0;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = member_seed(seed, static_cast<std::size_t>(i));
    const FormField base = band_limited_random(grid, 1, s);
    const VectorFieldN3 v = vector_bridge_inverse(base);
    const VectorFieldN3 curl = spectral_curl(v);
    const FormField div = spectral_div(v);
    const double scale = std::max({vector_max(curl), div.max_abs(), 1e-300});

    const FormField e1 = vector_bridge_n3(v, 1);
    const FormField e2 = vector_bridge_n3(v, 2);
    curl_d = std::max(curl_d, vector_diff(vector_bridge_inverse(exterior_d(e1)), curl, 1.0) / scale);
    div_delta = std::max(div_delta, (coderivative_delta(e1) - div).max_abs() / scale);
    const FormField d2 = exterior_d(e2);
    div_d = std::max(div_d, (FormField(grid, 0, std::vector<Complex>(d2.data().begin(), d2.data().end())) - div).max_abs() / scale);
    curl_delta = std::max(curl_delta, vector_diff(vector_bridge_inverse(coderivative_delta(e2)), curl, -1.0) / scale);

    const FormField f = band_limited_random(grid, 0, s + 1);
    const FormField grad_form = vector_bridge_n3(spectral_grad(f), 1);
    curl_grad = std::max(curl_grad, exterior_d(grad_form).max_abs() / std::max(grad_form.max_abs(), 1e-300));

    for (int rank : {1, 2}) {
      const FormField e = vector_bridge_n3(v, rank);
      bijection = std::max(bijection, (vector_bridge_n3(vector_bridge_inverse(e), rank) - e).max_abs());
      bijection = std::max(bijection, vector_diff(vector_bridge_inverse(e), v, 1.0));
    }
  }
  report.check("d_on_1forms_is_curl", curl_d, 1e-10);
  report.check("delta_on_1forms_is_div", div_delta, 1e-10);
  report.check("d_on_2forms_is_div", div_d, 1e-10);
  report.check("delta_on_2forms_is_minus_curl", curl_delta, 1e-10);
  report.check("curl_grad_vanishes", curl_grad, 1e-10);
  report.check("bridge_bijection_exact", bijection, 0.0);
  return report;
}

}  // namespace formcalc
