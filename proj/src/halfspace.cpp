#include "formcalc/halfspace.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "formcalc/spectral.hpp"

namespace formcalc {

namespace {

std::size_t last_index(const GridSpec& grid, std::size_t node) {
  return node % static_cast<std::size_t>(grid.points);
}

std::size_t mirror_node(const GridSpec& grid, std::size_t node) {
  const auto n = static_cast<std::size_t>(grid.points);
  const std::size_t k = node % n;
  return node - k + (n - k) % n;
}

double parity_sign(MultiIndex index, int dim, MirrorKind kind) {
  const bool normal = index.contains(dim - 1);
  return (normal == (kind == MirrorKind::d)) ? -1.0 : 1.0;
}

std::size_t boundary_to_full(const GridSpec& grid, std::size_t boundary_node) {
  return boundary_node * static_cast<std::size_t>(grid.points) + static_cast<std::size_t>(grid.points / 2);
}

int aligned_steps(const GridSpec& grid, double h) {
  const double steps = h / grid.spacing();
  const double rounded = std::round(steps);
  if (rounded == 0.0 || std::abs(steps - rounded) > 1e-9) {
    throw std::invalid_argument("shift: step must be a nonzero multiple of the grid spacing");
  }
  return static_cast<int>(rounded);
}

}  // namespace

// ---------------------------------------------------------------------------
// Half grid storage and quadrature
// ---------------------------------------------------------------------------

HalfGridField::HalfGridField(const GridSpec& grid, int rank) : field_(grid, rank) {
  if (grid.dim < 2) throw std::invalid_argument("HalfGridField: need N >= 2");
}

bool HalfGridField::in_half(const GridSpec& grid, std::size_t node) {
  return last_index(grid, node) <= static_cast<std::size_t>(grid.points / 2);
}

HalfGridField HalfGridField::restrict_from(const FormField& full) {
  HalfGridField out(full.grid(), full.rank());
  for (std::size_t c = 0; c < full.component_count(); ++c) {
    auto src = full.component(c);
    auto dst = out.field_.component(c);
    for (std::size_t node = 0; node < src.size(); ++node) {
      if (in_half(full.grid(), node)) dst[node] = src[node];
    }
  }
  return out;
}

std::vector<double> trapezoid_weights(const GridSpec& grid) {
  std::vector<double> w(static_cast<std::size_t>(grid.points), 0.0);
  const int half = grid.points / 2;
  for (int k = 0; k <= half; ++k) w[k] = 1.0;
  w[0] = 0.5;
  w[half] = 0.5;
  return w;
}

std::vector<double> end_corrected_weights(const GridSpec& grid, int order) {
  const int half = grid.points / 2;
  const int p = std::max(1, std::min(order, half - 1));
  // sum_j c_j j^m / m! reproduces the endpoint terms of the Euler-Maclaurin expansion
  static constexpr double kBernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0,          -1.0 / 30.0,
                                          5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};
  if (p > 16) throw std::invalid_argument("end_corrected_weights: order too high");
  Eigen::MatrixXd a(p, p);
  Eigen::VectorXd b(p);
  double factorial = 1.0;
  for (int m = 0; m < p; ++m) {
    if (m > 0) factorial *= m;
    for (int j = 0; j < p; ++j) a(m, j) = (m == 0 ? 1.0 : std::pow(j, m)) / factorial;
    if (m == 0) {
      b[m] = -0.5;
    } else if (m % 2 == 1) {
      b[m] = kBernoulli[(m - 1) / 2] / (factorial * (m + 1));
    } else {
      b[m] = 0.0;
    }
  }
  const Eigen::VectorXd c = a.fullPivLu().solve(b);
  std::vector<double> w = trapezoid_weights(grid);
  w[half] = 1.0;
  for (int j = 0; j < p; ++j) w[half - j] = 1.0 + c[j];
  return w;
}

Complex half_inner(const HalfGridField& e, const HalfGridField& h, std::span<const double> normal_weights,
                   double weight) {
  if (!e.field().compatible(h.field())) throw std::invalid_argument("half_inner: rank or grid mismatch");
  const GridSpec& grid = e.grid();
  if (normal_weights.size() != static_cast<std::size_t>(grid.points)) {
    throw std::invalid_argument("half_inner: need one weight per x_N index");
  }
  const std::vector<double> rho = weight == 0.0 ? std::vector<double>{} : rho_power(grid, 2.0 * weight);
  Complex sum{};
  for (std::size_t c = 0; c < e.field().component_count(); ++c) {
    auto a = e.field().component(c);
    auto b = h.field().component(c);
    for (std::size_t node = 0; node < a.size(); ++node) {
      const double w = normal_weights[last_index(grid, node)] * (rho.empty() ? 1.0 : rho[node]);
      if (w != 0.0) sum += w * a[node] * std::conj(b[node]);
    }
  }
  return sum * grid.cell_volume();
}

Complex half_inner(const HalfGridField& e, const HalfGridField& h, double weight) {
  return half_inner(e, h, trapezoid_weights(e.grid()), weight);
}

double half_norm(const HalfGridField& e, double weight) { return std::sqrt(std::abs(half_inner(e, e, weight))); }

// ---------------------------------------------------------------------------
// Mirror operators
// ---------------------------------------------------------------------------

FormField mirror_Sd(const HalfGridField& e) {
  const GridSpec& grid = e.grid();
  FormField out = e.field();
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    const double sign = parity_sign(out.basis(c), grid.dim, MirrorKind::d);
    auto dst = out.component(c);
    for (std::size_t node = 0; node < dst.size(); ++node) {
      if (!HalfGridField::in_half(grid, node)) dst[node] = sign * dst[mirror_node(grid, node)];
    }
  }
  return out;
}

FormField mirror_Sdelta(const HalfGridField& e) {
  const int q = e.rank();
  const int n = e.dim();
  FormField out = hodge_star(mirror_Sd(HalfGridField::restrict_from(hodge_star(e.field()))));
  if ((q * (n - q)) % 2 != 0) out *= -1.0;
  return out;
}

FormField reflect(const FormField& e, MirrorKind kind) {
  const GridSpec& grid = e.grid();
  FormField out(grid, e.rank());
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    const double sign = parity_sign(out.basis(c), grid.dim, kind);
    auto src = e.component(c);
    auto dst = out.component(c);
    for (std::size_t node = 0; node < dst.size(); ++node) dst[node] = sign * src[mirror_node(grid, node)];
  }
  return out;
}

HalfGridField symmetrized(const FormField& e, MirrorKind kind) {
  FormField g = e + reflect(e, kind);
  g *= 0.5;
  return HalfGridField::restrict_from(g);
}

// ---------------------------------------------------------------------------
// Shifts and difference quotients
// ---------------------------------------------------------------------------

FormField shift(const FormField& e, int axis, double h) {
  const GridSpec& grid = e.grid();
  if (axis < 0 || axis >= grid.dim) throw std::invalid_argument("shift: axis out of range");
  const int steps = aligned_steps(grid, h);
  const auto n = static_cast<std::size_t>(grid.points);
  const std::size_t stride = grid.stride(axis);
  const std::size_t offset = static_cast<std::size_t>(((steps % grid.points) + grid.points) % grid.points);
  FormField out(grid, e.rank());
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    auto src = e.component(c);
    auto dst = out.component(c);
    for (std::size_t node = 0; node < dst.size(); ++node) {
      const std::size_t k = (node / stride) % n;
      dst[node] = src[node - k * stride + ((k + offset) % n) * stride];
    }
  }
  return out;
}

HalfGridField shift(const HalfGridField& e, int axis, double h) {
  if (axis == e.dim() - 1) throw std::invalid_argument("shift: normal-axis shifts leave the half grid");
  return HalfGridField::restrict_from(shift(e.field(), axis, h));
}

FormField diff_quotient(const FormField& e, int axis, double h) {
  FormField out = shift(e, axis, h) - e;
  out *= 1.0 / h;
  return out;
}

HalfGridField diff_quotient(const HalfGridField& e, int axis, double h) {
  if (axis == e.dim() - 1) throw std::invalid_argument("diff_quotient: normal-axis shifts leave the half grid");
  return HalfGridField::restrict_from(diff_quotient(e.field(), axis, h));
}

double product_rule_residual(const Transformation& eps, const FormField& f, int axis, double h) {
  const GridSpec& grid = f.grid();
  const FormField lhs = diff_quotient(apply(eps, f), axis, h);
  const FormField rhs = apply(eps, diff_quotient(f, axis, h));
  const FormField shifted = shift(f, axis, h);
  const int steps = aligned_steps(grid, h);
  const auto n = static_cast<std::size_t>(grid.points);
  const std::size_t stride = grid.stride(axis);
  const std::size_t offset = static_cast<std::size_t>(((steps % grid.points) + grid.points) % grid.points);
  double worst = 0.0;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(f.component_count()));
  for (std::size_t node = 0; node < f.node_count(); ++node) {
    const std::size_t k = (node / stride) % n;
    const std::size_t ahead = node - k * stride + ((k + offset) % n) * stride;
    const Eigen::MatrixXd dq = (eps.matrix_at(grid, ahead) - eps.matrix_at(grid, node)) / h;
    for (std::size_t c = 0; c < f.component_count(); ++c) v[static_cast<Eigen::Index>(c)] = shifted.at(c, node);
    const Eigen::VectorXcd term = dq.cast<Complex>() * v;
    for (std::size_t c = 0; c < f.component_count(); ++c) {
      worst = std::max(worst, std::abs(lhs.at(c, node) - rhs.at(c, node) - term[static_cast<Eigen::Index>(c)]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

FormField trace_tangential(const HalfGridField& e) {
  const GridSpec& grid = e.grid();
  if (e.rank() == grid.dim) throw std::invalid_argument("trace_tangential: rank-N forms have no tangential part");
  const GridSpec plane = grid.boundary();
  FormField out(plane, e.rank());
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    auto src = e.field().component(out.basis(c));
    auto dst = out.component(c);
    for (std::size_t b = 0; b < dst.size(); ++b) dst[b] = src[boundary_to_full(grid, b)];
  }
  return out;
}

FormField boundary_star(const FormField& boundary_form) {
  FormField out = hodge_star(boundary_form);
  // the boundary dimension is N-1, so the orientation factor is (-1)^{dim of the plane}
  if (boundary_form.dim() % 2 != 0) out *= -1.0;
  return out;
}

FormField trace_normal(const HalfGridField& e) {
  const int q = e.rank();
  const int n = e.dim();
  if (q < 1) throw std::invalid_argument("trace_normal: rank 0 has no normal trace");
  FormField out = boundary_star(trace_tangential(HalfGridField::restrict_from(hodge_star(e.field()))));
  if (((q - 1) * n) % 2 != 0) out *= -1.0;
  return out;
}

HalfGridField extend_boundary_form(const FormField& boundary_form, const GridSpec& grid, double width) {
  if (boundary_form.dim() != grid.dim - 1 || boundary_form.grid().points != grid.points ||
      boundary_form.grid().half_length != grid.half_length) {
    throw std::invalid_argument("extend_boundary_form: boundary grid does not match");
  }
  if (!(width > 0.0)) throw std::invalid_argument("extend_boundary_form: width must be positive");
  FormField full(grid, boundary_form.rank());
  const auto n = static_cast<std::size_t>(grid.points);
  std::vector<double> cutoff(n, 0.0);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double t = grid.coordinate(static_cast<int>(k)) / width;
    if (t * t < 1.0) cutoff[k] = std::exp(1.0 - 1.0 / (1.0 - t * t));
  }
  for (std::size_t c = 0; c < boundary_form.component_count(); ++c) {
    auto src = boundary_form.component(c);
    auto dst = full.component(boundary_form.basis(c));
    for (std::size_t node = 0; node < dst.size(); ++node) dst[node] = src[node / n] * cutoff[node % n];
  }
  return HalfGridField::restrict_from(full);
}

StokesResidual stokes_pairing_residual(const HalfGridField& e, const HalfGridField& de, const HalfGridField& h,
                                       const HalfGridField& delta_h, int quadrature_order) {
  if (h.rank() != e.rank() + 1 || de.rank() != e.rank() + 1 || delta_h.rank() != e.rank()) {
    throw std::invalid_argument("stokes_pairing_residual: ranks must be (q, q+1, q+1, q)");
  }
  const std::vector<double> w = end_corrected_weights(e.grid(), quadrature_order);
  StokesResidual r;
  r.volume = (half_inner(de, h, w) + half_inner(e, delta_h, w)).real();
  r.boundary = l2_inner(trace_tangential(e), trace_normal(h)).real();
  r.residual = std::abs(r.volume - r.boundary);
  return r;
}

// ---------------------------------------------------------------------------
// Normal derivatives from d and delta
// ---------------------------------------------------------------------------

namespace {

/// (d_axis eps) E, pointwise.
FormField apply_eps_derivative(const Transformation& eps, const FormField& e, int axis) {
  FormField out(e.grid(), e.rank());
  if (eps.is_identity()) return out;
  const int axes[1] = {axis};
  Eigen::VectorXcd v(static_cast<Eigen::Index>(e.component_count()));
  for (std::size_t node = 0; node < e.node_count(); ++node) {
    const Eigen::MatrixXd m = eps.perturbation_derivative(e.grid().position(node), axes);
    for (std::size_t c = 0; c < e.component_count(); ++c) v[static_cast<Eigen::Index>(c)] = e.at(c, node);
    const Eigen::VectorXcd w = m.cast<Complex>() * v;
    for (std::size_t c = 0; c < e.component_count(); ++c) out.at(c, node) = w[static_cast<Eigen::Index>(c)];
  }
  return out;
}

std::vector<FormField> reconstruct_impl(const FormField& e, const FormField& de, const FormField& delta_eps_e,
                                        const Transformation& eps, const std::vector<FormField>& partials) {
  const int n = e.dim();
  const int q = e.rank();
  const int last = n - 1;
  if (static_cast<int>(partials.size()) != last) {
    throw std::invalid_argument("normal_derivative_reconstruct: need the N-1 tangential partials");
  }
  for (const auto& p : partials) {
    if (!p.compatible(e)) throw std::invalid_argument("normal_derivative_reconstruct: partial has wrong rank or grid");
  }
  if (!eps.is_identity() && (eps.dim() != n || eps.rank() != q)) {
    throw std::invalid_argument("normal_derivative_reconstruct: transformation does not match E");
  }
  const double sign_t = q % 2 == 0 ? 1.0 : -1.0;
  const double sign_n = -sign_t;
  const std::size_t nodes = e.node_count();

  // tangential components: d_N E_I = (-1)^q [ (dE)_{I+N} - sum_{j in I} s_j d_j E_{I+N-j} ]
  FormField tangential(e.grid(), q);
  if (q < n) {
    if (de.rank() != q + 1 || !(de.grid() == e.grid())) {
      throw std::invalid_argument("normal_derivative_reconstruct: dE has wrong rank or grid");
    }
    for (std::size_t c = 0; c < e.component_count(); ++c) {
      const MultiIndex index = e.basis(c);
      if (index.contains(last)) continue;
      const MultiIndex k = index.with(last);
      auto dst = tangential.component(c);
      auto src = de.component(k);
      for (std::size_t node = 0; node < nodes; ++node) dst[node] = src[node];
      for (int j : index.axes()) {
        const MultiIndex rest = k.without(j);
        const double s = merge_sign(MultiIndex::from_mask(1u << j), rest);
        auto pj = partials[static_cast<std::size_t>(j)].component(rest);
        for (std::size_t node = 0; node < nodes; ++node) dst[node] -= s * pj[node];
      }
      for (std::size_t node = 0; node < nodes; ++node) dst[node] *= sign_t;
    }
  }

  // normal components of G = eps E:
  // d_N G_I = (-1)^{q-1} [ (delta G)_{I-N} - sum_{j<N, j not in I} s_j d_j G_{I-N+j} ]
  FormField normal_image(e.grid(), q);
  if (q > 0) {
    if (delta_eps_e.rank() != q - 1 || !(delta_eps_e.grid() == e.grid())) {
      throw std::invalid_argument("normal_derivative_reconstruct: delta(eps E) has wrong rank or grid");
    }
    std::vector<FormField> g_partials;
    for (int j = 0; j < last; ++j) {
      FormField gj = eps.is_identity() ? partials[j] : apply(eps, partials[j]);
      gj += apply_eps_derivative(eps, e, j);
      g_partials.push_back(std::move(gj));
    }
    for (std::size_t c = 0; c < e.component_count(); ++c) {
      const MultiIndex index = e.basis(c);
      if (!index.contains(last)) continue;
      const MultiIndex rest = index.without(last);
      auto dst = normal_image.component(c);
      auto src = delta_eps_e.component(rest);
      for (std::size_t node = 0; node < nodes; ++node) dst[node] = src[node];
      for (int j = 0; j < last; ++j) {
        if (rest.contains(j)) continue;
        const double s = merge_sign(MultiIndex::from_mask(1u << j), rest);
        auto gj = g_partials[static_cast<std::size_t>(j)].component(rest.with(j));
        for (std::size_t node = 0; node < nodes; ++node) dst[node] -= s * gj[node];
      }
      for (std::size_t node = 0; node < nodes; ++node) dst[node] *= sign_n;
    }
    // eps^{rho rho} d_N E^rho = d_N G^rho - (d_N eps E)^rho - eps^{rho tau} d_N E^tau
    normal_image -= apply_eps_derivative(eps, e, last);
  }

  std::vector<FormField> out(partials.begin(), partials.end());
  if (eps.is_identity()) {
    out.push_back(tangential + normal_image);
  } else {
    out.push_back(reconstruct_from_split(tangential, normal_image, eps));
  }
  return out;
}

void self_check() {
  // N = 2, E = sin(x_2) dx^1: d_2 E_1 must come back as cos(x_2)
  const GridSpec grid{2, std::numbers::pi, 8, true};
  FormField e(grid, 1);
  FormField expected(grid, 1);
  for (std::size_t node = 0; node < e.node_count(); ++node) {
    const double x2 = grid.position(node)[1];
    e.at(0, node) = std::sin(x2);
    expected.at(0, node) = std::cos(x2);
  }
  const auto result = reconstruct_impl(e, exterior_d(e), coderivative_delta(e), Transformation::identity(2, 1),
                                       {partial(e, 0)});
  if ((result[1] - expected).max_abs() > 1e-10) {
    throw std::logic_error("normal_derivative_reconstruct: sign bookkeeping self-check failed");
  }
}

}  // namespace

std::vector<FormField> normal_derivative_reconstruct(const FormField& e, const FormField& de,
                                                     const FormField& delta_eps_e, const Transformation& eps,
                                                     const std::vector<FormField>& tangential_partials) {
  static std::once_flag checked;
  std::call_once(checked, self_check);
  return reconstruct_impl(e, de, delta_eps_e, eps, tangential_partials);
}

std::vector<char> support_mask(const FormField& e, double threshold) {
  std::vector<char> mask(e.node_count(), 0);
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    auto src = e.component(c);
    for (std::size_t node = 0; node < src.size(); ++node) {
      if (std::abs(src[node]) > threshold) mask[node] = 1;
    }
  }
  return mask;
}

}  // namespace formcalc
