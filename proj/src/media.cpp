#include "formcalc/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "formcalc/container_io.hpp"

namespace formcalc {

// ---------------------------------------------------------------------------
// RadialProfile
// ---------------------------------------------------------------------------

RadialProfile RadialProfile::constant(double value) {
  RadialProfile p;
  p.kind_ = Kind::constant;
  p.amplitude_ = value;
  return p;
}

RadialProfile RadialProfile::gaussian(double amplitude, double width, const NodeCoords& center) {
  if (!(width > 0.0)) throw std::invalid_argument("RadialProfile::gaussian: width must be positive");
  RadialProfile p;
  p.kind_ = Kind::gaussian;
  p.amplitude_ = amplitude;
  p.parameter_ = width;
  p.center_ = center;
  return p;
}

RadialProfile RadialProfile::algebraic(double amplitude, double exponent, const NodeCoords& center) {
  RadialProfile p;
  p.kind_ = Kind::algebraic;
  p.amplitude_ = amplitude;
  p.parameter_ = exponent;
  p.center_ = center;
  return p;
}

RadialProfile RadialProfile::recentered(const NodeCoords& center) const {
  RadialProfile p = *this;
  p.center_ = center;
  return p;
}

double RadialProfile::g(double u, int k) const {
  switch (kind_) {
    case Kind::constant: return k == 0 ? amplitude_ : 0.0;
    case Kind::gaussian: {
      const double w2 = parameter_ * parameter_;
      return amplitude_ * std::pow(-1.0 / w2, k) * std::exp(-u / w2);
    }
    case Kind::algebraic: {
      const double p = -0.5 * parameter_;
      double factor = 1.0;
      for (int j = 0; j < k; ++j) factor *= (p - j);
      return amplitude_ * factor * std::pow(1.0 + u, p - k);
    }
  }
  return 0.0;
}

double RadialProfile::value(const NodeCoords& x, int dim) const {
  if (kind_ == Kind::constant) return amplitude_;
  double u = 0.0;
  for (int a = 0; a < dim; ++a) u += (x[a] - center_[a]) * (x[a] - center_[a]);
  return g(u, 0);
}

double RadialProfile::derivative(const NodeCoords& x, int dim, std::span<const int> axes) const {
  if (axes.size() > 3) throw std::invalid_argument("RadialProfile: derivatives above third order are not provided");
  if (axes.empty()) return value(x, dim);
  if (kind_ == Kind::constant) return 0.0;
  NodeCoords y{};
  double u = 0.0;
  for (int a = 0; a < dim; ++a) {
    y[a] = x[a] - center_[a];
    u += y[a] * y[a];
  }
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  if (axes.size() == 1) return 2.0 * y[axes[0]] * g(u, 1);
  if (axes.size() == 2) {
    const int l = axes[0], m = axes[1];
    return 2.0 * delta(l, m) * g(u, 1) + 4.0 * y[l] * y[m] * g(u, 2);
  }
  const int l = axes[0], m = axes[1], n = axes[2];
  return 4.0 * (delta(l, m) * y[n] + delta(l, n) * y[m] + delta(m, n) * y[l]) * g(u, 2) +
         8.0 * y[l] * y[m] * y[n] * g(u, 3);
}

// ---------------------------------------------------------------------------
// Transformation
// ---------------------------------------------------------------------------

Transformation Transformation::identity(int dim, int rank) {
  Transformation t(dim, rank, {}, {}, std::numeric_limits<int>::max());
  t.positivity_ = 1.0;
  return t;
}

Transformation::Transformation(int dim, int rank, std::vector<PerturbationTerm> terms, DecayClass decay,
                               int smoothness)
    : dim_(dim), rank_(rank), terms_(std::move(terms)), decay_(decay), smoothness_(smoothness) {
  if (dim < 1 || dim > kMaxDim || rank < 0 || rank > dim) throw std::invalid_argument("Transformation: bad dim/rank");
  size_ = static_cast<int>(binomial(dim, rank));
  for (const auto& t : terms_) {
    if (t.matrix.rows() != size_ || t.matrix.cols() != size_) {
      throw std::invalid_argument("Transformation: term matrix must be C(N,q) x C(N,q)");
    }
  }
}

Transformation Transformation::dense(const GridSpec& grid, int rank, std::vector<double> matrices, DecayClass decay,
                                     int smoothness) {
  Transformation t(grid.dim, rank, {}, decay, smoothness);
  const std::size_t block = static_cast<std::size_t>(t.size_) * t.size_;
  if (matrices.size() != block * grid.node_count()) throw std::invalid_argument("Transformation::dense: size mismatch");
  t.dense_ = true;
  t.dense_grid_ = grid;
  t.dense_data_ = std::move(matrices);
  return t;
}

Eigen::MatrixXd Transformation::matrix_at(const GridSpec& grid, std::size_t node) const {
  if (dense_) {
    if (!(grid == dense_grid_)) throw std::invalid_argument("Transformation: dense data lives on another grid");
    Eigen::MatrixXd m(size_, size_);
    const double* block = dense_data_.data() + node * static_cast<std::size_t>(size_) * size_;
    for (int i = 0; i < size_; ++i)
      for (int j = 0; j < size_; ++j) m(i, j) = block[i * size_ + j];
    return m;
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(size_, size_);
  const NodeCoords x = grid.position(node);
  for (const auto& t : terms_) m += t.profile.value(x, dim_) * t.matrix;
  return m;
}

Eigen::MatrixXd Transformation::perturbation_derivative(const NodeCoords& x, std::span<const int> axes) const {
  if (dense_) throw std::logic_error("Transformation: dense data carries no analytic derivatives");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size_, size_);
  for (const auto& t : terms_) m += t.profile.derivative(x, dim_, axes) * t.matrix;
  return m;
}

// ---------------------------------------------------------------------------
// Construction and verification
// ---------------------------------------------------------------------------

TransformationSpec TransformationSpec::identity(int dim, int rank) {
  TransformationSpec s;
  s.kind = Kind::identity;
  s.dim = dim;
  s.rank = rank;
  return s;
}

TransformationSpec TransformationSpec::scalar(int dim, int rank, RadialProfile excess, DecayClass decay) {
  TransformationSpec s;
  s.kind = Kind::scalar;
  s.dim = dim;
  s.rank = rank;
  s.scalar_excess = excess;
  s.decay = decay;
  return s;
}

TransformationSpec TransformationSpec::perturbation(int dim, int rank, std::vector<PerturbationTerm> terms,
                                                    DecayClass decay) {
  TransformationSpec s;
  s.kind = Kind::perturbation;
  s.dim = dim;
  s.rank = rank;
  s.terms = std::move(terms);
  s.decay = decay;
  return s;
}

namespace {

struct EigenBounds {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t worst_node = 0;
  double max_asymmetry = 0.0;
};

EigenBounds node_eigen_bounds(const Transformation& eps, const GridSpec& grid) {
  EigenBounds b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(eps.size());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Eigen::MatrixXd m = eps.matrix_at(grid, node);
    b.max_asymmetry = std::max(b.max_asymmetry, (m - m.transpose()).cwiseAbs().maxCoeff());
    solver.compute(m, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < b.min) {
      b.min = lo;
      b.worst_node = node;
    }
    b.max = std::max(b.max, hi);
  }
  return b;
}

// all multi-indices alpha with |alpha| = order, as sorted axis lists
std::vector<std::vector<int>> axis_lists(int dim, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> current;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(current.size()) == order) {
      out.push_back(current);
      return;
    }
    for (int a = start; a < dim; ++a) {
      current.push_back(a);
      self(self, a);
      current.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

void fill_decay(const Transformation& eps, const GridSpec& grid, AdmissibilityReport& report) {
  const DecayClass decay = eps.decay();
  if (decay.kind == DecayKind::none || eps.is_dense()) return;
  const int max_order = std::min(eps.smoothness(), 3);
  const double L = grid.half_length;
  report.decay_sup_inner.assign(max_order + 1, 0.0);
  report.decay_sup_outer.assign(max_order + 1, 0.0);
  for (int order = 0; order <= max_order; ++order) {
    const auto alphas = axis_lists(eps.dim(), order);
    const double exponent = decay.tau + (decay.kind == DecayKind::second_kind ? order : 0);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const double r = grid.radius(node);
      const bool inner = r > 0.5 * L && r <= 0.75 * L;
      const bool outer = r > 0.75 * L && r < L;
      if (!inner && !outer) continue;
      const NodeCoords x = grid.position(node);
      double sup = 0.0;
      for (const auto& alpha : alphas) sup = std::max(sup, eps.perturbation_derivative(x, alpha).norm());
      const double ratio = sup * std::pow(r, exponent);
      auto& slot = inner ? report.decay_sup_inner[order] : report.decay_sup_outer[order];
      slot = std::max(slot, ratio);
    }
    // the weighted ratio must not keep growing outward; approach to the limit is tolerated
    if (report.decay_sup_outer[order] > 1.25 * report.decay_sup_inner[order] + 1e-300) report.decay_consistent = false;
  }
}

}  // namespace

Transformation make_transformation(const TransformationSpec& spec, const GridSpec& grid) {
  grid.validate();
  if (spec.dim != grid.dim) throw std::invalid_argument("make_transformation: dimension differs from the grid");
  Transformation eps;
  switch (spec.kind) {
    case TransformationSpec::Kind::identity: return Transformation::identity(spec.dim, spec.rank);
    case TransformationSpec::Kind::scalar: {
      const int size = static_cast<int>(binomial(spec.dim, spec.rank));
      eps = Transformation(spec.dim, spec.rank, {{spec.scalar_excess, Eigen::MatrixXd::Identity(size, size)}}, spec.decay,
                           spec.smoothness);
      break;
    }
    case TransformationSpec::Kind::perturbation:
      eps = Transformation(spec.dim, spec.rank, spec.terms, spec.decay, spec.smoothness);
      break;
  }
  AdmissibilityReport report;
  for (const auto& t : eps.terms()) {
    report.max_asymmetry = std::max(report.max_asymmetry, (t.matrix - t.matrix.transpose()).cwiseAbs().maxCoeff());
  }
  if (report.max_asymmetry > 1e-12) {
    throw AdmissibilityError("make_transformation: perturbation matrix is not symmetric", report);
  }
  const EigenBounds bounds = node_eigen_bounds(eps, grid);
  report.min_eigenvalue = bounds.min;
  report.max_eigenvalue = bounds.max;
  report.worst_node = bounds.worst_node;
  report.min_sampled_rayleigh = bounds.min;
  if (!(bounds.min > 0.0)) {
    throw AdmissibilityError("make_transformation: not positive definite at node " + std::to_string(bounds.worst_node) +
                                 " (smallest Rayleigh quotient " + std::to_string(bounds.min) + ")",
                             report);
  }
  eps.set_positivity(bounds.min);
  return eps;
}

AdmissibilityReport verify_admissibility(const Transformation& eps, const GridSpec& grid, int directions_per_node,
                                         std::uint64_t seed) {
  AdmissibilityReport report;
  const EigenBounds bounds = node_eigen_bounds(eps, grid);
  report.min_eigenvalue = bounds.min;
  report.max_eigenvalue = bounds.max;
  report.worst_node = bounds.worst_node;
  report.max_asymmetry = bounds.max_asymmetry;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double min_rayleigh = std::numeric_limits<double>::infinity();
  Eigen::VectorXd v(eps.size());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    const Eigen::MatrixXd m = eps.matrix_at(grid, node);
    for (int k = 0; k < directions_per_node; ++k) {
      for (int i = 0; i < eps.size(); ++i) v[i] = normal(rng);
      const double q = v.dot(m * v) / v.squaredNorm();
      min_rayleigh = std::min(min_rayleigh, q);
    }
  }
  report.min_sampled_rayleigh = min_rayleigh;
  fill_decay(eps, grid, report);
  return report;
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

namespace {

void require_match(const Transformation& eps, const FormField& e) {
  if (eps.dim() != e.dim() || eps.rank() != e.rank()) throw std::invalid_argument("transformation: rank or dimension mismatch");
}

Eigen::VectorXcd gather(const FormField& e, std::size_t node) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(e.component_count()));
  for (std::size_t c = 0; c < e.component_count(); ++c) v[static_cast<Eigen::Index>(c)] = e.at(c, node);
  return v;
}

void scatter(FormField& e, std::size_t node, const Eigen::VectorXcd& v) {
  for (std::size_t c = 0; c < e.component_count(); ++c) e.at(c, node) = v[static_cast<Eigen::Index>(c)];
}

}  // namespace

FormField apply(const Transformation& eps, const FormField& e) {
  require_match(eps, e);
  if (eps.is_identity()) return e;
  FormField out = e;
  const GridSpec& grid = e.grid();
  if (eps.is_dense()) {
    for (std::size_t node = 0; node < e.node_count(); ++node) {
      scatter(out, node, eps.matrix_at(grid, node).cast<Complex>() * gather(e, node));
    }
    return out;
  }
  for (const auto& term : eps.terms()) {
    const Eigen::MatrixXcd m = term.matrix.cast<Complex>();
    for (std::size_t node = 0; node < e.node_count(); ++node) {
      const double phi = term.profile.value(grid.position(node), grid.dim);
      if (phi == 0.0) continue;
      const Eigen::VectorXcd v = phi * (m * gather(e, node));
      for (std::size_t c = 0; c < e.component_count(); ++c) out.at(c, node) += v[static_cast<Eigen::Index>(c)];
    }
  }
  return out;
}

FormField apply_inverse(const Transformation& eps, const FormField& e) {
  require_match(eps, e);
  if (eps.is_identity()) return e;
  FormField out(e.grid(), e.rank());
  Eigen::LLT<Eigen::MatrixXd> llt(eps.size());
  for (std::size_t node = 0; node < e.node_count(); ++node) {
    llt.compute(eps.matrix_at(e.grid(), node));
    if (llt.info() != Eigen::Success) throw std::runtime_error("apply_inverse: singular node matrix");
    const Eigen::VectorXcd v = gather(e, node);
    Eigen::VectorXcd x(v.size());
    x.real() = llt.solve(v.real());
    x.imag() = llt.solve(v.imag());
    scatter(out, node, x);
  }
  return out;
}

FormField reconstruct_from_split(const FormField& tangential, const FormField& normal_image, const Transformation& eps) {
  require_match(eps, tangential);
  if (!tangential.compatible(normal_image)) throw std::invalid_argument("reconstruct_from_split: rank or grid mismatch");
  const int last = tangential.dim() - 1;
  std::vector<Eigen::Index> tau_idx, rho_idx;
  for (std::size_t c = 0; c < tangential.component_count(); ++c) {
    (tangential.basis(c).contains(last) ? rho_idx : tau_idx).push_back(static_cast<Eigen::Index>(c));
  }
  FormField out(tangential.grid(), tangential.rank());
  const auto nt = static_cast<Eigen::Index>(tau_idx.size());
  const auto nr = static_cast<Eigen::Index>(rho_idx.size());
  Eigen::MatrixXd rr(nr, nr), rt(nr, nt);
  Eigen::LLT<Eigen::MatrixXd> llt(nr);
  Eigen::VectorXcd et(nt), rhs(nr);
  for (std::size_t node = 0; node < out.node_count(); ++node) {
    for (Eigen::Index i = 0; i < nt; ++i) {
      et[i] = tangential.at(static_cast<std::size_t>(tau_idx[i]), node);
      out.at(static_cast<std::size_t>(tau_idx[i]), node) = et[i];
    }
    if (nr == 0) continue;
    const Eigen::MatrixXd m = eps.matrix_at(tangential.grid(), node);
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (Eigen::Index j = 0; j < nr; ++j) rr(i, j) = m(rho_idx[i], rho_idx[j]);
      for (Eigen::Index j = 0; j < nt; ++j) rt(i, j) = m(rho_idx[i], tau_idx[j]);
      rhs[i] = normal_image.at(static_cast<std::size_t>(rho_idx[i]), node);
    }
    if (nt > 0) rhs -= rt.cast<Complex>() * et;
    llt.compute(rr);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("reconstruct_from_split: normal block numerically singular at node " + std::to_string(node));
    }
    Eigen::VectorXcd x(nr);
    x.real() = llt.solve(rhs.real());
    x.imag() = llt.solve(rhs.imag());
    for (Eigen::Index i = 0; i < nr; ++i) out.at(static_cast<std::size_t>(rho_idx[i]), node) = x[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transport under orthogonal maps
// ---------------------------------------------------------------------------

Eigen::MatrixXd pullback_compound(const Eigen::MatrixXd& q, int rank) {
  const int dim = static_cast<int>(q.rows());
  const IndexTable& table = index_table(dim, rank);
  const auto size = static_cast<Eigen::Index>(table.size());
  Eigen::MatrixXd c(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const auto rows = table[static_cast<std::size_t>(i)].axes();
    for (Eigen::Index j = 0; j < size; ++j) {
      const auto cols = table[static_cast<std::size_t>(j)].axes();
      Eigen::MatrixXd minor(rank, rank);
      for (int a = 0; a < rank; ++a)
        for (int b = 0; b < rank; ++b) minor(a, b) = q(rows[a], cols[b]);
      c(i, j) = rank == 0 ? 1.0 : minor.determinant();
    }
  }
  return c;
}

Eigen::MatrixXd star_matrix(int dim, int rank) {
  const IndexTable& from = index_table(dim, rank);
  const IndexTable& to = index_table(dim, dim - rank);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(to.size()), static_cast<Eigen::Index>(from.size()));
  for (std::size_t c = 0; c < from.size(); ++c) {
    const MultiIndex complement = from[c].complement(dim);
    s(to.position(complement), static_cast<Eigen::Index>(c)) = merge_sign(from[c], complement);
  }
  return s;
}

namespace {

// left and right fiber factors of det(Q) (-1)^{q(N-q)} * Q^* * (.) (Q^*)^{-1}
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> transport_factors(const Eigen::MatrixXd& q, int rank) {
  const int dim = static_cast<int>(q.rows());
  const Eigen::MatrixXd c_q = pullback_compound(q, rank);
  const Eigen::MatrixXd c_dual = pullback_compound(q, dim - rank);
  const double orientation = q.determinant() > 0 ? 1.0 : -1.0;
  const double sign = ((rank * (dim - rank)) % 2 == 0 ? 1.0 : -1.0) * orientation;
  const Eigen::MatrixXd left = sign * star_matrix(dim, dim - rank) * c_dual.transpose() * star_matrix(dim, rank);
  const Eigen::MatrixXd right = c_q.transpose().inverse();
  return {left, right};
}

}  // namespace

Transformation transported(const Transformation& eps, const Eigen::MatrixXd& q) {
  const int dim = eps.dim();
  if (q.rows() != dim || q.cols() != dim) throw std::invalid_argument("transported: Q must be N x N");
  if ((q.transpose() * q - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("transported: Q must be orthogonal");
  }
  const auto [left, right] = transport_factors(q, eps.rank());
  const Eigen::MatrixXd base = left * right;
  const double base_defect = (base - Eigen::MatrixXd::Identity(eps.size(), eps.size())).cwiseAbs().maxCoeff();

  if (eps.is_dense()) {
    const GridSpec& grid = eps.dense_grid();
    Eigen::MatrixXd reflection = Eigen::MatrixXd::Identity(dim, dim);
    reflection(dim - 1, dim - 1) = -1.0;
    if ((q - reflection).cwiseAbs().maxCoeff() > 0.0) {
      throw std::invalid_argument("transported: dense transformations support only the x_N reflection");
    }
    const std::size_t block = static_cast<std::size_t>(eps.size()) * eps.size();
    std::vector<double> data(eps.dense_data().size());
    const std::size_t stride = grid.stride(dim - 1);
    const auto n = static_cast<std::size_t>(grid.points);
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      const std::size_t k = (node / stride) % n;
      const std::size_t mirrored = node - k * stride + ((n - k) % n) * stride;
      const Eigen::MatrixXd m = left * eps.matrix_at(grid, mirrored) * right;
      for (int i = 0; i < eps.size(); ++i)
        for (int j = 0; j < eps.size(); ++j) data[node * block + i * eps.size() + j] = m(i, j);
    }
    Transformation out = Transformation::dense(grid, eps.rank(), std::move(data), eps.decay(), eps.smoothness());
    out.set_positivity(eps.positivity());
    return out;
  }

  std::vector<PerturbationTerm> terms;
  for (const auto& t : eps.terms()) {
    NodeCoords c{};
    const NodeCoords& old = t.profile.center();
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) c[a] += q(b, a) * old[b];  // Q^T c
    Eigen::MatrixXd m = left * t.matrix * right;
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw std::runtime_error("transported: symmetry lost");
    m = 0.5 * (m + m.transpose());
    terms.push_back({t.profile.recentered(c), m});
  }
  if (base_defect > 1e-12) {
    terms.push_back({RadialProfile::constant(1.0), base - Eigen::MatrixXd::Identity(eps.size(), eps.size())});
  }
  Transformation out(dim, eps.rank(), std::move(terms), eps.decay(), eps.smoothness());
  out.set_positivity(eps.positivity());
  return out;
}

Transformation reflected_transform(const Transformation& eps) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(eps.dim(), eps.dim());
  q(eps.dim() - 1, eps.dim() - 1) = -1.0;
  return transported(eps, q);
}

// ---------------------------------------------------------------------------
// Catalog and files
// ---------------------------------------------------------------------------

Eigen::MatrixXd fixed_symmetric_matrix(int size) {
  Eigen::MatrixXd a(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) a(i, j) = std::cos(1.0 + 0.7 * i + 1.3 * j) + std::cos(1.0 + 0.7 * j + 1.3 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  const double scale = solver.eigenvalues().cwiseAbs().maxCoeff();
  return scale > 0.0 ? Eigen::MatrixXd(a / scale) : Eigen::MatrixXd::Zero(size, size);
}

TransformationSpec catalog_spec(const std::string& tag, int dim, int rank, DecayClass decay, int smoothness) {
  TransformationSpec spec;
  if (tag == "identity") {
    spec = TransformationSpec::identity(dim, rank);
  } else if (tag == "scalar-exp") {
    spec = TransformationSpec::scalar(dim, rank, RadialProfile::gaussian(1.0, 1.0), decay);
  } else if (tag == "algebraic") {
    const int size = static_cast<int>(binomial(dim, rank));
    spec = TransformationSpec::perturbation(
        dim, rank, {{RadialProfile::algebraic(0.5, decay.tau), fixed_symmetric_matrix(size)}}, decay);
  } else {
    throw std::invalid_argument("catalog_spec: unknown tag '" + tag + "'");
  }
  spec.smoothness = smoothness;
  return spec;
}

Transformation transformation_from_file(const MediaFile& media, const GridSpec& grid) {
  if (!media.dense) return make_transformation(media.spec, grid);
  if (!(media.grid == grid)) throw std::invalid_argument("transformation_from_file: dense media grid differs from the probe grid");
  Transformation eps = Transformation::dense(grid, media.spec.rank, media.matrices, media.spec.decay, media.spec.smoothness);
  const AdmissibilityReport report = verify_admissibility(eps, grid, 0);
  if (report.max_asymmetry > 1e-12) throw AdmissibilityError("media file: matrices are not symmetric", report);
  if (!(report.min_eigenvalue > 0.0)) throw AdmissibilityError("media file: not positive definite", report);
  eps.set_positivity(report.min_eigenvalue);
  return eps;
}

namespace {

constexpr char kMediaMagic[8] = {'F', 'O', 'R', 'M', 'E', 'P', 'S', '1'};

}  // namespace

void save_media(const std::filesystem::path& path, const MediaFile& media) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContainerError("media: cannot open " + path.string());
  detail::write_raw(out, kMediaMagic, 8);
  const std::int32_t head[3] = {media.spec.dim, media.spec.rank, static_cast<std::int32_t>(media.spec.decay.kind)};
  detail::write_raw(out, head, sizeof(head));
  detail::write_raw(out, &media.spec.decay.tau, sizeof(double));
  const std::int32_t tail[2] = {media.spec.smoothness, media.dense ? 1 : 0};
  detail::write_raw(out, tail, sizeof(tail));
  const char tags[4] = {detail::native_endian_tag(), 0, 0, 0};
  detail::write_raw(out, tags, 4);
  if (!media.dense) {
    const auto length = static_cast<std::int32_t>(media.catalog_tag.size());
    detail::write_raw(out, &length, sizeof(length));
    detail::write_raw(out, media.catalog_tag.data(), media.catalog_tag.size());
    return;
  }
  detail::write_raw(out, &media.grid.half_length, sizeof(double));
  const std::int32_t n = media.grid.points;
  detail::write_raw(out, &n, sizeof(n));
  // entry-major fields: for each (I, J), the n^N samples
  const auto size = static_cast<std::size_t>(binomial(media.spec.dim, media.spec.rank));
  const std::size_t nodes = media.grid.node_count();
  if (media.matrices.size() != size * size * nodes) throw ContainerError("media: dense payload has the wrong size");
  std::vector<double> field(nodes);
  for (std::size_t e = 0; e < size * size; ++e) {
    for (std::size_t node = 0; node < nodes; ++node) field[node] = media.matrices[node * size * size + e];
    detail::write_raw(out, field.data(), nodes * sizeof(double));
  }
}

MediaFile load_media(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError("media: cannot open " + path.string());
  char magic[8];
  detail::read_raw(in, magic, 8, false, 1);
  if (std::memcmp(magic, kMediaMagic, 8) != 0) throw ContainerError("media: bad magic");
  unsigned char raw[28];
  detail::read_raw(in, raw, 28, false, 1);
  char tags[4];
  detail::read_raw(in, tags, 4, false, 1);
  if (tags[0] != '<' && tags[0] != '>') throw ContainerError("media: bad endianness tag");
  const bool swap = tags[0] != detail::native_endian_tag();
  auto word = [&](std::size_t offset, std::size_t size, void* dst) {
    unsigned char tmp[8];
    std::memcpy(tmp, raw + offset, size);
    if (swap) std::reverse(tmp, tmp + size);
    std::memcpy(dst, tmp, size);
  };
  std::int32_t dim = 0, rank = 0, kind = 0, smoothness = 0, payload = 0;
  double tau = 0.0;
  word(0, 4, &dim);
  word(4, 4, &rank);
  word(8, 4, &kind);
  word(12, 8, &tau);
  word(20, 4, &smoothness);
  word(24, 4, &payload);
  if (dim < 1 || dim > kMaxDim || rank < 0 || rank > dim || kind < 0 || kind > 2 || payload < 0 || payload > 1) {
    throw ContainerError("media: invalid header");
  }
  MediaFile media;
  const DecayClass decay{static_cast<DecayKind>(kind), tau};
  if (payload == 0) {
    std::int32_t length = 0;
    detail::read_raw(in, &length, sizeof(length), swap, sizeof(length));
    if (length < 0 || length > 256) throw ContainerError("media: bad catalog tag length");
    media.catalog_tag.resize(static_cast<std::size_t>(length));
    detail::read_raw(in, media.catalog_tag.data(), media.catalog_tag.size(), false, 1);
    try {
      media.spec = catalog_spec(media.catalog_tag, dim, rank, decay, smoothness);
    } catch (const std::invalid_argument& e) {
      throw ContainerError(std::string("media: ") + e.what());
    }
    return media;
  }
  media.dense = true;
  media.spec.kind = TransformationSpec::Kind::perturbation;
  media.spec.dim = dim;
  media.spec.rank = rank;
  media.spec.decay = decay;
  media.spec.smoothness = smoothness;
  double half_length = 0.0;
  std::int32_t points = 0;
  detail::read_raw(in, &half_length, sizeof(double), swap, sizeof(double));
  detail::read_raw(in, &points, sizeof(points), swap, sizeof(points));
  media.grid = GridSpec{dim, half_length, points, true};
  try {
    media.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ContainerError(std::string("media: invalid grid: ") + e.what());
  }
  const auto size = static_cast<std::size_t>(binomial(dim, rank));
  const std::size_t nodes = media.grid.node_count();
  media.matrices.assign(size * size * nodes, 0.0);
  std::vector<double> field(nodes);
  for (std::size_t e = 0; e < size * size; ++e) {
    detail::read_raw(in, field.data(), nodes * sizeof(double), swap, sizeof(double));
    for (std::size_t node = 0; node < nodes; ++node) media.matrices[node * size * size + e] = field[node];
  }
  return media;
}

}  // namespace formcalc
