#include "formcalc/manufactured.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "formcalc/spectral.hpp"

namespace formcalc {

// ---------------------------------------------------------------------------
// Scalar terms
// ---------------------------------------------------------------------------

double GaussMonomial::value(const NodeCoords& x, int dim) const {
  double r2 = 0.0;
  double poly = coefficient;
  for (int a = 0; a < dim; ++a) {
    const double y = x[a] - center[a];
    r2 += y * y;
    for (int k = 0; k < powers[a]; ++k) poly *= y;
  }
  return poly * std::exp(-r2 / (width * width));
}

std::vector<GaussMonomial> GaussMonomial::derivative(int axis, int /*dim*/) const {
  std::vector<GaussMonomial> out;
  if (powers[axis] > 0) {
    GaussMonomial t = *this;
    t.coefficient *= powers[axis];
    t.powers[axis] -= 1;
    out.push_back(t);
  }
  GaussMonomial t = *this;
  t.coefficient *= -2.0 / (width * width);
  t.powers[axis] += 1;
  out.push_back(t);
  return out;
}

double TrigProduct::value(const NodeCoords& x, int dim) const {
  double v = amplitude;
  for (int a = 0; a < dim; ++a) v *= std::cos(wavenumbers[a] * std::numbers::pi * x[a] / half_length + phases[a]);
  return v;
}

TrigProduct TrigProduct::derivative(int axis) const {
  // d/dx cos(w x + p) = w cos(w x + p + pi/2)
  TrigProduct t = *this;
  t.amplitude *= wavenumbers[axis] * std::numbers::pi / half_length;
  t.phases[axis] += 0.5 * std::numbers::pi;
  return t;
}

double CompactBump::value(const NodeCoords& x, int dim) const {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
  const double s = r2 / (radius * radius);
  if (s >= 1.0) return 0.0;
  return (offset + slope * (x[axis] - center[axis])) * std::exp(-1.0 / (1.0 - s));
}

double CompactBump::derivative_value(const NodeCoords& x, int dim, int along) const {
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
  const double s = r2 / (radius * radius);
  if (s >= 1.0) return 0.0;
  const double bump = std::exp(-1.0 / (1.0 - s));
  const double linear = offset + slope * (x[axis] - center[axis]);
  const double dbump = -bump / ((1.0 - s) * (1.0 - s)) * 2.0 * (x[along] - center[along]) / (radius * radius);
  return (along == axis ? slope * bump : 0.0) + linear * dbump;
}

namespace {

double term_value(const ScalarTerm& t, const NodeCoords& x, int dim) {
  return std::visit([&](const auto& term) { return term.value(x, dim); }, t);
}

double term_derivative(const ScalarTerm& t, const NodeCoords& x, int dim, int axis) {
  if (const auto* g = std::get_if<GaussMonomial>(&t)) {
    double v = 0.0;
    for (const auto& d : g->derivative(axis, dim)) v += d.value(x, dim);
    return v;
  }
  if (const auto* trig = std::get_if<TrigProduct>(&t)) return trig->derivative(axis).value(x, dim);
  return std::get<CompactBump>(t).derivative_value(x, dim, axis);
}

ScalarTerm term_reflected(const ScalarTerm& t, int dim, double sign) {
  const int last = dim - 1;
  if (const auto* g = std::get_if<GaussMonomial>(&t)) {
    GaussMonomial r = *g;
    r.center[last] = -r.center[last];
    r.coefficient *= sign * (r.powers[last] % 2 == 0 ? 1.0 : -1.0);
    return r;
  }
  if (const auto* trig = std::get_if<TrigProduct>(&t)) {
    TrigProduct r = *trig;
    r.phases[last] = -r.phases[last];
    r.amplitude *= sign;
    return r;
  }
  CompactBump r = std::get<CompactBump>(t);
  r.center[last] = -r.center[last];
  if (r.axis == last) r.slope = -r.slope;
  r.offset *= sign;
  r.slope *= sign;
  return r;
}

ScalarTerm term_scaled(const ScalarTerm& t, double factor) {
  if (const auto* g = std::get_if<GaussMonomial>(&t)) {
    GaussMonomial r = *g;
    r.coefficient *= factor;
    return r;
  }
  if (const auto* trig = std::get_if<TrigProduct>(&t)) {
    TrigProduct r = *trig;
    r.amplitude *= factor;
    return r;
  }
  CompactBump r = std::get<CompactBump>(t);
  r.offset *= factor;
  r.slope *= factor;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// FormExpression
// ---------------------------------------------------------------------------

FormExpression::FormExpression(int dim, int rank) : dim_(dim), rank_(rank), terms_(binomial(dim, rank)) {
  if (dim < 1 || dim > kMaxDim || rank < 0 || rank > dim) throw std::invalid_argument("FormExpression: bad dim/rank");
}

FormField FormExpression::sample(const GridSpec& grid) const {
  if (grid.dim != dim_) throw std::invalid_argument("FormExpression: grid dimension mismatch");
  FormField out(grid, rank_);
  for (std::size_t node = 0; node < out.node_count(); ++node) {
    const NodeCoords x = grid.position(node);
    for (std::size_t c = 0; c < terms_.size(); ++c) {
      double v = 0.0;
      for (const auto& t : terms_[c]) v += term_value(t, x, dim_);
      out.at(c, node) = v;
    }
  }
  return out;
}

FormField FormExpression::sample_partial(const GridSpec& grid, int axis) const {
  if (grid.dim != dim_) throw std::invalid_argument("FormExpression: grid dimension mismatch");
  FormField out(grid, rank_);
  for (std::size_t node = 0; node < out.node_count(); ++node) {
    const NodeCoords x = grid.position(node);
    for (std::size_t c = 0; c < terms_.size(); ++c) {
      double v = 0.0;
      for (const auto& t : terms_[c]) v += term_derivative(t, x, dim_, axis);
      out.at(c, node) = v;
    }
  }
  return out;
}

FormField assemble_d(const std::vector<FormField>& partials) {
  const FormField& first = partials.front();
  const int dim = first.dim();
  const int q = first.rank();
  if (q >= dim) throw std::invalid_argument("assemble_d: rank overflow");
  FormField out(first.grid(), q + 1);
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    const MultiIndex k = out.basis(c);
    auto dst = out.component(c);
    for (int j : k.axes()) {
      const MultiIndex rest = k.without(j);
      const double s = merge_sign(MultiIndex::from_mask(1u << j), rest);
      auto src = partials[static_cast<std::size_t>(j)].component(rest);
      for (std::size_t node = 0; node < dst.size(); ++node) dst[node] += s * src[node];
    }
  }
  return out;
}

FormField assemble_delta(const std::vector<FormField>& partials) {
  const FormField& first = partials.front();
  const int dim = first.dim();
  const int q = first.rank();
  if (q == 0) throw std::invalid_argument("assemble_delta: rank underflow");
  FormField out(first.grid(), q - 1);
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    const MultiIndex j_index = out.basis(c);
    auto dst = out.component(c);
    for (int j = 0; j < dim; ++j) {
      if (j_index.contains(j)) continue;
      const double s = merge_sign(MultiIndex::from_mask(1u << j), j_index);
      auto src = partials[static_cast<std::size_t>(j)].component(j_index.with(j));
      for (std::size_t node = 0; node < dst.size(); ++node) dst[node] += s * src[node];
    }
  }
  return out;
}

FormField FormExpression::sample_d(const GridSpec& grid) const {
  std::vector<FormField> partials;
  for (int a = 0; a < dim_; ++a) partials.push_back(sample_partial(grid, a));
  return assemble_d(partials);
}

FormField FormExpression::sample_delta(const GridSpec& grid) const {
  std::vector<FormField> partials;
  for (int a = 0; a < dim_; ++a) partials.push_back(sample_partial(grid, a));
  return assemble_delta(partials);
}

FormField FormExpression::sample_delta_eps(const GridSpec& grid, const Transformation& eps) const {
  if (eps.is_identity()) return sample_delta(grid);
  const FormField e = sample(grid);
  std::vector<FormField> partials;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(e.component_count()));
  for (int a = 0; a < dim_; ++a) {
    FormField p = apply(eps, sample_partial(grid, a));
    const int axes[1] = {a};
    for (std::size_t node = 0; node < e.node_count(); ++node) {
      const Eigen::MatrixXd m = eps.perturbation_derivative(grid.position(node), axes);
      for (std::size_t c = 0; c < e.component_count(); ++c) v[static_cast<Eigen::Index>(c)] = e.at(c, node);
      const Eigen::VectorXcd w = m.cast<Complex>() * v;
      for (std::size_t c = 0; c < e.component_count(); ++c) p.at(c, node) += w[static_cast<Eigen::Index>(c)];
    }
    partials.push_back(std::move(p));
  }
  return assemble_delta(partials);
}

FormExpression FormExpression::reflected(MirrorKind kind) const {
  FormExpression out(dim_, rank_);
  const IndexTable& table = index_table(dim_, rank_);
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    const bool normal = table[c].contains(dim_ - 1);
    const double sign = (normal == (kind == MirrorKind::d)) ? -1.0 : 1.0;
    for (const auto& t : terms_[c]) out.terms_[c].push_back(term_reflected(t, dim_, sign));
  }
  return out;
}

FormExpression FormExpression::symmetrized(MirrorKind kind) const {
  FormExpression out = scaled(0.5);
  const FormExpression mirrored = reflected(kind).scaled(0.5);
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    out.terms_[c].insert(out.terms_[c].end(), mirrored.terms_[c].begin(), mirrored.terms_[c].end());
  }
  return out;
}

FormExpression FormExpression::scaled(double factor) const {
  FormExpression out(dim_, rank_);
  for (std::size_t c = 0; c < terms_.size(); ++c)
    for (const auto& t : terms_[c]) out.terms_[c].push_back(term_scaled(t, factor));
  return out;
}

// ---------------------------------------------------------------------------
// Random and catalog generators
// ---------------------------------------------------------------------------

FormField band_limited_random(const GridSpec& grid, int rank, std::uint64_t seed, int band) {
  grid.validate();
  if (band == 0) band = std::max(1, grid.points / 4);
  if (band < 0 || 2 * band >= grid.points) throw std::invalid_argument("band_limited_random: band must be below n/2");
  const int dim = grid.dim;
  const auto n = static_cast<std::size_t>(grid.points);
  const int width = 2 * band + 1;
  std::size_t modes = 1;
  for (int a = 0; a < dim; ++a) modes *= static_cast<std::size_t>(width);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(modes));
  SpectralField hat(grid, rank);
  std::vector<int> k(static_cast<std::size_t>(dim));
  for (std::size_t c = 0; c < hat.component_count(); ++c) {
    std::vector<Complex> coeff(modes);
    for (auto& v : coeff) {
      const double re = normal(rng);
      const double im = normal(rng);
      v = amplitude * Complex(re, im);
    }
    auto dst = hat.component(c);
    for (std::size_t m = 0; m < modes; ++m) {
      // mode m <-> wave vector k in [-band, band]^N; its negative is modes-1-m
      std::size_t rest = m;
      std::size_t node = 0;
      int parity = 0;
      for (int a = dim - 1; a >= 0; --a) {
        k[a] = static_cast<int>(rest % static_cast<std::size_t>(width)) - band;
        rest /= static_cast<std::size_t>(width);
      }
      for (int a = 0; a < dim; ++a) {
        node = node * n + static_cast<std::size_t>((k[a] + grid.points) % grid.points);
        parity += k[a];
      }
      // Hermitian symmetrization keeps the field real; (-1)^k moves the origin to the box centre
      const Complex value = 0.5 * (coeff[m] + std::conj(coeff[modes - 1 - m]));
      dst[node] = (parity % 2 == 0 ? 1.0 : -1.0) * value;
    }
  }
  FormField out = fourier_inverse(hat);
  out *= std::sqrt(static_cast<double>(grid.node_count()));
  for (auto& v : out.data()) v = v.real();
  return out;
}

FormField dyadic_random(const GridSpec& grid, int rank, std::uint64_t seed, bool complex_values) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-1024, 1024);
  FormField out(grid, rank);
  for (auto& v : out.data()) {
    const double re = dist(rng) / 1024.0;
    const double im = complex_values ? dist(rng) / 1024.0 : 0.0;
    v = Complex(re, im);
  }
  return out;
}

FormExpression gaussian_expression(int dim, int rank, std::uint64_t seed, double sigma, const NodeCoords& center,
                                   double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::uniform_int_distribution<int> power(0, 1);
  FormExpression out(dim, rank);
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    for (int t = 0; t < 2; ++t) {
      GaussMonomial g;
      g.coefficient = normal(rng);
      g.width = sigma;
      for (int a = 0; a < dim; ++a) {
        g.center[a] = center[a] + spread * uniform(rng);
        g.powers[a] = t == 0 ? 0 : power(rng);
      }
      out.terms(c).push_back(g);
    }
  }
  return out;
}

FormExpression trig_catalog(int dim, int rank, int entry, double half_length) {
  if (entry < 0 || entry >= trig_catalog_size) throw std::invalid_argument("trig_catalog: entry out of range");
  FormExpression out(dim, rank);
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    TrigProduct t;
    t.amplitude = 1.0 / (1.0 + static_cast<double>(c));
    t.half_length = half_length;
    for (int a = 0; a < dim; ++a) {
      t.wavenumbers[a] = 1 + (entry + static_cast<int>(c) + a) % 3;
      t.phases[a] = 0.3 * (entry + 1) * (a + 1) + 0.1 * static_cast<double>(c);
    }
    out.terms(c).push_back(t);
  }
  return out;
}

Manufactured generate_manufactured(ManufacturedKind kind, const GridSpec& grid, int rank, const Region& support,
                                   std::uint64_t seed) {
  grid.validate();
  Manufactured out;
  switch (kind) {
    case ManufacturedKind::bump: {
      if (support.kind != RegionKind::ball) throw std::invalid_argument("generate_manufactured: bumps need a ball region");
      if (support.outer > 0.5 * grid.half_length) {
        throw std::invalid_argument("generate_manufactured: support radius exceeds L/2 (wrap-around)");
      }
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uniform(-1.0, 1.0);
      FormExpression e(grid.dim, rank);
      for (std::size_t c = 0; c < e.component_count(); ++c) {
        CompactBump b;
        b.offset = uniform(rng);
        b.slope = uniform(rng) / support.outer;
        b.axis = static_cast<int>(c) % grid.dim;
        b.radius = support.outer;
        e.terms(c).push_back(b);
      }
      out.field = e.sample(grid);
      out.expression = std::move(e);
      break;
    }
    case ManufacturedKind::band_limited_random:
      if (support.kind != RegionKind::full) throw std::invalid_argument("generate_manufactured: band-limited fields are periodic");
      out.field = band_limited_random(grid, rank, seed);
      break;
    case ManufacturedKind::trig_catalog: {
      if (support.kind != RegionKind::full) throw std::invalid_argument("generate_manufactured: trig fields are periodic");
      FormExpression e = trig_catalog(grid.dim, rank, static_cast<int>(seed % trig_catalog_size), grid.half_length);
      out.field = e.sample(grid);
      out.expression = std::move(e);
      break;
    }
  }
  return out;
}

}  // namespace formcalc
