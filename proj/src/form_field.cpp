#include "formcalc/form_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace formcalc {

template <class Tag>
BasicForm<Tag>::BasicForm(const GridSpec& grid, int rank) : grid_(grid), rank_(rank) {
  grid.validate();
  if (rank < 0 || rank > grid.dim) throw std::invalid_argument("FormField: rank must lie in [0, N]");
  components_ = binomial(grid.dim, rank);
  nodes_ = grid.node_count();
  data_.assign(components_ * nodes_, Complex{});
}

template <class Tag>
BasicForm<Tag>::BasicForm(const GridSpec& grid, int rank, std::vector<Complex> data) : BasicForm(grid, rank) {
  if (data.size() != data_.size()) throw std::invalid_argument("FormField: packed data has the wrong size");
  data_ = std::move(data);
}

template <class Tag>
std::span<Complex> BasicForm<Tag>::component(MultiIndex index) {
  const int c = table().position(index);
  if (c < 0) throw std::out_of_range("FormField: multi-index does not belong to this rank");
  return component(static_cast<std::size_t>(c));
}

template <class Tag>
std::span<const Complex> BasicForm<Tag>::component(MultiIndex index) const {
  const int c = table().position(index);
  if (c < 0) throw std::out_of_range("FormField: multi-index does not belong to this rank");
  return component(static_cast<std::size_t>(c));
}

template <class Tag>
BasicForm<Tag>& BasicForm<Tag>::operator+=(const BasicForm& other) {
  if (!compatible(other)) throw std::invalid_argument("FormField +=: rank or grid mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

template <class Tag>
BasicForm<Tag>& BasicForm<Tag>::operator-=(const BasicForm& other) {
  if (!compatible(other)) throw std::invalid_argument("FormField -=: rank or grid mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

template <class Tag>
BasicForm<Tag>& BasicForm<Tag>::operator*=(Complex factor) {
  for (auto& v : data_) v *= factor;
  return *this;
}

template <class Tag>
double BasicForm<Tag>::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

template class BasicForm<PhysicalTag>;
template class BasicForm<SpectralTag>;

namespace {

std::vector<double> coordinate_table(const GridSpec& grid, Coordinates coords) {
  return coords == Coordinates::position ? axis_positions(grid) : axis_wavenumbers(grid);
}

}  // namespace

template <class Tag>
BasicForm<Tag> wedge(const BasicForm<Tag>& e, const BasicForm<Tag>& f) {
  if (!(e.grid() == f.grid())) throw std::invalid_argument("wedge: grid mismatch");
  const int p = e.rank();
  const int q = f.rank();
  if (p + q > e.dim()) throw std::invalid_argument("wedge: rank overflow p + q > N");
  BasicForm<Tag> out(e.grid(), p + q);
  const auto& te = e.table();
  const auto& tf = f.table();
  const auto& tout = out.table();
  for (std::size_t i = 0; i < te.size(); ++i) {
    for (std::size_t j = 0; j < tf.size(); ++j) {
      const int sign = merge_sign(te[i], tf[j]);
      if (sign == 0) continue;
      const auto k = static_cast<std::size_t>(tout.position(te[i].merged(tf[j])));
      auto dst = out.component(k);
      auto a = e.component(i);
      auto b = f.component(j);
      for (std::size_t node = 0; node < dst.size(); ++node) dst[node] += static_cast<double>(sign) * (a[node] * b[node]);
    }
  }
  return out;
}

template <class Tag>
BasicForm<Tag> hodge_star(const BasicForm<Tag>& e) {
  const int n = e.dim();
  BasicForm<Tag> out(e.grid(), n - e.rank());
  const auto& t = e.table();
  for (std::size_t c = 0; c < t.size(); ++c) {
    const MultiIndex complement = t[c].complement(n);
    const double sign = merge_sign(t[c], complement);
    auto src = e.component(c);
    auto dst = out.component(complement);
    for (std::size_t node = 0; node < src.size(); ++node) dst[node] = sign * src[node];
  }
  return out;
}

template <class Tag>
BasicForm<Tag> apply_R(const BasicForm<Tag>& e, Coordinates coords) {
  const int n = e.dim();
  if (e.rank() >= n) throw std::invalid_argument("apply_R: rank overflow (q must be < N)");
  const GridSpec& grid = e.grid();
  const std::vector<double> c = coordinate_table(grid, coords);
  BasicForm<Tag> out(grid, e.rank() + 1);
  const auto& tin = e.table();
  for (std::size_t j = 0; j < tin.size(); ++j) {
    for (int axis = 0; axis < n; ++axis) {
      if (tin[j].contains(axis)) continue;
      const MultiIndex single = MultiIndex::from_mask(1u << axis);
      const double sign = merge_sign(single, tin[j]);
      auto src = e.component(j);
      auto dst = out.component(tin[j].with(axis));
      const std::size_t stride = grid.stride(axis);
      const auto points = static_cast<std::size_t>(grid.points);
      for (std::size_t node = 0; node < src.size(); ++node) {
        dst[node] += (sign * c[(node / stride) % points]) * src[node];
      }
    }
  }
  return out;
}

template <class Tag>
BasicForm<Tag> apply_T(const BasicForm<Tag>& e, Coordinates coords) {
  const int q = e.rank();
  const int n = e.dim();
  if (q == 0) throw std::invalid_argument("apply_T: rank underflow (q must be > 0)");
  BasicForm<Tag> out = hodge_star(apply_R(hodge_star(e), coords));
  if (((q - 1) * n) % 2 != 0) out *= -1.0;
  return out;
}

template <class Tag>
std::pair<BasicForm<Tag>, BasicForm<Tag>> split_tangential_normal(const BasicForm<Tag>& e) {
  BasicForm<Tag> tangential(e.grid(), e.rank());
  BasicForm<Tag> normal(e.grid(), e.rank());
  const int last = e.dim() - 1;
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    auto src = e.component(c);
    auto dst = e.basis(c).contains(last) ? normal.component(c) : tangential.component(c);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return {std::move(tangential), std::move(normal)};
}

template <class Tag>
BasicForm<Tag> multiply_radius_squared(const BasicForm<Tag>& e, Coordinates coords) {
  const GridSpec& grid = e.grid();
  const std::vector<double> c = coordinate_table(grid, coords);
  std::vector<double> r2(e.node_count(), 0.0);
  const auto points = static_cast<std::size_t>(grid.points);
  for (int axis = 0; axis < grid.dim; ++axis) {
    const std::size_t stride = grid.stride(axis);
    for (std::size_t node = 0; node < r2.size(); ++node) {
      const double v = c[(node / stride) % points];
      r2[node] += v * v;
    }
  }
  BasicForm<Tag> out = e;
  for (std::size_t comp = 0; comp < out.component_count(); ++comp) {
    auto dst = out.component(comp);
    for (std::size_t node = 0; node < dst.size(); ++node) dst[node] *= r2[node];
  }
  return out;
}

template FormField wedge(const FormField&, const FormField&);
template SpectralField wedge(const SpectralField&, const SpectralField&);
template FormField hodge_star(const FormField&);
template SpectralField hodge_star(const SpectralField&);
template FormField apply_R(const FormField&, Coordinates);
template SpectralField apply_R(const SpectralField&, Coordinates);
template FormField apply_T(const FormField&, Coordinates);
template SpectralField apply_T(const SpectralField&, Coordinates);
template std::pair<FormField, FormField> split_tangential_normal(const FormField&);
template std::pair<SpectralField, SpectralField> split_tangential_normal(const SpectralField&);
template FormField multiply_radius_squared(const FormField&, Coordinates);
template SpectralField multiply_radius_squared(const SpectralField&, Coordinates);

std::vector<double> rho_power(const GridSpec& grid, double exponent) {
  std::vector<double> w(grid.node_count());
  for (std::size_t node = 0; node < w.size(); ++node) {
    const double r = grid.radius(node);
    w[node] = std::pow(1.0 + r * r, 0.5 * exponent);
  }
  return w;
}

Complex l2_inner(const FormField& e, const FormField& h, double weight) {
  if (!e.compatible(h)) throw std::invalid_argument("l2_inner: rank or grid mismatch");
  const std::vector<double> w = weight == 0.0 ? std::vector<double>{} : rho_power(e.grid(), 2.0 * weight);
  Complex sum{};
  for (std::size_t c = 0; c < e.component_count(); ++c) {
    auto a = e.component(c);
    auto b = h.component(c);
    if (w.empty()) {
      for (std::size_t node = 0; node < a.size(); ++node) sum += a[node] * std::conj(b[node]);
    } else {
      for (std::size_t node = 0; node < a.size(); ++node) sum += w[node] * a[node] * std::conj(b[node]);
    }
  }
  return sum * e.grid().cell_volume();
}

double l2_norm(const FormField& e, double weight) { return std::sqrt(std::max(0.0, l2_inner(e, e, weight).real())); }

Complex l2_inner(const SpectralField& e, const SpectralField& h) {
  if (!e.compatible(h)) throw std::invalid_argument("l2_inner: rank or grid mismatch");
  Complex sum{};
  for (std::size_t i = 0; i < e.data().size(); ++i) sum += e.data()[i] * std::conj(h.data()[i]);
  return sum * e.grid().cell_volume();
}

double l2_norm(const SpectralField& e) { return std::sqrt(std::max(0.0, l2_inner(e, e).real())); }

FormField scale_pointwise(const FormField& e, std::span<const double> factor) {
  if (factor.size() != e.node_count()) throw std::invalid_argument("scale_pointwise: size mismatch");
  FormField out = e;
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    auto dst = out.component(c);
    for (std::size_t node = 0; node < dst.size(); ++node) dst[node] *= factor[node];
  }
  return out;
}

FormField constant_form(const GridSpec& grid, int rank, std::span<const Complex> values) {
  FormField out(grid, rank);
  if (values.size() != out.component_count()) throw std::invalid_argument("constant_form: need C(N,q) values");
  for (std::size_t c = 0; c < out.component_count(); ++c) {
    auto dst = out.component(c);
    std::fill(dst.begin(), dst.end(), values[c]);
  }
  return out;
}

double max_imaginary(const FormField& e) {
  double m = 0.0;
  for (const auto& v : e.data()) m = std::max(m, std::abs(v.imag()));
  return m;
}

}  // namespace formcalc
