#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "formcalc/grid.hpp"
#include "formcalc/multi_index.hpp"

namespace formcalc {

using Complex = std::complex<double>;

struct PhysicalTag {};
struct SpectralTag {};

/// Rank-q alternating form sampled on a grid: C(N, q) complex component
/// fields in lexicographic multi-index order, stored contiguously.
///
/// The tag separates physical-space samples (FormField) from discrete Fourier
/// coefficients (SpectralField); both share the storage layout.
template <class Tag>
class BasicForm {
 public:
  BasicForm() = default;
  /// Zero form; validates the grid and 0 <= rank <= dim.
  BasicForm(const GridSpec& grid, int rank);
  /// Takes ownership of packed data (component-major); size must be C(N,q) * n^N.
  BasicForm(const GridSpec& grid, int rank, std::vector<Complex> data);

  const GridSpec& grid() const { return grid_; }
  int rank() const { return rank_; }
  int dim() const { return grid_.dim; }
  std::size_t component_count() const { return components_; }
  std::size_t node_count() const { return nodes_; }
  const IndexTable& table() const { return index_table(grid_.dim, rank_); }
  MultiIndex basis(std::size_t c) const { return table()[c]; }

  std::span<Complex> component(std::size_t c) { return {data_.data() + c * nodes_, nodes_}; }
  std::span<const Complex> component(std::size_t c) const { return {data_.data() + c * nodes_, nodes_}; }
  /// Component by multi-index; throws std::out_of_range for a foreign index.
  std::span<Complex> component(MultiIndex index);
  std::span<const Complex> component(MultiIndex index) const;

  Complex& at(std::size_t c, std::size_t node) { return data_[c * nodes_ + node]; }
  const Complex& at(std::size_t c, std::size_t node) const { return data_[c * nodes_ + node]; }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  BasicForm& operator+=(const BasicForm& other);
  BasicForm& operator-=(const BasicForm& other);
  BasicForm& operator*=(Complex factor);

  friend BasicForm operator+(BasicForm a, const BasicForm& b) { return a += b; }
  friend BasicForm operator-(BasicForm a, const BasicForm& b) { return a -= b; }
  friend BasicForm operator*(Complex factor, BasicForm a) { return a *= factor; }

  /// Largest |component value| over all nodes and components.
  double max_abs() const;
  /// Same grid and rank.
  bool compatible(const BasicForm& other) const { return grid_ == other.grid_ && rank_ == other.rank_; }

 private:
  GridSpec grid_{};
  int rank_ = 0;
  std::size_t components_ = 0;
  std::size_t nodes_ = 0;
  std::vector<Complex> data_;
};

using FormField = BasicForm<PhysicalTag>;
using SpectralField = BasicForm<SpectralTag>;

extern template class BasicForm<PhysicalTag>;
extern template class BasicForm<SpectralTag>;

/// Coordinate field multiplying dx^n in R: node positions x or frequencies xi.
enum class Coordinates { position, frequency };

/// Fiberwise exterior product; throws on grid mismatch or p + q > N.
template <class Tag>
BasicForm<Tag> wedge(const BasicForm<Tag>& e, const BasicForm<Tag>& f);

/// Euclidean Hodge star, (*E)_{I^c} = sigma(I, I^c) E_I.
template <class Tag>
BasicForm<Tag> hodge_star(const BasicForm<Tag>& e);

/// R E = sum_n c_n dx^n ^ E with c the chosen coordinate field.
template <class Tag>
BasicForm<Tag> apply_R(const BasicForm<Tag>& e, Coordinates coords);

/// T E = (-1)^{(q-1)N} * R * E.
template <class Tag>
BasicForm<Tag> apply_T(const BasicForm<Tag>& e, Coordinates coords);

/// (E^tau, E^rho): components without / with the last axis.
template <class Tag>
std::pair<BasicForm<Tag>, BasicForm<Tag>> split_tangential_normal(const BasicForm<Tag>& e);

/// Multiply every component by the squared coordinate radius (|x|^2 or |xi|^2).
template <class Tag>
BasicForm<Tag> multiply_radius_squared(const BasicForm<Tag>& e, Coordinates coords);

/// Weighted L^2 pairing sum rho^{2s} E_I conj(H_I) h^N over the grid.
Complex l2_inner(const FormField& e, const FormField& h, double weight = 0.0);
double l2_norm(const FormField& e, double weight = 0.0);

/// Unweighted pairing of spectral coefficients with the same h^N measure, so
/// that a unitary transform preserves it.
Complex l2_inner(const SpectralField& e, const SpectralField& h);
double l2_norm(const SpectralField& e);

/// rho(x)^p = (1 + |x|^2)^{p/2} at every node.
std::vector<double> rho_power(const GridSpec& grid, double exponent);

/// Pointwise multiplication by a real scalar field.
FormField scale_pointwise(const FormField& e, std::span<const double> factor);

/// Constant-valued form: every node carries the given component vector.
FormField constant_form(const GridSpec& grid, int rank, std::span<const Complex> values);

/// Real parts / imaginary parts magnitude check.
double max_imaginary(const FormField& e);

}  // namespace formcalc
