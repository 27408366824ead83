#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "formcalc/form_field.hpp"

namespace formcalc {

/// Smooth scalar profile phi(x) = g(|x - c|^2) with closed-form derivatives
/// up to third order.
class RadialProfile {
 public:
  enum class Kind { constant, gaussian, algebraic };

  static RadialProfile constant(double value);
  /// amplitude * exp(-|x - c|^2 / width^2)
  static RadialProfile gaussian(double amplitude, double width, const NodeCoords& center = {});
  /// amplitude * (1 + |x - c|^2)^{-exponent/2}
  static RadialProfile algebraic(double amplitude, double exponent, const NodeCoords& center = {});

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double parameter() const { return parameter_; }
  const NodeCoords& center() const { return center_; }

  double value(const NodeCoords& x, int dim) const;
  /// Partial derivative along the listed axes (0..3 entries, repeats allowed).
  double derivative(const NodeCoords& x, int dim, std::span<const int> axes) const;

  RadialProfile recentered(const NodeCoords& center) const;

 private:
  /// k-th derivative of g with respect to u = |x - c|^2.
  double g(double u, int k) const;

  Kind kind_ = Kind::constant;
  double amplitude_ = 0.0;
  double parameter_ = 0.0;
  NodeCoords center_{};
};

enum class DecayKind { none, first_kind, second_kind };

struct DecayClass {
  DecayKind kind = DecayKind::none;
  double tau = 0.0;
};

/// One summand phi(x) * M of the perturbation; M is symmetric C(N,q) x C(N,q).
struct PerturbationTerm {
  RadialProfile profile;
  Eigen::MatrixXd matrix;
};

/// Pointwise symmetric positive definite map on rank-q fibers,
/// eps(x) = id + sum_k phi_k(x) M_k, or dense per-node matrices.
class Transformation {
 public:
  Transformation() = default;
  static Transformation identity(int dim, int rank);
  Transformation(int dim, int rank, std::vector<PerturbationTerm> terms, DecayClass decay, int smoothness);
  /// Dense per-node matrices, node-major with row-major C x C blocks.
  static Transformation dense(const GridSpec& grid, int rank, std::vector<double> matrices, DecayClass decay,
                              int smoothness);

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int size() const { return size_; }
  bool is_identity() const { return !dense_ && terms_.empty(); }
  bool is_dense() const { return dense_; }
  bool has_analytic_derivatives() const { return !dense_; }
  const std::vector<PerturbationTerm>& terms() const { return terms_; }
  const GridSpec& dense_grid() const { return dense_grid_; }
  std::span<const double> dense_data() const { return dense_data_; }
  DecayClass decay() const { return decay_; }
  int smoothness() const { return smoothness_; }

  /// Smallest node eigenvalue found by make_transformation (0 until verified).
  double positivity() const { return positivity_; }
  void set_positivity(double c) { positivity_ = c; }

  Eigen::MatrixXd matrix_at(const GridSpec& grid, std::size_t node) const;
  /// d^alpha of the perturbation eps - id at x; alpha as a list of axes.
  /// Throws std::logic_error for dense transformations.
  Eigen::MatrixXd perturbation_derivative(const NodeCoords& x, std::span<const int> axes) const;

 private:
  int dim_ = 1;
  int rank_ = 0;
  int size_ = 1;
  std::vector<PerturbationTerm> terms_;
  bool dense_ = false;
  GridSpec dense_grid_{};
  std::vector<double> dense_data_;
  DecayClass decay_{};
  int smoothness_ = 0;
  double positivity_ = 0.0;
};

/// Constructor input for make_transformation.
struct TransformationSpec {
  enum class Kind { identity, scalar, perturbation };
  Kind kind = Kind::identity;
  int dim = 1;
  int rank = 0;
  RadialProfile scalar_excess;  ///< scalar kind: mu(x) = 1 + excess(x)
  std::vector<PerturbationTerm> terms;
  DecayClass decay;
  int smoothness = 2;

  static TransformationSpec identity(int dim, int rank);
  static TransformationSpec scalar(int dim, int rank, RadialProfile excess, DecayClass decay = {});
  static TransformationSpec perturbation(int dim, int rank, std::vector<PerturbationTerm> terms, DecayClass decay = {});
};

struct AdmissibilityReport {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  std::size_t worst_node = 0;
  double max_asymmetry = 0.0;
  double min_sampled_rayleigh = 0.0;  ///< only filled by verify_admissibility
  /// sup over the inner / outer annulus band of |d^alpha eps^|·r^{tau(+|alpha|)}, per order |alpha|
  std::vector<double> decay_sup_inner;
  std::vector<double> decay_sup_outer;
  bool decay_consistent = true;
};

struct AdmissibilityError : std::runtime_error {
  AdmissibilityError(const std::string& what, AdmissibilityReport r) : std::runtime_error(what), report(std::move(r)) {}
  AdmissibilityReport report;
};

/// Builds and verifies a transformation on the sampling grid: rejects
/// asymmetric matrices and any node whose smallest eigenvalue is <= 0.
Transformation make_transformation(const TransformationSpec& spec, const GridSpec& grid);

/// Node-exact eigenvalues, sampled Rayleigh quotients (directions_per_node
/// random unit vectors per node) and annulus decay ratios.
AdmissibilityReport verify_admissibility(const Transformation& eps, const GridSpec& grid, int directions_per_node = 100,
                                         std::uint64_t seed = 1);

FormField apply(const Transformation& eps, const FormField& e);
FormField apply_inverse(const Transformation& eps, const FormField& e);

/// Rebuilds E from E^tau and G^rho = (eps E)^rho by solving
/// eps^{rho,rho} E^rho = G^rho - (eps E^tau)^rho node by node.
FormField reconstruct_from_split(const FormField& tangential, const FormField& normal_image, const Transformation& eps);

/// eps transported by the orthogonal map x -> Q x:
/// det(Q) (-1)^{q(N-q)} * Q^* * eps (Q^*)^{-1}. The det(Q) factor accounts for
/// the orientation flip of reflections so that id is mapped to id.
Transformation transported(const Transformation& eps, const Eigen::MatrixXd& q);
/// Transport under the reflection (x', x_N) -> (x', -x_N).
Transformation reflected_transform(const Transformation& eps);

/// Fiber matrix of the pullback Q^* on rank-q forms: (Q^*E)_J(x) = sum_I C_{IJ} E_I(Qx).
Eigen::MatrixXd pullback_compound(const Eigen::MatrixXd& q, int rank);
/// Fiber matrix of the Hodge star from rank q to rank N-q.
Eigen::MatrixXd star_matrix(int dim, int rank);

/// Transformation spec file: 40-byte header
///   char[8] "FORMEPS1", int32 N, int32 q, int32 decay kind (0 none, 1 first, 2 second),
///   float64 tau, int32 m, int32 payload (0 catalog, 1 dense), char endianness, char[3] zero
/// then either int32 length + catalog tag ("identity", "scalar-exp", "algebraic"),
/// or float64 L, int32 n followed by C(N,q)^2 real fields of n^N float64 in
/// row-major (I, J) order, each field row-major over the grid.
struct MediaFile {
  TransformationSpec spec;
  bool dense = false;
  std::string catalog_tag;
  GridSpec grid{};
  std::vector<double> matrices;  ///< node-major C x C blocks (dense payload)
};

void save_media(const std::filesystem::path& path, const MediaFile& media);
MediaFile load_media(const std::filesystem::path& path);

/// Catalog: "identity"; "scalar-exp" mu = 1 + exp(-r^2);
/// "algebraic" eps^ = 0.5 (1 + r^2)^{-tau/2} M with a fixed symmetric M, |M| <= 1.
TransformationSpec catalog_spec(const std::string& tag, int dim, int rank, DecayClass decay, int smoothness);
/// Deterministic symmetric C x C matrix with spectrum in [-1, 1].
Eigen::MatrixXd fixed_symmetric_matrix(int size);

/// Transformation described by a media file, verified on the given grid.
Transformation transformation_from_file(const MediaFile& media, const GridSpec& grid);

}  // namespace formcalc
