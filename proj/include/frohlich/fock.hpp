#pragma once

// Discretized phonon modes, the truncated bosonic Fock basis, and the
// second-quantized operators acting on it.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frohlich {

using Index = std::ptrdiff_t;
using Vec3 = Eigen::Vector3d;

/// 2^{1/4} / (2 pi): prefactor of the Frohlich coupling function.
inline constexpr double kLambda0 = 1.18920711500272106671749997 / (2.0 * 3.14159265358979323846264338);

/// Thrown when a requested basis would exceed the configured dimension cap.
class SizingError : public std::runtime_error {
 public:
  SizingError(const std::string& what, double dimension)
      : std::runtime_error(what), dimension_(dimension) {}
  double dimension() const { return dimension_; }

 private:
  double dimension_;
};

struct Mode {
  Vec3 k;
  double radius;  // |k|, stored exactly as the shell radius
  double weight;  // k-space cell volume
  double g;       // sqrt(alpha) * lambda0 * sqrt(weight) / |k|
  int shell;
};

class ModeGrid {
 public:
  ModeGrid(std::vector<Mode> modes, double alpha, double lambda0, double r_min, double lambda_max,
           int n_shells, int n_dirs);

  std::span<const Mode> modes() const { return modes_; }
  const Mode& mode(Index i) const { return modes_.at(static_cast<std::size_t>(i)); }
  Index size() const { return static_cast<Index>(modes_.size()); }

  double alpha() const { return alpha_; }
  double lambda0() const { return lambda0_; }
  double r_min() const { return r_min_; }
  double lambda_max() const { return lambda_max_; }
  int n_shells() const { return n_shells_; }
  int n_dirs() const { return n_dirs_; }
  double shell_width() const { return (lambda_max_ - r_min_) / n_shells_; }

  /// Shell radii in ascending order.
  std::vector<double> shell_radii() const;

  /// Number of modes with |k| <= lambda. Modes are sorted by radius, so the
  /// modes inside the cutoff are exactly [0, cutoff_index(lambda)).
  Index cutoff_index(double lambda) const;

  /// Largest shell radius not exceeding lambda, or 0 when no shell qualifies.
  double snapped_cutoff(double lambda) const;

  std::vector<double> couplings() const;

 private:
  std::vector<Mode> modes_;
  double alpha_;
  double lambda0_;
  double r_min_;
  double lambda_max_;
  int n_shells_;
  int n_dirs_;
};

/// Spherical product grid: n_shells uniform radial shells on [r_min, lambda_max]
/// (midpoint radii) times a fixed direction set with equal angular weights.
/// Supported direction sets: 1 (+x only), 6 (+-axes), 14 (axes and cube diagonals).
ModeGrid build_mode_grid(double alpha, double lambda_max, int n_shells, int n_dirs, double r_min);

/// Unit direction vectors for a supported direction set.
std::vector<Vec3> direction_set(int n_dirs);

inline constexpr Index kDefaultDimensionCap = 200000;

/// Number of m-tuples of nonnegative integers with sum <= n_max, i.e.
/// binomial(m + n_max, m). Saturates at the double range.
double basis_dimension(Index mode_count, int n_max);

/// Occupation-number basis with total boson number <= n_max.
///
/// States are ordered by sector (total boson number ascending) and, inside a
/// sector, in decreasing lexicographic order of (n_1, ..., n_m): for m = 3,
/// n_max = 1 the order is 000, 100, 010, 001. Index 0 is the vacuum.
class FockBasis {
 public:
  FockBasis(Index mode_count, int n_max, Index dimension_cap = kDefaultDimensionCap);

  Index mode_count() const { return mode_count_; }
  int n_max() const { return n_max_; }
  Index dimension() const { return dimension_; }

  std::span<const std::uint8_t> state(Index j) const {
    return {occupations_.data() + j * mode_count_, static_cast<std::size_t>(mode_count_)};
  }
  int total(Index j) const { return totals_[static_cast<std::size_t>(j)]; }

  /// Basis index of an occupation vector, or -1 if it is not in the basis.
  Index index_of(std::span<const int> occupation) const;
  Index index_of(std::span<const std::uint8_t> occupation) const;

  /// Index of state j with one boson added to (delta = +1) or removed from
  /// (delta = -1) mode i; -1 if the result leaves the basis.
  Index shifted(Index j, Index mode, int delta) const;

  /// First basis index of the sector with `n` bosons.
  Index sector_begin(int n) const { return sector_offsets_[static_cast<std::size_t>(n)]; }

 private:
  template <typename Int>
  Index rank(std::span<const Int> occupation) const;
  // Number of length-`len` tuples summing to exactly `sum`.
  Index compositions(Index len, int sum) const;

  Index mode_count_;
  int n_max_;
  Index dimension_;
  std::vector<std::uint8_t> occupations_;
  std::vector<int> totals_;
  std::vector<Index> sector_offsets_;
  // comp_[len][sum], len in [0, m], sum in [0, n_max]
  std::vector<std::vector<Index>> comp_;
};

FockBasis enumerate_basis(Index mode_count, int n_max, Index dimension_cap = kDefaultDimensionCap);

/// Real sparse matrix in the occupation basis. Assembly sums duplicate
/// coordinates; a symmetric operator is verified to be exactly symmetric.
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
  using Triplet = Eigen::Triplet<double, Index>;

  struct Entry {
    Index row;
    Index col;
    double value;
  };

  SparseOperator() = default;
  SparseOperator(Index dim, const std::vector<Triplet>& triplets, bool symmetric);
  SparseOperator(Matrix matrix, bool symmetric);

  static SparseOperator identity(Index dim);
  static SparseOperator diagonal(const Eigen::VectorXd& diag);

  Index dim() const { return matrix_.rows(); }
  bool symmetric() const { return symmetric_; }
  const Matrix& matrix() const { return matrix_; }

  /// Coordinate list, column-major order, explicit zeros removed.
  std::vector<Entry> entries() const;
  double coeff(Index row, Index col) const { return matrix_.coeff(row, col); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }
  double max_abs() const;

  SparseOperator transpose() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return matrix_ * v; }

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(double s, const SparseOperator& a);

 private:
  Matrix matrix_;
  bool symmetric_ = false;
};

bool is_exactly_symmetric(const SparseOperator::Matrix& m);

/// No stored off-diagonal entries.
bool is_diagonal(const SparseOperator& H);

SparseOperator creation_op(const FockBasis& basis, Index mode);
SparseOperator annihilation_op(const FockBasis& basis, Index mode);

/// Second quantization of a one-particle multiplier: diagonal sum_i n_i omega_i.
/// Signed omega is accepted (momentum components).
SparseOperator dGamma(const FockBasis& basis, std::span<const double> omega);
SparseOperator number_op(const FockBasis& basis);
/// Component c in {0, 1, 2} of the phonon momentum sum_i n_i k_i.
SparseOperator momentum_op(const FockBasis& basis, const ModeGrid& grid, int component);

/// Diagonal contraction Gamma(c): entry prod_i c_i^{n_i}, each c_i in [0, 1].
SparseOperator gamma_diagonal(const FockBasis& basis, std::span<const double> c);

/// phi(f) = sum_i f_i (a_i + a_i^dagger).
SparseOperator field_op(const FockBasis& basis, std::span<const double> f);

/// a(f) = sum_i f_i a_i for real f.
SparseOperator annihilation_field(const FockBasis& basis, std::span<const double> f);

}  // namespace frohlich
