#include "frohlich/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace frohlich {

namespace {

void require_length(std::span<const double> v, Index expected, const char* what) {
  if (static_cast<Index>(v.size()) != expected) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(v.size()) +
                                " does not match mode count " + std::to_string(expected));
  }
}

void require_mode(const FockBasis& basis, Index mode) {
  if (mode < 0 || mode >= basis.mode_count()) {
    throw std::out_of_range("mode index " + std::to_string(mode) + " outside [0, " +
                            std::to_string(basis.mode_count()) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeGrid
// ---------------------------------------------------------------------------

ModeGrid::ModeGrid(std::vector<Mode> modes, double alpha, double lambda0, double r_min,
                   double lambda_max, int n_shells, int n_dirs)
    : modes_(std::move(modes)),
      alpha_(alpha),
      lambda0_(lambda0),
      r_min_(r_min),
      lambda_max_(lambda_max),
      n_shells_(n_shells),
      n_dirs_(n_dirs) {
  std::stable_sort(modes_.begin(), modes_.end(),
                   [](const Mode& a, const Mode& b) { return a.radius < b.radius; });
}

std::vector<double> ModeGrid::shell_radii() const {
  std::vector<double> radii;
  for (const Mode& m : modes_) {
    if (radii.empty() || radii.back() != m.radius) radii.push_back(m.radius);
  }
  return radii;
}

Index ModeGrid::cutoff_index(double lambda) const {
  // A cutoff typed in as a decimal shell radius must still select that shell.
  const double slack = 1e-12 * lambda_max_;
  const auto it = std::upper_bound(modes_.begin(), modes_.end(), lambda + slack,
                                   [](double l, const Mode& m) { return l < m.radius; });
  return static_cast<Index>(it - modes_.begin());
}

double ModeGrid::snapped_cutoff(double lambda) const {
  const Index c = cutoff_index(lambda);
  return c == 0 ? 0.0 : modes_[static_cast<std::size_t>(c - 1)].radius;
}

std::vector<double> ModeGrid::couplings() const {
  std::vector<double> g;
  g.reserve(modes_.size());
  for (const Mode& m : modes_) g.push_back(m.g);
  return g;
}

std::vector<Vec3> direction_set(int n_dirs) {
  std::vector<Vec3> dirs;
  switch (n_dirs) {
    case 1:
      dirs.emplace_back(1.0, 0.0, 0.0);
      break;
    case 14: {
      dirs = direction_set(6);
      const double s = 1.0 / std::sqrt(3.0);
      for (int sx : {1, -1})
        for (int sy : {1, -1})
          for (int sz : {1, -1}) dirs.emplace_back(sx * s, sy * s, sz * s);
      break;
    }
    case 6:
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {1.0, -1.0}) {
          Vec3 d = Vec3::Zero();
          d[axis] = sign;
          dirs.push_back(d);
        }
      }
      break;
    default:
      throw std::invalid_argument("unsupported direction count " + std::to_string(n_dirs) +
                                  " (expected 1, 6 or 14)");
  }
  return dirs;
}

ModeGrid build_mode_grid(double alpha, double lambda_max, int n_shells, int n_dirs, double r_min) {
  if (!(r_min > 0.0)) throw std::invalid_argument("r_min must be positive (coupling is singular at k = 0)");
  if (!(r_min < lambda_max)) throw std::invalid_argument("r_min must be below lambda_max");
  if (n_shells < 1) throw std::invalid_argument("n_shells must be at least 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and nonnegative");
  const std::vector<Vec3> dirs = direction_set(n_dirs);

  const double dr = (lambda_max - r_min) / n_shells;
  const double solid_angle = 4.0 * std::numbers::pi / n_dirs;
  const double prefactor = std::sqrt(alpha) * kLambda0;

  std::vector<Mode> modes;
  modes.reserve(static_cast<std::size_t>(n_shells) * dirs.size());
  for (int s = 0; s < n_shells; ++s) {
    const double r = r_min + (s + 0.5) * dr;
    const double weight = r * r * dr * solid_angle;
    const double g = prefactor * std::sqrt(weight) / r;
    for (const Vec3& d : dirs) modes.push_back(Mode{r * d, r, weight, g, s});
  }
  return ModeGrid(std::move(modes), alpha, kLambda0, r_min, lambda_max, n_shells, n_dirs);
}

// ---------------------------------------------------------------------------
// FockBasis
// ---------------------------------------------------------------------------

double basis_dimension(Index mode_count, int n_max) {
  // binomial(m + n, n) = prod_{j=1..n} (m + j) / j
  double d = 1.0;
  for (int j = 1; j <= n_max; ++j) d = d * static_cast<double>(mode_count + j) / j;
  return std::round(d);
}

FockBasis enumerate_basis(Index mode_count, int n_max, Index dimension_cap) {
  return FockBasis(mode_count, n_max, dimension_cap);
}

FockBasis::FockBasis(Index mode_count, int n_max, Index dimension_cap)
    : mode_count_(mode_count), n_max_(n_max) {
  if (mode_count < 1) throw std::invalid_argument("mode_count must be positive");
  if (n_max < 0 || n_max > std::numeric_limits<std::uint8_t>::max()) {
    throw std::invalid_argument("n_max must lie in [0, 255]");
  }
  const double dim = basis_dimension(mode_count, n_max);
  if (dim > static_cast<double>(dimension_cap)) {
    throw SizingError("Fock basis dimension " + std::to_string(static_cast<long long>(dim)) +
                          " exceeds the cap " + std::to_string(dimension_cap),
                      dim);
  }
  dimension_ = static_cast<Index>(dim);

  comp_.assign(static_cast<std::size_t>(mode_count + 1),
               std::vector<Index>(static_cast<std::size_t>(n_max + 1), 0));
  comp_[0][0] = 1;
  for (Index len = 1; len <= mode_count; ++len) {
    // comp(len, s) = sum_{v=0..s} comp(len-1, s-v)
    Index running = 0;
    for (int s = 0; s <= n_max; ++s) {
      running += comp_[static_cast<std::size_t>(len - 1)][static_cast<std::size_t>(s)];
      comp_[static_cast<std::size_t>(len)][static_cast<std::size_t>(s)] = running;
    }
  }

  sector_offsets_.assign(static_cast<std::size_t>(n_max + 2), 0);
  for (int n = 0; n <= n_max; ++n) {
    sector_offsets_[static_cast<std::size_t>(n + 1)] = sector_offsets_[static_cast<std::size_t>(n)] + compositions(mode_count, n);
  }

  occupations_.reserve(static_cast<std::size_t>(dimension_ * mode_count));
  totals_.reserve(static_cast<std::size_t>(dimension_));
  std::vector<std::uint8_t> current(static_cast<std::size_t>(mode_count), 0);
  // Depth-first fill, largest value first at each position.
  auto fill = [&](auto&& self, Index pos, int remaining, int total) -> void {
    if (pos == mode_count - 1) {
      current[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(remaining);
      occupations_.insert(occupations_.end(), current.begin(), current.end());
      totals_.push_back(total);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      current[static_cast<std::size_t>(pos)] = static_cast<std::uint8_t>(v);
      self(self, pos + 1, remaining - v, total);
    }
  };
  for (int n = 0; n <= n_max; ++n) fill(fill, 0, n, n);
}

Index FockBasis::compositions(Index len, int sum) const {
  if (sum < 0) return 0;
  return comp_[static_cast<std::size_t>(len)][static_cast<std::size_t>(sum)];
}

template <typename Int>
Index FockBasis::rank(std::span<const Int> occupation) const {
  if (static_cast<Index>(occupation.size()) != mode_count_) return -1;
  int total = 0;
  for (Int v : occupation) {
    if (v < 0) return -1;
    total += static_cast<int>(v);
  }
  if (total > n_max_) return -1;
  Index r = sector_begin(total);
  int remaining = total;
  for (Index i = 0; i + 1 < mode_count_; ++i) {
    const int v = static_cast<int>(occupation[static_cast<std::size_t>(i)]);
    // tuples sharing the prefix with a larger value at position i come first
    for (int w = v + 1; w <= remaining; ++w) r += compositions(mode_count_ - i - 1, remaining - w);
    remaining -= v;
  }
  return r;
}

Index FockBasis::index_of(std::span<const int> occupation) const { return rank(occupation); }
Index FockBasis::index_of(std::span<const std::uint8_t> occupation) const { return rank(occupation); }

Index FockBasis::shifted(Index j, Index mode, int delta) const {
  const auto s = state(j);
  const int n_i = s[static_cast<std::size_t>(mode)];
  if (delta > 0 && total(j) + delta > n_max_) return -1;
  if (n_i + delta < 0) return -1;
  // Rank by the change in position: recompute on a small copy.
  thread_local std::vector<std::uint8_t> buf;
  buf.assign(s.begin(), s.end());
  buf[static_cast<std::size_t>(mode)] = static_cast<std::uint8_t>(n_i + delta);
  return rank(std::span<const std::uint8_t>(buf));
}

// ---------------------------------------------------------------------------
// SparseOperator
// ---------------------------------------------------------------------------

bool is_exactly_symmetric(const SparseOperator::Matrix& m) {
  if (m.rows() != m.cols()) return false;
  SparseOperator::Matrix t = m.transpose();
  SparseOperator::Matrix diff = m - t;
  diff.prune(0.0, 0.0);
  return diff.nonZeros() == 0;
}

SparseOperator::SparseOperator(Index dim, const std::vector<Triplet>& triplets, bool symmetric)
    : matrix_(dim, dim), symmetric_(symmetric) {
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.prune(0.0, 0.0);
  matrix_.makeCompressed();
  if (symmetric_ && !is_exactly_symmetric(matrix_)) {
    throw std::logic_error("operator flagged symmetric but assembly is not");
  }
}

SparseOperator::SparseOperator(Matrix matrix, bool symmetric)
    : matrix_(std::move(matrix)), symmetric_(symmetric) {
  if (matrix_.rows() != matrix_.cols()) throw std::invalid_argument("operator must be square");
  matrix_.prune(0.0, 0.0);
  matrix_.makeCompressed();
  if (symmetric_ && !is_exactly_symmetric(matrix_)) {
    throw std::logic_error("operator flagged symmetric but assembly is not");
  }
}

SparseOperator SparseOperator::identity(Index dim) {
  Matrix m(dim, dim);
  m.setIdentity();
  return SparseOperator(std::move(m), true);
}

SparseOperator SparseOperator::diagonal(const Eigen::VectorXd& diag) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(diag.size()));
  for (Index j = 0; j < diag.size(); ++j) {
    if (diag[j] != 0.0) t.emplace_back(j, j, diag[j]);
  }
  return SparseOperator(diag.size(), t, true);
}

std::vector<SparseOperator::Entry> SparseOperator::entries() const {
  std::vector<Entry> out;
  out.reserve(static_cast<std::size_t>(matrix_.nonZeros()));
  for (Index c = 0; c < matrix_.outerSize(); ++c) {
    for (Matrix::InnerIterator it(matrix_, c); it; ++it) out.push_back({it.row(), it.col(), it.value()});
  }
  return out;
}

double SparseOperator::max_abs() const {
  double m = 0.0;
  for (Index k = 0; k < matrix_.nonZeros(); ++k) m = std::max(m, std::abs(matrix_.valuePtr()[k]));
  return m;
}

SparseOperator SparseOperator::transpose() const {
  return SparseOperator(Matrix(matrix_.transpose()), symmetric_);
}

namespace {
void require_same_dim(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
}
}  // namespace

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  SparseOperator::Matrix m = a.matrix_ + b.matrix_;
  const bool sym = a.symmetric_ && b.symmetric_ ? true : is_exactly_symmetric(m);
  return SparseOperator(std::move(m), sym);
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  SparseOperator::Matrix m = a.matrix_ - b.matrix_;
  const bool sym = a.symmetric_ && b.symmetric_ ? true : is_exactly_symmetric(m);
  return SparseOperator(std::move(m), sym);
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  require_same_dim(a, b);
  SparseOperator::Matrix m = (a.matrix_ * b.matrix_).pruned(0.0, 0.0);
  const bool sym = is_exactly_symmetric(m);
  return SparseOperator(std::move(m), sym);
}

SparseOperator operator*(double s, const SparseOperator& a) {
  SparseOperator::Matrix m = s * a.matrix_;
  return SparseOperator(std::move(m), a.symmetric_);
}

// ---------------------------------------------------------------------------
// Second-quantized operators
// ---------------------------------------------------------------------------

SparseOperator creation_op(const FockBasis& basis, Index mode) {
  require_mode(basis, mode);
  std::vector<SparseOperator::Triplet> t;
  for (Index j = 0; j < basis.dimension(); ++j) {
    const Index target = basis.shifted(j, mode, +1);
    if (target < 0) continue;  // top sector: truncated away
    const int n_i = basis.state(j)[static_cast<std::size_t>(mode)];
    t.emplace_back(target, j, std::sqrt(static_cast<double>(n_i + 1)));
  }
  return SparseOperator(basis.dimension(), t, false);
}

SparseOperator annihilation_op(const FockBasis& basis, Index mode) {
  return creation_op(basis, mode).transpose();
}

SparseOperator dGamma(const FockBasis& basis, std::span<const double> omega) {
  require_length(omega, basis.mode_count(), "dGamma");
  Eigen::VectorXd diag(basis.dimension());
  for (Index j = 0; j < basis.dimension(); ++j) {
    const auto s = basis.state(j);
    double v = 0.0;
    for (Index i = 0; i < basis.mode_count(); ++i) {
      if (s[static_cast<std::size_t>(i)] != 0) v += s[static_cast<std::size_t>(i)] * omega[static_cast<std::size_t>(i)];
    }
    diag[j] = v;
  }
  return SparseOperator::diagonal(diag);
}

SparseOperator number_op(const FockBasis& basis) {
  const std::vector<double> ones(static_cast<std::size_t>(basis.mode_count()), 1.0);
  return dGamma(basis, ones);
}

SparseOperator momentum_op(const FockBasis& basis, const ModeGrid& grid, int component) {
  if (component < 0 || component > 2) throw std::out_of_range("momentum component must be 0, 1 or 2");
  if (grid.size() != basis.mode_count()) throw std::invalid_argument("grid and basis mode counts differ");
  std::vector<double> kc;
  for (const Mode& m : grid.modes()) kc.push_back(m.k[component]);
  return dGamma(basis, kc);
}

SparseOperator gamma_diagonal(const FockBasis& basis, std::span<const double> c) {
  require_length(c, basis.mode_count(), "gamma_diagonal");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) {
      throw std::invalid_argument("gamma_diagonal: entry " + std::to_string(i) + " = " +
                                  std::to_string(c[i]) + " outside [0, 1]");
    }
  }
  Eigen::VectorXd diag(basis.dimension());
  for (Index j = 0; j < basis.dimension(); ++j) {
    const auto s = basis.state(j);
    double v = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (int p = 0; p < s[i]; ++p) v *= c[i];
    }
    diag[j] = v;
  }
  return SparseOperator::diagonal(diag);
}

SparseOperator field_op(const FockBasis& basis, std::span<const double> f) {
  require_length(f, basis.mode_count(), "field_op");
  std::vector<SparseOperator::Triplet> t;
  for (Index j = 0; j < basis.dimension(); ++j) {
    if (basis.total(j) >= basis.n_max()) continue;
    const auto s = basis.state(j);
    for (Index i = 0; i < basis.mode_count(); ++i) {
      const double fi = f[static_cast<std::size_t>(i)];
      if (fi == 0.0) continue;
      const Index up = basis.shifted(j, i, +1);
      const double v = fi * std::sqrt(static_cast<double>(s[static_cast<std::size_t>(i)] + 1));
      t.emplace_back(up, j, v);
      t.emplace_back(j, up, v);
    }
  }
  return SparseOperator(basis.dimension(), t, true);
}

SparseOperator annihilation_field(const FockBasis& basis, std::span<const double> f) {
  require_length(f, basis.mode_count(), "annihilation_field");
  std::vector<SparseOperator::Triplet> t;
  for (Index j = 0; j < basis.dimension(); ++j) {
    if (basis.total(j) >= basis.n_max()) continue;
    const auto s = basis.state(j);
    for (Index i = 0; i < basis.mode_count(); ++i) {
      const double fi = f[static_cast<std::size_t>(i)];
      if (fi == 0.0) continue;
      const Index up = basis.shifted(j, i, +1);
      t.emplace_back(j, up, fi * std::sqrt(static_cast<double>(s[static_cast<std::size_t>(i)] + 1)));
    }
  }
  return SparseOperator(basis.dimension(), t, false);
}

bool is_diagonal(const SparseOperator& H) {
  const auto& A = H.matrix();
  for (Index c = 0; c < A.outerSize(); ++c) {
    for (SparseOperator::Matrix::InnerIterator it(A, c); it; ++it) {
      if (it.row() != it.col()) return false;
    }
  }
  return true;
}

}  // namespace frohlich
