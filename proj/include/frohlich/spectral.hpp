#pragma once

// Eigensolvers and matrix functions for real symmetric operators.

#include "frohlich/fock.hpp"

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace frohlich {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H + mu is not positive definite.
class ShiftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr Index kDenseThreshold = 2000;
inline constexpr Index kDenseCap = 4000;

enum class SolverMethod { automatic, dense, iterative };

const char* to_string(SolverMethod m);

struct SolverOptions {
  double solve_tol = 1e-9;  // absolute bound on |H psi - E psi|
  Index dense_threshold = kDenseThreshold;
  SolverMethod method = SolverMethod::automatic;
  Index krylov_dim = 48;
  int max_restarts = 2000;
  bool compute_gap = true;
};

struct SpectralResult {
  double energy = 0.0;
  Eigen::VectorXd vector;
  double gap = 0.0;  // E_1 - E_0, 0 for a one-dimensional space
  SolverMethod method = SolverMethod::dense;
  double residual = 0.0;
  int iterations = 0;  // restarts used by the iterative path
};

/// Flips psi so that its largest-magnitude entry is positive.
void normalize_sign(Eigen::VectorXd& psi);

/// Smallest eigenpair. Dense below the dense threshold, otherwise a restarted
/// Krylov-Schur iteration started from the all-ones vector. The gap is found
/// by a second run on the deflated operator H + sigma psi psi^T.
SpectralResult ground_state(const SparseOperator& H, const SolverOptions& options = {});

struct KrylovResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns
  Eigen::VectorXd residuals;
  int restarts = 0;
};

using MatVec = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Lowest `nev` eigenpairs of a symmetric operator by thick-restarted
/// Krylov-Schur with full reorthogonalization. If the start vector spans an
/// invariant subspace the exact eigenpairs of that subspace are returned.
KrylovResult krylov_schur_lowest(const MatVec& op, Index dim, const Eigen::VectorXd& start, Index nev,
                                 double tol, Index krylov_dim, int max_restarts);

/// Full eigendecomposition of a dense symmetric matrix (LAPACK dsyevd).
class DenseSpectrum {
 public:
  explicit DenseSpectrum(const SparseOperator& H, Index dense_cap = kDenseCap);
  explicit DenseSpectrum(Eigen::MatrixXd dense);

  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  Index dim() const { return values_.size(); }

  /// V f(Lambda) V^T, symmetrized.
  Eigen::MatrixXd function(const std::function<double(double)>& f) const;
  Eigen::MatrixXd semigroup(double t) const;
  SpectralResult ground() const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
};

/// e^{-tH} by spectral decomposition; rejects dimensions above the dense cap.
Eigen::MatrixXd semigroup(const SparseOperator& H, double t, Index dense_cap = kDenseCap);

/// (H + mu)^{-1} by dense Cholesky factorization (LAPACK potrf/potri).
Eigen::MatrixXd resolvent(const SparseOperator& H, double mu, Index dense_cap = kDenseCap);

/// (H + mu)^{-1} v by sparse Cholesky factorization; the matrix form solves
/// every column against one factorization.
Eigen::VectorXd resolvent_apply(const SparseOperator& H, double mu, const Eigen::VectorXd& v);
Eigen::MatrixXd resolvent_apply(const SparseOperator& H, double mu, const Eigen::MatrixXd& v);

/// Owns one operator and caches its expensive dense derivatives.
class OperatorAnalysis {
 public:
  explicit OperatorAnalysis(SparseOperator H, SolverOptions options = {}, Index dense_cap = kDenseCap);

  const SparseOperator& op() const { return H_; }
  Index dim() const { return H_.dim(); }

  const SpectralResult& ground();
  const DenseSpectrum& spectrum();
  const Eigen::MatrixXd& semigroup(double t);
  const Eigen::MatrixXd& resolvent(double mu);
  Eigen::MatrixXd resolvent_apply(double mu, const Eigen::MatrixXd& v) const;

  /// Smallest eigenvalue, from the dense spectrum when it is already present.
  double min_eigenvalue();

  void release_dense();

 private:
  SparseOperator H_;
  SolverOptions options_;
  Index dense_cap_;
  std::optional<SpectralResult> ground_;
  std::unique_ptr<DenseSpectrum> spectrum_;
  std::map<double, Eigen::MatrixXd> resolvents_;
  std::map<double, Eigen::MatrixXd> semigroups_;
};

/// max |T_s T_t - T_{s+t}|.
double semigroup_law_error(const DenseSpectrum& spectrum, double s, double t);
double semigroup_law_error(OperatorAnalysis& H, double s, double t);

/// Runs fn(i) for i in [0, n) on up to `threads` worker threads.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn);

}  // namespace frohlich
