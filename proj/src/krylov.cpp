#include "frohlich/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace frohlich {

const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::automatic: return "automatic";
    case SolverMethod::dense: return "dense";
    case SolverMethod::iterative: return "iterative";
  }
  return "unknown";
}

void normalize_sign(Eigen::VectorXd& psi) {
  if (psi.size() == 0) return;
  Index at = 0;
  psi.cwiseAbs().maxCoeff(&at);
  if (psi[at] < 0.0) psi = -psi;
}

KrylovResult krylov_schur_lowest(const MatVec& op, Index dim, const Eigen::VectorXd& start, Index nev,
                                 double tol, Index krylov_dim, int max_restarts) {
  if (dim < 1) throw std::invalid_argument("krylov_schur_lowest: empty operator");
  if (start.size() != dim) throw std::invalid_argument("krylov_schur_lowest: start vector length mismatch");
  const double start_norm = start.norm();
  if (!(start_norm > 0.0)) throw std::invalid_argument("krylov_schur_lowest: zero start vector");

  const Index m = std::clamp<Index>(krylov_dim, std::min<Index>(2, dim), dim);
  nev = std::clamp<Index>(nev, 1, m);
  const Index keep = std::min<Index>(m - 1, std::max<Index>(nev + 1, m / 2));

  Eigen::MatrixXd V(dim, m + 1);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  V.col(0) = start / start_norm;
  Index kept = 0;
  Eigen::VectorXd w(dim);

  for (int restart = 0; restart <= max_restarts; ++restart) {
    Index size = m;
    double beta = 0.0;
    bool invariant = false;
    for (Index j = kept; j < m; ++j) {
      op(V.col(j), w);
      // classical Gram-Schmidt, applied twice
      Eigen::VectorXd h = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h;
      const Eigen::VectorXd h2 = V.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * h2;
      h += h2;
      for (Index i = 0; i <= j; ++i) {
        T(i, j) = h[i];
        T(j, i) = h[i];
      }
      beta = w.norm();
      const double scale = std::max(1.0, T.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff());
      if (beta <= 1e-13 * scale || j + 1 == dim) {
        size = j + 1;
        invariant = true;
        break;
      }
      V.col(j + 1) = w / beta;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(T.topLeftCorner(size, size));
    const Eigen::VectorXd& theta = small.eigenvalues();
    const Eigen::MatrixXd& S = small.eigenvectors();
    const Index found = std::min(nev, size);
    Eigen::VectorXd residuals(found);
    for (Index i = 0; i < found; ++i) residuals[i] = invariant ? 0.0 : std::abs(beta * S(size - 1, i));

    if (invariant || residuals.maxCoeff() <= tol) {
      KrylovResult out;
      out.values = theta.head(found);
      out.vectors = V.leftCols(size) * S.leftCols(found);
      out.residuals = residuals;
      out.restarts = restart;
      return out;
    }

    // Thick restart: keep the lowest Ritz vectors plus the residual direction.
    const Eigen::MatrixXd ritz = V.leftCols(m) * S.leftCols(keep);
    const Eigen::VectorXd next = V.col(m);
    V.leftCols(keep) = ritz;
    V.col(keep) = next;
    T.setZero();
    for (Index i = 0; i < keep; ++i) T(i, i) = theta[i];
    kept = keep;
  }
  throw ConvergenceError("Krylov-Schur iteration did not converge after " + std::to_string(max_restarts) +
                         " restarts");
}

namespace {

double gershgorin_upper(const SparseOperator& H) {
  Eigen::VectorXd bound = Eigen::VectorXd::Zero(H.dim());
  for (const auto& e : H.entries()) bound[e.row] += e.row == e.col ? e.value : std::abs(e.value);
  return bound.size() ? bound.maxCoeff() : 0.0;
}

// Deterministic, implementation-independent uniform values in [0.5, 1.5).
Eigen::VectorXd scrambled_start(Index dim) {
  std::mt19937_64 gen(0x5eed'f0c5'2024ULL);
  Eigen::VectorXd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = 0.5 + static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return v;
}

SpectralResult iterative_ground_state(const SparseOperator& H, const SolverOptions& opt) {
  const Index n = H.dim();
  const auto& A = H.matrix();
  MatVec op = [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y.noalias() = A * x; };
  const KrylovResult ground =
      krylov_schur_lowest(op, n, Eigen::VectorXd::Ones(n), 1, 0.5 * opt.solve_tol, opt.krylov_dim, opt.max_restarts);

  SpectralResult r;
  r.method = SolverMethod::iterative;
  r.iterations = ground.restarts;
  r.vector = ground.vectors.col(0).normalized();
  normalize_sign(r.vector);
  r.energy = r.vector.dot(A * r.vector);
  r.residual = (A * r.vector - r.energy * r.vector).norm();

  if (opt.compute_gap && n > 1) {
    const double sigma = gershgorin_upper(H) - r.energy + 1.0;
    const Eigen::VectorXd psi = r.vector;
    MatVec deflated = [&A, &psi, sigma](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y.noalias() = A * x;
      y += (sigma * psi.dot(x)) * psi;
    };
    Eigen::VectorXd start = scrambled_start(n);
    start -= psi.dot(start) * psi;
    const KrylovResult excited =
        krylov_schur_lowest(deflated, n, start, 1, 0.5 * opt.solve_tol, opt.krylov_dim, opt.max_restarts);
    r.gap = std::max(0.0, excited.values[0] - r.energy);
  }
  return r;
}

// Exact eigenpair of a diagonal operator: the smallest entry and its basis
// vector (first index on ties).
SpectralResult diagonal_ground_state(const SparseOperator& H) {
  const Eigen::VectorXd d = H.matrix().diagonal();
  Index at = 0;
  for (Index i = 1; i < d.size(); ++i) {
    if (d[i] < d[at]) at = i;
  }
  SpectralResult r;
  r.method = SolverMethod::dense;
  r.energy = d[at];
  r.vector = Eigen::VectorXd::Unit(d.size(), at);
  double next = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < d.size(); ++i) {
    if (i != at) next = std::min(next, d[i]);
  }
  r.gap = d.size() > 1 ? next - r.energy : 0.0;
  return r;
}

}  // namespace

SpectralResult ground_state(const SparseOperator& H, const SolverOptions& options) {
  if (!H.symmetric()) throw std::invalid_argument("ground_state: operator is not symmetric");
  if (H.dim() < 1) throw std::invalid_argument("ground_state: empty operator");
  if (is_diagonal(H)) return diagonal_ground_state(H);
  SolverMethod method = options.method;
  if (method == SolverMethod::automatic) {
    method = H.dim() < options.dense_threshold ? SolverMethod::dense : SolverMethod::iterative;
  }
  if (method == SolverMethod::iterative) {
    SpectralResult r = iterative_ground_state(H, options);
    if (r.residual > options.solve_tol) {
      throw ConvergenceError("iterative ground state residual " + std::to_string(r.residual) +
                             " exceeds the solve tolerance");
    }
    return r;
  }
  SpectralResult r = DenseSpectrum(H, std::max(H.dim(), kDenseCap)).ground();
  r.residual = (H.matrix() * r.vector - r.energy * r.vector).norm();
  return r;
}

}  // namespace frohlich
