#include "frohlich/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <cblas.h>
#include <lapacke.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace frohlich {

namespace {

void require_symmetric(const SparseOperator& H) {
  if (!H.symmetric()) throw std::invalid_argument("operator is not symmetric");
}

void require_dense_cap(Index dim, Index cap) {
  if (dim > cap) {
    throw SizingError("dimension " + std::to_string(dim) + " exceeds the dense cap " + std::to_string(cap),
                      static_cast<double>(dim));
  }
}

Eigen::MatrixXd checked_dense(const SparseOperator& H, Index cap) {
  require_symmetric(H);
  require_dense_cap(H.dim(), cap);
  return H.dense();
}

void symmetrize(Eigen::MatrixXd& m) { m = (0.5 * (m + m.transpose())).eval(); }

void mirror_lower(Eigen::MatrixXd& m) {
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
}

}  // namespace

DenseSpectrum::DenseSpectrum(const SparseOperator& H, Index dense_cap)
    : DenseSpectrum(checked_dense(H, dense_cap)) {}

DenseSpectrum::DenseSpectrum(Eigen::MatrixXd dense) : values_(dense.rows()), vectors_(std::move(dense)) {
  const Index n = vectors_.rows();
  if (n != vectors_.cols()) throw std::invalid_argument("DenseSpectrum: matrix must be square");
  if (n == 0) return;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n), vectors_.data(),
                                         static_cast<lapack_int>(n), values_.data());
  if (info != 0) throw ConvergenceError("dsyevd failed with info = " + std::to_string(info));
}

Eigen::MatrixXd DenseSpectrum::function(const std::function<double(double)>& f) const {
  Eigen::VectorXd fv(values_.size());
  for (Index i = 0; i < fv.size(); ++i) fv[i] = f(values_[i]);
  const Index n = dim();
  if (n == 0) return Eigen::MatrixXd(0, 0);
  if (fv.minCoeff() >= 0.0) {
    // V f V^T = W W^T with W = V f^{1/2}; the rank-k update fills one triangle,
    // which is mirrored so the result is exactly symmetric.
    const Eigen::MatrixXd W = vectors_ * fv.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(n), static_cast<int>(n), 1.0, W.data(),
                static_cast<int>(n), 0.0, out.data(), static_cast<int>(n));
    mirror_lower(out);
    return out;
  }
  Eigen::MatrixXd out = (vectors_ * fv.asDiagonal()) * vectors_.transpose();
  symmetrize(out);
  return out;
}

Eigen::MatrixXd DenseSpectrum::semigroup(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup: t must be nonnegative");
  if (t == 0.0) return Eigen::MatrixXd::Identity(dim(), dim());
  return function([t](double e) { return std::exp(-t * e); });
}

SpectralResult DenseSpectrum::ground() const {
  SpectralResult r;
  r.method = SolverMethod::dense;
  if (dim() == 0) return r;
  r.energy = values_[0];
  r.vector = vectors_.col(0);
  normalize_sign(r.vector);
  r.gap = dim() > 1 ? values_[1] - values_[0] : 0.0;
  return r;
}

Eigen::MatrixXd semigroup(const SparseOperator& H, double t, Index dense_cap) {
  require_symmetric(H);
  require_dense_cap(H.dim(), dense_cap);
  if (t == 0.0) return Eigen::MatrixXd::Identity(H.dim(), H.dim());
  return DenseSpectrum(H, dense_cap).semigroup(t);
}

Eigen::MatrixXd resolvent(const SparseOperator& H, double mu, Index dense_cap) {
  require_symmetric(H);
  require_dense_cap(H.dim(), dense_cap);
  if (is_diagonal(H)) {
    const Eigen::VectorXd shifted = H.dense().diagonal().array() + mu;
    if (H.dim() > 0 && shifted.minCoeff() <= 0.0) {
      throw ShiftError("H + mu is not positive definite for mu = " + std::to_string(mu));
    }
    return Eigen::MatrixXd(shifted.cwiseInverse().asDiagonal());
  }
  Eigen::MatrixXd inv = H.dense();
  inv.diagonal().array() += mu;
  const auto n = static_cast<lapack_int>(H.dim());
  if (n == 0) return inv;
  if (LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, inv.data(), n) != 0) {
    throw ShiftError("H + mu is not positive definite for mu = " + std::to_string(mu));
  }
  const lapack_int info = LAPACKE_dpotri(LAPACK_COL_MAJOR, 'L', n, inv.data(), n);
  if (info != 0) throw ShiftError("Cholesky inverse failed for mu = " + std::to_string(mu));
  mirror_lower(inv);
  return inv;
}

Eigen::VectorXd resolvent_apply(const SparseOperator& H, double mu, const Eigen::VectorXd& v) {
  return resolvent_apply(H, mu, Eigen::MatrixXd(v)).col(0);
}

Eigen::MatrixXd resolvent_apply(const SparseOperator& H, double mu, const Eigen::MatrixXd& v) {
  require_symmetric(H);
  if (v.rows() != H.dim()) throw std::invalid_argument("resolvent_apply: vector length mismatch");
  SparseOperator::Matrix shifted = H.matrix();
  SparseOperator::Matrix id(H.dim(), H.dim());
  id.setIdentity();
  shifted += mu * id;
  Eigen::SimplicialLLT<SparseOperator::Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw ShiftError("H + mu is not positive definite for mu = " + std::to_string(mu));
  }
  return llt.solve(v);
}

// ---------------------------------------------------------------------------
// OperatorAnalysis
// ---------------------------------------------------------------------------

OperatorAnalysis::OperatorAnalysis(SparseOperator H, SolverOptions options, Index dense_cap)
    : H_(std::move(H)), options_(options), dense_cap_(dense_cap) {
  require_symmetric(H_);
}

const SpectralResult& OperatorAnalysis::ground() {
  if (!ground_) ground_ = ground_state(H_, options_);
  return *ground_;
}

const DenseSpectrum& OperatorAnalysis::spectrum() {
  if (!spectrum_) spectrum_ = std::make_unique<DenseSpectrum>(H_, dense_cap_);
  return *spectrum_;
}

const Eigen::MatrixXd& OperatorAnalysis::semigroup(double t) {
  auto it = semigroups_.find(t);
  if (it == semigroups_.end()) it = semigroups_.emplace(t, spectrum().semigroup(t)).first;
  return it->second;
}

const Eigen::MatrixXd& OperatorAnalysis::resolvent(double mu) {
  auto it = resolvents_.find(mu);
  if (it == resolvents_.end()) it = resolvents_.emplace(mu, frohlich::resolvent(H_, mu, dense_cap_)).first;
  return it->second;
}

Eigen::MatrixXd OperatorAnalysis::resolvent_apply(double mu, const Eigen::MatrixXd& v) const {
  return frohlich::resolvent_apply(H_, mu, v);
}

double OperatorAnalysis::min_eigenvalue() {
  if (spectrum_ && spectrum_->dim() > 0) return spectrum_->values()[0];
  return ground().energy;
}

void OperatorAnalysis::release_dense() {
  spectrum_.reset();
  resolvents_.clear();
  semigroups_.clear();
}

double semigroup_law_error(const DenseSpectrum& spectrum, double s, double t) {
  const Eigen::MatrixXd lhs = spectrum.semigroup(s) * spectrum.semigroup(t);
  return (lhs - spectrum.semigroup(s + t)).cwiseAbs().maxCoeff();
}

double semigroup_law_error(OperatorAnalysis& H, double s, double t) {
  const Eigen::MatrixXd lhs = H.semigroup(s) * H.semigroup(t);
  return (lhs - H.semigroup(s + t)).cwiseAbs().maxCoeff();
}

void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const Index workers = std::min<Index>(threads, n);
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (Index i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace frohlich
