#include "frohlich/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace frohlich {

bool in_cone(const ConeVector& v) {
  for (Index j = 0; j < v.size(); ++j) {
    const auto c = v.coefficients[j];
    if (c.real() < -v.tol || std::abs(c.imag()) > v.tol) return false;
  }
  return true;
}

bool strictly_positive(const ConeVector& v) {
  for (Index j = 0; j < v.size(); ++j) {
    const auto c = v.coefficients[j];
    if (!(c.real() > v.tol) || std::abs(c.imag()) > v.tol) return false;
  }
  return true;
}

Eigen::VectorXcd JordanParts::recompose() const {
  Eigen::VectorXcd out(re_plus.size());
  for (Index j = 0; j < out.size(); ++j) {
    out[j] = {re_plus[j] - re_minus[j], im_plus[j] - im_minus[j]};
  }
  return out;
}

JordanParts jordan_decompose(const Eigen::VectorXcd& v) {
  const Eigen::VectorXd re = v.real();
  const Eigen::VectorXd im = v.imag();
  return JordanParts{re.cwiseMax(0.0), (-re).cwiseMax(0.0), im.cwiseMax(0.0), (-im).cwiseMax(0.0)};
}

JordanParts jordan_decompose(const Eigen::VectorXd& v) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(v.size());
  return JordanParts{v.cwiseMax(0.0), (-v).cwiseMax(0.0), zero, zero};
}

double default_tolerance(double max_abs_entry) { return 1e-12 * (1.0 + max_abs_entry); }

namespace {

// Smallest entry of a sparse matrix, implicit zeros included.
MatrixEntry min_entry(const SparseOperator::Matrix& m) {
  MatrixEntry worst{-1, -1, std::numeric_limits<double>::infinity()};
  for (Index c = 0; c < m.outerSize(); ++c) {
    for (SparseOperator::Matrix::InnerIterator it(m, c); it; ++it) {
      if (it.value() < worst.value) worst = {it.row(), it.col(), it.value()};
    }
  }
  const Index total = m.rows() * m.cols();
  if (m.nonZeros() < total && worst.value > 0.0) {
    // locate one structural zero
    for (Index c = 0; c < m.outerSize(); ++c) {
      Index expected = 0;
      for (SparseOperator::Matrix::InnerIterator it(m, c); it; ++it, ++expected) {
        if (it.row() != expected) break;
      }
      if (expected < m.rows()) {
        worst = {expected, c, 0.0};
        break;
      }
    }
  }
  if (m.rows() == 0) worst.value = 0.0;
  return worst;
}

MatrixEntry min_entry(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Index r = 0, c = 0;
  const double v = m.minCoeff(&r, &c);
  return {r, c, v};
}

template <typename M>
OrderReport preserving_report(const M& diff, double tol) {
  OrderReport rep;
  rep.worst_entry = min_entry(diff);
  rep.margin = rep.worst_entry.value;
  rep.holds = rep.margin >= -tol;
  return rep;
}

template <typename M>
OrderReport improving_report(const M& diff, double tol) {
  OrderReport rep;
  rep.worst_entry = min_entry(diff);
  rep.margin = rep.worst_entry.value;
  rep.holds = rep.margin > tol;
  return rep;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_square(Index rows, Index cols) {
  if (rows != cols) throw std::invalid_argument("operator must be square");
}

}  // namespace

OrderReport op_order_geq(const SparseOperator& a, const SparseOperator& b, std::optional<double> tol) {
  if (a.dim() != b.dim()) throw std::invalid_argument("op_order_geq: dimension mismatch");
  const SparseOperator::Matrix diff = a.matrix() - b.matrix();
  return preserving_report(diff, tol.value_or(default_tolerance(std::max(a.max_abs(), b.max_abs()))));
}

OrderReport op_order_geq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::optional<double> tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("op_order_geq: dimension mismatch");
  const Eigen::MatrixXd diff = a - b;
  return preserving_report(diff, tol.value_or(default_tolerance(std::max(max_abs(a), max_abs(b)))));
}

OrderReport positivity_preserving(const SparseOperator& a, std::optional<double> tol) {
  return preserving_report(a.matrix(), tol.value_or(default_tolerance(a.max_abs())));
}

OrderReport positivity_preserving(const Eigen::MatrixXd& a, std::optional<double> tol) {
  require_square(a.rows(), a.cols());
  return preserving_report(a, tol.value_or(default_tolerance(max_abs(a))));
}

OrderReport positivity_improving(const SparseOperator& a, std::optional<double> tol) {
  return improving_report(a.matrix(), tol.value_or(default_tolerance(a.max_abs())));
}

OrderReport positivity_improving(const Eigen::MatrixXd& a, std::optional<double> tol) {
  require_square(a.rows(), a.cols());
  return improving_report(a, tol.value_or(default_tolerance(max_abs(a))));
}

bool maps_cone_into_cone(const Eigen::MatrixXd& a, double tol) {
  for (Index j = 0; j < a.cols(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(a.cols());
    e[j] = 1.0;
    if (!in_cone(ConeVector(Eigen::VectorXd(a * e), tol))) return false;
  }
  return true;
}

namespace {
void require_nonzero_cone(const ConeVector& v, const char* name) {
  if (!in_cone(v)) throw std::invalid_argument(std::string("ergodicity_check: ") + name + " is outside the cone");
  if (v.coefficients.cwiseAbs().maxCoeff() <= v.tol) {
    throw std::invalid_argument(std::string("ergodicity_check: ") + name + " is zero");
  }
}
}  // namespace

ErgodicityResult ergodicity_check(const std::vector<Eigen::MatrixXd>& family, const ConeVector& x,
                                  const ConeVector& y, double tol) {
  require_nonzero_cone(x, "x");
  require_nonzero_cone(y, "y");
  const Eigen::VectorXd xr = x.real();
  const Eigen::VectorXd yr = y.real();
  for (std::size_t j = 0; j < family.size(); ++j) {
    const double value = xr.dot(family[j] * yr);
    if (value > tol) return {true, static_cast<Index>(j), value};
  }
  return {};
}

ErgodicityResult ergodicity_check_powers(const SparseOperator& op, const ConeVector& x, const ConeVector& y,
                                         int max_power, double tol) {
  require_nonzero_cone(x, "x");
  require_nonzero_cone(y, "y");
  const Eigen::VectorXd xr = x.real();
  Eigen::VectorXd w = y.real();
  for (int n = 0; n <= max_power; ++n) {
    if (n > 0) w = op.apply(w);
    const double value = xr.dot(w);
    if (value > tol) return {true, n, value};
  }
  return {};
}

}  // namespace frohlich
