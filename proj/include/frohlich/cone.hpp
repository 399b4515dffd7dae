#pragma once

// Order calculus on the discrete Frohlich cone: the nonnegative orthant of the
// occupation basis. For this cone, A maps the cone into itself iff every entry
// of A is nonnegative, and the operator order A >= B is entrywise.

#include "frohlich/fock.hpp"

#include <Eigen/Core>

#include <complex>
#include <optional>
#include <vector>

namespace frohlich {

struct ConeVector {
  Eigen::VectorXcd coefficients;
  double tol = 0.0;

  ConeVector() = default;
  explicit ConeVector(const Eigen::VectorXd& real, double tol = 0.0)
      : coefficients(real.cast<std::complex<double>>()), tol(tol) {}
  explicit ConeVector(Eigen::VectorXcd c, double tol = 0.0) : coefficients(std::move(c)), tol(tol) {}

  Index size() const { return coefficients.size(); }
  Eigen::VectorXd real() const { return coefficients.real(); }
};

bool in_cone(const ConeVector& v);
bool strictly_positive(const ConeVector& v);

struct JordanParts {
  Eigen::VectorXd re_plus;
  Eigen::VectorXd re_minus;
  Eigen::VectorXd im_plus;
  Eigen::VectorXd im_minus;

  Eigen::VectorXcd recompose() const;
};

/// v = (Re v)_+ - (Re v)_- + i[(Im v)_+ - (Im v)_-], each part in the cone
/// and the two parts of each component mutually orthogonal.
JordanParts jordan_decompose(const Eigen::VectorXcd& v);
JordanParts jordan_decompose(const Eigen::VectorXd& v);

struct MatrixEntry {
  Index row = -1;
  Index col = -1;
  double value = 0.0;
};

struct OrderReport {
  bool holds = false;
  MatrixEntry worst_entry;  // most violating (smallest) entry
  double margin = 0.0;      // smallest entry of the difference
};

/// 1e-12 * (1 + max |entry|).
double default_tolerance(double max_abs_entry);

/// A >= B: every entry of A - B is >= -tol. Implicit zeros count as entries.
OrderReport op_order_geq(const SparseOperator& a, const SparseOperator& b, std::optional<double> tol = {});
OrderReport op_order_geq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::optional<double> tol = {});

/// All entries >= -tol.
OrderReport positivity_preserving(const SparseOperator& a, std::optional<double> tol = {});
OrderReport positivity_preserving(const Eigen::MatrixXd& a, std::optional<double> tol = {});

/// All entries > tol.
OrderReport positivity_improving(const SparseOperator& a, std::optional<double> tol = {});
OrderReport positivity_improving(const Eigen::MatrixXd& a, std::optional<double> tol = {});

/// Definitional check: A e_j is in the cone for every basis vector e_j.
bool maps_cone_into_cone(const Eigen::MatrixXd& a, double tol);

struct ErgodicityResult {
  bool found = false;
  Index witness = -1;
  double value = 0.0;  // <x, A_witness y>
};

/// Searches the family for a member with <x, A_j y> > tol. x and y must be
/// nonzero cone vectors.
ErgodicityResult ergodicity_check(const std::vector<Eigen::MatrixXd>& family, const ConeVector& x,
                                  const ConeVector& y, double tol = 1e-12);

/// The same search over the power family {op^n : n = 0..max_power}, applied
/// to y one power at a time.
ErgodicityResult ergodicity_check_powers(const SparseOperator& op, const ConeVector& x, const ConeVector& y,
                                         int max_power, double tol = 1e-12);

}  // namespace frohlich
