#pragma once

// Frohlich Hamiltonian at fixed total momentum on the truncated Fock space:
//
//   H_L(P) = 1/2 |P - P_f|^2 + N_f - W_L,   W_L = sum_{|k_i| <= L} g_i (a_i + a_i^dagger)
//
// and the local variant K_L(P) whose kinetic and number terms only see the
// modes inside the cutoff.

#include "frohlich/fock.hpp"

#include <optional>
#include <span>

namespace frohlich {

enum class CouplingSign {
  attractive,  // -W: the physical model, off-diagonal entries <= 0
  repulsive,   // +W: constructed violation of positivity
};

struct PolaronModel {
  const ModeGrid* grid = nullptr;
  const FockBasis* basis = nullptr;
  Vec3 P = Vec3::Zero();
  Index cutoff_index = 0;
  double lambda = 0.0;  // requested cutoff
  CouplingSign sign = CouplingSign::attractive;

  PolaronModel(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, double lambda,
               CouplingSign sign = CouplingSign::attractive);

  SparseOperator hamiltonian() const;
  SparseOperator local_hamiltonian() const;
  SparseOperator interaction() const;
  SparseOperator projection() const;
};

/// Diagonal part 1/2 |P - sum_{i<modes} n_i k_i|^2 + sum_{i<modes} n_i.
Eigen::VectorXd free_diagonal(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, Index modes);

/// W_L = sum_{i < cutoff_index(lambda)} g_i (a_i + a_i^dagger).
SparseOperator interaction_op(const ModeGrid& grid, const FockBasis& basis, double lambda);

SparseOperator assemble_hamiltonian(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, double lambda,
                                    CouplingSign sign = CouplingSign::attractive);

SparseOperator assemble_local_hamiltonian(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                          double lambda, CouplingSign sign = CouplingSign::attractive);

/// Q_L: 0/1 diagonal selecting states with no boson outside the cutoff.
SparseOperator projection_Q(const FockBasis& basis, const ModeGrid& grid, double lambda);

struct LiebYamazakiBound {
  bool valid = false;
  double M = 0.0;
  double condition_sum = 0.0;  // alpha lambda0^2 sum_{|k_i| >= L0} w_i / |k_i|^4
  double bound_sum = 0.0;      // sum_{|k_i| <= L0} w_i / |k_i|^2
};

/// Cutoff-uniform lower bound. valid iff the tail sum is below 1/8; then
/// every H_L(P) >= M = -alpha lambda0^2 sum_{|k_i| <= L0} w_i/|k_i|^2 - 1/2.
LiebYamazakiBound lieb_yamazaki_bound(const ModeGrid& grid, double alpha, double lambda0_cut);

/// Smallest shell radius for which the bound is valid, if any.
std::optional<double> smallest_valid_lieb_yamazaki_cut(const ModeGrid& grid, double alpha);

struct FormBoundMargins {
  double margin_crea = 0.0;   // lambda_min(|f|_w^2 (dGamma(w) + 1) - a(f)^dagger a(f))
  double margin_vhove = 0.0;  // lambda_min(dGamma(w) + phi(f)) + |f|_w^2
  double weighted_norm = 0.0; // |f|_w^2 = sum f_i^2 / w_i
};

FormBoundMargins verify_form_bounds(const FockBasis& basis, std::span<const double> omega,
                                    std::span<const double> f);

}  // namespace frohlich
