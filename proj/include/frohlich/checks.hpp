#pragma once

// Property checks over families of fixed-momentum Hamiltonians: cutoff sweeps,
// order equivalences between operators and their resolvents and semigroups,
// Perron-Frobenius-Faris consistency, convergence diagnostics, the local
// resolvent identity, and dispersion scans.

#include "frohlich/cone.hpp"
#include "frohlich/polaron.hpp"
#include "frohlich/spectral.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace frohlich {

struct Tolerances {
  double solve = 1e-9;                // eigen-residual bound
  double strictness = 1e-10;          // energy drop counted as strict
  double decoupled_coupling = 1e-8;   // shells with max g below this are decoupled
  double order = 1e-12;               // entrywise Hamiltonian order
  double resolvent_order = 1e-10;     // entrywise resolvent order
  double semigroup_order = 1e-10;     // entrywise semigroup order and monotonicity
  double positivity = 1e-12;          // semigroup/resolvent/vector sign checks
  double gap = 1e-8;                  // spectral gap counted as nondegenerate
  double local_identity = 1e-9;       // projected resolvent deviation
  double dispersion = 1e-10;          // E(0) <= E(P) + tol
  double semigroup_law = 1e-8;        // max |T_s T_t - T_{s+t}|
  double form_bound = 1e-9;           // quadratic form margins
  double lower_bound = 1e-9;          // E >= M - tol

  /// Named access for configuration overrides; throws on unknown names.
  double& at(const std::string& name);
  std::map<std::string, double> as_map() const;
};

/// A Hamiltonian family H_L(P) over an ascending list of cutoffs, each member
/// analysed lazily and cached.
class CutoffFamily {
 public:
  CutoffFamily(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, std::vector<double> lambdas,
               CouplingSign sign = CouplingSign::attractive, SolverOptions solver = {}, Index dense_cap = kDenseCap);

  const ModeGrid& grid() const { return *grid_; }
  const FockBasis& basis() const { return *basis_; }
  const Vec3& P() const { return P_; }
  CouplingSign sign() const { return sign_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  Index size() const { return static_cast<Index>(lambdas_.size()); }
  Index cutoff_index(Index member) const { return grid_->cutoff_index(lambdas_[static_cast<std::size_t>(member)]); }

  OperatorAnalysis& member(Index i) { return *members_[static_cast<std::size_t>(i)]; }

  /// 1 + max(0, -min eigenvalue over the family).
  double auto_mu();

 private:
  const ModeGrid* grid_;
  const FockBasis* basis_;
  Vec3 P_;
  std::vector<double> lambdas_;
  CouplingSign sign_;
  std::vector<std::unique_ptr<OperatorAnalysis>> members_;
};

/// The shift rule applied to a list of smallest eigenvalues.
double auto_mu(const std::vector<double>& min_eigenvalues);

// ---------------------------------------------------------------------------
// Cutoff sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  double lambda = 0.0;          // requested cutoff
  double snapped_lambda = 0.0;  // largest shell radius <= lambda
  Index cutoff_index = 0;
  double energy = 0.0;
  double gap = 0.0;
  bool strictly_below_previous = false;
  double added_coupling = 0.0;   // sum of g_i^2 over the modes added since the previous row
  double variational_gain = 0.0; // Ritz lowering on span{psi_prev, (W_this - W_prev) psi_prev}
  double residual = 0.0;
  SolverMethod method = SolverMethod::dense;
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

struct SweepOptions {
  SolverOptions solver;
  Tolerances tol;
  CouplingSign sign = CouplingSign::attractive;
  int threads = 1;
};

SweepTable cutoff_sweep(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                        const std::vector<double>& lambdas, const SweepOptions& options = {});

// ---------------------------------------------------------------------------
// Order equivalence between H_A and H_B
// ---------------------------------------------------------------------------

/// Precondition of the order equivalence or of the Faris theorem failed.
class HypothesisError : public std::runtime_error {
 public:
  HypothesisError(const std::string& what, MatrixEntry entry) : std::runtime_error(what), entry_(entry) {}
  const MatrixEntry& entry() const { return entry_; }

 private:
  MatrixEntry entry_;
};

struct OrderEquivalenceReport {
  OrderReport hamiltonian;              // H_B - H_A >= 0
  OrderReport resolvent;                // (H_A+mu)^{-1} - (H_B+mu)^{-1} >= 0
  std::vector<OrderReport> semigroups;  // e^{-t H_A} - e^{-t H_B} >= 0, one per t
  std::vector<double> t_list;
  double mu = 0.0;
  bool all_semigroups = false;
  bool consistent = false;  // (i) implies (ii) and (iii)
  bool equivalent = false;  // all three verdicts agree
};

/// Decides B >= A, (A+mu)^{-1} >= (B+mu)^{-1} and e^{-tA} >= e^{-tB}. Both
/// semigroups must be entrywise nonnegative.
OrderEquivalenceReport order_equivalence_check(OperatorAnalysis& a, OperatorAnalysis& b, double mu,
                                               const std::vector<double>& t_list, const Tolerances& tol = {});
OrderEquivalenceReport order_equivalence_check(const SparseOperator& H_A, const SparseOperator& H_B, double mu,
                                               const std::vector<double>& t_list, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Perron-Frobenius-Faris
// ---------------------------------------------------------------------------

struct FarisReport {
  bool resolvent_improving_single = false;  // (H+mu)^{-1} > 0 at one shift
  bool resolvent_improving_all = false;     // at every probed shift
  bool semigroup_improving = false;         // e^{-tH} > 0 at every t
  bool ergodic = false;                     // every pair of basis vectors connected
  bool unique_positive_ground = false;      // gap > 0 and psi > 0
  bool consistent = false;                  // all five agree

  std::vector<double> mu_list;
  std::vector<OrderReport> resolvent_reports;
  std::vector<OrderReport> semigroup_reports;
  Index components = 0;  // connected components of the coupling graph
  double gap = 0.0;
  double min_ground_entry = 0.0;
  double hypothesis_margin = 0.0;  // min entry of e^{-tH} over t_list
};

/// Requires e^{-tH} >= 0 for every t in t_list; throws HypothesisError otherwise.
FarisReport pf_faris_check(OperatorAnalysis& H, double mu, const std::vector<double>& t_list,
                           const Tolerances& tol = {});
FarisReport pf_faris_check(const SparseOperator& H, double mu, const std::vector<double>& t_list,
                           const Tolerances& tol = {});

/// Number of connected components of the graph joining a != b when H_ab < -tol.
Index coupling_components(const SparseOperator& H, double tol);

// ---------------------------------------------------------------------------
// Convergence diagnostics over increasing cutoffs
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  double lambda_from = 0.0;
  double lambda_to = 0.0;
  double diff_vacuum = 0.0;  // |[R_from - R_to] v| for each probe
  double diff_ones = 0.0;
  double diff_random = 0.0;
  double tail_coupling = 0.0;  // sum of g_i^2 over the added modes
  std::vector<double> semigroup_margins;  // min entry of e^{-tH_to} - e^{-tH_from}
  bool monotone = false;
};

struct ConvergenceTable {
  double mu = 0.0;
  std::vector<double> t_list;
  std::vector<ConvergenceRow> rows;
  bool monotone = false;
  bool finite = false;
};

ConvergenceTable convergence_diagnostic(CutoffFamily& family, double mu, const std::vector<double>& t_list,
                                        const Tolerances& tol = {});
ConvergenceTable convergence_diagnostic(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                        const std::vector<double>& lambdas, double mu,
                                        const std::vector<double>& t_list, const Tolerances& tol = {});

/// Probe vectors: vacuum, normalized all-ones, and a fixed pseudo-random cone vector.
std::vector<Eigen::VectorXd> probe_vectors(Index dim);

// ---------------------------------------------------------------------------
// Local resolvent identity
// ---------------------------------------------------------------------------

struct LocalIdentityReport {
  double deviation = 0.0;     // max |Q (H+mu)^{-1} Q - Q (K+mu)^{-1} Q|
  double block_margin = 0.0;  // min entry of the Q block of e^{-tK}
  bool block_improving = false;
  bool couplings_positive = false;  // all inside couplings > 0
  Index block_dim = 0;
  double t = 1.0;
};

LocalIdentityReport local_identity_check(OperatorAnalysis& H, OperatorAnalysis& K, const SparseOperator& Q,
                                         double mu, double t, const Tolerances& tol = {});
LocalIdentityReport local_identity_check(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                         double lambda, double mu, double t = 1.0, const Tolerances& tol = {});

// ---------------------------------------------------------------------------
// Dispersion
// ---------------------------------------------------------------------------

struct DispersionRow {
  Vec3 P = Vec3::Zero();
  double energy = 0.0;
  double gap = 0.0;
  bool min_at_zero_ok = true;      // E(0) <= E(P) + tol
  bool in_existence_regime = true; // |P| < sqrt(2), annotation only
};

struct DispersionTable {
  double energy_at_zero = 0.0;
  std::vector<DispersionRow> rows;
  bool ok = true;
};

DispersionTable dispersion(const ModeGrid& grid, const FockBasis& basis, double lambda, const std::vector<Vec3>& P_list,
                           const SweepOptions& options = {});

}  // namespace frohlich
