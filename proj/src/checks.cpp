#include "frohlich/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace frohlich {

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

double& Tolerances::at(const std::string& name) {
  if (name == "solve") return solve;
  if (name == "strictness") return strictness;
  if (name == "decoupled_coupling") return decoupled_coupling;
  if (name == "order") return order;
  if (name == "resolvent_order") return resolvent_order;
  if (name == "semigroup_order") return semigroup_order;
  if (name == "positivity") return positivity;
  if (name == "gap") return gap;
  if (name == "local_identity") return local_identity;
  if (name == "dispersion") return dispersion;
  if (name == "semigroup_law") return semigroup_law;
  if (name == "form_bound") return form_bound;
  if (name == "lower_bound") return lower_bound;
  throw std::invalid_argument("unknown tolerance \"" + name + "\"");
}

std::map<std::string, double> Tolerances::as_map() const {
  return {{"solve", solve},
          {"strictness", strictness},
          {"decoupled_coupling", decoupled_coupling},
          {"order", order},
          {"resolvent_order", resolvent_order},
          {"semigroup_order", semigroup_order},
          {"positivity", positivity},
          {"gap", gap},
          {"local_identity", local_identity},
          {"dispersion", dispersion},
          {"semigroup_law", semigroup_law},
          {"form_bound", form_bound},
          {"lower_bound", lower_bound}};
}

// ---------------------------------------------------------------------------
// CutoffFamily
// ---------------------------------------------------------------------------

namespace {

void require_ascending(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("cutoff list is empty");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (lambdas[i] < lambdas[i - 1]) throw std::invalid_argument("cutoff list must be ascending");
  }
}

double coupling_sum(const ModeGrid& grid, Index from, Index to) {
  double s = 0.0;
  for (Index i = from; i < to; ++i) s += grid.mode(i).g * grid.mode(i).g;
  return s;
}

double max_coupling(const ModeGrid& grid, Index from, Index to) {
  double m = 0.0;
  for (Index i = from; i < to; ++i) m = std::max(m, grid.mode(i).g);
  return m;
}

}  // namespace

CutoffFamily::CutoffFamily(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, std::vector<double> lambdas,
                           CouplingSign sign, SolverOptions solver, Index dense_cap)
    : grid_(&grid), basis_(&basis), P_(P), lambdas_(std::move(lambdas)), sign_(sign) {
  require_ascending(lambdas_);
  for (double l : lambdas_) {
    members_.push_back(
        std::make_unique<OperatorAnalysis>(assemble_hamiltonian(grid, basis, P, l, sign), solver, dense_cap));
  }
}

double auto_mu(const std::vector<double>& min_eigenvalues) {
  double lowest = 0.0;
  for (double e : min_eigenvalues) lowest = std::min(lowest, e);
  return 1.0 - lowest;
}

double CutoffFamily::auto_mu() {
  std::vector<double> mins;
  for (auto& m : members_) mins.push_back(m->min_eigenvalue());
  return frohlich::auto_mu(mins);
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

namespace {

// <psi, H psi> minus the lowest Ritz value of H on span{psi, v}. With psi the
// previous ground vector and v the added field applied to it, this bounds the
// energy drop from below; the first-order term <psi, v> vanishes.
double ritz_gain(const SparseOperator& H, const Eigen::VectorXd& psi, Eigen::VectorXd v) {
  const Eigen::VectorXd Hpsi = H.apply(psi);
  const double a = psi.dot(Hpsi);
  v -= psi.dot(v) * psi;
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  v /= norm;
  const double b = v.dot(Hpsi);
  const double c = v.dot(H.apply(v));
  const double half = 0.5 * (c - a);
  const double r = std::hypot(half, b);
  return half > 0.0 ? b * b / (r + half) : r - half;
}

}  // namespace

SweepTable cutoff_sweep(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                        const std::vector<double>& lambdas, const SweepOptions& options) {
  require_ascending(lambdas);
  const std::size_t n = lambdas.size();
  std::vector<SparseOperator> hams(n);
  std::vector<SpectralResult> results(n);
  SolverOptions solver = options.solver;
  solver.solve_tol = options.tol.solve;

  parallel_for(static_cast<Index>(n), options.threads, [&](Index i) {
    const auto k = static_cast<std::size_t>(i);
    hams[k] = assemble_hamiltonian(grid, basis, P, lambdas[k], options.sign);
    results[k] = ground_state(hams[k], solver);
  });

  SweepTable table;
  for (std::size_t k = 0; k < n; ++k) {
    SweepRow row;
    row.lambda = lambdas[k];
    row.snapped_lambda = grid.snapped_cutoff(lambdas[k]);
    row.cutoff_index = grid.cutoff_index(lambdas[k]);
    row.energy = results[k].energy;
    row.gap = results[k].gap;
    row.residual = results[k].residual;
    row.method = results[k].method;
    if (k > 0) {
      const Index prev_c = table.rows.back().cutoff_index;
      row.added_coupling = coupling_sum(grid, prev_c, row.cutoff_index);
      const Eigen::VectorXd& psi = results[k - 1].vector;
      row.variational_gain = ritz_gain(hams[k], psi, (hams[k - 1] - hams[k]).apply(psi));
      const bool coupled = max_coupling(grid, prev_c, row.cutoff_index) >= options.tol.decoupled_coupling;
      row.strictly_below_previous = coupled && (results[k - 1].energy - row.energy > options.tol.strictness);
    }
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Order equivalence
// ---------------------------------------------------------------------------

namespace {

void require_semigroup_nonnegative(const Eigen::MatrixXd& S, double t, double tol, const char* which) {
  const OrderReport rep = positivity_preserving(S, tol);
  if (!rep.holds) {
    throw HypothesisError(std::string(which) + ": e^{-tH} has entry " + std::to_string(rep.margin) + " at (" +
                              std::to_string(rep.worst_entry.row) + ", " + std::to_string(rep.worst_entry.col) +
                              ") for t = " + std::to_string(t),
                          rep.worst_entry);
  }
}

}  // namespace

OrderEquivalenceReport order_equivalence_check(OperatorAnalysis& a, OperatorAnalysis& b, double mu,
                                               const std::vector<double>& t_list, const Tolerances& tol) {
  if (a.dim() != b.dim()) throw std::invalid_argument("order_equivalence_check: dimension mismatch");
  OrderEquivalenceReport rep;
  rep.mu = mu;
  rep.t_list = t_list;
  rep.all_semigroups = true;
  for (double t : t_list) {
    const Eigen::MatrixXd& Sa = a.semigroup(t);
    const Eigen::MatrixXd& Sb = b.semigroup(t);
    require_semigroup_nonnegative(Sa, t, tol.positivity, "H_A");
    require_semigroup_nonnegative(Sb, t, tol.positivity, "H_B");
    rep.semigroups.push_back(op_order_geq(Sa, Sb, tol.semigroup_order));
    rep.all_semigroups = rep.all_semigroups && rep.semigroups.back().holds;
  }
  rep.hamiltonian = op_order_geq(b.op(), a.op(), tol.order);
  rep.resolvent = op_order_geq(a.resolvent(mu), b.resolvent(mu), tol.resolvent_order);
  rep.consistent = !rep.hamiltonian.holds || (rep.resolvent.holds && rep.all_semigroups);
  rep.equivalent = rep.hamiltonian.holds == rep.resolvent.holds && rep.resolvent.holds == rep.all_semigroups;
  return rep;
}

OrderEquivalenceReport order_equivalence_check(const SparseOperator& H_A, const SparseOperator& H_B, double mu,
                                               const std::vector<double>& t_list, const Tolerances& tol) {
  OperatorAnalysis a(H_A);
  OperatorAnalysis b(H_B);
  return order_equivalence_check(a, b, mu, t_list, tol);
}

// ---------------------------------------------------------------------------
// Perron-Frobenius-Faris
// ---------------------------------------------------------------------------

Index coupling_components(const SparseOperator& H, double tol) {
  const Index n = H.dim();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  Index components = n;
  for (const auto& e : H.entries()) {
    if (e.row == e.col || !(e.value < -tol)) continue;
    const Index ra = find(e.row);
    const Index rb = find(e.col);
    if (ra != rb) {
      parent[static_cast<std::size_t>(ra)] = rb;
      --components;
    }
  }
  return components;
}

FarisReport pf_faris_check(OperatorAnalysis& H, double mu, const std::vector<double>& t_list, const Tolerances& tol) {
  FarisReport rep;
  rep.hypothesis_margin = std::numeric_limits<double>::infinity();
  rep.semigroup_improving = !t_list.empty();
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("pf_faris_check: every t must be positive");
    const Eigen::MatrixXd& S = H.semigroup(t);
    require_semigroup_nonnegative(S, t, tol.positivity, "pf_faris_check");
    rep.semigroup_reports.push_back(positivity_improving(S, tol.positivity));
    rep.hypothesis_margin = std::min(rep.hypothesis_margin, rep.semigroup_reports.back().margin);
    rep.semigroup_improving = rep.semigroup_improving && rep.semigroup_reports.back().holds;
  }

  rep.mu_list = {mu, 1.5 * mu, 2.0 * mu};
  rep.resolvent_improving_all = true;
  for (double m : rep.mu_list) {
    rep.resolvent_reports.push_back(positivity_improving(H.resolvent(m), tol.positivity));
    rep.resolvent_improving_all = rep.resolvent_improving_all && rep.resolvent_reports.back().holds;
  }
  rep.resolvent_improving_single = rep.resolvent_reports.front().holds;

  rep.components = coupling_components(H.op(), 0.0);
  rep.ergodic = rep.components == 1;

  const SpectralResult g = H.spectrum().ground();
  rep.gap = g.gap;
  rep.min_ground_entry = g.vector.minCoeff();
  rep.unique_positive_ground = g.gap > tol.gap && rep.min_ground_entry > tol.positivity;

  const bool v = rep.resolvent_improving_single;
  rep.consistent = rep.resolvent_improving_all == v && rep.semigroup_improving == v && rep.ergodic == v &&
                   rep.unique_positive_ground == v;
  return rep;
}

FarisReport pf_faris_check(const SparseOperator& H, double mu, const std::vector<double>& t_list,
                           const Tolerances& tol) {
  OperatorAnalysis a(H);
  return pf_faris_check(a, mu, t_list, tol);
}

// ---------------------------------------------------------------------------
// Convergence diagnostics
// ---------------------------------------------------------------------------

std::vector<Eigen::VectorXd> probe_vectors(Index dim) {
  Eigen::VectorXd vacuum = Eigen::VectorXd::Zero(dim);
  vacuum[0] = 1.0;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim).normalized();
  std::mt19937_64 gen(0xc0ffee'2025ULL);
  Eigen::VectorXd random(dim);
  for (Index i = 0; i < dim; ++i) random[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  random.normalize();
  return {vacuum, ones, random};
}

ConvergenceTable convergence_diagnostic(CutoffFamily& family, double mu, const std::vector<double>& t_list,
                                        const Tolerances& tol) {
  ConvergenceTable table;
  table.mu = mu;
  table.t_list = t_list;
  table.monotone = true;
  table.finite = true;

  const Index dim = family.basis().dimension();
  const std::vector<Eigen::VectorXd> probes = probe_vectors(dim);
  Eigen::MatrixXd probe_matrix(dim, static_cast<Index>(probes.size()));
  for (std::size_t p = 0; p < probes.size(); ++p) probe_matrix.col(static_cast<Index>(p)) = probes[p];

  std::vector<Eigen::MatrixXd> applied;
  for (Index i = 0; i < family.size(); ++i) applied.push_back(family.member(i).resolvent_apply(mu, probe_matrix));

  for (Index i = 0; i + 1 < family.size(); ++i) {
    ConvergenceRow row;
    row.lambda_from = family.lambdas()[static_cast<std::size_t>(i)];
    row.lambda_to = family.lambdas()[static_cast<std::size_t>(i + 1)];
    const Eigen::MatrixXd diff = applied[static_cast<std::size_t>(i)] - applied[static_cast<std::size_t>(i + 1)];
    row.diff_vacuum = diff.col(0).norm();
    row.diff_ones = diff.col(1).norm();
    row.diff_random = diff.col(2).norm();
    row.tail_coupling = coupling_sum(family.grid(), family.cutoff_index(i), family.cutoff_index(i + 1));
    row.monotone = true;
    for (double t : t_list) {
      const OrderReport rep =
          op_order_geq(family.member(i + 1).semigroup(t), family.member(i).semigroup(t), tol.semigroup_order);
      row.semigroup_margins.push_back(rep.margin);
      row.monotone = row.monotone && rep.holds;
    }
    table.monotone = table.monotone && row.monotone;
    table.finite = table.finite && std::isfinite(row.diff_vacuum) && std::isfinite(row.diff_ones) &&
                   std::isfinite(row.diff_random);
    table.rows.push_back(std::move(row));
  }
  return table;
}

ConvergenceTable convergence_diagnostic(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                        const std::vector<double>& lambdas, double mu,
                                        const std::vector<double>& t_list, const Tolerances& tol) {
  CutoffFamily family(grid, basis, P, lambdas);
  return convergence_diagnostic(family, mu, t_list, tol);
}

// ---------------------------------------------------------------------------
// Local identity
// ---------------------------------------------------------------------------

LocalIdentityReport local_identity_check(OperatorAnalysis& H, OperatorAnalysis& K, const SparseOperator& Q,
                                         double mu, double t, const Tolerances& tol) {
  if (H.dim() != K.dim() || H.dim() != Q.dim()) throw std::invalid_argument("local_identity_check: dimension mismatch");
  std::vector<Index> block;
  for (Index j = 0; j < Q.dim(); ++j) {
    if (Q.coeff(j, j) != 0.0) block.push_back(j);
  }
  LocalIdentityReport rep;
  rep.t = t;
  rep.block_dim = static_cast<Index>(block.size());

  const Eigen::MatrixXd& RH = H.resolvent(mu);
  const Eigen::MatrixXd& RK = K.resolvent(mu);
  for (Index a : block) {
    for (Index b : block) rep.deviation = std::max(rep.deviation, std::abs(RH(a, b) - RK(a, b)));
  }

  const Eigen::MatrixXd& S = K.semigroup(t);
  rep.block_margin = std::numeric_limits<double>::infinity();
  for (Index a : block) {
    for (Index b : block) rep.block_margin = std::min(rep.block_margin, S(a, b));
  }
  rep.block_improving = rep.block_margin > tol.positivity;
  return rep;
}

LocalIdentityReport local_identity_check(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                         double lambda, double mu, double t, const Tolerances& tol) {
  OperatorAnalysis H(assemble_hamiltonian(grid, basis, P, lambda));
  OperatorAnalysis K(assemble_local_hamiltonian(grid, basis, P, lambda));
  LocalIdentityReport rep = local_identity_check(H, K, projection_Q(basis, grid, lambda), mu, t, tol);
  const Index c = grid.cutoff_index(lambda);
  rep.couplings_positive = c > 0;
  for (Index i = 0; i < c; ++i) rep.couplings_positive = rep.couplings_positive && grid.mode(i).g > 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Dispersion
// ---------------------------------------------------------------------------

DispersionTable dispersion(const ModeGrid& grid, const FockBasis& basis, double lambda, const std::vector<Vec3>& P_list,
                           const SweepOptions& options) {
  SolverOptions solver = options.solver;
  solver.solve_tol = options.tol.solve;
  std::vector<Vec3> points;
  points.push_back(Vec3::Zero());
  points.insert(points.end(), P_list.begin(), P_list.end());
  std::vector<SpectralResult> results(points.size());
  parallel_for(static_cast<Index>(points.size()), options.threads, [&](Index i) {
    const auto k = static_cast<std::size_t>(i);
    results[k] = ground_state(assemble_hamiltonian(grid, basis, points[k], lambda, options.sign), solver);
  });

  DispersionTable table;
  table.energy_at_zero = results[0].energy;
  for (std::size_t k = 1; k < points.size(); ++k) {
    DispersionRow row;
    row.P = points[k];
    row.energy = results[k].energy;
    row.gap = results[k].gap;
    row.min_at_zero_ok = table.energy_at_zero <= row.energy + options.tol.dispersion;
    row.in_existence_regime = row.P.norm() < std::sqrt(2.0);
    table.ok = table.ok && row.min_at_zero_ok;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace frohlich
