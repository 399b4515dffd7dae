#include "frohlich/checks.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace frohlich;

namespace {

SparseOperator sparse_of(const Eigen::MatrixXd& m) { return SparseOperator(SparseOperator::Matrix(m.sparseView()), true); }

struct Small {
  ModeGrid grid;
  FockBasis basis;
};

Small small_model(double alpha = 1.0, int shells = 3, int n_max = 2) {
  ModeGrid grid = build_mode_grid(alpha, 3.0, shells, 6, 0.3);
  FockBasis basis = enumerate_basis(grid.size(), n_max);
  return {std::move(grid), std::move(basis)};
}

}  // namespace

TEST_CASE("tolerance names") {
  Tolerances t;
  CHECK(t.as_map().size() == 13);
  for (const auto& [name, value] : t.as_map()) CHECK(t.at(name) == value);
  t.at("strictness") = 1e-6;
  CHECK(t.strictness == 1e-6);
  CHECK_THROWS(t.at("bogus"));
  CHECK(auto_mu({-0.5, 0.2}) == 1.5);
  CHECK(auto_mu({0.3}) == 1.0);
}

TEST_CASE("sweep: decoupled control is constant") {
  const Small m = small_model(0.0);
  const SweepTable t = cutoff_sweep(m.grid, m.basis, Vec3::Zero(), m.grid.shell_radii());
  for (const SweepRow& r : t.rows) {
    CHECK(r.energy == 0.0);
    CHECK_FALSE(r.strictly_below_previous);
  }
}

TEST_CASE("sweep: strict decrease and the variational mechanism") {
  const Small m = small_model();
  const auto radii = m.grid.shell_radii();
  const SweepTable t = cutoff_sweep(m.grid, m.basis, Vec3(0.1, 0.0, 0.0), radii);
  REQUIRE(t.rows.size() == radii.size());
  CHECK_FALSE(t.rows[0].strictly_below_previous);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const double drop = t.rows[k - 1].energy - t.rows[k].energy;
    CHECK(t.rows[k].strictly_below_previous);
    CHECK(drop > 1e-10);
    CHECK(t.rows[k].variational_gain > 0.0);
    CHECK(drop >= t.rows[k].variational_gain - 1e-9);
    CHECK(t.rows[k].added_coupling > 0.0);
  }
  const SpectralResult full = ground_state(assemble_hamiltonian(m.grid, m.basis, Vec3(0.1, 0.0, 0.0), 3.0));
  CHECK(t.rows.back().energy == doctest::Approx(full.energy).epsilon(1e-12));

  SweepOptions threaded;
  threaded.threads = 3;
  const SweepTable t3 = cutoff_sweep(m.grid, m.basis, Vec3(0.1, 0.0, 0.0), radii, threaded);
  for (std::size_t k = 0; k < t.rows.size(); ++k) CHECK(t3.rows[k].energy == t.rows[k].energy);

  CHECK_THROWS(cutoff_sweep(m.grid, m.basis, Vec3::Zero(), {radii[1], radii[0]}));
  CHECK_THROWS(cutoff_sweep(m.grid, m.basis, Vec3::Zero(), {1.0, 4.0}));
}

TEST_CASE("sweep snaps cutoffs between shells") {
  const Small m = small_model();
  const auto radii = m.grid.shell_radii();
  const SweepTable t = cutoff_sweep(m.grid, m.basis, Vec3::Zero(), {radii[0], 0.5 * (radii[0] + radii[1])});
  CHECK(t.rows[1].snapped_lambda == radii[0]);
  CHECK(t.rows[1].energy == t.rows[0].energy);
  CHECK_FALSE(t.rows[1].strictly_below_previous);
}

TEST_CASE("order equivalence") {
  const Small m = small_model();
  const auto radii = m.grid.shell_radii();
  const SparseOperator Hs = assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), radii[0]);
  const SparseOperator Hl = assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), radii[1]);
  const std::vector<double> ts = {0.1, 1.0};

  OrderEquivalenceReport same = order_equivalence_check(Hs, Hs, 2.0, ts);
  CHECK(same.hamiltonian.holds);
  CHECK(same.resolvent.holds);
  CHECK(same.all_semigroups);
  CHECK(same.hamiltonian.margin == 0.0);
  CHECK(same.resolvent.margin == 0.0);
  CHECK(same.equivalent);

  const OrderEquivalenceReport r = order_equivalence_check(Hl, Hs, 2.0, ts);
  CHECK(r.hamiltonian.holds);
  CHECK(r.resolvent.holds);
  CHECK(r.all_semigroups);
  CHECK(r.consistent);
  CHECK(r.equivalent);

  // raising one off-diagonal pair of H_B above H_A breaks the Hamiltonian order
  Eigen::MatrixXd B = Hs.dense();
  const Index a = 0;
  const Index b = m.basis.shifted(0, 0, +1);
  B(a, b) = B(b, a) = Hl.coeff(a, b) - 1e-3;
  const OrderEquivalenceReport broken = order_equivalence_check(Hl, sparse_of(B), 2.0, ts);
  CHECK_FALSE(broken.hamiltonian.holds);
  CHECK(broken.consistent);
  CHECK(((broken.hamiltonian.worst_entry.row == a && broken.hamiltonian.worst_entry.col == b) ||
         (broken.hamiltonian.worst_entry.row == b && broken.hamiltonian.worst_entry.col == a)));
  CHECK(broken.hamiltonian.margin == doctest::Approx(-1e-3).epsilon(1e-9));
}

TEST_CASE("order equivalence rejects semigroups that leave the cone") {
  const Small m = small_model();
  const SparseOperator rep = assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), 3.0, CouplingSign::repulsive);
  const SparseOperator att = assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), 3.0);
  try {
    order_equivalence_check(att, rep, 2.0, {1.0});
    FAIL("expected HypothesisError");
  } catch (const HypothesisError& e) {
    CHECK(e.entry().value < 0.0);
    CHECK(e.entry().row >= 0);
  }
}

TEST_CASE("Perron-Frobenius-Faris verdicts") {
  const Small m = small_model();
  {
    const FarisReport r = pf_faris_check(assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), 3.0), 2.0, {1.0});
    CHECK(r.resolvent_improving_single);
    CHECK(r.resolvent_improving_all);
    CHECK(r.semigroup_improving);
    CHECK(r.ergodic);
    CHECK(r.unique_positive_ground);
    CHECK(r.consistent);
    CHECK(r.components == 1);
    CHECK(r.mu_list.size() == 3);
  }
  {
    const Small z = small_model(0.0);
    const FarisReport r = pf_faris_check(assemble_hamiltonian(z.grid, z.basis, Vec3::Zero(), 3.0), 2.0, {1.0});
    CHECK_FALSE(r.resolvent_improving_single);
    CHECK_FALSE(r.resolvent_improving_all);
    CHECK_FALSE(r.semigroup_improving);
    CHECK_FALSE(r.ergodic);
    CHECK_FALSE(r.unique_positive_ground);
    CHECK(r.consistent);
  }
  {
    // two decoupled connected blocks
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 6);
    A.topLeftCorner(3, 3) << 1, -0.5, 0, -0.5, 1, -0.5, 0, -0.5, 1;
    A.bottomRightCorner(3, 3) << 2, -0.3, -0.3, -0.3, 2, 0, -0.3, 0, 2;
    const FarisReport r = pf_faris_check(sparse_of(A), 1.0, {0.5, 1.0});
    CHECK(r.components == 2);
    CHECK_FALSE(r.ergodic);
    CHECK_FALSE(r.semigroup_improving);
    CHECK_FALSE(r.resolvent_improving_all);
    CHECK(r.consistent);
  }
  CHECK_THROWS_AS(
      pf_faris_check(assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), 3.0, CouplingSign::repulsive), 2.0, {1.0}),
      HypothesisError);
  CHECK_THROWS(pf_faris_check(assemble_hamiltonian(m.grid, m.basis, Vec3::Zero(), 3.0), 2.0, {0.0}));
}

TEST_CASE("convergence diagnostic") {
  const Small z = small_model(0.0);
  const ConvergenceTable zt = convergence_diagnostic(z.grid, z.basis, Vec3::Zero(), z.grid.shell_radii(), 1.0, {0.5});
  for (const ConvergenceRow& r : zt.rows) {
    CHECK(r.diff_vacuum == 0.0);
    CHECK(r.diff_ones == 0.0);
    CHECK(r.diff_random == 0.0);
  }

  const Small m = small_model(1.0, 4, 2);
  CutoffFamily family(m.grid, m.basis, Vec3::Zero(), m.grid.shell_radii());
  const double mu = family.auto_mu();
  const ConvergenceTable t = convergence_diagnostic(family, mu, {0.1, 1.0});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.monotone);
  CHECK(t.finite);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const ConvergenceRow& r = t.rows[k];
    // second resolvent identity with |phi(f)| <= 2 |f| sqrt(n_max) on the truncated space
    const double e_from = family.member(static_cast<Index>(k)).ground().energy;
    const double e_to = family.member(static_cast<Index>(k + 1)).ground().energy;
    const double bound = 2.0 * std::sqrt(2.0 * r.tail_coupling) / ((e_from + mu) * (e_to + mu));
    CHECK(r.diff_vacuum <= bound);
    CHECK(r.diff_ones <= bound);
    CHECK(r.diff_random <= bound);
    CHECK(r.diff_vacuum > 0.0);
    if (k > 0) CHECK(r.diff_vacuum < t.rows[k - 1].diff_vacuum);
  }
  const auto probes = probe_vectors(10);
  REQUIRE(probes.size() == 3);
  for (const auto& p : probes) {
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.minCoeff() >= 0.0);
  }
}

TEST_CASE("local identity") {
  const Small m = small_model(1.0, 3, 2);
  const auto radii = m.grid.shell_radii();
  const LocalIdentityReport full = local_identity_check(m.grid, m.basis, Vec3::Zero(), 3.0, 2.0);
  CHECK(full.deviation == 0.0);
  CHECK(full.block_dim == m.basis.dimension());
  const LocalIdentityReport mid = local_identity_check(m.grid, m.basis, Vec3(0.3, 0.0, 0.0), radii[1], 2.0, 1.0);
  CHECK(mid.deviation < 1e-9);
  CHECK(mid.block_improving);
  CHECK(mid.couplings_positive);
  CHECK(mid.block_margin > 1e-12);
  CHECK(mid.block_dim < m.basis.dimension());
}

TEST_CASE("dispersion") {
  const Small z = small_model(0.0, 2, 2);
  const std::vector<Vec3> Ps = {Vec3(0.2, 0.0, 0.0), Vec3(0.9, 0.3, 0.0), Vec3(1.6, 0.0, 0.0)};
  const DispersionTable zt = dispersion(z.grid, z.basis, 3.0, Ps);
  for (std::size_t k = 0; k < Ps.size(); ++k) {
    double best = 1e300;
    for (Index j = 0; j < z.basis.dimension(); ++j) {
      Vec3 q = Ps[k];
      double n = 0.0;
      for (Index i = 0; i < z.grid.size(); ++i) {
        q -= z.basis.state(j)[static_cast<std::size_t>(i)] * z.grid.mode(i).k;
        n += z.basis.state(j)[static_cast<std::size_t>(i)];
      }
      best = std::min(best, 0.5 * q.squaredNorm() + n);
    }
    CHECK(zt.rows[k].energy == doctest::Approx(best).epsilon(1e-14));
  }
  CHECK(zt.rows[0].energy == doctest::Approx(0.5 * 0.04).epsilon(1e-14));

  const Small m = small_model(1.0, 2, 3);
  const std::vector<Vec3> sym = {Vec3(0.4, 0.0, 0.0), Vec3(-0.4, 0.0, 0.0), Vec3(0.0, 0.7, 0.0),
                                 Vec3(0.0, -0.7, 0.0)};
  const DispersionTable t = dispersion(m.grid, m.basis, 3.0, sym);
  CHECK(t.ok);
  CHECK(std::abs(t.rows[0].energy - t.rows[1].energy) < 1e-10);
  CHECK(std::abs(t.rows[2].energy - t.rows[3].energy) < 1e-10);
  for (const DispersionRow& r : t.rows) CHECK(t.energy_at_zero <= r.energy + 1e-10);

  const DispersionTable zero = dispersion(m.grid, m.basis, 3.0, {Vec3::Zero()});
  REQUIRE(zero.rows.size() == 1);
  CHECK(zero.rows[0].min_at_zero_ok);
  CHECK(dispersion(m.grid, m.basis, 3.0, {Vec3(2.0, 0.0, 0.0)}).rows[0].in_existence_regime == false);
}
