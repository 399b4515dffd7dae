#include "frohlich/cone.hpp"
#include "frohlich/polaron.hpp"
#include "frohlich/spectral.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <random>

using namespace frohlich;

namespace {

SparseOperator sparse_of(const Eigen::MatrixXd& m, bool symmetric) {
  return SparseOperator(SparseOperator::Matrix(m.sparseView()), symmetric);
}

}  // namespace

TEST_CASE("cone membership") {
  CHECK(in_cone(ConeVector(Eigen::VectorXd(Eigen::VectorXd::Zero(4)))));
  CHECK(in_cone(ConeVector(Eigen::VectorXd(Eigen::VectorXd::Ones(4)))));
  Eigen::VectorXd v = Eigen::VectorXd::Ones(4);
  v[2] = -1.0;
  CHECK_FALSE(in_cone(ConeVector(v)));
  CHECK(strictly_positive(ConeVector(Eigen::VectorXd(Eigen::VectorXd::Ones(4)))));
  CHECK_FALSE(strictly_positive(ConeVector(Eigen::VectorXd(Eigen::VectorXd::Zero(4)))));

  Eigen::VectorXcd c = Eigen::VectorXcd::Ones(3);
  c[1] = {1.0, 1e-3};
  CHECK_FALSE(in_cone(ConeVector(c)));
  CHECK(in_cone(ConeVector(c, 1e-2)));
  Eigen::VectorXd tiny = Eigen::VectorXd::Ones(3);
  tiny[0] = -1e-13;
  CHECK(in_cone(ConeVector(tiny, 1e-12)));
}

TEST_CASE("ground vector of a connected polaron model lies in the cone") {
  const ModeGrid grid = build_mode_grid(1.0, 3.0, 2, 6, 0.3);
  const FockBasis basis = enumerate_basis(grid.size(), 3);
  const SpectralResult g = ground_state(assemble_hamiltonian(grid, basis, Vec3::Zero(), 3.0));
  CHECK(in_cone(ConeVector(g.vector)));
  CHECK(strictly_positive(ConeVector(g.vector)));
}

TEST_CASE("self-duality: the only vector in the cone and its negative is zero") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(5);
    for (int i = 0; i < 5; ++i) v[i] = n(gen);
    if (trial % 3 == 0) v = v.cwiseAbs();
    const bool both = in_cone(ConeVector(v)) && in_cone(ConeVector(Eigen::VectorXd(-v)));
    CHECK(both == (v.cwiseAbs().maxCoeff() == 0.0));

    // dual membership against a sample of cone vectors, including the basis
    bool dual = true;
    for (int i = 0; i < 5; ++i) dual = dual && v[i] >= 0.0;
    for (int s = 0; s < 50 && dual; ++s) {
      Eigen::VectorXd y(5);
      for (int i = 0; i < 5; ++i) y[i] = std::abs(n(gen));
      dual = v.dot(y) >= 0.0;
    }
    CHECK(dual == in_cone(ConeVector(v)));
  }
}

TEST_CASE("Jordan decomposition") {
  Eigen::VectorXd v(2);
  v << 1.0, -2.0;
  JordanParts p = jordan_decompose(v);
  CHECK(p.re_plus == Eigen::Vector2d(1.0, 0.0));
  CHECK(p.re_minus == Eigen::Vector2d(0.0, 2.0));
  CHECK(p.im_plus.isZero(0.0));

  const JordanParts q = jordan_decompose(Eigen::VectorXd(Eigen::VectorXd::Ones(3)));
  CHECK(q.re_minus.isZero(0.0));
  CHECK(q.im_plus.isZero(0.0));
  CHECK(q.im_minus.isZero(0.0));

  std::mt19937_64 gen(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXcd c(8);
    for (int i = 0; i < 8; ++i) c[i] = {n(gen), n(gen)};
    const JordanParts j = jordan_decompose(c);
    CHECK((j.recompose() - c).cwiseAbs().maxCoeff() == 0.0);
    CHECK(j.re_plus.dot(j.re_minus) == 0.0);
    CHECK(j.im_plus.dot(j.im_minus) == 0.0);
    for (const Eigen::VectorXd* part : {&j.re_plus, &j.re_minus, &j.im_plus, &j.im_minus}) {
      CHECK(part->minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("operator order") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.0, 0.5, 2.0;
  OrderReport r = op_order_geq(A, A, 1e-12);
  CHECK(r.holds);
  CHECK(r.margin == 0.0);

  Eigen::MatrixXd B = A;
  B(1, 0) += 2e-12;
  r = op_order_geq(A, B, 1e-12);
  CHECK_FALSE(r.holds);
  CHECK(r.worst_entry.row == 1);
  CHECK(r.worst_entry.col == 0);
  CHECK(r.margin == doctest::Approx(-2e-12).epsilon(1e-3));

  // sparse form counts implicit zeros
  const SparseOperator sa = sparse_of(A, false);
  Eigen::MatrixXd C = A;
  C(0, 1) = 0.1;
  r = op_order_geq(sa, sparse_of(C, false), 1e-12);
  CHECK_FALSE(r.holds);
  CHECK(r.worst_entry.row == 0);
  CHECK(r.worst_entry.col == 1);
  CHECK_THROWS(op_order_geq(A, Eigen::MatrixXd::Zero(3, 3)));
}

TEST_CASE("operator order is transitive with doubled tolerance") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e-12, 1e-12);
  const double tol = 1e-12;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Random(4, 4);
    Eigen::MatrixXd B = C;
    Eigen::MatrixXd A = C;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        B(i, j) += u(gen) + (trial % 2) * 1e-3;
        A(i, j) = B(i, j) + u(gen);
      }
    }
    if (op_order_geq(A, B, tol).holds && op_order_geq(B, C, tol).holds) CHECK(op_order_geq(A, C, 2 * tol).holds);
  }
}

TEST_CASE("Hamiltonians are ordered in the cutoff") {
  const ModeGrid grid = build_mode_grid(1.0, 3.0, 3, 6, 0.3);
  const FockBasis basis = enumerate_basis(grid.size(), 2);
  const auto radii = grid.shell_radii();
  for (std::size_t s = 0; s + 1 < radii.size(); ++s) {
    const SparseOperator Hs = assemble_hamiltonian(grid, basis, Vec3(0.2, 0.0, 0.0), radii[s]);
    const SparseOperator Hl = assemble_hamiltonian(grid, basis, Vec3(0.2, 0.0, 0.0), radii[s + 1]);
    CHECK(op_order_geq(Hs, Hl, 1e-12).holds);
    CHECK_FALSE(op_order_geq(Hl, Hs, 1e-12).holds);
  }
}

TEST_CASE("positivity preserving and improving") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  CHECK(positivity_preserving(I, 1e-12).holds);
  CHECK_FALSE(positivity_improving(I, 1e-12).holds);
  CHECK(positivity_improving(Eigen::MatrixXd::Constant(3, 3, 0.5), 1e-12).holds);

  // decoupling one mode makes the semigroup block diagonal
  oracle::HandModel m;
  m.k = {Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0)};
  m.g = {0.4, 0.0};
  m.n_max = 2;
  const Eigen::MatrixXd S = oracle::expm(-0.5 * oracle::hand_hamiltonian(m, Vec3::Zero(), 2, 2));
  CHECK(positivity_preserving(S, 1e-12).holds);
  CHECK_FALSE(positivity_improving(S, 1e-12).holds);
  m.g[1] = 0.3;
  CHECK(positivity_improving(oracle::expm(-0.5 * oracle::hand_hamiltonian(m, Vec3::Zero(), 2, 2)), 1e-12).holds);
}

TEST_CASE("positivity preserving agrees with the definitional cone check") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd A(5, 5);
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) A(i, j) = u(gen);
    }
    CHECK(positivity_preserving(A, 1e-12).holds == maps_cone_into_cone(A, 1e-12));
    const Eigen::MatrixXd P = A.cwiseAbs();
    CHECK(positivity_preserving(P, 1e-12).holds);
    CHECK(maps_cone_into_cone(P, 1e-12));
  }
}

TEST_CASE("ergodicity search") {
  const FockBasis b = enumerate_basis(3, 2);
  const std::vector<double> f = {0.7, 0.2, 0.4};
  const SparseOperator phi = field_op(b, f);
  Eigen::VectorXd vac = Eigen::VectorXd::Zero(b.dimension());
  vac[0] = 1.0;
  ErgodicityResult r = ergodicity_check_powers(phi, ConeVector(vac), ConeVector(vac), 2 * b.n_max());
  CHECK(r.found);
  CHECK(r.witness == 0);
  CHECK(r.value == 1.0);

  for (Index i = 0; i < 3; ++i) {
    Eigen::VectorXd one = Eigen::VectorXd::Zero(b.dimension());
    one[b.shifted(0, i, +1)] = 1.0;
    r = ergodicity_check_powers(phi, ConeVector(vac), ConeVector(one), 2 * b.n_max());
    CHECK(r.found);
    CHECK(r.witness == 1);
    CHECK(r.value == doctest::Approx(f[static_cast<std::size_t>(i)]).epsilon(1e-15));
  }

  // every pair of basis states is connected within 2 n_max powers
  for (Index x = 0; x < b.dimension(); ++x) {
    for (Index y = 0; y < b.dimension(); ++y) {
      const ConeVector ex(Eigen::VectorXd(Eigen::VectorXd::Unit(b.dimension(), x)));
      const ConeVector ey(Eigen::VectorXd(Eigen::VectorXd::Unit(b.dimension(), y)));
      CHECK(ergodicity_check_powers(phi, ex, ey, 2 * b.n_max()).found);
    }
  }

  CHECK_THROWS(ergodicity_check_powers(phi, ConeVector(Eigen::VectorXd(Eigen::VectorXd::Zero(b.dimension()))), ConeVector(vac), 4));
  CHECK_THROWS(ergodicity_check_powers(phi, ConeVector(Eigen::VectorXd(-vac)), ConeVector(vac), 4));

  // a decoupled mode breaks the search for states that occupy it
  const SparseOperator phi0 = field_op(b, std::vector<double>{0.7, 0.2, 0.0});
  Eigen::VectorXd third = Eigen::VectorXd::Zero(b.dimension());
  third[b.shifted(0, 2, +1)] = 1.0;
  CHECK_FALSE(ergodicity_check_powers(phi0, ConeVector(vac), ConeVector(third), 4).found);
}

TEST_CASE("resolvent family over cutoffs is ergodic") {
  const ModeGrid grid = build_mode_grid(1.0, 3.0, 2, 6, 0.3);
  const FockBasis basis = enumerate_basis(grid.size(), 2);
  std::vector<Eigen::MatrixXd> family;
  for (double l : grid.shell_radii()) family.push_back(resolvent(assemble_hamiltonian(grid, basis, Vec3::Zero(), l), 2.0));
  // x and y in the range of the inner projection: vacuum and a one-boson state of mode 0
  Eigen::VectorXd x = Eigen::VectorXd::Zero(basis.dimension());
  x[0] = 1.0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(basis.dimension());
  y[basis.shifted(0, 0, +1)] = 1.0;
  const ErgodicityResult r = ergodicity_check(family, ConeVector(x), ConeVector(y));
  CHECK(r.found);
  CHECK(r.value > 0.0);
}
