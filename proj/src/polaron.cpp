#include "frohlich/polaron.hpp"

#include "frohlich/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace frohlich {

namespace {

void require_compatible(const ModeGrid& grid, const FockBasis& basis) {
  if (grid.size() != basis.mode_count()) {
    throw std::invalid_argument("grid has " + std::to_string(grid.size()) + " modes but basis has " +
                                std::to_string(basis.mode_count()));
  }
}

void require_cutoff(const ModeGrid& grid, double lambda) {
  if (!(lambda <= grid.lambda_max() * (1.0 + 1e-12)) || !(lambda >= 0.0)) {
    throw std::invalid_argument("cutoff " + std::to_string(lambda) + " outside grid support [0, " +
                                std::to_string(grid.lambda_max()) + "]");
  }
}

SparseOperator assemble(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, double lambda,
                        CouplingSign sign, bool local) {
  require_compatible(grid, basis);
  require_cutoff(grid, lambda);
  const Index c = grid.cutoff_index(lambda);
  const Eigen::VectorXd diag = free_diagonal(grid, basis, P, local ? c : grid.size());
  const double s = sign == CouplingSign::attractive ? -1.0 : 1.0;

  std::vector<SparseOperator::Triplet> t;
  t.reserve(static_cast<std::size_t>(basis.dimension() * (1 + 2 * c)));
  for (Index j = 0; j < basis.dimension(); ++j) {
    t.emplace_back(j, j, diag[j]);
    if (basis.total(j) >= basis.n_max()) continue;
    const auto occ = basis.state(j);
    for (Index i = 0; i < c; ++i) {
      const double g = grid.mode(i).g;
      if (g == 0.0) continue;
      const Index up = basis.shifted(j, i, +1);
      const double v = s * g * std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(i)] + 1));
      t.emplace_back(up, j, v);
      t.emplace_back(j, up, v);
    }
  }
  return SparseOperator(basis.dimension(), t, true);
}

}  // namespace

PolaronModel::PolaronModel(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, double lambda,
                           CouplingSign sign)
    : grid(&grid), basis(&basis), P(P), lambda(lambda), sign(sign) {
  require_compatible(grid, basis);
  require_cutoff(grid, lambda);
  cutoff_index = grid.cutoff_index(lambda);
}

SparseOperator PolaronModel::hamiltonian() const { return assemble_hamiltonian(*grid, *basis, P, lambda, sign); }
SparseOperator PolaronModel::local_hamiltonian() const {
  return assemble_local_hamiltonian(*grid, *basis, P, lambda, sign);
}
SparseOperator PolaronModel::interaction() const { return interaction_op(*grid, *basis, lambda); }
SparseOperator PolaronModel::projection() const { return projection_Q(*basis, *grid, lambda); }

Eigen::VectorXd free_diagonal(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, Index modes) {
  require_compatible(grid, basis);
  Eigen::VectorXd diag(basis.dimension());
  for (Index j = 0; j < basis.dimension(); ++j) {
    const auto occ = basis.state(j);
    Vec3 pf = Vec3::Zero();
    int n = 0;
    for (Index i = 0; i < modes; ++i) {
      const int ni = occ[static_cast<std::size_t>(i)];
      if (ni == 0) continue;
      pf += ni * grid.mode(i).k;
      n += ni;
    }
    diag[j] = 0.5 * (P - pf).squaredNorm() + n;
  }
  return diag;
}

SparseOperator interaction_op(const ModeGrid& grid, const FockBasis& basis, double lambda) {
  require_compatible(grid, basis);
  require_cutoff(grid, lambda);
  const Index c = grid.cutoff_index(lambda);
  std::vector<double> f = grid.couplings();
  for (Index i = c; i < grid.size(); ++i) f[static_cast<std::size_t>(i)] = 0.0;
  return field_op(basis, f);
}

SparseOperator assemble_hamiltonian(const ModeGrid& grid, const FockBasis& basis, const Vec3& P, double lambda,
                                    CouplingSign sign) {
  return assemble(grid, basis, P, lambda, sign, false);
}

SparseOperator assemble_local_hamiltonian(const ModeGrid& grid, const FockBasis& basis, const Vec3& P,
                                          double lambda, CouplingSign sign) {
  return assemble(grid, basis, P, lambda, sign, true);
}

SparseOperator projection_Q(const FockBasis& basis, const ModeGrid& grid, double lambda) {
  require_compatible(grid, basis);
  const Index c = grid.cutoff_index(lambda);
  std::vector<double> chi(static_cast<std::size_t>(grid.size()), 0.0);
  for (Index i = 0; i < c; ++i) chi[static_cast<std::size_t>(i)] = 1.0;
  return gamma_diagonal(basis, chi);
}

LiebYamazakiBound lieb_yamazaki_bound(const ModeGrid& grid, double alpha, double lambda0_cut) {
  require_cutoff(grid, lambda0_cut);
  const double c2 = alpha * grid.lambda0() * grid.lambda0();
  double tail = 0.0;
  double inner = 0.0;
  for (const Mode& m : grid.modes()) {
    const double r2 = m.radius * m.radius;
    if (m.radius >= lambda0_cut) tail += m.weight / (r2 * r2);
    if (m.radius <= lambda0_cut) inner += m.weight / r2;
  }
  LiebYamazakiBound b;
  b.condition_sum = c2 * tail;
  b.bound_sum = inner;
  b.valid = b.condition_sum < 0.125;
  b.M = -c2 * inner - 0.5;
  return b;
}

std::optional<double> smallest_valid_lieb_yamazaki_cut(const ModeGrid& grid, double alpha) {
  for (double r : grid.shell_radii()) {
    if (lieb_yamazaki_bound(grid, alpha, r).valid) return r;
  }
  return std::nullopt;
}

FormBoundMargins verify_form_bounds(const FockBasis& basis, std::span<const double> omega,
                                    std::span<const double> f) {
  if (static_cast<Index>(omega.size()) != basis.mode_count() || static_cast<Index>(f.size()) != basis.mode_count()) {
    throw std::invalid_argument("verify_form_bounds: omega and f must have one entry per mode");
  }
  double norm2 = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (!(omega[i] > 0.0)) {
      throw std::invalid_argument("verify_form_bounds: omega[" + std::to_string(i) + "] is not positive");
    }
    norm2 += f[i] * f[i] / omega[i];
  }
  const SparseOperator dg = dGamma(basis, omega);
  const SparseOperator a = annihilation_field(basis, f);
  const SparseOperator ata = a.transpose() * a;
  // a^dagger a is symmetric in exact arithmetic; symmetrize the rounded product.
  const SparseOperator ata_sym(SparseOperator::Matrix(0.5 * (ata.matrix() + SparseOperator::Matrix(ata.matrix().transpose()))), true);

  const SparseOperator crea = norm2 * (dg + SparseOperator::identity(basis.dimension())) - ata_sym;
  const SparseOperator vhove = dg + field_op(basis, f);

  FormBoundMargins out;
  out.weighted_norm = norm2;
  out.margin_crea = ground_state(crea).energy;
  out.margin_vhove = ground_state(vhove).energy + norm2;
  return out;
}

}  // namespace frohlich
