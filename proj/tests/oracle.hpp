#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: states are enumerated by brute force, operators are assembled
// densely from ladder formulas, and matrix functions use Eigen's Pade-based
// exponential instead of a spectral decomposition.

#include "frohlich/fock.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using Occupation = std::vector<int>;

/// All tuples with total <= n_max, ordered by total and then decreasing
/// lexicographically, built by filtering the full box [0, n_max]^m.
inline std::vector<Occupation> enumerate(int m, int n_max) {
  std::vector<Occupation> all;
  Occupation cur(static_cast<std::size_t>(m), 0);
  while (true) {
    int total = 0;
    for (int x : cur) total += x;
    if (total <= n_max) all.push_back(cur);
    int i = m - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == n_max) cur[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
  }
  auto total = [](const Occupation& o) {
    int s = 0;
    for (int x : o) s += x;
    return s;
  };
  std::sort(all.begin(), all.end(), [&](const Occupation& a, const Occupation& b) {
    if (total(a) != total(b)) return total(a) < total(b);
    return a > b;
  });
  return all;
}

inline std::map<Occupation, int> index_map(const std::vector<Occupation>& states) {
  std::map<Occupation, int> idx;
  for (std::size_t j = 0; j < states.size(); ++j) idx[states[j]] = static_cast<int>(j);
  return idx;
}

struct HandModel {
  std::vector<Eigen::Vector3d> k;
  std::vector<double> g;
  int n_max = 1;
};

/// H = 1/2 |P - sum n_i k_i|^2 + sum_{i<diag_modes} n_i - sum_{i<c} g_i (a_i + a_i^dagger),
/// with the kinetic sum also restricted to i < diag_modes.
inline Eigen::MatrixXd hand_hamiltonian(const HandModel& m, const Eigen::Vector3d& P, int c, int diag_modes,
                                        double sign = -1.0) {
  const int modes = static_cast<int>(m.k.size());
  const auto states = enumerate(modes, m.n_max);
  const auto idx = index_map(states);
  const int n = static_cast<int>(states.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::Vector3d q = P;
    double number = 0.0;
    for (int i = 0; i < diag_modes; ++i) {
      q -= states[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] * m.k[static_cast<std::size_t>(i)];
      number += states[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    H(j, j) = 0.5 * q.squaredNorm() + number;
    for (int i = 0; i < c; ++i) {
      Occupation up = states[static_cast<std::size_t>(j)];
      up[static_cast<std::size_t>(i)] += 1;
      auto it = idx.find(up);
      if (it == idx.end()) continue;
      const double amp = sign * m.g[static_cast<std::size_t>(i)] * std::sqrt(static_cast<double>(up[static_cast<std::size_t>(i)]));
      H(it->second, j) += amp;
      H(j, it->second) += amp;
    }
  }
  return H;
}

inline HandModel from_grid(const frohlich::ModeGrid& grid, int n_max) {
  HandModel m;
  m.n_max = n_max;
  for (const auto& mode : grid.modes()) {
    m.k.push_back(mode.k);
    m.g.push_back(mode.g);
  }
  return m;
}

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) { return A.exp(); }

inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& A) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A, Eigen::EigenvaluesOnly).eigenvalues();
}

/// Random symmetric matrix with nonpositive off-diagonal entries on a sparse
/// connected pattern: a path plus random chords.
inline Eigen::MatrixXd random_metzler(int n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = 4.0 * u(gen);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = -0.2 - 0.5 * u(gen);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int e = 0; e < 3 * n; ++e) {
    const int a = pick(gen);
    const int b = pick(gen);
    if (a == b) continue;
    A(a, b) = A(b, a) = -0.5 * u(gen);
  }
  return A;
}

}  // namespace oracle
