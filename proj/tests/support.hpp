#pragma once

#include <cstdint>
#include <random>

#include "decopt/agent_matrix.hpp"
#include "decopt/data.hpp"
#include "decopt/gossip.hpp"
#include "decopt/problem.hpp"

namespace testing {

using namespace decopt;

inline Matrix random_symmetric(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) a(i, j) = g(rng);
  return (a + a.transpose()) / 2.0;
}

inline AgentMatrix random_stack(Index m, Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  AgentMatrix x(m, d);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < d; ++j) x(i, j) = g(rng);
  return x;
}

inline Vector random_vector(Index d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(d);
  for (Index j = 0; j < d; ++j) v(j) = g(rng);
  return v;
}

/// Gaussian samples; rows = m·n.
inline DataMatrix gaussian_data(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RowMatrix s(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) s(i, j) = g(rng);
  return DataMatrix(std::move(s));
}

/// Random symmetric doubly stochastic matrix with 0 ≼ W ≼ I: lazified
/// Metropolis weights on a random connected graph.
inline Matrix random_gossip_weights(Index m, std::mt19937_64& rng, double edge_prob = 0.4) {
  std::bernoulli_distribution edge(edge_prob);
  Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    adj(i, (i + 1) % m) = adj((i + 1) % m, i) = m > 1 ? 1 : 0;
    for (Index j = i + 1; j < m; ++j)
      if (edge(rng)) adj(i, j) = adj(j, i) = 1;
  }
  for (Index i = 0; i < m; ++i) adj(i, i) = 0;
  Eigen::VectorXi deg = adj.rowwise().sum();
  Matrix w = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      if (adj(i, j)) w(i, j) = 1.0 / (1.0 + std::max(deg(i), deg(j)));
  for (Index i = 0; i < m; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return 0.5 * (Matrix::Identity(m, m) + w);
}

/// Reference Hessian of f_i built directly from the samples.
inline Matrix brute_local_hessian(const DataMatrix& data, Index m, Index i, double c) {
  const Index n = data.rows() / m;
  const Index d = data.cols();
  Matrix h = Matrix::Zero(d, d);
  for (Index j = 0; j < n; ++j) {
    const Vector a = data.row(i * n + j).transpose();
    h += c * Matrix::Identity(d, d) - a * a.transpose();
  }
  return h / static_cast<double>(n);
}

inline Matrix brute_hessian(const DataMatrix& data, Index m, double c) {
  Matrix h = Matrix::Zero(data.cols(), data.cols());
  for (Index i = 0; i < m; ++i) h += brute_local_hessian(data, m, i, c);
  return h / static_cast<double>(m);
}

}  // namespace testing
