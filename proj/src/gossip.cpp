#include "decopt/gossip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "decopt/error.hpp"

namespace decopt {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kStochasticTol = 1e-12;
constexpr double kSpectrumTol = 1e-10;

Vector sorted_eigenvalues(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(w, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvariantViolation("gossip: eigensolver failed");
  return solver.eigenvalues();  // ascending
}

void require_symmetric(const Matrix& w) {
  if (w.rows() != w.cols())
    throw InvalidDimension(fmt::format("gossip: matrix is {}x{}, not square", w.rows(), w.cols()));
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol)
    throw InvariantViolation(fmt::format("gossip: matrix not symmetric (max |W-Wt| = {:.3e})", asym));
}

}  // namespace

GossipMatrix GossipMatrix::from_weights(Matrix weights) {
  if (weights.rows() == 0) throw InvalidDimension("gossip: empty matrix");
  if (!weights.allFinite()) throw InvariantViolation("gossip: non-finite weight");
  require_symmetric(weights);

  const Index m = weights.rows();
  const double row_dev = (weights.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_dev = (weights.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_dev > kStochasticTol || col_dev > kStochasticTol)
    throw InvariantViolation(
        fmt::format("gossip: not doubly stochastic (row dev {:.3e}, col dev {:.3e})", row_dev, col_dev));

  if (m == 1) return GossipMatrix(std::move(weights), 0.0);

  const Vector ev = sorted_eigenvalues(weights);
  if (ev(0) < -kSpectrumTol || ev(m - 1) > 1.0 + kSpectrumTol)
    throw InvariantViolation(
        fmt::format("gossip: spectrum [{:.6g}, {:.6g}] outside [0, 1]", ev(0), ev(m - 1)));
  if (ev(m - 2) >= 1.0 - kSpectrumTol)
    throw InvariantViolation("gossip: eigenvalue 1 is not simple (graph disconnected)");

  return GossipMatrix(std::move(weights), std::max(0.0, ev(m - 2)));
}

GossipMatrix build_lazy_ring(Index m, double laziness) {
  if (m < 1) throw InvalidDimension("lazy ring: need at least one agent");
  if (!(laziness > 0.0 && laziness < 1.0))
    throw DomainError(fmt::format("lazy ring: laziness {} outside (0, 1)", laziness));

  Matrix w = Matrix::Zero(m, m);
  if (m == 1) {
    w(0, 0) = 1.0;
  } else if (m == 2) {
    const double c = (1.0 - laziness) / 2.0;
    w << 1.0 - c, c, c, 1.0 - c;
  } else {
    const double side = (1.0 - laziness) / 2.0;
    for (Index i = 0; i < m; ++i) {
      w(i, i) = laziness;
      w(i, (i + 1) % m) += side;
      w(i, (i + m - 1) % m) += side;
    }
  }
  return GossipMatrix::from_weights(std::move(w));
}

GossipMatrix build_random_two_neighbor(Index m, std::uint64_t seed) {
  if (m < 3) throw InvalidDimension(fmt::format("random two-neighbour graph: need m >= 3, got {}", m));

  std::set<std::pair<Index, Index>> edges;
  auto add_edge = [&](Index a, Index b) {
    if (a != b) edges.emplace(std::min(a, b), std::max(a, b));
  };
  for (Index i = 0; i < m; ++i) add_edge(i, (i + 1) % m);

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < order.size(); ++k) add_edge(order[k], order[(k + 1) % order.size()]);

  std::vector<Index> degree(static_cast<std::size_t>(m), 0);
  for (const auto& [a, b] : edges) {
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
  }

  // Metropolis–Hastings weights.
  Matrix w = Matrix::Zero(m, m);
  for (const auto& [a, b] : edges) {
    const double weight =
        1.0 / (1.0 + static_cast<double>(std::max(degree[static_cast<std::size_t>(a)],
                                                  degree[static_cast<std::size_t>(b)])));
    w(a, b) = weight;
    w(b, a) = weight;
  }
  for (Index i = 0; i < m; ++i) w(i, i) = 1.0 - (w.row(i).sum() - w(i, i));

  Matrix lazy = 0.5 * (Matrix::Identity(m, m) + w);
  return GossipMatrix::from_weights(std::move(lazy));
}

double second_eigenvalue(const Matrix& weights) {
  require_symmetric(weights);
  if (weights.rows() == 1) return 0.0;
  const Vector ev = sorted_eigenvalues(weights);
  return std::max(0.0, ev(ev.size() - 2));
}

AgentMatrix fast_mix(const AgentMatrix& x, const GossipMatrix& w, int rounds) {
  if (x.rows() != w.agents())
    throw InvalidDimension(
        fmt::format("fast_mix: {} agent rows but gossip matrix is {}x{}", x.rows(), w.agents(), w.agents()));
  if (rounds < 0) throw DomainError("fast_mix: negative round count");
  if (rounds == 0) return x;

  const double l2 = w.lambda2();
  const double eta = 1.0 / (1.0 + std::sqrt(1.0 - l2 * l2));
  AgentMatrix prev = x;
  AgentMatrix cur = x;
  AgentMatrix next(x.rows(), x.cols());
  for (int k = 0; k < rounds; ++k) {
    next.noalias() = w.weights() * cur;
    next = (1.0 + eta) * next - eta * prev;
    prev.swap(cur);
    cur.swap(next);
  }
  return cur;
}

double contraction_bound(double lambda2, int rounds) {
  if (!(lambda2 >= 0.0 && lambda2 < 1.0))
    throw DomainError(fmt::format("contraction_bound: lambda2 = {} outside [0, 1)", lambda2));
  if (rounds < 0) throw DomainError("contraction_bound: negative round count");
  const double factor = 1.0 - (1.0 - 1.0 / std::sqrt(2.0)) * std::sqrt(1.0 - lambda2);
  return std::sqrt(14.0) * std::pow(factor, rounds);
}

int min_rounds_for_rho(double lambda2, double rho_target) {
  if (!(rho_target > 0.0)) throw DomainError("min_rounds_for_rho: rho_target must be positive");
  int rounds = 0;
  while (contraction_bound(lambda2, rounds) > rho_target) ++rounds;
  return rounds;
}

}  // namespace decopt
