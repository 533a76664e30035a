#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "decopt/error.hpp"
#include "decopt/gossip.hpp"
#include "decopt/problem.hpp"
#include "decopt/solver_config.hpp"

namespace decopt {

SolverConfig SolverConfig::make(Index n, double eta, double tau, Index b, int M, int K, std::uint64_t seed) {
  SolverConfig cfg;
  cfg.eta = eta;
  cfg.tau = tau;
  cfg.b = b;
  cfg.M = M;
  cfg.K = K;
  cfg.seed = seed;
  if (b >= 1) cfg.t0 = (n + b - 1) / b;
  if (tau > 0.0) cfg.alpha = static_cast<double>(cfg.t0) * eta / (2.0 * tau);
  cfg.validate(n);
  return cfg;
}

void SolverConfig::validate(Index n) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError(fmt::format("solver config: eta = {} must be > 0", eta));
  if (!(tau > 0.0 && tau <= 1.0)) throw DomainError(fmt::format("solver config: tau = {} outside (0, 1]", tau));
  if (b < 1 || b > n) throw DomainError(fmt::format("solver config: b = {} outside [1, {}]", b, n));
  if (M < 0) throw DomainError("solver config: M must be >= 0");
  if (K < 0) throw DomainError("solver config: K must be >= 0");
  if (t0 != (n + b - 1) / b) throw DomainError(fmt::format("solver config: t0 = {} is not ceil(n/b)", t0));
  if (alpha != static_cast<double>(t0) * eta / (2.0 * tau))
    throw DomainError("solver config: alpha is not t0*eta/(2*tau)");
}

SolverConfig default_hyperparams(const ProblemInstance& inst, double lambda2, const HyperparamRequest& request) {
  const auto& c = inst.constants();
  if (!(c.L > 0.0 && c.ell1 > 0.0 && c.ell2 > 0.0))
    throw DomainError("default_hyperparams: smoothness constants are not populated");
  const Index n = inst.per_agent();

  const Index b = request.b ? *request.b
                            : std::clamp<Index>(std::llround(std::sqrt(static_cast<double>(n))), 1, n);
  if (b < 1 || b > n) throw DomainError(fmt::format("default_hyperparams: b = {} outside [1, {}]", b, n));
  const Index t0 = (n + b - 1) / b;

  double eta = 0.0;
  if (request.eta) {
    eta = *request.eta;
  } else {
    eta = std::min(1.0 / (2.0 * c.L),
                   std::sqrt(static_cast<double>(b) / (c.ell1 * c.ell2 * static_cast<double>(t0))) / 8.0);
    eta *= request.eta_scale;
  }

  double tau = 0.0;
  if (request.tau) {
    tau = *request.tau;
  } else {
    const double sigma = inst.sigma();
    if (!(sigma > 0.0))
      throw DomainError("default_hyperparams: sigma = 0; apply regularize_epsilon before choosing tau");
    tau = std::min(0.5, std::sqrt(static_cast<double>(t0) * eta * sigma) / 2.0);
  }

  const int M = request.M ? *request.M : min_rounds_for_rho(lambda2, request.rho_target);
  return SolverConfig::make(n, eta, tau, b, M, request.K, request.seed);
}

}  // namespace decopt
