#pragma once

#include <string>

#include "decopt/agent_matrix.hpp"

namespace decopt {

enum class RegularizerKind { none, l1, squared_l2, l1_plus_squared_l2 };

/// ψ(x) = l1_weight·‖x‖₁ + (l2_weight/2)·‖x‖², restricted to the terms the
/// kind enables. ψ is convex and l2_weight-strongly convex.
class RegularizerSpec {
 public:
  RegularizerSpec() = default;

  static RegularizerSpec none() { return {}; }
  static RegularizerSpec l1(double weight);
  static RegularizerSpec squared_l2(double weight);
  static RegularizerSpec l1_plus_squared_l2(double l1_weight, double l2_weight);

  RegularizerKind kind() const { return kind_; }
  double l1_weight() const { return l1_weight_; }
  double l2_weight() const { return l2_weight_; }
  double sigma_psi() const { return l2_weight_; }
  bool is_smooth() const { return kind_ == RegularizerKind::none || kind_ == RegularizerKind::squared_l2; }

  double value(const Vector& x) const;

  /// Same spec with eps added to the squared-l2 weight.
  RegularizerSpec with_extra_l2(double eps) const;

  std::string describe() const;

 private:
  RegularizerKind kind_ = RegularizerKind::none;
  double l1_weight_ = 0.0;
  double l2_weight_ = 0.0;
};

/// prox_{η,ψ}(x) = argmin_z ψ(z) + ‖z − x‖²/(2η). Throws DomainError if η ≤ 0.
Vector prox(double eta, const RegularizerSpec& reg, const Vector& x);

/// Row-wise prox: the aggregated operator prox_{mη,Ψ} factorises per agent.
AgentMatrix prox_rows(double eta, const RegularizerSpec& reg, const AgentMatrix& x);

}  // namespace decopt
