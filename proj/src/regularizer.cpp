#include "decopt/regularizer.hpp"

#include <fmt/format.h>

#include "decopt/error.hpp"

namespace decopt {
namespace {

void require_nonnegative(double w, const char* what) {
  if (!(w >= 0.0)) throw DomainError(fmt::format("regularizer: {} weight {} must be >= 0", what, w));
}

template <typename Derived>
void prox_in_place(double eta, const RegularizerSpec& reg, Eigen::MatrixBase<Derived>& x) {
  if (reg.kind() == RegularizerKind::l1 || reg.kind() == RegularizerKind::l1_plus_squared_l2) {
    const double thresh = eta * reg.l1_weight();
    x = (x.array().sign() * (x.array().abs() - thresh).max(0.0)).matrix();
  }
  if (reg.kind() == RegularizerKind::squared_l2 || reg.kind() == RegularizerKind::l1_plus_squared_l2) {
    x /= (1.0 + eta * reg.l2_weight());
  }
}

}  // namespace

RegularizerSpec RegularizerSpec::l1(double weight) {
  require_nonnegative(weight, "l1");
  RegularizerSpec r;
  r.kind_ = RegularizerKind::l1;
  r.l1_weight_ = weight;
  return r;
}

RegularizerSpec RegularizerSpec::squared_l2(double weight) {
  require_nonnegative(weight, "squared-l2");
  RegularizerSpec r;
  r.kind_ = RegularizerKind::squared_l2;
  r.l2_weight_ = weight;
  return r;
}

RegularizerSpec RegularizerSpec::l1_plus_squared_l2(double l1_weight, double l2_weight) {
  require_nonnegative(l1_weight, "l1");
  require_nonnegative(l2_weight, "squared-l2");
  RegularizerSpec r;
  r.kind_ = RegularizerKind::l1_plus_squared_l2;
  r.l1_weight_ = l1_weight;
  r.l2_weight_ = l2_weight;
  return r;
}

double RegularizerSpec::value(const Vector& x) const {
  double v = 0.0;
  if (l1_weight_ != 0.0) v += l1_weight_ * x.lpNorm<1>();
  if (l2_weight_ != 0.0) v += 0.5 * l2_weight_ * x.squaredNorm();
  return v;
}

RegularizerSpec RegularizerSpec::with_extra_l2(double eps) const {
  switch (kind_) {
    case RegularizerKind::none:
      return squared_l2(eps);
    case RegularizerKind::squared_l2:
      return squared_l2(l2_weight_ + eps);
    case RegularizerKind::l1:
      return l1_plus_squared_l2(l1_weight_, eps);
    case RegularizerKind::l1_plus_squared_l2:
      return l1_plus_squared_l2(l1_weight_, l2_weight_ + eps);
  }
  return *this;
}

std::string RegularizerSpec::describe() const {
  switch (kind_) {
    case RegularizerKind::none:
      return "none";
    case RegularizerKind::l1:
      return fmt::format("l1({})", l1_weight_);
    case RegularizerKind::squared_l2:
      return fmt::format("squared_l2({})", l2_weight_);
    case RegularizerKind::l1_plus_squared_l2:
      return fmt::format("l1_plus_squared_l2({}, {})", l1_weight_, l2_weight_);
  }
  return "?";
}

Vector prox(double eta, const RegularizerSpec& reg, const Vector& x) {
  if (!(eta > 0.0)) throw DomainError(fmt::format("prox: step {} must be positive", eta));
  Vector out = x;
  prox_in_place(eta, reg, out);
  return out;
}

AgentMatrix prox_rows(double eta, const RegularizerSpec& reg, const AgentMatrix& x) {
  if (!(eta > 0.0)) throw DomainError(fmt::format("prox: step {} must be positive", eta));
  // Every supported ψ is separable across coordinates, so the row-wise prox is
  // the element-wise prox of the whole stack.
  AgentMatrix out = x;
  prox_in_place(eta, reg, out);
  return out;
}

}  // namespace decopt
