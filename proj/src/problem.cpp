#include "decopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "decopt/error.hpp"

namespace decopt {

// ---------------------------------------------------------------------------
// SmoothModel defaults: plain averages in fixed order.

double SmoothModel::local_value(Index i, const Vector& x) const {
  double sum = 0.0;
  for (Index j = 0; j < per_agent(); ++j) sum += component_value(i, j, x);
  return sum / static_cast<double>(per_agent());
}

void SmoothModel::local_grad(Index i, const Vector& x, Vector& out) const {
  out.setZero(dim());
  const double scale = 1.0 / static_cast<double>(per_agent());
  for (Index j = 0; j < per_agent(); ++j) add_component_grad(i, j, x, scale, out);
}

double SmoothModel::value(const Vector& x) const {
  double sum = 0.0;
  for (Index i = 0; i < agents(); ++i) sum += local_value(i, x);
  return sum / static_cast<double>(agents());
}

void SmoothModel::grad(const Vector& x, Vector& out) const {
  out.setZero(dim());
  Vector local(dim());
  for (Index i = 0; i < agents(); ++i) {
    local_grad(i, x, local);
    out += local;
  }
  out /= static_cast<double>(agents());
}

// ---------------------------------------------------------------------------

QuadraticShards::QuadraticShards(DataMatrix data, Index m, double shift, Vector linear)
    : data_(std::move(data)), m_(m), n_(0), shift_(shift), linear_(std::move(linear)) {
  if (m < 1) throw InvalidDimension("quadratic: need at least one agent");
  if (data_.rows() == 0 || data_.rows() % m != 0)
    throw InvalidDimension(fmt::format("quadratic: {} rows not divisible into {} agents", data_.rows(), m));
  if (linear_.size() != data_.cols())
    throw InvalidDimension(
        fmt::format("quadratic: linear term has {} entries, data has {} columns", linear_.size(), data_.cols()));
  if (!std::isfinite(shift_) || !linear_.allFinite()) throw DomainError("quadratic: non-finite shift or linear term");

  n_ = data_.rows() / m;
  const Index d = data_.cols();
  const Matrix identity = Matrix::Identity(d, d);

  covariance_ = Matrix::Zero(d, d);
  local_hessians_.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    const auto block = data_.samples().middleRows(i * n_, n_);
    Matrix local_cov = Matrix::Zero(d, d);
    local_cov.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    local_cov = local_cov.selfadjointView<Eigen::Lower>();
    covariance_ += local_cov;
    local_hessians_.push_back(shift_ * identity - local_cov / static_cast<double>(n_));
  }
  covariance_ /= static_cast<double>(data_.rows());
  hessian_ = shift_ * identity - covariance_;
}

double QuadraticShards::component_value(Index i, Index j, const Vector& x) const {
  const double proj = data_.row(i * n_ + j).dot(x);
  return 0.5 * (shift_ * x.squaredNorm() - proj * proj) + linear_.dot(x);
}

void QuadraticShards::add_component_grad(Index i, Index j, const Vector& x, double scale, Vector& out) const {
  const auto a = data_.row(i * n_ + j);
  const double proj = a.dot(x);
  out += scale * (shift_ * x + linear_);
  out.noalias() -= (scale * proj) * a.transpose();
}

double QuadraticShards::local_value(Index i, const Vector& x) const {
  return 0.5 * x.dot(local_hessian(i) * x) + linear_.dot(x);
}

void QuadraticShards::local_grad(Index i, const Vector& x, Vector& out) const {
  out.noalias() = local_hessian(i) * x;
  out += linear_;
}

double QuadraticShards::value(const Vector& x) const { return 0.5 * x.dot(hessian_ * x) + linear_.dot(x); }

void QuadraticShards::grad(const Vector& x, Vector& out) const {
  out.noalias() = hessian_ * x;
  out += linear_;
}

// ---------------------------------------------------------------------------

ProblemInstance::ProblemInstance(std::shared_ptr<const SmoothModel> model, RegularizerSpec regularizer,
                                 SmoothnessConstants constants)
    : model_(std::move(model)), regularizer_(regularizer), constants_(constants) {
  if (!model_) throw InvalidDimension("problem: null smooth model");
  if (model_->agents() < 1 || model_->per_agent() < 1 || model_->dim() < 1)
    throw InvalidDimension("problem: m, n and d must all be >= 1");
  const auto& c = constants_;
  if (!(c.ell1 > 0.0) || c.ell2 < c.ell1)
    throw InvariantViolation(fmt::format("problem: need ell2 >= ell1 > 0 (ell1 = {}, ell2 = {})", c.ell1, c.ell2));
  if (!(c.L > 0.0) || c.sigma_f < 0.0)
    throw InvariantViolation(fmt::format("problem: need L > 0, sigma_f >= 0 (L = {}, sigma_f = {})", c.L, c.sigma_f));
}

double ProblemInstance::condition_number() const {
  return (constants_.L + std::sqrt(constants_.ell1 * constants_.ell2)) / sigma();
}

void ProblemInstance::check_agent(Index i) const {
  if (i < 0 || i >= agents()) throw InvalidDimension(fmt::format("agent index {} outside [0, {})", i, agents()));
}

double ProblemInstance::objective_value(const Vector& x) const {
  if (x.size() != dim()) throw InvalidDimension("objective: wrong dimension");
  return model_->value(x) + regularizer_.value(x);
}

Vector ProblemInstance::global_grad(const Vector& x) const {
  if (x.size() != dim()) throw InvalidDimension("gradient: wrong dimension");
  Vector g(dim());
  model_->grad(x, g);
  return g;
}

Vector ProblemInstance::local_full_grad(Index i, const Vector& x) const {
  check_agent(i);
  if (x.size() != dim()) throw InvalidDimension("gradient: wrong dimension");
  Vector g(dim());
  model_->local_grad(i, x, g);
  return g;
}

Vector ProblemInstance::component_grad(Index i, Index j, const Vector& x) const {
  check_agent(i);
  if (j < 0 || j >= per_agent())
    throw InvalidDimension(fmt::format("component index {} outside [0, {})", j, per_agent()));
  if (x.size() != dim()) throw InvalidDimension("gradient: wrong dimension");
  Vector g = Vector::Zero(dim());
  model_->add_component_grad(i, j, x, 1.0, g);
  return g;
}

AgentMatrix ProblemInstance::local_full_grads(const AgentMatrix& x) const {
  if (x.rows() != agents() || x.cols() != dim())
    throw InvalidDimension(fmt::format("local gradients: expected {}x{} stack, got {}x{}", agents(), dim(),
                                       x.rows(), x.cols()));
  AgentMatrix out(x.rows(), x.cols());
  Vector xi(dim());
  Vector gi(dim());
  for (Index i = 0; i < agents(); ++i) {
    xi = x.row(i).transpose();
    model_->local_grad(i, xi, gi);
    out.row(i) = gi.transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

SmoothnessConstants smoothness_constants(const QuadraticShards& quad) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(quad.covariance(), Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double c = quad.shift();
  const double lambda_max = ev(ev.size() - 1);
  const double lambda_min = ev(0);

  SmoothnessConstants out;
  double sigma_f = c - lambda_max;
  // c = λ₁ exactly (the merely convex case) can land a few ulps below zero.
  const double slack = 1e-12 * std::max({1.0, std::abs(c), std::abs(lambda_max)});
  if (sigma_f < -slack)
    throw DomainError(fmt::format("quadratic: shift {} below top covariance eigenvalue {}; f is not convex", c,
                                  lambda_max));
  out.sigma_f = std::max(0.0, sigma_f);
  out.L = c - lambda_min;
  out.ell1 = c;
  out.ell2 = std::max(out.ell1, quad.data().row_norms_sq().maxCoeff() - c);
  return out;
}

SmoothnessConstants smoothness_constants(const ProblemInstance& inst) {
  const auto* quad = inst.quadratic();
  if (!quad) throw UnsupportedInstance("smoothness constants need a quadratic instance");
  return smoothness_constants(*quad);
}

ProblemInstance make_quadratic_sum(DataMatrix data, Index m, double shift, Vector linear,
                                   RegularizerSpec regularizer) {
  auto quad = std::make_shared<const QuadraticShards>(std::move(data), m, shift, std::move(linear));
  const SmoothnessConstants constants = smoothness_constants(*quad);
  return ProblemInstance(std::move(quad), regularizer, constants);
}

ProblemInstance make_shift_invert_pca(DataMatrix data, Index m, double r, std::uint64_t linear_seed,
                                      RegularizerSpec regularizer) {
  if (!(r > 0.0)) throw DomainError(fmt::format("shift-invert: ratio r = {} must be positive", r));
  if (m < 1 || data.rows() == 0 || data.rows() % m != 0)
    throw InvalidDimension(fmt::format("shift-invert: {} rows not divisible into {} agents", data.rows(), m));

  const Index d = data.cols();
  Matrix cov = Matrix::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(data.samples().transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(data.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double lambda1 = ev(d - 1);
  const double lambda2 = d >= 2 ? ev(d - 2) : 0.0;
  if (lambda1 - lambda2 <= 1e-12)
    throw DegenerateEigengap(fmt::format("shift-invert: eigengap {:.3e} is degenerate", lambda1 - lambda2));

  const double shift = lambda1 + (lambda1 - lambda2) / r;

  std::mt19937_64 rng(linear_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector linear(d);
  for (Index k = 0; k < d; ++k) linear(k) = normal(rng);
  const double norm = linear.norm();
  if (norm > 0.0) linear /= norm;

  return make_quadratic_sum(std::move(data), m, shift, std::move(linear), regularizer);
}

Vector closed_form_minimizer(const ProblemInstance& inst) {
  const auto* quad = inst.quadratic();
  if (!quad) throw UnsupportedInstance("closed-form minimizer needs a quadratic instance");
  if (!inst.regularizer().is_smooth())
    throw UnsupportedInstance("closed-form minimizer needs psi in {none, squared_l2}");

  const Index d = inst.dim();
  const Matrix h = quad->hessian() + inst.regularizer().l2_weight() * Matrix::Identity(d, d);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(d - 1);
  if (!(lo > 1e-14 * std::max(1.0, std::abs(hi))))
    throw DomainError(fmt::format("closed-form minimizer: Hessian not positive definite (min eigenvalue {:.3e})", lo));

  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) throw DomainError("closed-form minimizer: Cholesky failed");
  Vector x = llt.solve(-quad->linear());
  // One step of iterative refinement keeps the residual at rounding level on
  // poorly conditioned (large r) instances.
  x -= llt.solve(h * x + quad->linear());
  return x;
}

std::optional<double> closed_form_optimum(const ProblemInstance& inst) {
  if (!inst.quadratic() || !inst.regularizer().is_smooth()) return std::nullopt;
  return inst.objective_value(closed_form_minimizer(inst));
}

ProblemInstance regularize_epsilon(const ProblemInstance& inst, double eps_f) {
  if (!(eps_f > 0.0)) throw DomainError(fmt::format("regularize_epsilon: eps_f = {} must be positive", eps_f));
  return ProblemInstance(inst.model_ptr(), inst.regularizer().with_extra_l2(eps_f), inst.constants());
}

}  // namespace decopt
