#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "decopt/agent_matrix.hpp"
#include "decopt/data.hpp"
#include "decopt/regularizer.hpp"

namespace decopt {

/// Curvature constants of the smooth part f.
///   L        global smoothness of f
///   ell1     upper curvature bound of every component f_{i,j}
///   ell2     lower curvature bound (components may have curvature down to −ell2)
///   sigma_f  strong convexity of f
struct SmoothnessConstants {
  double L = 0.0;
  double ell1 = 0.0;
  double ell2 = 0.0;
  double sigma_f = 0.0;
};

/// Smooth part f = (1/m) Σ_i f_i,  f_i = (1/n) Σ_j f_{i,j}, sharded over m agents
/// with n components each. Implementations must be immutable and thread-safe.
class SmoothModel {
 public:
  virtual ~SmoothModel() = default;

  virtual Index agents() const = 0;
  virtual Index per_agent() const = 0;
  virtual Index dim() const = 0;

  virtual double component_value(Index i, Index j, const Vector& x) const = 0;
  /// out += scale · ∇f_{i,j}(x)
  virtual void add_component_grad(Index i, Index j, const Vector& x, double scale, Vector& out) const = 0;

  virtual double local_value(Index i, const Vector& x) const;
  virtual void local_grad(Index i, const Vector& x, Vector& out) const;
  virtual double value(const Vector& x) const;
  virtual void grad(const Vector& x, Vector& out) const;
};

/// Components f_{i,j}(x) = ½ xᵀ(cI − a aᵀ)x + bᵀx over contiguous row shards of
/// a data matrix: agent i owns rows [i·n, (i+1)·n).
class QuadraticShards final : public SmoothModel {
 public:
  QuadraticShards(DataMatrix data, Index m, double shift, Vector linear);

  Index agents() const override { return m_; }
  Index per_agent() const override { return n_; }
  Index dim() const override { return data_.cols(); }

  double component_value(Index i, Index j, const Vector& x) const override;
  void add_component_grad(Index i, Index j, const Vector& x, double scale, Vector& out) const override;
  double local_value(Index i, const Vector& x) const override;
  void local_grad(Index i, const Vector& x, Vector& out) const override;
  double value(const Vector& x) const override;
  void grad(const Vector& x, Vector& out) const override;

  const DataMatrix& data() const { return data_; }
  double shift() const { return shift_; }
  const Vector& linear() const { return linear_; }
  /// A = (mn)⁻¹ Σ a aᵀ
  const Matrix& covariance() const { return covariance_; }
  /// ∇²f = cI − A
  const Matrix& hessian() const { return hessian_; }
  const Matrix& local_hessian(Index i) const { return local_hessians_[static_cast<std::size_t>(i)]; }

 private:
  DataMatrix data_;
  Index m_;
  Index n_;
  double shift_;
  Vector linear_;
  Matrix covariance_;
  Matrix hessian_;
  std::vector<Matrix> local_hessians_;
};

/// Composite objective F = f + ψ. Cheap to copy; the smooth model is shared.
class ProblemInstance {
 public:
  ProblemInstance(std::shared_ptr<const SmoothModel> model, RegularizerSpec regularizer,
                  SmoothnessConstants constants);

  Index agents() const { return model_->agents(); }
  Index per_agent() const { return model_->per_agent(); }
  Index dim() const { return model_->dim(); }

  const SmoothModel& model() const { return *model_; }
  std::shared_ptr<const SmoothModel> model_ptr() const { return model_; }
  const RegularizerSpec& regularizer() const { return regularizer_; }
  const SmoothnessConstants& constants() const { return constants_; }
  /// σ = σ_f + σ_ψ
  double sigma() const { return constants_.sigma_f + regularizer_.sigma_psi(); }
  /// (L + √(ℓ₁ℓ₂))/σ
  double condition_number() const;

  /// Closed-form quadratic data, or nullptr for generic models.
  const QuadraticShards* quadratic() const { return dynamic_cast<const QuadraticShards*>(model_.get()); }

  /// F(x) = f(x) + ψ(x)
  double objective_value(const Vector& x) const;
  /// ∇f(x), smooth part only.
  Vector global_grad(const Vector& x) const;
  Vector local_full_grad(Index i, const Vector& x) const;
  Vector component_grad(Index i, Index j, const Vector& x) const;

  /// Row i ← ∇f_i(x_i).
  AgentMatrix local_full_grads(const AgentMatrix& x) const;

 private:
  void check_agent(Index i) const;

  std::shared_ptr<const SmoothModel> model_;
  RegularizerSpec regularizer_;
  SmoothnessConstants constants_;
};

/// Instance over `data` with an explicit shift c and linear term b; constants
/// filled by smoothness_constants().
ProblemInstance make_quadratic_sum(DataMatrix data, Index m, double shift, Vector linear,
                                   RegularizerSpec regularizer = {});

/// Shift-and-invert subproblem F(x) = ½xᵀ(cI − A)x + bᵀx,
/// c = λ₁ + (λ₁ − λ₂)/r, with b a seeded standard normal vector scaled to unit
/// norm. For d = 1, λ₂ is taken as 0.
ProblemInstance make_shift_invert_pca(DataMatrix data, Index m, double r, std::uint64_t linear_seed = 0,
                                      RegularizerSpec regularizer = {});

/// Eigen-decomposition based curvature constants of a quadratic model.
SmoothnessConstants smoothness_constants(const ProblemInstance& inst);
SmoothnessConstants smoothness_constants(const QuadraticShards& quad);

/// x* = −H⁻¹b for smooth quadratic instances (ψ ∈ {none, squared_l2}).
Vector closed_form_minimizer(const ProblemInstance& inst);

/// F(x*) when a closed-form minimizer exists, otherwise nullopt.
std::optional<double> closed_form_optimum(const ProblemInstance& inst);

/// F_ε = f + ψ + (ε/2)‖x‖², with the ε term placed in ψ.
ProblemInstance regularize_epsilon(const ProblemInstance& inst, double eps_f);

}  // namespace decopt
