#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

#include "decopt/data.hpp"
#include "decopt/error.hpp"
#include "decopt/problem.hpp"
#include "decopt/regularizer.hpp"
#include "support.hpp"

using namespace decopt;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  auto path = std::filesystem::temp_directory_path() / ("decopt_test_" + name);
  std::ofstream(path) << contents;
  return path;
}

// Sum of log(1 + exp(a·x)) terms: smooth, convex, not quadratic.
class LogisticModel final : public SmoothModel {
 public:
  explicit LogisticModel(DataMatrix data) : data_(std::move(data)) {}
  Index agents() const override { return 1; }
  Index per_agent() const override { return data_.rows(); }
  Index dim() const override { return data_.cols(); }
  double component_value(Index, Index j, const Vector& x) const override {
    return std::log1p(std::exp(data_.row(j).dot(x.transpose())));
  }
  void add_component_grad(Index, Index j, const Vector& x, double scale, Vector& out) const override {
    const double z = data_.row(j).dot(x.transpose());
    out += scale / (1.0 + std::exp(-z)) * data_.row(j).transpose();
  }

 private:
  DataMatrix data_;
};

}  // namespace

TEST_CASE("prox closed forms") {
  CHECK(prox(1.0, RegularizerSpec::none(), vec({3.5, -2.0})) == vec({3.5, -2.0}));
  CHECK(prox(1.0, RegularizerSpec::l1(1.0), vec({2.0, -0.5})) == vec({1.0, 0.0}));
  CHECK(prox(0.5, RegularizerSpec::squared_l2(2.0), vec({4.0})) == vec({2.0}));
  // Soft-threshold by 0.5, then divide by 1 + 0.5·2.
  const Vector both = prox(0.5, RegularizerSpec::l1_plus_squared_l2(1.0, 2.0), vec({3.0, -0.2, -1.5}));
  CHECK((both - vec({1.25, 0.0, -0.5})).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(prox(0.0, RegularizerSpec::none(), vec({1.0})), DomainError);
  CHECK_THROWS_AS(prox(-1.0, RegularizerSpec::l1(1.0), vec({1.0})), DomainError);
  CHECK_THROWS_AS(RegularizerSpec::l1(-1.0), DomainError);
}

TEST_CASE("prox matches a brute-force scalar argmin") {
  std::mt19937_64 rng(1);
  const auto reg = RegularizerSpec::l1_plus_squared_l2(0.7, 0.3);
  const double eta = 0.8;
  for (int trial = 0; trial < 20; ++trial) {
    const double x = std::normal_distribution<double>(0.0, 2.0)(rng);
    double best = 0.0, best_val = 1e300;
    for (int k = -400000; k <= 400000; ++k) {
      const double z = k * 2e-5;
      const double val = 0.7 * std::abs(z) + 0.15 * z * z + (z - x) * (z - x) / (2.0 * eta);
      if (val < best_val) best_val = val, best = z;
    }
    CHECK(std::abs(prox(eta, reg, vec({x}))(0) - best) <= 2e-5);
  }
}

TEST_CASE("prox is non-expansive and row-wise") {
  std::mt19937_64 rng(2);
  const RegularizerSpec regs[] = {RegularizerSpec::none(), RegularizerSpec::l1(0.5), RegularizerSpec::squared_l2(2.0),
                                  RegularizerSpec::l1_plus_squared_l2(0.3, 1.0)};
  for (const auto& reg : regs) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector x = testing::random_vector(6, rng, 2.0);
      const Vector y = testing::random_vector(6, rng, 2.0);
      CHECK((prox(0.7, reg, x) - prox(0.7, reg, y)).norm() <= (x - y).norm() + 1e-15);
    }
    const AgentMatrix stack = testing::random_stack(4, 3, rng);
    const AgentMatrix out = prox_rows(0.7, reg, stack);
    for (Index i = 0; i < 4; ++i)
      CHECK((out.row(i).transpose() - prox(0.7, reg, stack.row(i).transpose())).norm() == 0.0);
  }
}

TEST_CASE("regularizer values and strong convexity modulus") {
  const Vector x = vec({1.0, -2.0});
  CHECK(RegularizerSpec::none().value(x) == 0.0);
  CHECK(RegularizerSpec::l1(0.5).value(x) == doctest::Approx(1.5));
  CHECK(RegularizerSpec::squared_l2(2.0).value(x) == doctest::Approx(5.0));
  CHECK(RegularizerSpec::l1_plus_squared_l2(1.0, 2.0).value(x) == doctest::Approx(8.0));
  CHECK(RegularizerSpec::l1(0.5).sigma_psi() == 0.0);
  CHECK(RegularizerSpec::squared_l2(2.0).sigma_psi() == 2.0);
  CHECK(RegularizerSpec::none().with_extra_l2(0.1).kind() == RegularizerKind::squared_l2);
  CHECK(RegularizerSpec::l1(1.0).with_extra_l2(0.1).kind() == RegularizerKind::l1_plus_squared_l2);
}

TEST_CASE("shift-invert instance against a brute-force Hessian") {
  const Index m = 4, n = 16, d = 5;
  const DataMatrix data = testing::gaussian_data(m * n, d, 3);
  const auto inst = make_shift_invert_pca(data, m, 2.0, 9);
  const auto* q = inst.quadratic();
  REQUIRE(q != nullptr);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(q->covariance());
  const double l1 = eig.eigenvalues()(d - 1), l2 = eig.eigenvalues()(d - 2);
  CHECK(q->shift() == doctest::Approx(l1 + (l1 - l2) / 2.0).epsilon(1e-12));
  CHECK(q->linear().norm() == doctest::Approx(1.0).epsilon(1e-12));

  const Matrix h = testing::brute_hessian(data, m, q->shift());
  CHECK((q->hessian() - h).cwiseAbs().maxCoeff() <= 1e-10);
  Matrix avg = Matrix::Zero(d, d);
  for (Index i = 0; i < m; ++i) {
    CHECK((q->local_hessian(i) - testing::brute_local_hessian(data, m, i, q->shift())).cwiseAbs().maxCoeff() <= 1e-10);
    avg += q->local_hessian(i) / static_cast<double>(m);
  }
  CHECK((avg - q->hessian()).cwiseAbs().maxCoeff() <= 1e-10);

  std::mt19937_64 rng(4);
  const Vector x = testing::random_vector(d, rng);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      const Vector a = data.row(i * n + j).transpose();
      const Vector expected = q->shift() * x - a * a.dot(x) + q->linear();
      CHECK((inst.component_grad(i, j, x) - expected).norm() <= 1e-12);
    }
  CHECK((inst.component_grad(0, 0, Vector::Zero(d)) - q->linear()).norm() == 0.0);
  CHECK_THROWS(inst.component_grad(m, 0, x));
  CHECK_THROWS(inst.component_grad(0, n, x));
  CHECK_THROWS(inst.local_full_grad(-1, x));
}

TEST_CASE("gradient consistency and finite differences") {
  const Index m = 4, n = 10, d = 6;
  const auto inst = make_shift_invert_pca(testing::gaussian_data(m * n, d, 5), m, 3.0, 1);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = testing::random_vector(d, rng);
    Vector mean = Vector::Zero(d);
    for (Index i = 0; i < m; ++i) mean += inst.local_full_grad(i, x) / static_cast<double>(m);
    CHECK((mean - inst.global_grad(x)).norm() <= 1e-10);
  }
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = testing::random_vector(d, rng);
    const Vector g = inst.global_grad(x);
    for (Index k = 0; k < d; ++k) {
      Vector e = Vector::Zero(d);
      e(k) = h;
      const double fd = (inst.objective_value(x + e) - inst.objective_value(x - e)) / (2.0 * h);
      CHECK(std::abs(fd - g(k)) <= 1e-5 * std::max(1.0, std::abs(g(k))));
    }
  }
}

TEST_CASE("smoothness constants") {
  const Index m = 4, n = 32, d = 6;
  const DataMatrix data = testing::gaussian_data(m * n, d, 8);
  const auto inst = make_shift_invert_pca(data, m, 2.0, 0);
  const auto* q = inst.quadratic();
  const auto& c = inst.constants();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q->covariance());
  const Vector ev = eig.eigenvalues();
  CHECK(std::abs(c.sigma_f - (ev(d - 1) - ev(d - 2)) / 2.0) <= 1e-8);
  CHECK(c.L == doctest::Approx(q->shift() - ev(0)).epsilon(1e-12));
  CHECK(c.ell1 == doctest::Approx(q->shift()).epsilon(1e-12));
  const double max_norm = data.row_norms_sq().maxCoeff();
  CHECK(c.ell2 == doctest::Approx(std::max(q->shift(), max_norm - q->shift())).epsilon(1e-12));
  CHECK(c.L <= c.ell1 + 1e-12);

  const auto stiff = make_shift_invert_pca(data, m, 50.0, 0);
  CHECK(stiff.constants().sigma_f < c.sigma_f);
  CHECK(stiff.condition_number() > inst.condition_number());

  // Component curvature bounds on random triples.
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index i = static_cast<Index>(rng() % m), j = static_cast<Index>(rng() % n);
    const Vector x = testing::random_vector(d, rng), y = testing::random_vector(d, rng);
    const double gap = inst.model().component_value(i, j, x) - inst.model().component_value(i, j, y) -
                       inst.component_grad(i, j, y).dot(x - y);
    const double r2 = (x - y).squaredNorm();
    CHECK(gap <= c.ell1 / 2.0 * r2 + 1e-9 * (1.0 + r2));
    CHECK(gap >= -c.ell2 / 2.0 * r2 - 1e-9 * (1.0 + r2));
  }

  // Strong convexity of F with ψ smooth.
  const auto reg = make_shift_invert_pca(data, m, 2.0, 0, RegularizerSpec::squared_l2(0.1));
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = testing::random_vector(d, rng), y = testing::random_vector(d, rng);
    const Vector g = reg.global_grad(y) + 0.1 * y;
    const double gap = reg.objective_value(x) - reg.objective_value(y) - g.dot(x - y);
    CHECK(gap >= reg.sigma() / 2.0 * (x - y).squaredNorm() - 1e-9);
  }
}

TEST_CASE("zero data and scalar instances") {
  const Index m = 2, n = 2, d = 3;
  const auto zero = make_quadratic_sum(DataMatrix(RowMatrix::Zero(m * n, d)), m, 1.0, Vector::Zero(d));
  const auto& c = zero.constants();
  CHECK(c.L == doctest::Approx(1.0));
  CHECK(c.ell1 == doctest::Approx(1.0));
  CHECK(c.ell2 == doctest::Approx(1.0));
  CHECK(c.sigma_f == doctest::Approx(1.0));

  const auto scalar = make_shift_invert_pca(DataMatrix(RowMatrix::Ones(1, 1)), 1, 1.0, 3);
  const auto* q = scalar.quadratic();
  CHECK(q->shift() == doctest::Approx(2.0).epsilon(1e-14));
  const Vector xs = closed_form_minimizer(scalar);
  CHECK(xs(0) == doctest::Approx(-q->linear()(0)).epsilon(1e-14));
  CHECK(std::abs(std::abs(q->linear()(0)) - 1.0) <= 1e-15);

  RowMatrix twin(2, 2);
  twin << 1.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(make_shift_invert_pca(DataMatrix(twin), 1, 2.0), DegenerateEigengap);
}

TEST_CASE("closed-form minimizer") {
  RowMatrix rows = RowMatrix::Zero(1, 2);
  const auto inst = make_quadratic_sum(DataMatrix(rows), 1, 2.0, vec({-4.0, 0.0}));
  const Vector xs = closed_form_minimizer(inst);
  CHECK((xs - vec({2.0, 0.0})).norm() <= 1e-15);

  const auto big = make_shift_invert_pca(testing::gaussian_data(64, 8, 2), 4, 5.0, 4, RegularizerSpec::squared_l2(0.3));
  const Vector x = closed_form_minimizer(big);
  CHECK((big.global_grad(x) + 0.3 * x).norm() <= 1e-10);
  CHECK(closed_form_optimum(big).has_value());

  const auto nonsmooth = make_shift_invert_pca(testing::gaussian_data(64, 8, 2), 4, 5.0, 4, RegularizerSpec::l1(0.1));
  CHECK_THROWS_AS(closed_form_minimizer(nonsmooth), UnsupportedInstance);
  CHECK_FALSE(closed_form_optimum(nonsmooth).has_value());

  // c below λ₁ makes f nonconvex.
  RowMatrix one = RowMatrix::Zero(1, 2);
  one(0, 0) = 2.0;
  CHECK_THROWS_AS(make_quadratic_sum(DataMatrix(one), 1, 1.0, vec({1.0, 1.0})), DomainError);
}

TEST_CASE("epsilon regularization") {
  const auto inst = make_shift_invert_pca(testing::gaussian_data(64, 6, 12), 4, 2.0, 5);
  const auto eps = regularize_epsilon(inst, 1.0);
  CHECK(eps.regularizer().sigma_psi() == 1.0);
  CHECK(eps.sigma() == doctest::Approx(inst.sigma() + 1.0));
  std::mt19937_64 rng(13);
  const Vector x = testing::random_vector(6, rng);
  CHECK((eps.global_grad(x) - inst.global_grad(x)).norm() == 0.0);
  CHECK(eps.objective_value(x) == doctest::Approx(inst.objective_value(x) + 0.5 * x.squaredNorm()).epsilon(1e-14));
  CHECK_THROWS_AS(regularize_epsilon(inst, 0.0), DomainError);

  const Vector base = closed_form_minimizer(inst);
  const double d2 = (closed_form_minimizer(regularize_epsilon(inst, 1e-2)) - base).norm();
  const double d4 = (closed_form_minimizer(regularize_epsilon(inst, 1e-4)) - base).norm();
  CHECK(d4 < d2);
  CHECK(d4 <= 1e-4 * 1e3 * base.norm());
}

TEST_CASE("constants of non-quadratic models are unsupported") {
  auto model = std::make_shared<LogisticModel>(testing::gaussian_data(8, 3, 1));
  const ProblemInstance inst(model, RegularizerSpec::squared_l2(1.0), SmoothnessConstants{1.0, 1.0, 1.0, 0.0});
  CHECK(inst.quadratic() == nullptr);
  CHECK_THROWS_AS(smoothness_constants(inst), UnsupportedInstance);
  CHECK_THROWS_AS(closed_form_minimizer(inst), UnsupportedInstance);
  CHECK_FALSE(closed_form_optimum(inst).has_value());
  std::mt19937_64 rng(1);
  const Vector x = testing::random_vector(3, rng);
  Vector g(3);
  model->grad(x, g);
  CHECK((inst.global_grad(x) - g).norm() <= 1e-15);
}

TEST_CASE("instance constructor validation") {
  auto model = std::make_shared<LogisticModel>(testing::gaussian_data(8, 3, 1));
  CHECK_THROWS(ProblemInstance(model, {}, SmoothnessConstants{1.0, 2.0, 1.0, 0.0}));
  CHECK_THROWS(ProblemInstance(model, {}, SmoothnessConstants{0.0, 1.0, 1.0, 0.0}));
  CHECK_THROWS(ProblemInstance(model, {}, SmoothnessConstants{1.0, 1.0, 1.0, -1.0}));
}

TEST_CASE("bernoulli matrix") {
  const auto small = gen_bernoulli_matrix(4, 3, 42);
  CHECK((small.samples().array().abs() == 1.0).all());
  CHECK(gen_bernoulli_matrix(4, 3, 42).samples() == small.samples());
  CHECK(gen_bernoulli_matrix(4, 3, 43).samples() != small.samples());

  const auto big = gen_bernoulli_matrix(60000, 50, 1);
  const double mean = big.samples().mean();
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(60000.0 * 50.0));
  CHECK((big.row_norms_sq().array() == 50.0).all());
}

TEST_CASE("libsvm parsing") {
  const auto path = temp_file("basic.libsvm", "1 1:0.5 3:2\n-1\n\n# comment\n+1 2:-1.5e0\n");
  const auto data = load_libsvm(path, std::nullopt, 3);
  REQUIRE(data.rows() == 3);
  REQUIRE(data.cols() == 3);
  CHECK(data.row(0)(0) == 0.5);
  CHECK(data.row(0)(1) == 0.0);
  CHECK(data.row(0)(2) == 2.0);
  CHECK(data.row(1).isZero());
  CHECK(data.row(2)(1) == -1.5);

  CHECK(load_libsvm(path).cols() == 3);
  CHECK(load_libsvm(path, 1).rows() == 1);
  CHECK(load_libsvm(path, std::nullopt, 1).row(0)(0) == 0.5);

  auto expect_line = [](const std::string& name, const std::string& body, long line) {
    const auto p = temp_file(name, body);
    try {
      load_libsvm(p);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
    }
  };
  expect_line("zero.libsvm", "1 1:1\n1 0:2\n", 2);
  expect_line("order.libsvm", "1 3:1 2:1\n", 1);
  expect_line("garbage.libsvm", "1 1:1\n1 2:1\n1 x:y\n", 3);
  expect_line("dup.libsvm", "1 2:1 2:3\n", 1);
  CHECK_THROWS_AS(load_libsvm("/nonexistent/file.libsvm"), IoError);
}

TEST_CASE("data cache round trip") {
  const auto data = testing::gaussian_data(7, 5, 21);
  const auto path = std::filesystem::temp_directory_path() / "decopt_test_cache.bin";
  save_data_cache(data, path);
  CHECK(std::filesystem::file_size(path) == 8 + 7 * 5 * 8);
  const auto back = load_data_cache(path);
  CHECK(back.samples() == data.samples());

  std::filesystem::resize_file(path, 20);
  CHECK_THROWS(load_data_cache(path));
}

TEST_CASE("data matrix validation") {
  RowMatrix bad = RowMatrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS(DataMatrix(bad));
  const auto data = testing::gaussian_data(10, 2, 1);
  CHECK(data.head(4).rows() == 4);
  CHECK_THROWS(make_shift_invert_pca(data, 3, 2.0));
}
