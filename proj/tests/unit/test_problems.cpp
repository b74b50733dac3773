#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <sstream>

#include "avghb/error.hpp"
#include "avghb/problems/libsvm.hpp"
#include "avghb/problems/logreg.hpp"
#include "avghb/problems/quadratic.hpp"
#include "support.hpp"

using namespace avghb;
using namespace avghb::problems;
using avghb::testing::fd_gradient;
using avghb::testing::gaussian_vector;
using avghb::testing::rel_err;

namespace {

std::vector<std::shared_ptr<const Objective>> all_families() {
  const std::vector<double> interior{3.0, 20.0, 70.0};
  return {
      std::make_shared<QuadraticProblem>(make_diag_quadratic(1.0, interior, 100.0)),
      std::make_shared<QuadraticProblem>(make_random_quadratic(12, 3, SpectrumTarget{0.5, 50.0})),
      std::make_shared<QuadraticProblem>(make_nesterov(15, 100.0, 1.0)),
      std::make_shared<QuadraticProblem>(make_toeplitz(16, 0.1)),
      std::make_shared<LogRegProblem>(make_synthetic_dataset(60, 8, 5, 0.7), 0.05),
  };
}

double eig_min(const Matrix& A) { return Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues()[0]; }
double eig_max(const Matrix& A) {
  const auto ev = Eigen::SelfAdjointEigenSolver<Matrix>(A).eigenvalues();
  return ev[ev.size() - 1];
}

}  // namespace

TEST_CASE("quadratic evaluation by hand") {
  QuadraticProblem id(Matrix::Identity(2, 2), Vector::Zero(2), "random");
  auto e = id.eval(Vector::Zero(2));
  CHECK(e.value == 0.0);
  CHECK(e.gradient.norm() == 0.0);

  Matrix A = Vector(Eigen::Vector2d(1.0, 100.0)).asDiagonal();
  QuadraticProblem q(A, Vector::Zero(2), "diag");
  e = q.eval(Vector::Ones(2));
  CHECK(e.value == doctest::Approx(50.5).epsilon(1e-15));
  CHECK(e.gradient[0] == 1.0);
  CHECK(e.gradient[1] == 100.0);
}

TEST_CASE("evaluation rejects bad points") {
  auto q = make_nesterov(4, 10.0, 1.0);
  CHECK_THROWS_AS(q.eval(Vector::Zero(3)), DimensionError);
  Vector x = Vector::Zero(4);
  x[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(q.eval(x), DomainError);
}

TEST_CASE("diag quadratic construction") {
  const std::vector<double> interior{10.0, 50.0};
  auto q = make_diag_quadratic(1.0, interior, 100.0);
  CHECK(q.dim() == 4);
  CHECK(q.meta().kappa() == doctest::Approx(100.0));
  CHECK(q.eigenvalues()[0] == 1.0);
  CHECK(q.eigenvalues()[1] == 10.0);
  CHECK(q.eigenvalues()[2] == 50.0);
  CHECK(q.eigenvalues()[3] == 100.0);
  CHECK(q.is_diagonal());
  CHECK(q.meta().x_star.norm() == 0.0);
  CHECK(q.meta().f_star == 0.0);

  auto identity = make_diag_quadratic(1.0, {}, 1.0);
  CHECK(identity.dim() == 2);
  CHECK(identity.meta().kappa() == 1.0);
  CHECK(identity.matrix().isApprox(Matrix::Identity(2, 2)));

  const Vector grid = geometric_grid(10.0, 1e4, 48);
  auto wide = make_diag_quadratic(1.0, std::span<const double>(grid.data(), grid.size()), 1e4);
  CHECK(wide.dim() == 50);
  CHECK(wide.eigenvalues()[1] >= 10.0 * wide.meta().strong_mu);
  CHECK(wide.meta().smooth_L >= 100.0 * wide.meta().strong_mu);
  CHECK(grid[0] == doctest::Approx(10.0));
  CHECK(grid[47] == doctest::Approx(1e4));

  const std::vector<double> bad{5.0, 3.0};
  try {
    make_diag_quadratic(1.0, bad, 10.0);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
  CHECK_THROWS_AS(make_diag_quadratic(0.0, {}, 1.0), DomainError);
  const std::vector<double> above{20.0};
  CHECK_THROWS_AS(make_diag_quadratic(1.0, above, 10.0), DomainError);
}

TEST_CASE("random quadratic determinism and targets") {
  auto a = make_random_quadratic(3, 7);
  auto b = make_random_quadratic(3, 7);
  CHECK((a.matrix().array() == b.matrix().array()).all());
  CHECK((a.linear().array() == b.linear().array()).all());
  auto c = make_random_quadratic(3, 8);
  CHECK_FALSE((a.matrix().array() == c.matrix().array()).all());

  auto t = make_random_quadratic(100, 1, SpectrumTarget{1.0, 1e4});
  const auto ev = Eigen::SelfAdjointEigenSolver<Matrix>(t.matrix()).eigenvalues();
  CHECK(std::abs(ev[0] - 1.0) <= 1e-8);
  CHECK(std::abs(ev[99] - 1e4) <= 1e-8 * 1e4);
  for (const auto* q : {&a, &t}) {
    const Vector r = q->matrix() * q->meta().x_star - q->linear();
    CHECK(r.norm() <= 1e-10 * q->linear().norm());
  }
}

TEST_CASE("nesterov quadratic") {
  auto q = make_nesterov(2, 9.0, 1.0);
  Matrix expected(2, 2);
  expected << 5, -2, -2, 3;
  CHECK((q.matrix() - expected).norm() == doctest::Approx(0.0));
  CHECK(q.linear()[0] == doctest::Approx(2.0));
  CHECK(q.linear()[1] == 0.0);

  auto big = make_nesterov(100, 1e3, 1.0);
  CHECK(big.gradient(big.meta().x_star).norm() <= 1e-10);
  CHECK(eig_min(big.matrix()) >= 1.0 - 1e-9);
  CHECK(eig_max(big.matrix()) <= 1e3 + 1e-9);
}

TEST_CASE("toeplitz quadratic") {
  Matrix expected(3, 3);
  expected << 2, -1, 1, -1, 2, -1, 1, -1, 2;
  auto raw = make_toeplitz(3);
  CHECK((raw.matrix() - expected).norm() == 0.0);
  CHECK(raw.diag_shift() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(raw.matrix());
  CHECK(es.eigenvalues()[2] == doctest::Approx(4.0).epsilon(1e-12));
  Vector v = es.eigenvectors().col(2);
  Vector u(3);
  u << 1, -1, 1;
  u /= std::sqrt(3.0);
  CHECK(std::abs(std::abs(v.dot(u)) - 1.0) <= 1e-12);

  CHECK_THROWS_AS(make_toeplitz(1000), DomainError);
  auto shifted = make_toeplitz(1000, 0.01);
  CHECK(shifted.diag_shift() > 0.2);
  CHECK(shifted.meta().strong_mu == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(shifted.eigenvalues()[0] > 0.0);
}

TEST_CASE("certified constants of quadratics") {
  for (const auto& f : all_families()) {
    const auto* q = dynamic_cast<const QuadraticProblem*>(f.get());
    if (!q) continue;
    const double lo = eig_min(q->matrix());
    const double hi = eig_max(q->matrix());
    CHECK(std::abs(hi / lo - q->meta().kappa()) <= 1e-8 * q->meta().kappa());
    CHECK(std::abs(hi - q->meta().smooth_L) <= 1e-8 * hi);
  }
}

TEST_CASE("gradients match central differences") {
  Rng rng(11);
  for (const auto& f : all_families()) {
    CAPTURE(f->family());
    for (int t = 0; t < 20; ++t) {
      const Vector x = gaussian_vector(rng, f->dim());
      CHECK(rel_err(f->gradient(x), fd_gradient(*f, x)) <= 1e-5);
    }
  }
}

TEST_CASE("strong convexity inequality holds") {
  Rng rng(12);
  for (const auto& f : all_families()) {
    CAPTURE(f->family());
    const double mu = f->meta().strong_mu;
    for (int t = 0; t < 50; ++t) {
      const Vector x = gaussian_vector(rng, f->dim());
      const Vector y = gaussian_vector(rng, f->dim());
      const auto ex = f->eval(x);
      const double fy = f->value(y);
      const double scale = std::max({1.0, std::abs(ex.value), std::abs(fy)});
      CHECK(fy >= ex.value + ex.gradient.dot(y - x) + 0.5 * mu * (y - x).squaredNorm() -
                      1e-8 * scale);
    }
  }
}

TEST_CASE("gap agrees with f - f*") {
  Rng rng(13);
  for (const auto& f : all_families()) {
    REQUIRE(f->meta().optimum_known);
    const Vector x = gaussian_vector(rng, f->dim());
    CHECK(f->gap(x) == doctest::Approx(f->value(x) - f->meta().f_star).epsilon(1e-8));
    CHECK(f->gap(f->meta().x_star) <= 1e-12 * std::max(1.0, std::abs(f->meta().f_star)));
  }
}

TEST_CASE("declared mu view") {
  auto base = std::make_shared<QuadraticProblem>(make_nesterov(10, 100.0, 1.0));
  auto view = with_declared_mu(base, 0.0);
  CHECK(view->meta().strong_mu == 0.0);
  CHECK(view->meta().smooth_L == base->meta().smooth_L);
  CHECK(view->family() == base->family());
  const Vector x = Vector::Ones(10);
  CHECK(view->value(x) == base->value(x));
  CHECK(view->gap(x) == base->gap(x));
  CHECK_THROWS_AS(with_declared_mu(base, 2.0), DomainError);
}

TEST_CASE("logistic regression with an all-zero sample") {
  std::istringstream in("1\n");
  Dataset d = parse_libsvm(in, 3);
  LogRegProblem f(d, 0.0);
  const Vector x = Vector::Constant(3, 0.7);
  const auto e = f.eval(x);
  CHECK(e.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(e.gradient.norm() == 0.0);
  CHECK_FALSE(f.meta().optimum_known);
}

TEST_CASE("logistic regression constants and reference optimum") {
  LogRegProblem f(make_synthetic_dataset(80, 6, 2, 1.0), 0.1);
  const Matrix A = Matrix(f.data().features);
  const double sigma2 = eig_max(A.transpose() * A);
  CHECK(f.data_smoothness() == doctest::Approx(sigma2 / (4.0 * 80)).epsilon(1e-10));
  CHECK(f.meta().smooth_L == doctest::Approx(f.data_smoothness() + 0.1));
  CHECK(f.meta().strong_mu == 0.1);
  CHECK(f.meta().optimum_known);
  CHECK(f.gradient(f.meta().x_star).norm() <= 1e-10);
}

TEST_CASE("logistic reference cache round trip") {
  avghb::testing::TempDir dir;
  ReferenceOptions ref;
  ref.cache_dir = dir.path();
  const Dataset d = make_synthetic_dataset(40, 5, 9, 0.8);
  LogRegProblem first(d, 0.05, ref);
  CHECK(first.reference_iterations() > 0);
  LogRegProblem second(d, 0.05, ref);
  CHECK(second.reference_iterations() == 0);
  CHECK((first.meta().x_star.array() == second.meta().x_star.array()).all());
  CHECK(first.meta().f_star == second.meta().f_star);

  const auto path = dir.path() / "v.vec";
  Vector v(3);
  v << 1.0 / 3.0, -2e-300, 5e17;
  write_reference_vector(path, v, 0.1 + 0.2);
  const auto back = read_reference_vector(path);
  REQUIRE(back);
  CHECK((back->first.array() == v.array()).all());
  CHECK(back->second == 0.1 + 0.2);
  CHECK(avghb::testing::read_file(path).rfind("dim=3 f_star=", 0) == 0);
}

TEST_CASE("libsvm parsing") {
  std::istringstream in("+1 1:0.5 3:-1.2\n-1\n\n# comment\n0 2:4\n");
  const Dataset d = parse_libsvm(in);
  CHECK(d.samples() == 3);
  CHECK(d.features_dim() == 3);
  CHECK(d.labels[0] == 1.0);
  CHECK(d.labels[1] == -1.0);
  CHECK(d.labels[2] == -1.0);
  CHECK(d.features.coeff(0, 0) == 0.5);
  CHECK(d.features.coeff(0, 2) == -1.2);
  CHECK(d.features.row(0).nonZeros() == 2);
  CHECK(d.features.row(1).nonZeros() == 0);
  CHECK(d.features.coeff(2, 1) == 4.0);

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream s(text);
    try {
      parse_libsvm(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("1 1:1\n1 3:1 2:1\n") == 2);
  CHECK(line_of("1 0:1\n") == 1);
  CHECK(line_of("1 1:1\n2 1:1\n") == 2);
  CHECK(line_of("1 1:1\n-1 1:x\n") == 2);
  CHECK(line_of("1 1:1\n-1 1:1\n1 1:\n") == 3);
  CHECK(line_of("abc 1:1\n") == 1);

  std::istringstream wide("1 5:1\n");
  CHECK(parse_libsvm(wide, 10).features_dim() == 10);
  std::istringstream narrow("1 5:1\n");
  CHECK_THROWS_AS(parse_libsvm(narrow, 3), ParseError);
}

TEST_CASE("libsvm round trip keeps structure and values") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Dataset d = make_synthetic_dataset(30 + seed, 7, seed, 0.3);
    if (seed % 3 == 0) {
      d.features.coeffRef(0, 0) = 0.0;  // explicit zero survives
      d.features.makeCompressed();
    }
    std::stringstream buf;
    write_libsvm(d, buf);
    const Dataset back = parse_libsvm(buf, d.features_dim());
    REQUIRE(back.samples() == d.samples());
    REQUIRE(back.features.nonZeros() == d.features.nonZeros());
    for (Eigen::Index i = 0; i <= d.features.rows(); ++i) {
      CHECK(back.features.outerIndexPtr()[i] == d.features.outerIndexPtr()[i]);
    }
    for (Eigen::Index i = 0; i < d.features.nonZeros(); ++i) {
      CHECK(back.features.innerIndexPtr()[i] == d.features.innerIndexPtr()[i]);
      CHECK(back.features.valuePtr()[i] == d.features.valuePtr()[i]);
    }
    CHECK((back.labels.array() == d.labels.array()).all());
  }
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  CHECK(Rng(42).next_u64() != Rng(43).next_u64());
  // Published first two outputs of splitmix64 started from state 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));

  Rng g(5);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
}
