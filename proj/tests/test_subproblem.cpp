#include <doctest.h>

#include <cmath>

#include "noisytr/rng.hpp"
#include "noisytr/subproblem.hpp"

using namespace noisytr;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix diag2(double a, double b) {
  Matrix H = Matrix::Zero(2, 2);
  H(0, 0) = a;
  H(1, 1) = b;
  return H;
}

QuadraticModel model(const Vector& g, const Matrix& H) {
  return QuadraticModel(Vector::Zero(g.size()), g, H);
}

Matrix random_symmetric(int n, Rng& rng, double scale = 1.0) {
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = scale * rng.normal();
  return 0.5 * (M + M.transpose());
}

// Largest model decrease over a uniform grid of the disk of radius delta,
// including a dense sweep of the boundary circle.
double grid_optimum(const QuadraticModel& m, double delta, int per_side = 100) {
  double best = 0.0;
  for (int i = 0; i <= per_side; ++i) {
    for (int j = 0; j <= per_side; ++j) {
      const Vector s = v2(delta * (2.0 * i / per_side - 1.0), delta * (2.0 * j / per_side - 1.0));
      if (s.norm() <= delta) best = std::max(best, model_decrease(m, s));
    }
  }
  for (int t = 0; t < 4 * per_side; ++t) {
    const double a = 2.0 * M_PI * t / (4 * per_side);
    best = std::max(best, model_decrease(m, v2(delta * std::cos(a), delta * std::sin(a))));
  }
  return best;
}

}  // namespace

TEST_CASE("cauchy_step examples") {
  const auto zero = model(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(cauchy_step(zero, 1.0).norm() == 0.0);

  const auto lin = model(v2(1, 0), Matrix::Zero(2, 2));
  const Vector s = cauchy_step(lin, 0.5);
  CHECK(s.isApprox(v2(-0.5, 0)));
  CHECK(model_decrease(lin, s) == doctest::Approx(0.5));

  const auto quad = model(v2(1, 0), Matrix::Identity(2, 2));
  const Vector t = cauchy_step(quad, 10.0);
  CHECK(t.isApprox(v2(-1, 0)));
  CHECK(model_decrease(quad, t) == doctest::Approx(0.5));
}

TEST_CASE("min_eigenpair examples") {
  const auto p = min_eigenpair(diag2(1, -2));
  CHECK(p.value == doctest::Approx(-2.0));
  CHECK(std::abs(p.vector(1)) == doctest::Approx(1.0));
  const auto z = min_eigenpair(Matrix::Zero(3, 3));
  CHECK(z.value == 0.0);
  CHECK(z.vector.norm() == doctest::Approx(1.0));
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1.0;
  CHECK_THROWS_AS(min_eigenpair(A), ContractViolation);
}

TEST_CASE("jacobi eigensolver agrees with an independent dense solver") {
  Rng rng(31);
  for (int n : {1, 2, 5, 20, 40}) {
    for (int t = 0; t < 5; ++t) {
      const Matrix H = random_symmetric(n, rng, 3.0);
      Eigen::SelfAdjointEigenSolver<Matrix> ref(H);
      const auto p = min_eigenpair(H);
      const double tol = 1e-8 * (1.0 + ref.eigenvalues().cwiseAbs().maxCoeff());
      CAPTURE(n);
      CHECK(std::abs(p.value - ref.eigenvalues()(0)) <= tol);
      CHECK((H * p.vector - p.value * p.vector).norm() <= tol);
      CHECK(p.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(spectral_norm_sym(H) == doctest::Approx(ref.eigenvalues().cwiseAbs().maxCoeff()).epsilon(1e-10));
      const auto full = jacobi_eigen(H);
      CHECK((full.values - ref.eigenvalues()).cwiseAbs().maxCoeff() <= tol);
    }
  }
}

TEST_CASE("eigen_step examples") {
  const auto m0 = model(Vector::Zero(2), diag2(1, -2));
  CHECK(model_decrease(m0, eigen_step(m0, 1.0)) == doctest::Approx(1.0));
  const auto m1 = model(v2(0, 1), diag2(1, -2));
  const Vector s = eigen_step(m1, 1.0);
  CHECK(s.isApprox(v2(0, -1)));
  CHECK(model_decrease(m1, s) == doctest::Approx(2.0));
  const auto psd = model(v2(1, 1), diag2(1, 2));
  CHECK(model_decrease(psd, eigen_step(psd, 1.0)) >= 0.0);
}

TEST_CASE("second_order_step examples") {
  const auto flat = model(Vector::Zero(2), diag2(1, 3));
  const auto z = second_order_step(flat, 1.0);
  CHECK(z.s.norm() == 0.0);
  CHECK(z.decrease == 0.0);

  const auto convex = model(v2(30, -40), diag2(1, 3));
  const auto c = second_order_step(convex, 0.7);
  CHECK_FALSE(c.eigen_branch);
  CHECK(c.s == cauchy_step(convex, 0.7));

  const auto saddle = model(v2(1e-6, 0), diag2(1, -2));
  const auto e = second_order_step(saddle, 1.0);
  const double cauchy_dec = model_decrease(saddle, cauchy_step(saddle, 1.0));
  const double eigen_dec = model_decrease(saddle, eigen_step(saddle, 1.0));
  CHECK(eigen_dec > cauchy_dec);
  CHECK(e.eigen_branch);
  CHECK(e.decrease == doctest::Approx(eigen_dec));
  CHECK(e.decrease >= 1.0);
}

TEST_CASE("ties between Cauchy and eigen decreases go to Cauchy") {
  // g = 0 and lambda_min = 0: both steps give zero decrease.
  const auto m = model(Vector::Zero(2), diag2(0, 1));
  CHECK_FALSE(second_order_step(m, 1.0).eigen_branch);
}

TEST_CASE("random models: step length and fraction-of-decrease guarantees") {
  Rng rng(17);
  for (int t = 0; t < 10000; ++t) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    Vector g(n);
    for (int i = 0; i < n; ++i) g(i) = rng.normal() * std::exp(rng.uniform(-3, 3));
    const Matrix H = random_symmetric(n, rng, std::exp(rng.uniform(-3, 3)));
    const double delta = std::exp(rng.uniform(-4, 3));
    const auto m = model(g, H);
    const double gn = g.norm();
    const double hn = spectral_norm_sym(H);
    const double lmin = min_eigenpair(H).value;
    const double tol = 1e-10 * (1.0 + gn * delta + hn * delta * delta);

    const Vector sc = cauchy_step(m, delta);
    CHECK(sc.norm() <= delta * (1 + 1e-12));
    const double fcd = 0.5 * gn * std::min(hn > 0 ? gn / hn : delta, delta);
    CHECK(model_decrease(m, sc) >= fcd - tol);

    const auto so = second_order_step(m, delta);
    CHECK(so.s.norm() <= delta * (1 + 1e-12));
    const double fod = std::max(fcd, -0.5 * lmin * delta * delta);
    CHECK(so.decrease >= fod - tol);
    CHECK(so.decrease == doctest::Approx(model_decrease(m, so.s)));
  }
}

TEST_CASE("2-D steps never beat the global optimum and are within half of it on isotropic models") {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const Vector g = v2(rng.normal(), rng.normal());
    const double delta = std::exp(rng.uniform(-2, 1));
    const auto anisotropic = model(g, random_symmetric(2, rng, 2.0));
    const double opt = grid_optimum(anisotropic, delta);
    const auto s = second_order_step(anisotropic, delta);
    // A grid point lies within delta/50 of any point of the disk.
    const double slack = (g.norm() + 4.0 * delta) * delta / 50.0;
    CHECK(s.decrease <= opt + slack);

    // H = lambda I: the Cauchy or eigen step is the exact minimizer.
    const double lam = rng.uniform(-2, 2);
    const auto iso = model(g, Matrix::Identity(2, 2) * lam);
    CHECK(second_order_step(iso, delta).decrease >= 0.5 * grid_optimum(iso, delta));
  }
}

TEST_CASE("the step can fall far below the global optimum on ill-conditioned convex models") {
  // Steepest descent along g = (1, 1) is curbed by the stiff direction, while
  // the Newton step (-100, -0.01) is interior.
  const auto m = model(v2(1, 1), diag2(0.01, 100));
  const auto s = second_order_step(m, 100.0);
  CHECK(s.decrease == doctest::Approx(4.0 / (2.0 * 100.01)));
  const double newton = 0.5 * (1.0 / 0.01 + 1.0 / 100.0);
  CHECK(grid_optimum(m, 100.0, 400) <= newton);
  CHECK(s.decrease < 0.5 * newton);
}
