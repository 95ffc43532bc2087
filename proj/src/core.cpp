#include "noisytr/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "noisytr/subproblem.hpp"

namespace noisytr {

Objective::Objective(std::string name, int dim, std::shared_ptr<const ObjectiveFunction> fn,
                     double L1, double L2, double phi_hat)
    : name_(std::move(name)), dim_(dim), fn_(std::move(fn)), L1_(L1), L2_(L2), phi_hat_(phi_hat) {
  if (dim_ <= 0) throw ConfigError("objective dimension must be positive");
  if (!fn_) throw ContractViolation("objective function is null");
}

void Objective::check_dim(const Vector& x) const {
  if (x.size() != dim_) {
    std::ostringstream msg;
    msg << name_ << ": expected dimension " << dim_ << ", got " << x.size();
    throw ContractViolation(msg.str());
  }
}

double Objective::eval(const Vector& x) const {
  check_dim(x);
  return fn_->eval(x);
}

Vector Objective::grad(const Vector& x) const {
  check_dim(x);
  return fn_->grad(x);
}

Matrix Objective::hess(const Vector& x) const {
  check_dim(x);
  return fn_->hess(x);
}

namespace {

class ScaledSphere : public ObjectiveFunction {
 public:
  explicit ScaledSphere(double L1) : L1_(L1) {}
  double eval(const Vector& x) const override { return 0.5 * L1_ * x.squaredNorm(); }
  Vector grad(const Vector& x) const override { return L1_ * x; }
  Matrix hess(const Vector& x) const override {
    return L1_ * Matrix::Identity(x.size(), x.size());
  }

 private:
  double L1_;
};

// 1/2 x'Ax + mu/4 |x|^4.
class ConfinedQuadratic : public ObjectiveFunction {
 public:
  ConfinedQuadratic(Matrix A, double mu) : A_(std::move(A)), mu_(mu) {}
  double eval(const Vector& x) const override {
    const double q = x.squaredNorm();
    return 0.5 * x.dot(A_ * x) + 0.25 * mu_ * q * q;
  }
  Vector grad(const Vector& x) const override { return A_ * x + mu_ * x.squaredNorm() * x; }
  Matrix hess(const Vector& x) const override {
    const auto n = x.size();
    return A_ + mu_ * (x.squaredNorm() * Matrix::Identity(n, n) + 2.0 * x * x.transpose());
  }

 private:
  Matrix A_;
  double mu_;
};

// Chained Rosenbrock: sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
class Rosenbrock : public ObjectiveFunction {
 public:
  double eval(const Vector& x) const override {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x(i + 1) - x(i) * x(i);
      const double b = 1.0 - x(i);
      f += 100.0 * a * a + b * b;
    }
    return f;
  }
  Vector grad(const Vector& x) const override {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x(i + 1) - x(i) * x(i);
      g(i) += -400.0 * a * x(i) - 2.0 * (1.0 - x(i));
      g(i + 1) += 200.0 * a;
    }
    return g;
  }
  Matrix hess(const Vector& x) const override {
    const auto n = x.size();
    Matrix H = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      H(i, i) += 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
      H(i, i + 1) += -400.0 * x(i);
      H(i + 1, i) += -400.0 * x(i);
      H(i + 1, i + 1) += 200.0;
    }
    return H;
  }
};

// Powell singular function on consecutive blocks of four variables.
class PowellSingular : public ObjectiveFunction {
 public:
  double eval(const Vector& x) const override {
    double f = 0.0;
    for (Eigen::Index b = 0; b + 3 < x.size(); b += 4) {
      const double t1 = x(b) + 10.0 * x(b + 1);
      const double t2 = x(b + 2) - x(b + 3);
      const double t3 = x(b + 1) - 2.0 * x(b + 2);
      const double t4 = x(b) - x(b + 3);
      f += t1 * t1 + 5.0 * t2 * t2 + std::pow(t3, 4) + 10.0 * std::pow(t4, 4);
    }
    return f;
  }
  Vector grad(const Vector& x) const override {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index b = 0; b + 3 < x.size(); b += 4) {
      const double t1 = x(b) + 10.0 * x(b + 1);
      const double t2 = x(b + 2) - x(b + 3);
      const double t3 = x(b + 1) - 2.0 * x(b + 2);
      const double t4 = x(b) - x(b + 3);
      const double c3 = 4.0 * std::pow(t3, 3);
      const double c4 = 40.0 * std::pow(t4, 3);
      g(b) += 2.0 * t1 + c4;
      g(b + 1) += 20.0 * t1 + c3;
      g(b + 2) += 10.0 * t2 - 2.0 * c3;
      g(b + 3) += -10.0 * t2 - c4;
    }
    return g;
  }
  Matrix hess(const Vector& x) const override {
    const auto n = x.size();
    Matrix H = Matrix::Zero(n, n);
    for (Eigen::Index b = 0; b + 3 < n; b += 4) {
      const double t3 = x(b + 1) - 2.0 * x(b + 2);
      const double t4 = x(b) - x(b + 3);
      Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
      B(0, 0) = 2.0;
      B(0, 1) = B(1, 0) = 20.0;
      B(1, 1) = 200.0;
      B(2, 2) = 10.0;
      B(3, 3) = 10.0;
      B(2, 3) = B(3, 2) = -10.0;
      const Eigen::Vector4d v(0.0, 1.0, -2.0, 0.0);
      const Eigen::Vector4d w(1.0, 0.0, 0.0, -1.0);
      B += 12.0 * t3 * t3 * v * v.transpose();
      B += 120.0 * t4 * t4 * w * w.transpose();
      H.block<4, 4>(b, b) += B;
    }
    return H;
  }
};

// Trigonometric function: sum_i r_i^2 with
// r_i = n - sum_j cos x_j + i (1 - cos x_i) - sin x_i, i = 1..n.
class Trigonometric : public ObjectiveFunction {
 public:
  double eval(const Vector& x) const override { return residuals(x).squaredNorm(); }
  Vector grad(const Vector& x) const override {
    const Vector r = residuals(x);
    return 2.0 * jacobian(x).transpose() * r;
  }
  Matrix hess(const Vector& x) const override {
    const auto n = x.size();
    const Vector r = residuals(x);
    const Matrix J = jacobian(x);
    Matrix H = J.transpose() * J;
    const double rsum = r.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double idx = static_cast<double>(i + 1);
      H(i, i) += rsum * std::cos(x(i)) + r(i) * (idx * std::cos(x(i)) + std::sin(x(i)));
    }
    return 2.0 * H;
  }

 private:
  static Vector residuals(const Vector& x) {
    const auto n = x.size();
    const double csum = x.array().cos().sum();
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double idx = static_cast<double>(i + 1);
      r(i) = static_cast<double>(n) - csum + idx * (1.0 - std::cos(x(i))) - std::sin(x(i));
    }
    return r;
  }
  static Matrix jacobian(const Vector& x) {
    const auto n = x.size();
    Matrix J(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      J.row(i) = x.array().sin().transpose();
      const double idx = static_cast<double>(i + 1);
      J(i, i) += idx * std::sin(x(i)) - std::cos(x(i));
    }
    return J;
  }
};

class Rescaled : public ObjectiveFunction {
 public:
  Rescaled(Objective base, double shift, double scale)
      : base_(std::move(base)), shift_(shift), scale_(scale) {}
  double eval(const Vector& x) const override { return scale_ * (base_.eval(x) - shift_); }
  Vector grad(const Vector& x) const override { return scale_ * base_.grad(x); }
  Matrix hess(const Vector& x) const override { return scale_ * base_.hess(x); }

 private:
  Objective base_;
  double shift_;
  double scale_;
};

Objective make_confined_quadratic(const ObjectiveSpec& spec) {
  Matrix A;
  if (spec.A.size() > 0) {
    A = spec.A;
  } else if (!spec.diag.empty()) {
    A = Vector::Map(spec.diag.data(), static_cast<Eigen::Index>(spec.diag.size())).asDiagonal();
  } else {
    // diag(1, -2, 1, ..., 1)
    A = Matrix::Identity(spec.dim, spec.dim);
    if (spec.dim >= 2) A(1, 1) = -2.0;
  }
  if (A.rows() != A.cols()) throw ConfigError("indefinite_quadratic: A must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff())) {
    throw ConfigError("indefinite_quadratic: A must be symmetric");
  }
  if (spec.quartic < 0.0) throw ConfigError("indefinite_quadratic: quartic must be >= 0");
  const int n = static_cast<int>(A.rows());
  const double lmin = min_eigenpair(A).value;
  const double anorm = spectral_norm_sym(A);
  const double mu = spec.quartic;
  const double R = spec.region;
  // Constants on the ball |x| <= R: the quartic Hessian mu(|x|^2 I + 2xx')
  // has norm <= 3 mu R^2 and Lipschitz constant <= 6 mu R.
  const double L1 = anorm + 3.0 * mu * R * R;
  const double L2 = 6.0 * mu * R;
  double phi_hat = 0.0;
  if (lmin < 0.0) {
    phi_hat = mu > 0.0 ? -lmin * lmin / (4.0 * mu) : -std::numeric_limits<double>::infinity();
  }
  return Objective("indefinite_quadratic", n,
                   std::make_shared<ConfinedQuadratic>(std::move(A), mu), L1, L2, phi_hat);
}

}  // namespace

Objective builtin_objective(const ObjectiveSpec& spec) {
  const int n = spec.dim;
  if (spec.name == "indefinite_quadratic") return make_confined_quadratic(spec);
  if (n <= 0) throw ConfigError("objective dimension must be positive");
  const double B = spec.region;
  if (spec.name == "scaled_sphere") {
    if (!(spec.L1 > 0.0)) throw ConfigError("scaled_sphere: L1 must be positive");
    return Objective("scaled_sphere", n, std::make_shared<ScaledSphere>(spec.L1), spec.L1, 0.0,
                     0.0);
  }
  if (spec.name == "rosenbrock") {
    if (n < 2) throw ConfigError("rosenbrock: dimension must be >= 2");
    // Gershgorin bound of the tridiagonal Hessian and a row-sum bound of the
    // third-derivative tensor on the box |x|_inf <= B.
    const double L1 = 1200.0 * B * B + 400.0 * B + 202.0 + 800.0 * B;
    const double L2 = 2400.0 * B + 2400.0;
    return Objective("rosenbrock", n, std::make_shared<Rosenbrock>(), L1, L2, 0.0);
  }
  if (spec.name == "powell_singular") {
    if (n % 4 != 0) throw ConfigError("powell_singular: dimension must be a multiple of 4");
    // Box |x|_inf <= B: |x2 - 2x3| <= 3B, |x1 - x4| <= 2B.
    const double L1 = 222.0 + 60.0 * 9.0 * B * B + 240.0 * 4.0 * B * B;
    const double L2 = 24.0 * 3.0 * B * std::pow(5.0, 1.5) + 240.0 * 2.0 * B * std::pow(2.0, 1.5);
    return Objective("powell_singular", n, std::make_shared<PowellSingular>(), L1, L2, 0.0);
  }
  if (spec.name == "trigonometric") {
    // Global bounds from |r_i| <= 2n + 2i + 1, |J_ij| <= 1 + [i=j](i+1),
    // ||hess r_i|| <= i + 2 and the same bound for third derivatives.
    double jf2 = static_cast<double>(n) * n;
    double curv = 0.0;
    double third = 0.0;
    const double rn = std::sqrt(static_cast<double>(n));
    for (int i = 1; i <= n; ++i) {
      jf2 += (i + 2.0) * (i + 2.0);
      curv += (2.0 * n + 2.0 * i + 1.0) * (i + 2.0);
      third += 3.0 * (rn + i + 1.0) * (i + 2.0) + (2.0 * n + 2.0 * i + 1.0) * (i + 2.0);
    }
    return Objective("trigonometric", n, std::make_shared<Trigonometric>(), 2.0 * (jf2 + curv),
                     2.0 * third, 0.0);
  }
  throw ConfigError("unknown objective '" + spec.name + "'");
}

Objective rescaled(const Objective& obj, const Vector& x0, double target) {
  const double lo = obj.phi_hat();
  if (!std::isfinite(lo)) throw ConfigError("rescaled: objective has no finite phi_hat");
  const double f0 = obj.eval(x0);
  if (!(f0 > lo)) throw ConfigError("rescaled: phi(x0) must exceed phi_hat");
  const double scale = target / (f0 - lo);
  return Objective(obj.name(), obj.dim(), std::make_shared<Rescaled>(obj, lo, scale),
                   scale * obj.L1(), scale * obj.L2(), 0.0);
}

QuadraticModel::QuadraticModel(Vector c, Vector grad, Matrix hess)
    : center(std::move(c)), g(std::move(grad)), H(std::move(hess)) {
  if (g.size() != center.size() || H.rows() != g.size() || H.cols() != g.size()) {
    throw ContractViolation("QuadraticModel: inconsistent dimensions");
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractViolation("QuadraticModel: H is not symmetric");
  }
}

double model_eval(const QuadraticModel& model, const Vector& s) {
  if (s.size() != model.g.size()) throw ContractViolation("model_eval: dimension mismatch");
  return model.g.dot(s) + 0.5 * s.dot(model.H * s);
}

double model_decrease(const QuadraticModel& model, const Vector& s) {
  return -model_eval(model, s);
}

void TrParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("TrParams: " + what); };
  if (!(eta1 > 0.0)) fail("eta1 must be > 0");
  if (!(eta2 > 0.0)) fail("eta2 must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0,1)");
  if (!(r >= 0.0)) fail("r must be >= 0");
  if (!(delta0 > 0.0)) fail("delta0 must be > 0");
  if (!(kappa_fcd > 0.0 && kappa_fcd <= 2.0)) fail("kappa_fcd must lie in (0,2]");
  if (!(kappa_fod > 0.0 && kappa_fod <= 1.0)) fail("kappa_fod must lie in (0,1]");
  if (!(p1 >= 0.0 && p1 <= 1.0)) fail("p1 must lie in [0,1]");
  if (!(p2 >= 0.0 && p2 <= 1.0)) fail("p2 must lie in [0,1]");
  if (budget < 0) fail("budget must be >= 0");
}

TraceSummary RunTrace::recompute_summary() const {
  TraceSummary s;
  s.min_true_grad_norm = std::numeric_limits<double>::quiet_NaN();
  s.min_beta = std::numeric_limits<double>::quiet_NaN();
  for (const auto& rec : records) {
    if (!(rec.true_grad_norm >= s.min_true_grad_norm)) s.min_true_grad_norm = rec.true_grad_norm;
    if (!std::isnan(rec.beta) && !(rec.beta >= s.min_beta)) s.min_beta = rec.beta;
  }
  s.final_phi = final_phi;
  return s;
}

}  // namespace noisytr
