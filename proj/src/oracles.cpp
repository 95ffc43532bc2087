#include "noisytr/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noisytr/adversarial.hpp"
#include "noisytr/subproblem.hpp"

namespace noisytr {

double sample_subexponential_noise(double eps_f, double a, Rng& rng) {
  if (!(a > 0.0)) throw ConfigError("subexponential noise: a must be positive");
  if (!(eps_f >= 0.0)) throw ConfigError("subexponential noise: eps_f must be >= 0");
  const double s = rng.sign();
  const double u = eps_f * rng.uniform();
  return s * (u + rng.exponential(a));
}

ZerothOracle::ZerothOracle(Mode mode, Objective obj, double eps_f, double a, std::uint64_t seed)
    : mode_(mode), obj_(std::move(obj)), eps_f_(eps_f), a_(a), rng_(seed) {
  if (!(eps_f_ >= 0.0)) throw ConfigError("zeroth oracle: eps_f must be >= 0");
}

ZerothOracle ZerothOracle::exact(Objective obj) {
  return ZerothOracle(Mode::kExact, std::move(obj), 0.0, 0.0, 0);
}

ZerothOracle ZerothOracle::bounded_uniform(Objective obj, double eps_f, std::uint64_t seed) {
  return ZerothOracle(Mode::kBoundedUniform, std::move(obj), eps_f, 0.0, seed);
}

ZerothOracle ZerothOracle::bounded_adversarial(Objective obj, double eps_f, NoisePairHook hook) {
  ZerothOracle z(Mode::kBoundedAdversarial, std::move(obj), eps_f, 0.0, 0);
  if (hook) {
    z.hook_ = std::move(hook);
  } else {
    z.hook_ = [eps_f](double phi_x, double phi_xs) {
      return adversarial_noise_pair(phi_x, phi_xs, eps_f);
    };
  }
  return z;
}

ZerothOracle ZerothOracle::subexponential(Objective obj, double eps_f, double a,
                                          std::uint64_t seed) {
  if (!(a > 0.0)) throw ConfigError("subexponential oracle: a must be positive");
  return ZerothOracle(Mode::kSubexponential, std::move(obj), eps_f, a, seed);
}

double ZerothOracle::error_bound() const {
  switch (mode_) {
    case Mode::kExact:
      return 0.0;
    case Mode::kBoundedUniform:
    case Mode::kBoundedAdversarial:
      return eps_f_;
    case Mode::kSubexponential:
      break;
  }
  return std::numeric_limits<double>::infinity();
}

double ZerothOracle::draw_error() {
  switch (mode_) {
    case Mode::kExact:
      return 0.0;
    case Mode::kBoundedUniform:
      return rng_.uniform(-eps_f_, eps_f_);
    case Mode::kSubexponential:
      return sample_subexponential_noise(eps_f_, a_, rng_);
    case Mode::kBoundedAdversarial:
      break;
  }
  throw ContractViolation("draw_error: adversarial mode has no independent draws");
}

void ZerothOracle::record(const Vector& x, double phi, double e) {
  phi_history_.push_back(phi);
  if (logging_) log_.push_back({x, std::abs(e), std::abs(e) <= error_bound()});
}

ZerothSample ZerothOracle::sample(const Vector& x) {
  const double phi = obj_.eval(x);
  double e = 0.0;
  if (mode_ == Mode::kBoundedAdversarial) {
    e = hook_(phi, phi).first;
  } else {
    e = draw_error();
  }
  record(x, phi, e);
  return {phi + e, e};
}

std::pair<ZerothSample, ZerothSample> ZerothOracle::sample_pair(const Vector& x,
                                                                const Vector& x_plus) {
  if (mode_ != Mode::kBoundedAdversarial) {
    ZerothSample a = sample(x);
    ZerothSample b = sample(x_plus);
    return {a, b};
  }
  const double phi_x = obj_.eval(x);
  const double phi_xs = obj_.eval(x_plus);
  const auto [e, e_plus] = hook_(phi_x, phi_xs);
  record(x, phi_x, e);
  record(x_plus, phi_xs, e_plus);
  return {{phi_x + e, e}, {phi_xs + e_plus, e_plus}};
}

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("finite differences: sigma must be positive");
}

struct FdGradient {
  Vector g;
  double max_abs_error = 0.0;
};

struct FdHessian {
  Matrix H;
  double max_abs_error = 0.0;
};

FdGradient fd_gradient_impl(ZerothOracle& z, const Vector& x, double sigma) {
  require_sigma(sigma);
  const auto n = x.size();
  const ZerothSample f0 = z.sample(x);
  FdGradient out{Vector(n), std::abs(f0.error)};
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + sigma;
    const ZerothSample fi = z.sample(y);
    y(i) = x(i);
    out.g(i) = (fi.value - f0.value) / sigma;
    out.max_abs_error = std::max(out.max_abs_error, std::abs(fi.error));
  }
  return out;
}

FdGradient fd2_gradient_impl(ZerothOracle& z, const Vector& x, double sigma) {
  require_sigma(sigma);
  const auto n = x.size();
  const ZerothSample f0 = z.sample(x);
  FdGradient out{Vector(n), std::abs(f0.error)};
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + sigma;
    const ZerothSample f1 = z.sample(y);
    y(i) = x(i) + 2.0 * sigma;
    const ZerothSample f2 = z.sample(y);
    y(i) = x(i);
    out.g(i) = (4.0 * f1.value - f2.value - 3.0 * f0.value) / (2.0 * sigma);
    out.max_abs_error =
        std::max({out.max_abs_error, std::abs(f1.error), std::abs(f2.error)});
  }
  return out;
}

FdHessian fd_hessian_impl(ZerothOracle& z, const Vector& x, double sigma) {
  require_sigma(sigma);
  const auto n = x.size();
  const ZerothSample f0 = z.sample(x);
  double max_err = std::abs(f0.error);
  Vector fi(n);
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + sigma;
    const ZerothSample s = z.sample(y);
    y(i) = x(i);
    fi(i) = s.value;
    max_err = std::max(max_err, std::abs(s.error));
  }
  Matrix H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      y(i) += sigma;
      y(j) += sigma;
      const ZerothSample s = z.sample(y);
      y(i) = x(i);
      y(j) = x(j);
      max_err = std::max(max_err, std::abs(s.error));
      H(i, j) = (s.value - fi(i) - fi(j) + f0.value) / (sigma * sigma);
      H(j, i) = H(i, j);
    }
  }
  // Each off-diagonal point is evaluated once, so H is already symmetric;
  // symmetrize anyway to absorb rounding.
  return {0.5 * (H + H.transpose()), max_err};
}

}  // namespace

Vector fd_gradient(ZerothOracle& z, const Vector& x, double sigma) {
  return fd_gradient_impl(z, x, sigma).g;
}

Vector fd2_gradient(ZerothOracle& z, const Vector& x, double sigma) {
  return fd2_gradient_impl(z, x, sigma).g;
}

Matrix fd_hessian(ZerothOracle& z, const Vector& x, double sigma) {
  return fd_hessian_impl(z, x, sigma).H;
}

double fd_gradient_bound(int n, double L1, double sigma, double eps_hat) {
  const double rn = std::sqrt(static_cast<double>(n));
  return rn * L1 * sigma / 2.0 + rn * eps_hat / sigma;
}

double fd2_gradient_bound(int n, double L2, double sigma, double eps_hat) {
  const double rn = std::sqrt(static_cast<double>(n));
  return rn * L2 * sigma * sigma + 4.0 * rn * eps_hat / sigma;
}

double fd_hessian_bound(int n, double L2, double sigma, double eps_hat) {
  return (std::numbers::sqrt2 + 1.0) * n * L2 * sigma / 3.0 + 4.0 * n * eps_hat / (sigma * sigma);
}

SigmaChoice optimal_sigma(SigmaKind kind, double eps_f, double L, int n) {
  if (!(eps_f > 0.0) || !(L > 0.0) || n <= 0) {
    throw ConfigError("optimal_sigma: eps_f, L and n must be positive");
  }
  const double dn = static_cast<double>(n);
  const double s2p1 = std::numbers::sqrt2 + 1.0;
  switch (kind) {
    case SigmaKind::kGradFd:
      return {std::sqrt(2.0 * eps_f / L), std::sqrt(2.0 * dn * L * eps_f)};
    case SigmaKind::kHessFd:
      return {std::cbrt(24.0 * eps_f / (s2p1 * L)), dn * std::cbrt(3.0 * s2p1 * s2p1 * eps_f * L * L)};
    case SigmaKind::kGradFd2:
      // Minimizer of sqrt(n) (L sigma^2 + 4 eps / sigma).
      return {std::cbrt(2.0 * eps_f / L), 3.0 * std::sqrt(dn) * std::cbrt(4.0 * eps_f * eps_f * L)};
  }
  throw ContractViolation("optimal_sigma: unknown kind");
}

FirstOracle::FirstOracle(Mode mode, std::optional<Objective> obj, std::uint64_t seed)
    : mode_(mode), obj_(std::move(obj)), rng_(seed) {}

FirstOracle FirstOracle::exact(Objective obj) {
  return FirstOracle(Mode::kExact, std::move(obj), 0);
}

FirstOracle FirstOracle::corrupted(Objective obj, CorruptionSpec spec, std::uint64_t seed) {
  if (!(spec.eps >= 0.0) || !(spec.kappa >= 0.0)) {
    throw ConfigError("corrupted gradient oracle: eps and kappa must be >= 0");
  }
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("corrupted gradient oracle: p in [0,1]");
  if (!(spec.outlier_scale >= 0.0)) throw ConfigError("corrupted gradient oracle: outlier_scale");
  FirstOracle o(Mode::kCorrupted, std::move(obj), seed);
  o.spec_ = spec;
  o.eps_ = spec.eps;
  o.kappa_ = spec.kappa;
  return o;
}

FirstOracle FirstOracle::finite_difference(ZerothOracle& z, FdScheme scheme, double sigma,
                                           double eps_hat) {
  require_sigma(sigma);
  FirstOracle o(Mode::kFiniteDifference, std::nullopt, 0);
  o.z_ = &z;
  o.scheme_ = scheme;
  o.sigma_ = sigma;
  o.eps_hat_ = eps_hat;
  const Objective& obj = z.objective();
  // A forward difference subtracts two errors, so the stencil noise is 2 eps_hat.
  o.eps_ = scheme == FdScheme::kForward ? fd_gradient_bound(obj.dim(), obj.L1(), sigma, 2.0 * eps_hat)
                                        : fd2_gradient_bound(obj.dim(), obj.L2(), sigma, eps_hat);
  return o;
}

FirstOracle FirstOracle::adversarial(GradientDelegate delegate, double eps_g, double kappa_eg) {
  FirstOracle o(Mode::kAdversarial, std::nullopt, 0);
  o.delegate_ = std::move(delegate);
  o.eps_ = eps_g;
  o.kappa_ = kappa_eg;
  return o;
}

GradientSample FirstOracle::sample(const Vector& x, double delta1, double /*p*/) {
  if (!(delta1 > 0.0)) throw ContractViolation("sample_first: delta1 must be positive");
  GradientSample out;
  double err = 0.0;
  switch (mode_) {
    case Mode::kExact:
      out.g = obj_->grad(x);
      break;
    case Mode::kCorrupted: {
      const int n = static_cast<int>(x.size());
      const double radius = spec_.eps + spec_.kappa * delta1;
      out.in_spec = rng_.bernoulli(spec_.p);
      const Vector e = out.in_spec ? rng_.ball_vector(n, radius)
                                   : Vector(spec_.outlier_scale * radius * rng_.unit_vector(n));
      out.g = obj_->grad(x) + e;
      err = e.norm();
      break;
    }
    case Mode::kFiniteDifference: {
      const FdGradient fd = scheme_ == FdScheme::kForward ? fd_gradient_impl(*z_, x, sigma_)
                                                          : fd2_gradient_impl(*z_, x, sigma_);
      out.g = fd.g;
      out.in_spec = fd.max_abs_error <= eps_hat_;
      err = fd.max_abs_error;
      break;
    }
    case Mode::kAdversarial:
      out = delegate_(x, delta1);
      break;
  }
  if (logging_) log_.push_back({x, err, out.in_spec});
  return out;
}

SecondOracle::SecondOracle(Mode mode, std::optional<Objective> obj, std::uint64_t seed)
    : mode_(mode), obj_(std::move(obj)), rng_(seed) {}

SecondOracle SecondOracle::exact(Objective obj) {
  return SecondOracle(Mode::kExact, std::move(obj), 0);
}

SecondOracle SecondOracle::corrupted(Objective obj, CorruptionSpec spec, std::uint64_t seed) {
  if (!(spec.eps >= 0.0) || !(spec.kappa >= 0.0)) {
    throw ConfigError("corrupted Hessian oracle: eps and kappa must be >= 0");
  }
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw ConfigError("corrupted Hessian oracle: p in [0,1]");
  if (!(spec.outlier_scale >= 0.0)) throw ConfigError("corrupted Hessian oracle: outlier_scale");
  SecondOracle o(Mode::kCorrupted, std::move(obj), seed);
  o.spec_ = spec;
  o.eps_ = spec.eps;
  o.kappa_ = spec.kappa;
  return o;
}

SecondOracle SecondOracle::finite_difference(ZerothOracle& z, double sigma, double eps_hat) {
  require_sigma(sigma);
  SecondOracle o(Mode::kFiniteDifference, std::nullopt, 0);
  o.z_ = &z;
  o.sigma_ = sigma;
  o.eps_hat_ = eps_hat;
  const Objective& obj = z.objective();
  o.eps_ = fd_hessian_bound(obj.dim(), obj.L2(), sigma, eps_hat);
  return o;
}

HessianSample SecondOracle::sample(const Vector& x, double delta2, double /*p*/) {
  if (!(delta2 > 0.0)) throw ContractViolation("sample_second: delta2 must be positive");
  HessianSample out;
  double err = 0.0;
  switch (mode_) {
    case Mode::kExact:
      out.H = obj_->hess(x);
      break;
    case Mode::kCorrupted: {
      const auto n = x.size();
      const double radius = spec_.eps + spec_.kappa * delta2;
      out.in_spec = rng_.bernoulli(spec_.p);
      // Radial law of a uniform draw from a ball in the n(n+1)/2-dimensional
      // space of symmetric matrices.
      const double dof = static_cast<double>(n * (n + 1) / 2);
      const double target = out.in_spec ? radius * std::pow(rng_.uniform(), 1.0 / dof)
                                        : spec_.outlier_scale * radius;
      Matrix G(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) G(i, j) = rng_.normal();
      Matrix E = 0.5 * (G + G.transpose());
      const double en = spectral_norm_sym(E);
      E = en > 0.0 ? Matrix(E * (target / en)) : Matrix(Matrix::Zero(n, n));
      out.H = obj_->hess(x) + E;
      out.H = 0.5 * (out.H + out.H.transpose());
      err = target;
      break;
    }
    case Mode::kFiniteDifference: {
      const FdHessian fd = fd_hessian_impl(*z_, x, sigma_);
      out.H = fd.H;
      out.in_spec = fd.max_abs_error <= eps_hat_;
      err = fd.max_abs_error;
      break;
    }
  }
  if (logging_) log_.push_back({x, err, out.in_spec});
  return out;
}

QuadraticPopulation::QuadraticPopulation(Matrix data) : data_(std::move(data)) {
  if (data_.cols() == 0 || data_.rows() == 0) throw ConfigError("population is empty");
  mean_ = data_.rowwise().mean();
  sigma_ = std::sqrt((data_.colwise() - mean_).colwise().squaredNorm().mean());
}

Vector QuadraticPopulation::sample_gradient(const Vector& x, Rng& rng) const {
  const auto m = static_cast<std::uint64_t>(data_.cols());
  const auto j = static_cast<Eigen::Index>(rng.next_u64() % m);
  return x - data_.col(j);
}

Vector QuadraticPopulation::mean_gradient(const Vector& x) const { return x - mean_; }

long minibatch_size(double delta1, double p1, double n_max) {
  if (!(delta1 > 0.0)) throw ConfigError("minibatch: delta1 must be positive");
  if (!(p1 >= 0.0 && p1 < 1.0)) throw ConfigError("minibatch: p1 must lie in [0,1)");
  if (!(n_max >= 1.0)) throw ConfigError("minibatch: n_max must be >= 1");
  const double q = (1.0 - p1) * delta1;
  const double want = std::min(n_max, 1.0 / (q * q));
  const double size = std::ceil(want);
  if (size > 1e12) throw NumericError("minibatch: batch size too large");
  return static_cast<long>(size);
}

MinibatchSample minibatch_gradient_oracle(const QuadraticPopulation& pop, const Vector& x,
                                          double delta1, double p1, double n_max, Rng& rng) {
  MinibatchSample out;
  out.batch_size = minibatch_size(delta1, p1, n_max);
  out.g = Vector::Zero(x.size());
  for (long i = 0; i < out.batch_size; ++i) out.g += pop.sample_gradient(x, rng);
  out.g /= static_cast<double>(out.batch_size);
  return out;
}

}  // namespace noisytr
