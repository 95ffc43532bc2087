#include "noisytr/subproblem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace noisytr {

namespace {

void require_symmetric(const Matrix& H) {
  if (H.rows() != H.cols()) throw ContractViolation("matrix is not square");
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ContractViolation("matrix is not symmetric");
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& Hin) {
  require_symmetric(Hin);
  const Eigen::Index n = Hin.rows();
  Matrix A = 0.5 * (Hin + Hin.transpose());
  Matrix V = Matrix::Identity(n, n);
  const double total = A.squaredNorm();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off <= 1e-32 * total || off == 0.0) break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        // Rotation angle from the classical stable formulas.
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = A(order[i], order[i]);
    out.vectors.col(i) = V.col(order[i]);
  }
  return out;
}

EigenPair min_eigenpair(const Matrix& H) {
  if (H.rows() == 0) throw ContractViolation("min_eigenpair: empty matrix");
  const SymmetricEigen eig = jacobi_eigen(H);
  return {eig.values(0), eig.vectors.col(0)};
}

double spectral_norm_sym(const Matrix& H) {
  if (H.rows() == 0) return 0.0;
  const SymmetricEigen eig = jacobi_eigen(H);
  return std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
}

Vector cauchy_step(const QuadraticModel& model, double delta) {
  if (!(delta > 0.0)) throw ContractViolation("cauchy_step: delta must be positive");
  const Vector& g = model.g;
  const double gn = g.norm();
  if (gn == 0.0) return Vector::Zero(g.size());
  const double gHg = g.dot(model.H * g);
  double tau = 1.0;
  if (gHg > 0.0) tau = std::min(1.0, gn * gn * gn / (delta * gHg));
  return (-tau * delta / gn) * g;
}

Vector eigen_step(const QuadraticModel& model, double delta) {
  if (!(delta > 0.0)) throw ContractViolation("eigen_step: delta must be positive");
  const EigenPair ep = min_eigenpair(model.H);
  Vector s = delta * ep.vector;
  if (model.g.dot(s) > 0.0) s = -s;
  return s;
}

SecondOrderStep second_order_step(const QuadraticModel& model, double delta) {
  SecondOrderStep out;
  out.s = cauchy_step(model, delta);
  out.decrease = model_decrease(model, out.s);
  const EigenPair ep = min_eigenpair(model.H);
  out.lambda_min = ep.value;
  if (ep.value < 0.0) {
    Vector s = delta * ep.vector;
    if (model.g.dot(s) > 0.0) s = -s;
    const double dec = model_decrease(model, s);
    if (dec > out.decrease) {
      out.s = std::move(s);
      out.decrease = dec;
      out.eigen_branch = true;
    }
  }
  return out;
}

}  // namespace noisytr
