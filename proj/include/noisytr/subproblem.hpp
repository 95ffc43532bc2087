#pragma once

#include "noisytr/core.hpp"

namespace noisytr {

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

// Full eigendecomposition; values ascending, vectors in matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

// Cyclic Jacobi rotations. Throws ContractViolation for non-symmetric input.
SymmetricEigen jacobi_eigen(const Matrix& H);
EigenPair min_eigenpair(const Matrix& H);
// max |lambda| of a symmetric matrix.
double spectral_norm_sym(const Matrix& H);

// s = -tau * delta * g/|g|, tau = min{1, |g|^3 / (delta <Hg,g>)} when
// <Hg,g> > 0 and 1 otherwise; zero when g = 0.
Vector cauchy_step(const QuadraticModel& model, double delta);

// s = +-delta * v with v the eigenvector of lambda_min(H) and the sign chosen
// so that <g,s> <= 0.
Vector eigen_step(const QuadraticModel& model, double delta);

struct SecondOrderStep {
  Vector s;
  double decrease = 0.0;
  bool eigen_branch = false;
  double lambda_min = 0.0;
};

// Better of the Cauchy and eigen steps; the eigen step is only considered
// when lambda_min(H) < 0 and ties go to the Cauchy step.
SecondOrderStep second_order_step(const QuadraticModel& model, double delta);

}  // namespace noisytr
