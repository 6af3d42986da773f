#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lightcone::krylov {

using cplx = std::complex<double>;
using LinearOp = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct ExpvStats {
  int matvecs = 0;
  int substeps = 0;
  double error_estimate = 0.0;  // accumulated a-posteriori estimate
};

// psi <- exp(-i H t) psi for Hermitian H given as a matrix-vector product.
// Lanczos with full reorthogonalization on a basis of at most `basis_size` vectors;
// substeps shrink until the a-posteriori error per unit time stays below tol / t.
ExpvStats expv_hermitian(const LinearOp& H, Eigen::VectorXcd& psi, double t, double tol = 1e-10,
                         int basis_size = 30);

}  // namespace lightcone::krylov
