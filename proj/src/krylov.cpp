#include "lightcone/krylov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lightcone::krylov {

namespace {

struct LanczosBasis {
  Eigen::MatrixXcd V;          // n x m orthonormal columns
  Eigen::VectorXd alpha, beta;  // T diagonal (m) and off-diagonal (m-1)
  double beta_next = 0.0;       // residual coupling out of the basis
  int m = 0;
};

LanczosBasis build_basis(const LinearOp& H, const Eigen::VectorXcd& v0, int max_m, int& matvecs) {
  const Eigen::Index n = v0.size();
  LanczosBasis b;
  b.V.resize(n, max_m);
  b.alpha.resize(max_m);
  b.beta.resize(max_m);
  b.V.col(0) = v0;
  Eigen::VectorXcd w(n);
  const double breakdown = 1e-13;
  for (int j = 0; j < max_m; ++j) {
    H(b.V.col(j), w);
    ++matvecs;
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd c = b.V.leftCols(j + 1).adjoint() * w;
      w.noalias() -= b.V.leftCols(j + 1) * c;
      if (pass == 0) b.alpha[j] = c[j].real();
      else b.alpha[j] += c[j].real();
    }
    const double nb = w.norm();
    b.m = j + 1;
    if (j + 1 == max_m || nb < breakdown || static_cast<Eigen::Index>(j + 1) == n) {
      b.beta_next = (nb < breakdown || static_cast<Eigen::Index>(j + 1) == n) ? 0.0 : nb;
      break;
    }
    b.beta[j] = nb;
    b.V.col(j + 1) = w / nb;
  }
  return b;
}

}  // namespace

ExpvStats expv_hermitian(const LinearOp& H, Eigen::VectorXcd& psi, double t, double tol, int basis_size) {
  if (t < 0.0) throw std::invalid_argument("expv needs t >= 0");
  ExpvStats stats;
  if (t == 0.0 || psi.norm() == 0.0 || psi.size() == 0) return stats;
  const int max_m = static_cast<int>(std::min<Eigen::Index>(basis_size, psi.size()));
  double done = 0.0;
  double dt_guess = t;
  while (done < t) {
    const double remaining = t - done;
    const double scale = psi.norm();
    LanczosBasis b = build_basis(H, psi / scale, max_m, stats.matvecs);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(b.m, b.m);
    for (int j = 0; j < b.m; ++j) {
      T(j, j) = b.alpha[j];
      if (j + 1 < b.m) T(j, j + 1) = T(j + 1, j) = b.beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd e0 = es.eigenvectors().row(0).transpose();
    double dt = std::min(remaining, dt_guess);
    Eigen::VectorXcd y;
    double err = 0.0;
    for (int tries = 0;; ++tries) {
      Eigen::VectorXcd phase(b.m);
      for (int k = 0; k < b.m; ++k) phase[k] = std::exp(cplx(0.0, -es.eigenvalues()[k] * dt)) * e0[k];
      y = es.eigenvectors().cast<cplx>() * phase;
      err = b.beta_next * std::abs(y[b.m - 1]);
      if (err <= tol * dt / t || b.beta_next == 0.0) break;
      if (tries > 200) throw std::runtime_error("expv: step size underflow");
      dt *= 0.5;
    }
    psi = scale * (b.V.leftCols(b.m) * y);
    done = (dt == remaining) ? t : done + dt;
    stats.error_estimate += err;
    ++stats.substeps;
    // Let the next step grow again after a successful shrink.
    dt_guess = 2.0 * dt;
  }
  return stats;
}

}  // namespace lightcone::krylov
