#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <limits>
#include <memory>
#include <random>
#include <vector>

#include "lightcone/lattice.hpp"
#include "lightcone/spin_sim.hpp"

namespace lightcone::free {

using cplx = std::complex<double>;
using WaveFunction = Eigen::VectorXcd;

struct Hop {
  Site i = 0;
  Site j = 0;
  cplx value;  // <i|H|j>; the conjugate entry is implied
};

// Hermitian single-particle hopping matrix. Either stored sparse, or (chains only) a
// real symmetric Toeplitz matrix applied with a circulant FFT embedding.
class HoppingMatrix {
 public:
  HoppingMatrix() = default;
  static HoppingMatrix from_hops(int num_sites, const std::vector<Hop>& hops);
  static HoppingMatrix from_sparse(Eigen::SparseMatrix<cplx, Eigen::RowMajor> m);
  // <i|H|j> = coupling[|i - j|] on a chain of coupling.size() sites; coupling[0] is ignored.
  static HoppingMatrix toeplitz(std::vector<double> coupling);

  int num_sites() const { return n_; }
  bool is_toeplitz() const { return static_cast<bool>(fft_); }
  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  Eigen::MatrixXcd to_dense() const;
  cplx entry(Site i, Site j) const;

  // Keeps only the entries with both endpoints in `region`.
  HoppingMatrix restricted(const Region& region) const;
  HoppingMatrix scaled(double s) const;
  // Visits every nonzero upper-triangular entry (i < j).
  template <class F>
  void for_each_pair(F&& visit) const;

 private:
  struct Fft;
  int n_ = 0;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> sparse_;
  std::vector<double> coupling_;
  std::shared_ptr<const Fft> fft_;
};

struct SpSegment {
  double duration = 0.0;
  HoppingMatrix H;
};

// Piecewise-constant single-particle Hamiltonian; zero after the last segment.
struct SingleParticleHamiltonian {
  LatticeGraph lattice = LatticeGraph::chain(1);
  std::vector<SpSegment> segments;

  static SingleParticleHamiltonian constant(LatticeGraph lattice, HoppingMatrix H);
  double total_duration() const;
  // Hoppings restricted to `region` in every segment.
  SingleParticleHamiltonian restricted(const Region& region) const;
};

HoppingMatrix nearest_neighbor_hopping(const LatticeGraph& lattice, double h);
// h / D^alpha between every pair; Toeplitz with FFT on chains, sparse otherwise.
HoppingMatrix power_law_hopping(const LatticeGraph& lattice, double alpha, double h);
// |h_ij| = u_ij h / D^alpha with u uniform in [0,1] and a uniform random phase.
HoppingMatrix random_power_law_hopping(const LatticeGraph& lattice, double alpha, double h, std::mt19937_64& rng);

// Largest |h_ij| D^alpha / h over pairs (<= 1 means the envelope holds).
EnvelopeReport check_hopping_envelope(const SingleParticleHamiltonian& H, PowerLawEnvelope env);

// psi(t) = U(t) psi with segments applied in order; Krylov exponential at 1e-10.
WaveFunction evolve_sp(const WaveFunction& psi, const SingleParticleHamiltonian& H, double t, double tol = 1e-10);
// Evolution over [t0, t1] of the schedule.
void evolve_sp_between(WaveFunction& psi, const SingleParticleHamiltonian& H, double t0, double t1,
                       double tol = 1e-10);

WaveFunction basis_state(int num_sites, Site s);

// |<i|psi>|^2; psi must have unit norm within 1e-10.
std::vector<double> position_distribution(const WaveFunction& psi);

struct TailParams {
  double alpha = 3.0;
  int d = 1;
  double epsilon = 0.1;
  double u = 0.0;
  double beta() const { return alpha - d - epsilon; }
  static TailParams make(double alpha, int d, double u = 0.0, double epsilon = 0.1);
};

// P(D = k) for k = 0..max distance from origin.
std::vector<double> radial_distribution(const LatticeGraph& lattice, const WaveFunction& psi, Site origin);

// E_t[F^beta] with F(x, t) = max(0, D(x, origin) - u t).
double expectation_F_beta(const std::vector<double>& radial, const TailParams& p, double t);
double expectation_F_beta(const LatticeGraph& lattice, const WaveFunction& psi, Site origin, const TailParams& p,
                          double t);

// sum over sites with D(y, origin) >= r.
double tail_probability(const std::vector<double>& radial, int r);
double tail_probability(const LatticeGraph& lattice, const WaveFunction& psi, Site origin, int r);

// E_t[F^beta] / (r - u t)^beta; +inf when r <= u t.
double markov_bound(const std::vector<double>& radial, const TailParams& p, double t, int r);

// ||psi_full(t) - psi_trunc(t)|| where psi_trunc evolves under the hoppings inside the
// ball of radius r around origin.
double truncated_evolution_error(const SingleParticleHamiltonian& H, int r, double t, Site origin);

struct TrajectoryPoint {
  double t = 0.0;
  std::vector<double> radial;
};
using Trajectory = std::vector<TrajectoryPoint>;

// Radial distributions of |origin> evolved to each time in `times` (ascending).
Trajectory record_trajectory(const SingleParticleHamiltonian& H, Site origin, const std::vector<double>& times);

struct TailFit {
  double K = 0.0;
  double u = 0.0;
  double beta = 0.0;
  bool u_forced_zero = false;
};

struct TailFitOptions {
  double epsilon = 0.1;
  double u_step = 0.05;
  double u_max = 20.0;
  // The reported u is the smallest grid value whose K(u) does not exceed this.
  double K_target = 1.0;
};

// K(u) = max over observed (r, t) with r > u t of tail (r - u t)^beta / t.
double tail_constant_for_velocity(const std::vector<Trajectory>& trajectories, double beta, double u);

// Smallest grid velocity u with K(u) <= K_target (u = 0 when d < alpha <= d + 1).
TailFit fit_tail_constants(double alpha, int d, const std::vector<Trajectory>& trajectories,
                           const TailFitOptions& options = {});

template <class F>
void HoppingMatrix::for_each_pair(F&& visit) const {
  if (is_toeplitz()) {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (coupling_[static_cast<std::size_t>(j - i)] != 0.0) visit(i, j, cplx(coupling_[static_cast<std::size_t>(j - i)]));
    return;
  }
  for (int i = 0; i < sparse_.outerSize(); ++i)
    for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(sparse_, i); it; ++it)
      if (it.col() > i) visit(i, static_cast<int>(it.col()), it.value());
}

}  // namespace lightcone::free
