#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "lightcone/lattice.hpp"
#include "lightcone/spin_sim.hpp"

namespace lightcone::protocols {

using cplx = std::complex<double>;

// Geometry and couplings of the three-step spreading protocol. The lattice is
// (r + 2 ell + 1) x (2 ell + 1)^(d-1); the origin sits at (ell, ell, ...) and the
// target r sites further along axis 0.
struct SpreadingProtocol {
  int d = 1;
  double alpha = 0.0;
  double h = 1.0;
  double t = 0.0;
  int r = 0;
  int ell = 0;
  double tau = 0.0;
  std::int64_t V = 0;
  LatticeGraph lattice{std::vector<int>{1}};
  Site origin = 0;
  Site target = 0;
  Region ball_origin;
  Region ball_target;

  // V^2 tau; the rigorous lower bound needs this below 1/2.
  double epsilon() const { return static_cast<double>(V) * static_cast<double>(V) * tau; }
};

struct SpreadingBuild {
  spin::Schedule schedule;
  SpreadingProtocol protocol;
};

// Step 1: CNOT cascade over the origin ball, one shell per unit time.
// Step 2: J Z_j Z_y on every pair of the two balls, J = h / (2r)^alpha, for t/3.
// Step 3: inverse cascade over the target ball.
// Throws std::invalid_argument unless t/3 is a non-negative integer with t/3 < r/2.
SpreadingBuild build_spreading_protocol(int r, double t, double alpha, int d, double h = 1.0);

// t^{2d+1} / (3^{1+2d} 2^{1+alpha} r^alpha). Throws std::domain_error when t < 3 or
// V^2 tau >= 1/2 for ell = floor(t/3), since the bound is then not guaranteed.
double commutator_lower_bound(double t, int r, double alpha, int d);

// a = -2 sum_{k odd} C(V,k) i^k sin^k(2 tau V) cos^{V-k}(2 tau V)
cplx matrix_element_a(double tau, std::int64_t V);

// Exact ||[X_0(t), X_r]|| for the protocol: 2 max |sin(2 tau z w)| over the
// eigenvalues z, w in {V, V-2, ..., -V} of the summed Z on each ball.
double spreading_norm_closed_form(double tau, std::int64_t V);

enum class SimulationPath { pauli, dense };

// ||[X_0(t), X_r]|| by evolving X_0 through the schedule. The dense path needs the
// whole lattice within the dense operator cap.
double simulate_spreading_norm(const SpreadingBuild& build, SimulationPath path);

struct SpreadingResult {
  double exact_norm = 0.0;
  double lower_bound = 0.0;  // NaN when V^2 tau >= 1/2 or t < 3
  double closed_form = 0.0;
  bool simulated = false;    // exact_norm came from operator evolution
};

// Simulates on the Pauli path when the evolved operator fits (2V <= 12 sites),
// otherwise reports the closed form.
SpreadingResult run_spreading_experiment(const SpreadingBuild& build);

// Connected-correlator variant: X cascade on the origin ball and a Z cascade on the
// target ball in Step 1, ZZ coupling in Step 2 (sign chosen so that U_j = cos(tau Theta)
// + i sin(tau Theta) Z_j), idle Step 3.
spin::Schedule connected_correlator_schedule(const SpreadingProtocol& p);

// (i/2)((c - is)^V - (c + is)^V) with c = cos(2 tau V), s = sin(2 tau V).
double connected_correlator_closed_form(double tau, std::int64_t V);

// t^{2d+1} / (3^{1+2d} 2^{2+alpha} r^alpha)
double connected_correlator_lower_bound(double t, int r, double alpha, int d);

// <Z_y(t) X_x(t)> - <Z_y(t)> <X_x(t)> on |phi>|phi>, |phi> = (|0..0> + i|1..1>)/sqrt 2,
// from a state-vector run.
double simulate_connected_correlator(const SpreadingProtocol& p);

struct CorrelatorResult {
  double closed_form = 0.0;
  double simulated = 0.0;    // NaN when the lattice exceeds the state cap
  double lower_bound = 0.0;  // NaN when V^2 tau >= 1/2
  SpreadingProtocol protocol;
};

// Throws std::invalid_argument when V is even.
CorrelatorResult connected_correlator_experiment(double t, int r, double alpha, int d, double h = 1.0);

// ---------------------------------------------------------------------------
// GHZ-based single-qubit transfer

enum class GhzMode { plain, eldredge_boosted };

struct GhzTransfer {
  spin::Schedule schedule;
  Site origin = 0;
  Site target = 0;
  int ell = 0;
  Region ball_origin;
  Region ball_target;
  double link_coupling = 0.0;
  double link_duration = 0.0;
};

// Transfers a|0> + b|1> from origin to target when every other qubit starts in |0>.
// Encode origin and target into GHZ-like states, couple the two balls with ZZ for a
// quarter phase, undo the target ball, fix the target qubit with H S^dagger, undo the
// origin ball; then the same map with the roles exchanged is run backwards.
// ell < 0 picks the radius minimizing ghz_transfer_duration.
GhzTransfer ghz_transfer_schedule(const LatticeGraph& lattice, Site origin, Site target, double alpha,
                                  GhzMode mode, int ell = -1, double h = 1.0);

// Total schedule duration on an unbounded lattice for balls of radius ell at distance r.
double ghz_transfer_duration(int r, double alpha, int d, GhzMode mode, int ell, double h = 1.0);

// Radius in [0, (r-1)/2] minimizing ghz_transfer_duration.
int ghz_optimal_ell(int r, double alpha, int d, GhzMode mode, double h = 1.0);

// Fidelity of the target qubit's reduced state with a|0> + b|1> after running the
// schedule on (a|0> + b|1>)_origin |0...0>.
double ghz_transfer_fidelity(const GhzTransfer& transfer, cplx a, cplx b);

// Hermitian H with exp(-i H duration) = U, from a Schur decomposition of U.
Eigen::MatrixXcd unitary_generator(const Eigen::MatrixXcd& U, double duration);

// Breadth-first tree of `region` rooted at `root`: entry k lists (parent, child) edges
// from distance k to distance k+1.
std::vector<std::vector<std::pair<Site, Site>>> bfs_shells(const LatticeGraph& lattice, Site root,
                                                           const Region& region);

// One unit-time segment per shell; each edge carries a CNOT generated by
// (pi/4)(Z_c + X_t - Z_c X_t). spread_x puts the control on the parent (X_root spreads
// to the whole region); otherwise the control is the child (Z_root spreads).
std::vector<spin::Segment> cascade_segments(const std::vector<std::vector<std::pair<Site, Site>>>& shells,
                                            bool spread_x);

}  // namespace lightcone::protocols
