#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string_view>
#include <variant>
#include <vector>

#include "lightcone/lattice.hpp"
#include "lightcone/pauli.hpp"

namespace lightcone::spin {

// Basis convention: in a dense vector or matrix of dimension 2^L, bit i of the
// basis index is the Z-eigenvalue label of site i (0 = spin up, Z = +1).

inline constexpr int kMaxStateSites = 20;
inline constexpr int kMaxDenseOperatorSites = 12;
inline constexpr int kMaxComponentSites = 12;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNormTol = 1e-10;

class SpinState {
 public:
  SpinState() = default;
  SpinState(int num_sites, Eigen::VectorXcd amplitudes);
  static SpinState basis(int num_sites, std::uint64_t index);

  int num_sites() const { return num_sites_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  double norm() const { return amps_.norm(); }

 private:
  int num_sites_ = 0;
  Eigen::VectorXcd amps_;
};

// Operator on L spins held either as a dense 2^L x 2^L matrix or as a Pauli sum.
class OperatorState {
 public:
  OperatorState() = default;
  static OperatorState from_dense(int num_sites, Eigen::MatrixXcd m);
  static OperatorState from_pauli(PauliSum p);
  static OperatorState identity(int num_sites);
  static OperatorState zero(int num_sites);
  // e.g. pauli(3, "XIZ") or a single-site string.
  static OperatorState pauli(int num_sites, std::string_view label, cplx coeff = 1.0);
  static OperatorState single(int num_sites, int site, char op, cplx coeff = 1.0);

  int num_sites() const { return num_sites_; }
  bool is_dense() const { return std::holds_alternative<Eigen::MatrixXcd>(rep_); }
  bool is_pauli() const { return !is_dense(); }

  Eigen::MatrixXcd to_dense() const;
  PauliSum to_pauli() const;
  OperatorState as_dense() const { return from_dense(num_sites_, to_dense()); }
  OperatorState as_pauli() const { return from_pauli(to_pauli()); }

  const Eigen::MatrixXcd& dense_ref() const { return std::get<Eigen::MatrixXcd>(rep_); }
  const PauliSum& pauli_ref() const { return std::get<PauliSum>(rep_); }

  bool is_hermitian(double tol = kHermitianTol) const;

  friend OperatorState operator+(const OperatorState& a, const OperatorState& b);
  friend OperatorState operator-(const OperatorState& a, const OperatorState& b);
  friend OperatorState operator*(const OperatorState& a, const OperatorState& b);
  friend OperatorState operator*(cplx s, const OperatorState& a);

 private:
  int num_sites_ = 0;
  std::variant<Eigen::MatrixXcd, PauliSum> rep_;
};

// Dense <-> Pauli transforms on n sites (fast Walsh-Hadamard based).
PauliSum dense_to_pauli(const Eigen::MatrixXcd& m, int num_sites, double tol = 1e-14);
Eigen::MatrixXcd pauli_to_dense(const PauliSum& p);

// Local Hermitian block on an ordered support; local bit m acts on support[m].
struct HamiltonianTerm {
  Region support;
  Eigen::MatrixXcd matrix;

  static HamiltonianTerm from_pauli(std::string_view ops, const std::vector<Site>& sites,
                                    double coeff);
  static HamiltonianTerm from_matrix(const std::vector<Site>& sites, const Eigen::MatrixXcd& m);

  // Pauli decomposition relabelled onto global sites.
  PauliSum pauli_form(int num_sites) const;
  double norm() const;
};

struct Segment {
  double duration = 0.0;
  std::vector<HamiltonianTerm> terms;
};

// Piecewise-constant Hamiltonian; segments run in order.
struct Schedule {
  int num_sites = 0;
  std::vector<Segment> segments;

  double total_duration() const;
  void append(Segment seg);
  void append(const Schedule& other);
  // Reversed segment order with every generator negated.
  Schedule inverse() const;
  // Portion of the schedule between absolute times t0 <= t1.
  Schedule slice(double t0, double t1) const;
  void validate() const;
};

// Dense Hamiltonian on all L sites.
Eigen::MatrixXcd dense_hamiltonian(const std::vector<HamiltonianTerm>& terms, int num_sites);

// Unitary for a constant generator, exp(-i H t), computed per connected support component.
// Applies segments in order; supports repeated sub-interval queries with cached spectra.
class Evolver {
 public:
  explicit Evolver(const Schedule& schedule);
  ~Evolver();
  Evolver(Evolver&&) noexcept;
  Evolver& operator=(Evolver&&) noexcept;

  // psi <- U(t1, t0) psi
  void evolve_state(Eigen::VectorXcd& psi, double t0, double t1);
  // O <- U(t1,t0)^dagger O U(t1,t0) on a dense operator.
  void evolve_dense_operator(Eigen::MatrixXcd& op, double t0, double t1);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpinState evolve_state(const SpinState& psi, const Schedule& schedule);

// Heisenberg picture: solves dO/dt = i[H(t), O], i.e. returns U^dagger op U with
// U = U_1 U_2 ... U_n for segments 1..n. Pauli sums are propagated exactly when every
// segment consists of mutually commuting Pauli terms; otherwise the dense path is used.
OperatorState evolve_operator(const OperatorState& op, const Schedule& schedule);

double operator_norm(const OperatorState& op);
double frobenius_norm(const OperatorState& op);
// (a|b) = tr(a^dagger b) / 2^L
cplx inner(const OperatorState& a, const OperatorState& b);
OperatorState commutator(const OperatorState& a, const OperatorState& b);

OperatorState project_PX(const OperatorState& op, const Region& X);
OperatorState project_Qx(const OperatorState& op, Site x);

// Entries 0..L-1 are (op|Q_i|op); entry L holds the identity component weight.
std::vector<double> right_weight_distribution(const OperatorState& op);

double otoc_weight(const OperatorState& op0, const Schedule& schedule, Site x);

struct GroundStateCorrelation {
  double correlator = 0.0;
  double gap = 0.0;
  double ground_energy = 0.0;
};

GroundStateCorrelation ground_state_correlator(const std::vector<HamiltonianTerm>& H, int num_sites,
                                               const OperatorState& A, const OperatorState& B);

// Compares every pair (i, j) against h / D^alpha, summing term norms over terms whose
// support contains both sites.
EnvelopeReport validate_envelope(const Schedule& schedule, const LatticeGraph& lattice,
                                 const PowerLawEnvelope& envelope);

// Largest |eigenvalue| of a Hermitian operator given by a mat-vec, via Lanczos.
double lanczos_spectral_radius(const std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>& apply,
                               Eigen::Index dim, double tol = 1e-8, int max_iter = 400);

}  // namespace lightcone::spin
