#pragma once

#include <cstdint>
#include <vector>

#include "lightcone/free_walk.hpp"
#include "lightcone/lattice.hpp"

namespace lightcone::transfer {

// One Lemma-style pulse: H = s * sum_{k in A, j in B} iC (|j><k| - |k><j|), s = +1 for
// expansion (A -> A u B) and -1 for the time-reversed contraction (A u B -> A).
struct TransferStage {
  Region A;
  Region B;
  double C = 0.0;
  double theta = 0.0;
  double duration = 0.0;
  bool reverse = false;

  Region input() const;
  Region output() const;
};

struct TransferPlan {
  LatticeGraph lattice = LatticeGraph::chain(1);
  Site origin = 0;
  Site target = 0;
  double alpha = 0.0;
  double h = 1.0;
  std::vector<TransferStage> stages;
  double total_time = 0.0;
  // Sum of the stage bounds with the reference coupling 1/2^{s alpha} and the same site
  // counts; equals total_time for nearest-neighbour legs.
  double reference_time = 0.0;
};

struct CubeSequence {
  int q = 0;
  std::vector<double> sizes;             // a_s = 2^s D / 2^q for s = 1..q
  std::vector<Region> from_origin;       // B_1^(0) .. B_q^(0)
  std::vector<Region> from_target;       // B_1^(x) .. B_q^(x)
};

// q = floor(log2 D) + 1.
int cube_count(int D);

// Nested cubes for an axis-aligned displacement with D > 2. The cubes open away from the
// endpoints along the transfer axis and towards whichever side fits on the other axes.
CubeSequence cube_sequence(const LatticeGraph& lattice, Site origin, Site x);

// Path of nearest-neighbour pulses, axis by axis; each pulse lasts pi / (2h).
TransferPlan nearest_neighbor_plan(const LatticeGraph& lattice, Site origin, Site target, double h = 1.0);

// theta / (C sqrt(|A||B|)).
double pulse_duration(std::size_t nA, std::size_t nB, double theta, double C);

struct Pulse {
  free::HoppingMatrix H;
  double duration = 0.0;
};

// Pulse taking the uniform state on A to cos(theta)|A> + sin(theta)|B>. Throws when A and
// B overlap or when C exceeds the envelope on some A x B pair.
Pulse superposition_pulse(const LatticeGraph& lattice, const Region& A, const Region& B, double theta, double C,
                          PowerLawEnvelope envelope);

// Cube-doubling plan for alpha < d + 1 (nearest-neighbour plan otherwise, or when
// D <= 2). Off-axis targets are reached in one leg per axis. Stage couplings are the
// exact minimum envelope value over each stage's A x B pairs.
TransferPlan build_transfer_plan(const LatticeGraph& lattice, Site origin, Site x, double alpha, double h = 1.0);

// Smallest hypercube lattice holding an axis-aligned transfer of length D in d dimensions,
// with the origin at the corner.
LatticeGraph transfer_lattice(int d, int D);

// Closed-form timing bound (2^{d+1} pi / sqrt(2^d - 1)) (2^{(q+1)(alpha-d)} - 1)/(2^{alpha-d} - 1)
// for alpha != d and (2^d pi / sqrt(2^d - 1)) (1 + ln D) at alpha = d; (pi / 2h) D for the
// nearest-neighbour regime.
double transfer_time_bound(int d, double alpha, int D, double h = 1.0);

free::SingleParticleHamiltonian plan_hamiltonian(const TransferPlan& plan);
free::SingleParticleHamiltonian stage_hamiltonian(const TransferPlan& plan, std::size_t first, std::size_t last);

// |<target|U|origin>|^2 after the first `num_stages` stages (all by default).
double fidelity(const TransferPlan& plan);
free::WaveFunction run_stages(const TransferPlan& plan, std::size_t num_stages);

enum class NoiseDistribution { uniform, gaussian };

struct NoiseModel {
  double epsilon = 0.0;
  NoiseDistribution distribution = NoiseDistribution::uniform;  // uniform on [-1, 1] or standard normal
  std::uint64_t seed = 0;
};

struct NoiseStats {
  int samples = 0;
  double mean_infidelity = 0.0;
  double max_infidelity = 0.0;
  double median_infidelity = 0.0;
  double p95_infidelity = 0.0;
  double min_fidelity = 1.0;
};

// Each pulse coefficient <j|H|k> is multiplied by (1 + epsilon xi) with i.i.d. xi; sample
// k uses seed + k. Durations are left unchanged.
double noisy_fidelity(const TransferPlan& plan, const NoiseModel& noise, std::uint64_t sample_seed);
NoiseStats robustness_mc(const TransferPlan& plan, const NoiseModel& noise, int samples);

}  // namespace lightcone::transfer
