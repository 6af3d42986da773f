#pragma once

#include <cstdint>
#include <vector>

#include "lightcone/free_walk.hpp"
#include "lightcone/lattice.hpp"

namespace lightcone::boson {

inline constexpr int kMaxOracleBosons = 3;
inline constexpr int kMaxOracleSites = 200;
inline constexpr std::int64_t kMaxSamplerSites = 1 << 22;

struct BosonConfig {
  int N = 1;
  double beta_density = 1.0;
  LatticeGraph lattice = LatticeGraph::chain(1);
  std::vector<Site> initial;   // j_1 .. j_N
  int spacing = 1;             // 2 L_gap, per axis
  double L_gap = 0.0;
  std::vector<Region> balls;   // disjoint truncation regions, one per boson
};

// Hypercube with side ceil(N^beta)^{1/d} (rounded up per axis, so M can exceed N^beta)
// and bosons on a sub-grid with per-axis spacing floor(side / ceil(N^{1/d})). Each boson's
// truncation region is its ball of radius L_gap = spacing / 2, with sites equidistant to two
// bosons given to the lower index; a single boson owns the whole lattice.
BosonConfig build_initial(int N, double beta_density, int d);

// Uniform h / D^alpha hopping on the config lattice.
free::SingleParticleHamiltonian power_law_hamiltonian(const BosonConfig& config, double alpha, double h = 1.0);

struct SampleResult {
  std::vector<Site> positions;  // one per boson, in boson order
  std::uint64_t seed = 0;
  double t = 0.0;
};

// |<y| U_k(t) |j_k>|^2 over the lattice, U_k generated by the hoppings inside boson k's region.
std::vector<double> truncated_marginal(const BosonConfig& config, const free::SingleParticleHamiltonian& H, int k,
                                       double t);

// One independent draw per boson by cumulative inversion of its truncated marginal.
SampleResult sample_positions(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t,
                              std::uint64_t seed);
// `draws` samples from one generator stream seeded with `seed`.
std::vector<SampleResult> sample_many(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t,
                                      int draws, std::uint64_t seed);

// L_gap^{(alpha - d - epsilon)/3} N^{-5/3}, proportionality constant 1.
double easiness_time(double L_gap, int N, double alpha, int d, double epsilon = 0.1);
double easiness_time(int N, double beta_density, double alpha, int d, double epsilon = 0.1);

// Sorted output sites (a multiset).
using Outcome = std::vector<Site>;

struct OutcomeProbability {
  Outcome sites;
  double p = 0.0;
};

// Permanent of a square matrix of size <= 3 by direct expansion.
std::complex<double> permanent(const Eigen::MatrixXcd& m);

// |Perm(U[y, j])|^2 / prod_y n_y! over every multiset of N output sites, from the untruncated
// propagator. Requires N <= 3 and M <= 200.
std::vector<OutcomeProbability> exact_few_boson_distribution(const BosonConfig& config,
                                                             const free::SingleParticleHamiltonian& H, double t);

// Total-variation distance between the factored sampler's exact distribution and the
// permanent oracle.
double sampler_tvd(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t);
// Same comparison using the empirical distribution of `draws` samples.
double empirical_tvd(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t, int draws,
                     std::uint64_t seed);

}  // namespace lightcone::boson
