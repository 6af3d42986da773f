#include "lightcone/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace lightcone::transfer {

using free::HoppingMatrix;
using free::Hop;
using free::SingleParticleHamiltonian;
using free::WaveFunction;
using cplx = std::complex<double>;

Region TransferStage::input() const { return reverse ? A.united(B) : A; }

Region TransferStage::output() const { return reverse ? A : A.united(B); }

int cube_count(int D) {
  if (D < 1) throw std::invalid_argument("cube_count needs D >= 1");
  return static_cast<int>(std::floor(std::log2(static_cast<double>(D)))) + 1;
}

namespace {

// Sites c + sum_i sigma_i m_i e_i with 0 <= m_i <= floor(a).
Region cube(const LatticeGraph& lattice, const std::vector<int>& corner, const std::vector<int>& sigma, double a) {
  const int d = lattice.dimension();
  const int side = static_cast<int>(std::floor(a + 1e-9));
  std::vector<Site> sites;
  std::vector<int> m(static_cast<std::size_t>(d), 0), c(static_cast<std::size_t>(d));
  while (true) {
    for (int i = 0; i < d; ++i) c[static_cast<std::size_t>(i)] = corner[static_cast<std::size_t>(i)] + sigma[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
    if (!lattice.contains(c)) throw std::length_error("lattice too small for the cube sequence");
    sites.push_back(lattice.index(c));
    int k = d - 1;
    while (k >= 0 && m[static_cast<std::size_t>(k)] == side) m[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
    ++m[static_cast<std::size_t>(k)];
  }
  return Region(std::move(sites));
}

// Single axis along which origin and x differ, or -1.
int transfer_axis(const std::vector<int>& a, const std::vector<int>& b) {
  int axis = -1;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) {
      if (axis >= 0) return -2;
      axis = static_cast<int>(i);
    }
  return axis;
}

double min_pair_envelope(const LatticeGraph& lattice, const Region& A, const Region& B, PowerLawEnvelope env) {
  return env.at_distance(std::max(max_distance(lattice, A, B), 1));
}

void append_stage(TransferPlan& plan, TransferStage st, double reference_C) {
  plan.total_time += st.duration;
  plan.reference_time += pulse_duration(st.A.size(), st.B.size(), st.theta, reference_C);
  plan.stages.push_back(std::move(st));
}

void append_nn_leg(TransferPlan& plan, Site from, Site to) {
  const auto& lat = plan.lattice;
  auto cur = lat.coordinates(from);
  const auto dst = lat.coordinates(to);
  for (std::size_t ax = 0; ax < cur.size(); ++ax) {
    while (cur[ax] != dst[ax]) {
      const Site prev = lat.index(cur);
      cur[ax] += dst[ax] > cur[ax] ? 1 : -1;
      TransferStage st;
      st.A = Region({prev});
      st.B = Region({lat.index(cur)});
      st.C = plan.h;
      st.theta = std::numbers::pi / 2;
      st.duration = pulse_duration(1, 1, st.theta, st.C);
      append_stage(plan, std::move(st), plan.h);
    }
  }
}

void append_cube_leg(TransferPlan& plan, Site from, Site to) {
  const auto cs = cube_sequence(plan.lattice, from, to);
  const PowerLawEnvelope env{plan.alpha, plan.h};
  const auto make = [&](const Region& inner, const Region& outer, int s, bool reverse) {
    TransferStage st;
    st.A = inner;
    st.B = outer.minus(inner);
    st.C = min_pair_envelope(plan.lattice, st.A, st.B, env);
    st.theta = std::acos(std::sqrt(static_cast<double>(st.A.size()) / static_cast<double>(outer.size())));
    st.duration = pulse_duration(st.A.size(), st.B.size(), st.theta, st.C);
    st.reverse = reverse;
    append_stage(plan, std::move(st), plan.h * std::pow(2.0, -s * plan.alpha));
  };
  for (int s = 1; s <= cs.q; ++s) {
    const Region inner = s == 1 ? Region({from}) : cs.from_origin[static_cast<std::size_t>(s - 2)];
    make(inner, cs.from_origin[static_cast<std::size_t>(s - 1)], s, false);
  }
  for (int s = cs.q; s >= 1; --s) {
    const Region inner = s == 1 ? Region({to}) : cs.from_target[static_cast<std::size_t>(s - 2)];
    make(inner, cs.from_target[static_cast<std::size_t>(s - 1)], s, true);
  }
}

}  // namespace

CubeSequence cube_sequence(const LatticeGraph& lattice, Site origin, Site x) {
  const auto o = lattice.coordinates(origin);
  const auto t = lattice.coordinates(x);
  const int axis = transfer_axis(o, t);
  if (axis < 0) throw std::invalid_argument("cube_sequence needs an axis-aligned displacement");
  const int D = std::abs(t[static_cast<std::size_t>(axis)] - o[static_cast<std::size_t>(axis)]);
  if (D <= 2) throw std::domain_error("cube_sequence needs D > 2; use the nearest-neighbour plan");
  const int d = lattice.dimension();
  std::vector<int> sigma_o(static_cast<std::size_t>(d)), sigma_x(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (i == axis) {
      sigma_o[ui] = t[ui] > o[ui] ? 1 : -1;
      sigma_x[ui] = -sigma_o[ui];
    } else {
      const bool up = o[ui] + D < lattice.extents()[ui];
      const bool down = o[ui] - D >= 0;
      if (!up && !down) throw std::length_error("lattice too small for the cube sequence");
      sigma_o[ui] = sigma_x[ui] = up ? 1 : -1;
    }
  }
  CubeSequence cs;
  cs.q = cube_count(D);
  for (int s = 1; s <= cs.q; ++s) {
    const double a = std::ldexp(static_cast<double>(D), s - cs.q);
    cs.sizes.push_back(a);
    cs.from_origin.push_back(cube(lattice, o, sigma_o, a));
    cs.from_target.push_back(cube(lattice, t, sigma_x, a));
  }
  return cs;
}

double pulse_duration(std::size_t nA, std::size_t nB, double theta, double C) {
  if (nA == 0 || nB == 0) throw std::invalid_argument("pulse regions must be nonempty");
  if (!(C > 0.0)) throw std::invalid_argument("pulse coupling must be positive");
  return std::abs(theta) / (C * std::sqrt(static_cast<double>(nA) * static_cast<double>(nB)));
}

Pulse superposition_pulse(const LatticeGraph& lattice, const Region& A, const Region& B, double theta, double C,
                          PowerLawEnvelope envelope) {
  if (!A.disjoint_from(B)) throw std::invalid_argument("pulse regions overlap");
  if (std::abs(theta) > std::numbers::pi / 2) throw std::invalid_argument("pulse angle must lie in [-pi/2, pi/2]");
  if (C > min_pair_envelope(lattice, A, B, envelope) * (1.0 + 1e-12))
    throw std::invalid_argument("pulse coupling exceeds the envelope");
  const double sgn = std::tan(theta) < 0.0 ? -1.0 : 1.0;
  std::vector<Hop> hops;
  hops.reserve(A.size() * B.size());
  for (Site k : A)
    for (Site j : B) hops.push_back({j, k, cplx(0.0, sgn * C)});
  return {HoppingMatrix::from_hops(lattice.num_sites(), hops), pulse_duration(A.size(), B.size(), theta, C)};
}

TransferPlan nearest_neighbor_plan(const LatticeGraph& lattice, Site origin, Site target, double h) {
  if (origin == target) throw std::invalid_argument("origin equals target");
  if (!lattice.valid(origin) || !lattice.valid(target)) throw std::out_of_range("site outside lattice");
  TransferPlan plan;
  plan.lattice = lattice;
  plan.origin = origin;
  plan.target = target;
  plan.h = h;
  plan.alpha = std::numeric_limits<double>::infinity();
  append_nn_leg(plan, origin, target);
  return plan;
}

TransferPlan build_transfer_plan(const LatticeGraph& lattice, Site origin, Site x, double alpha, double h) {
  if (!lattice.valid(origin) || !lattice.valid(x)) throw std::out_of_range("site outside lattice");
  if (origin == x) throw std::invalid_argument("origin equals target");
  TransferPlan plan;
  plan.lattice = lattice;
  plan.origin = origin;
  plan.target = x;
  plan.alpha = alpha;
  plan.h = h;
  const int d = lattice.dimension();
  auto cur = lattice.coordinates(origin);
  const auto dst = lattice.coordinates(x);
  for (int ax = 0; ax < d; ++ax) {
    const auto ua = static_cast<std::size_t>(ax);
    if (cur[ua] == dst[ua]) continue;
    const Site from = lattice.index(cur);
    const int D = std::abs(dst[ua] - cur[ua]);
    cur[ua] = dst[ua];
    const Site to = lattice.index(cur);
    if (alpha >= d + 1 || D <= 2) append_nn_leg(plan, from, to);
    else append_cube_leg(plan, from, to);
  }
  return plan;
}

LatticeGraph transfer_lattice(int d, int D) {
  if (d < 1 || D < 1) throw std::invalid_argument("transfer_lattice needs d >= 1 and D >= 1");
  return LatticeGraph(std::vector<int>(static_cast<std::size_t>(d), D + 1));
}

double transfer_time_bound(int d, double alpha, int D, double h) {
  if (alpha >= d + 1 || D <= 2) return std::numbers::pi / (2.0 * h) * D;
  const double pre = std::pow(2.0, d) * std::numbers::pi / std::sqrt(std::pow(2.0, d) - 1.0) / h;
  if (alpha == d) return pre * (1.0 + std::log(static_cast<double>(D)));
  const int q = cube_count(D);
  const double r = std::pow(2.0, alpha - d);
  return 2.0 * pre * (std::pow(r, q + 1) - 1.0) / (r - 1.0);
}

SingleParticleHamiltonian stage_hamiltonian(const TransferPlan& plan, std::size_t first, std::size_t last) {
  SingleParticleHamiltonian H;
  H.lattice = plan.lattice;
  for (std::size_t k = first; k < last && k < plan.stages.size(); ++k) {
    const auto& st = plan.stages[k];
    std::vector<Hop> hops;
    hops.reserve(st.A.size() * st.B.size());
    const double s = st.reverse ? -1.0 : 1.0;
    for (Site a : st.A)
      for (Site b : st.B) hops.push_back({b, a, cplx(0.0, s * st.C)});
    H.segments.push_back({st.duration, HoppingMatrix::from_hops(plan.lattice.num_sites(), hops)});
  }
  return H;
}

SingleParticleHamiltonian plan_hamiltonian(const TransferPlan& plan) {
  return stage_hamiltonian(plan, 0, plan.stages.size());
}

WaveFunction run_stages(const TransferPlan& plan, std::size_t num_stages) {
  const auto H = stage_hamiltonian(plan, 0, num_stages);
  return free::evolve_sp(free::basis_state(plan.lattice.num_sites(), plan.origin), H, H.total_duration());
}

double fidelity(const TransferPlan& plan) {
  if (plan.stages.empty()) return plan.origin == plan.target ? 1.0 : 0.0;
  return std::norm(run_stages(plan, plan.stages.size())[plan.target]);
}

double noisy_fidelity(const TransferPlan& plan, const NoiseModel& noise, std::uint64_t sample_seed) {
  std::mt19937_64 rng(sample_seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto xi = [&] { return noise.distribution == NoiseDistribution::uniform ? uni(rng) : gauss(rng); };
  SingleParticleHamiltonian H;
  H.lattice = plan.lattice;
  for (const auto& st : plan.stages) {
    std::vector<Hop> hops;
    hops.reserve(st.A.size() * st.B.size());
    const double s = st.reverse ? -1.0 : 1.0;
    for (Site a : st.A)
      for (Site b : st.B) hops.push_back({b, a, cplx(0.0, s * st.C * (1.0 + noise.epsilon * xi()))});
    H.segments.push_back({st.duration, HoppingMatrix::from_hops(plan.lattice.num_sites(), hops)});
  }
  const auto out = free::evolve_sp(free::basis_state(plan.lattice.num_sites(), plan.origin), H, H.total_duration());
  return std::norm(out[plan.target]);
}

NoiseStats robustness_mc(const TransferPlan& plan, const NoiseModel& noise, int samples) {
  if (samples < 1) throw std::invalid_argument("robustness_mc needs at least one sample");
  if (!(noise.epsilon >= 0.0)) throw std::invalid_argument("noise epsilon must be nonnegative");
  std::vector<double> inf;
  inf.reserve(static_cast<std::size_t>(samples));
  NoiseStats st;
  st.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const double F = noisy_fidelity(plan, noise, noise.seed + static_cast<std::uint64_t>(k));
    st.min_fidelity = std::min(st.min_fidelity, F);
    inf.push_back(1.0 - F);
  }
  for (double v : inf) st.mean_infidelity += v;
  st.mean_infidelity /= samples;
  std::sort(inf.begin(), inf.end());
  const auto quantile = [&](double p) {
    const double pos = p * (samples - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, inf.size() - 1);
    return inf[lo] + (pos - static_cast<double>(lo)) * (inf[hi] - inf[lo]);
  };
  st.median_infidelity = quantile(0.5);
  st.p95_infidelity = quantile(0.95);
  st.max_infidelity = inf.back();
  return st;
}

}  // namespace lightcone::transfer
