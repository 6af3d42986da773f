#include "lightcone/lr_protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lightcone::protocols {

using spin::HamiltonianTerm;
using spin::OperatorState;
using spin::Schedule;
using spin::Segment;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int third_of(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("t must be non-negative");
  const double ell = std::round(t / 3.0);
  if (std::abs(t / 3.0 - ell) > 1e-9) throw std::invalid_argument("t/3 must be an integer");
  return static_cast<int>(ell);
}

// Merge segments that run side by side (same duration, disjoint sites).
void overlay(std::vector<Segment>& into, const std::vector<Segment>& extra) {
  if (into.size() < extra.size()) into.resize(extra.size(), Segment{1.0, {}});
  for (std::size_t k = 0; k < extra.size(); ++k)
    into[k].terms.insert(into[k].terms.end(), extra[k].terms.begin(), extra[k].terms.end());
}

Segment zz_segment(const Region& a, const Region& b, double coupling, double duration) {
  Segment seg{duration, {}};
  for (Site i : a)
    for (Site j : b) seg.terms.push_back(HamiltonianTerm::from_pauli("ZZ", {i, j}, coupling));
  return seg;
}

}  // namespace

std::vector<std::vector<std::pair<Site, Site>>> bfs_shells(const LatticeGraph& lattice, Site root,
                                                           const Region& region) {
  if (!region.contains(root)) throw std::invalid_argument("root outside region");
  std::vector<std::vector<std::pair<Site, Site>>> shells;
  std::vector<int> depth(static_cast<std::size_t>(lattice.num_sites()), -1);
  depth[static_cast<std::size_t>(root)] = 0;
  std::vector<Site> frontier{root};
  while (true) {
    std::vector<std::pair<Site, Site>> edges;
    std::vector<Site> next;
    for (Site p : frontier)
      for (Site c : lattice.neighbors(p)) {
        if (!region.contains(c) || depth[static_cast<std::size_t>(c)] >= 0) continue;
        depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(p)] + 1;
        edges.emplace_back(p, c);
        next.push_back(c);
      }
    if (edges.empty()) break;
    shells.push_back(std::move(edges));
    frontier = std::move(next);
  }
  return shells;
}

std::vector<Segment> cascade_segments(const std::vector<std::vector<std::pair<Site, Site>>>& shells,
                                      bool spread_x) {
  constexpr double q = std::numbers::pi / 4.0;
  std::vector<Segment> out;
  for (const auto& shell : shells) {
    Segment seg{1.0, {}};
    for (auto [parent, child] : shell) {
      const Site c = spread_x ? parent : child;
      const Site t = spread_x ? child : parent;
      seg.terms.push_back(HamiltonianTerm::from_pauli("Z", {c}, q));
      seg.terms.push_back(HamiltonianTerm::from_pauli("X", {t}, q));
      seg.terms.push_back(HamiltonianTerm::from_pauli("ZX", {c, t}, -q));
    }
    out.push_back(std::move(seg));
  }
  return out;
}

SpreadingBuild build_spreading_protocol(int r, double t, double alpha, int d, double h) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (h < std::numbers::pi / 4.0) throw std::invalid_argument("h below the unit-time CNOT strength pi/4");
  const int ell = third_of(t);
  if (2 * ell >= r) throw std::invalid_argument("geometry: ell must be below r/2");

  SpreadingProtocol p;
  p.d = d;
  p.alpha = alpha;
  p.h = h;
  p.t = t;
  p.r = r;
  p.ell = ell;
  std::vector<int> ext(static_cast<std::size_t>(d), 2 * ell + 1);
  ext[0] = r + 2 * ell + 1;
  p.lattice = LatticeGraph(ext);
  std::vector<int> c(static_cast<std::size_t>(d), ell);
  p.origin = p.lattice.index(c);
  c[0] = ell + r;
  p.target = p.lattice.index(c);
  p.ball_origin = ball(p.lattice, p.origin, ell);
  p.ball_target = ball(p.lattice, p.target, ell);
  p.V = static_cast<std::int64_t>(p.ball_origin.size());
  const double J = h / std::pow(2.0 * r, alpha);
  p.tau = J * ell;

  Schedule s{p.lattice.num_sites(), {}};
  for (auto& seg : cascade_segments(bfs_shells(p.lattice, p.origin, p.ball_origin), true)) s.append(std::move(seg));
  if (ell > 0) s.append(zz_segment(p.ball_origin, p.ball_target, J, ell));
  Schedule step3{s.num_sites, cascade_segments(bfs_shells(p.lattice, p.target, p.ball_target), true)};
  s.append(step3.inverse());
  return {std::move(s), std::move(p)};
}

double commutator_lower_bound(double t, int r, double alpha, int d) {
  if (!(t >= 3.0)) throw std::domain_error("lower bound needs t >= 3");
  const auto ell = static_cast<std::int64_t>(std::floor(t / 3.0));
  const double V = static_cast<double>(ball_volume(d, ell));
  const double tau = t / (3.0 * std::pow(2.0 * r, alpha));
  if (V * V * tau >= 0.5) throw std::domain_error("V^2 tau >= 1/2: bound not guaranteed");
  return std::pow(t, 2 * d + 1) / (std::pow(3.0, 1 + 2 * d) * std::pow(2.0, 1.0 + alpha) * std::pow(r, alpha));
}

cplx matrix_element_a(double tau, std::int64_t V) {
  if (V < 1) throw std::invalid_argument("V must be >= 1");
  const double s = std::sin(2.0 * tau * V), c = std::cos(2.0 * tau * V);
  cplx sum = 0.0;
  double binom = 1.0;  // C(V, k)
  cplx ik = 1.0;
  for (std::int64_t k = 0; k <= V; ++k) {
    if (k % 2 == 1) sum += binom * ik * std::pow(s, k) * std::pow(c, V - k);
    binom = binom * static_cast<double>(V - k) / static_cast<double>(k + 1);
    ik *= cplx(0.0, 1.0);
  }
  return -2.0 * sum;
}

double spreading_norm_closed_form(double tau, std::int64_t V) {
  double best = 0.0;
  for (std::int64_t a = V; a >= 0; a -= 2)
    for (std::int64_t b = V; b >= 0; b -= 2)
      best = std::max(best, std::abs(std::sin(2.0 * tau * static_cast<double>(a) * static_cast<double>(b))));
  return 2.0 * best;
}

double simulate_spreading_norm(const SpreadingBuild& build, SimulationPath path) {
  const auto& p = build.protocol;
  const int L = p.lattice.num_sites();
  if (path == SimulationPath::pauli && L > spin::kMaxPauliSites)
    throw std::length_error("lattice exceeds the Pauli-string site limit");
  if (path == SimulationPath::dense && L > spin::kMaxDenseOperatorSites)
    throw std::length_error("lattice exceeds the dense operator cap");
  OperatorState x0 = OperatorState::single(L, p.origin, 'X');
  OperatorState xr = OperatorState::single(L, p.target, 'X');
  if (path == SimulationPath::dense) {
    x0 = x0.as_dense();
    xr = xr.as_dense();
  }
  const OperatorState xt = spin::evolve_operator(x0, build.schedule);
  return spin::operator_norm(spin::commutator(xt, xr));
}

SpreadingResult run_spreading_experiment(const SpreadingBuild& build) {
  const auto& p = build.protocol;
  SpreadingResult res;
  res.closed_form = p.ell == 0 ? 0.0 : spreading_norm_closed_form(p.tau, p.V);
  if (2 * p.V <= spin::kMaxDenseOperatorSites && p.lattice.num_sites() <= spin::kMaxPauliSites) {
    res.exact_norm = simulate_spreading_norm(build, SimulationPath::pauli);
    res.simulated = true;
  } else {
    res.exact_norm = res.closed_form;
  }
  res.lower_bound = kNaN;
  if (p.t >= 3.0 && p.epsilon() < 0.5) res.lower_bound = commutator_lower_bound(p.t, p.r, p.alpha, p.d);
  return res;
}

Schedule connected_correlator_schedule(const SpreadingProtocol& p) {
  std::vector<Segment> step1 = cascade_segments(bfs_shells(p.lattice, p.origin, p.ball_origin), true);
  overlay(step1, cascade_segments(bfs_shells(p.lattice, p.target, p.ball_target), false));
  Schedule s{p.lattice.num_sites(), {}};
  for (auto& seg : step1) s.append(std::move(seg));
  if (p.ell > 0) {
    s.append(zz_segment(p.ball_origin, p.ball_target, -p.tau / p.ell, p.ell));
    s.append(Segment{static_cast<double>(p.ell), {}});
  }
  return s;
}

double connected_correlator_closed_form(double tau, std::int64_t V) {
  const double c = std::cos(2.0 * tau * V), s = std::sin(2.0 * tau * V);
  const double v = static_cast<double>(V);
  const cplx val = cplx(0.0, 0.5) * (std::pow(cplx(c, -s), v) - std::pow(cplx(c, s), v));
  return val.real();
}

double connected_correlator_lower_bound(double t, int r, double alpha, int d) {
  return std::pow(t, 2 * d + 1) / (std::pow(3.0, 1 + 2 * d) * std::pow(2.0, 2.0 + alpha) * std::pow(r, alpha));
}

double simulate_connected_correlator(const SpreadingProtocol& p) {
  const int L = p.lattice.num_sites();
  if (L > spin::kMaxStateSites) throw std::length_error("lattice exceeds the state-vector cap");
  std::uint64_t mb = 0, mt = 0;
  for (Site s : p.ball_origin) mb |= 1ull << s;
  for (Site s : p.ball_target) mt |= 1ull << s;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  const cplx i(0.0, 1.0);
  psi[0] = 0.5;
  psi[static_cast<Eigen::Index>(mt)] = 0.5 * i;
  psi[static_cast<Eigen::Index>(mb)] = 0.5 * i;
  psi[static_cast<Eigen::Index>(mb | mt)] = -0.5;

  // <psi| W^dagger O W |psi> with W = U_1 U_2 U_3: run the segments last-first on the state.
  Schedule s = connected_correlator_schedule(p);
  std::reverse(s.segments.begin(), s.segments.end());
  if (!s.segments.empty()) {
    spin::Evolver ev(s);
    ev.evolve_state(psi, 0.0, s.total_duration());
  }

  const std::uint64_t bx = 1ull << p.origin, by = 1ull << p.target;
  cplx zx = 0.0, x = 0.0;
  double z = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const double sy = (ub & by) ? -1.0 : 1.0;
    const cplx flipped = psi[static_cast<Eigen::Index>(ub ^ bx)];
    x += std::conj(psi[b]) * flipped;
    zx += std::conj(psi[b]) * sy * flipped;
    z += sy * std::norm(psi[b]);
  }
  return zx.real() - z * x.real();
}

CorrelatorResult connected_correlator_experiment(double t, int r, double alpha, int d, double h) {
  SpreadingBuild b = build_spreading_protocol(r, t, alpha, d, h);
  if (b.protocol.V % 2 == 0) throw std::invalid_argument("ball volume must be odd");
  CorrelatorResult res;
  res.protocol = b.protocol;
  res.closed_form = connected_correlator_closed_form(b.protocol.tau, b.protocol.V);
  res.simulated = b.protocol.lattice.num_sites() <= spin::kMaxStateSites ? simulate_connected_correlator(b.protocol)
                                                                         : kNaN;
  res.lower_bound = b.protocol.epsilon() < 0.5 ? connected_correlator_lower_bound(t, r, alpha, d) : kNaN;
  return res;
}

}  // namespace lightcone::protocols
