#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lightcone/lr_protocols.hpp"

namespace lightcone::protocols {

using spin::HamiltonianTerm;
using spin::Schedule;
using spin::Segment;
using Eigen::MatrixXcd;

namespace {

constexpr double kPi = std::numbers::pi;

MatrixXcd hadamard_sdag() {
  const cplx i(0.0, 1.0);
  MatrixXcd H(2, 2), Sd(2, 2);
  H << 1, 1, 1, -1;
  H /= std::sqrt(2.0);
  Sd << 1, 0, 0, -i;
  return H * Sd;
}

MatrixXcd hadamard() {
  MatrixXcd H(2, 2);
  H << 1, 1, 1, -1;
  return H / std::sqrt(2.0);
}

// Integer points of Z^d with |x|_1 <= radius.
std::vector<std::vector<int>> l1_ball_points(int d, int radius) {
  std::vector<std::vector<int>> out;
  std::vector<int> x(static_cast<std::size_t>(d), -radius);
  while (true) {
    int n = 0;
    for (int v : x) n += std::abs(v);
    if (n <= radius) out.push_back(x);
    int k = 0;
    while (k < d && x[static_cast<std::size_t>(k)] == radius) x[static_cast<std::size_t>(k++)] = -radius;
    if (k == d) break;
    ++x[static_cast<std::size_t>(k)];
  }
  return out;
}

// Radii of the doubling stages 0 -> 1 -> 3 -> ... capped at ell.
std::vector<int> stage_radii(int ell) {
  std::vector<int> rho{0};
  while (rho.back() < ell) rho.push_back(std::min(2 * rho.back() + 1, ell));
  return rho;
}

// Duration of one fan-out stage from radius rho to rho2 on an unbounded lattice: the
// slowest new site sets it, pi / (4 sum_c h D(c, t)^-alpha).
double stage_time(int d, int rho, int rho2, double alpha, double h) {
  double weakest = std::numeric_limits<double>::infinity();
  if (d == 1) {
    // In one dimension the farthest site collects the least coupling.
    double s = 0.0;
    for (int m = rho2 - rho; m <= rho2 + rho; ++m) s += std::pow(m, -alpha);
    weakest = s;
  } else {
    const auto inner = l1_ball_points(d, rho);
    for (const auto& t : l1_ball_points(d, rho2)) {
      int nt = 0;
      for (int v : t) nt += std::abs(v);
      if (nt <= rho) continue;
      double s = 0.0;
      for (const auto& c : inner) {
        int D = 0;
        for (int k = 0; k < d; ++k) D += std::abs(t[static_cast<std::size_t>(k)] - c[static_cast<std::size_t>(k)]);
        s += std::pow(D, -alpha);
      }
      weakest = std::min(weakest, s);
    }
  }
  return kPi / (4.0 * h * weakest);
}

double prep_time(int d, int ell, double alpha, double h, GhzMode mode) {
  if (mode == GhzMode::plain) return ell;
  const auto rho = stage_radii(ell);
  double T = 0.0;
  for (std::size_t k = 1; k < rho.size(); ++k) T += stage_time(d, rho[k - 1], rho[k], alpha, h);
  return T;
}

// Collective fan-out: every site of the current GHZ ball drives each new site with
// Z_c X_t, plus a compensating X_t field, so a new site flips only on the |1..1> branch.
// The branch picks up i per flipped site; a Z rotation on the center removes it.
std::vector<Segment> boosted_prep(const LatticeGraph& lattice, Site center, int ell, double alpha, double h) {
  std::vector<Segment> out;
  const auto rho = stage_radii(ell);
  for (std::size_t k = 1; k < rho.size(); ++k) {
    const Region inner = ball(lattice, center, rho[k - 1]);
    const Region fresh = ball(lattice, center, rho[k]).minus(inner);
    if (fresh.empty()) continue;
    std::vector<double> reach;
    for (Site t : fresh) {
      double s = 0.0;
      for (Site c : inner) s += h * std::pow(lattice.distance(c, t), -alpha);
      reach.push_back(s);
    }
    double T = 0.0;
    for (double s : reach) T = std::max(T, kPi / (4.0 * s));
    Segment seg{T, {}};
    std::size_t idx = 0;
    for (Site t : fresh) {
      const double kappa = kPi / (4.0 * reach[idx++] * T);
      for (Site c : inner)
        seg.terms.push_back(
            HamiltonianTerm::from_pauli("ZX", {c, t}, kappa * h * std::pow(lattice.distance(c, t), -alpha)));
      seg.terms.push_back(HamiltonianTerm::from_pauli("X", {t}, -kPi / (4.0 * T)));
    }
    const double phi = static_cast<double>(fresh.size() % 4) * kPi / 4.0;
    if (phi != 0.0) seg.terms.push_back(HamiltonianTerm::from_pauli("Z", {center}, -phi / T));
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Segment> prep_segments(const LatticeGraph& lattice, Site center, const Region& region, int ell,
                                   double alpha, double h, GhzMode mode) {
  if (mode == GhzMode::plain) return cascade_segments(bfs_shells(lattice, center, region), true);
  return boosted_prep(lattice, center, ell, alpha, h);
}

// a|0>_o + b|1>_o  ->  a|0>_o|0>_f + b|1>_o|1>_f (up to a global phase).
Schedule pair_encoding(const LatticeGraph& lattice, Site o, Site f, int ell, double alpha, double h, GhzMode mode,
                       double& coupling, double& link_time) {
  const int L = lattice.num_sites();
  const Region bo = ball(lattice, o, ell), bf = ball(lattice, f, ell);
  const auto prep_o = prep_segments(lattice, o, bo, ell, alpha, h, mode);
  const auto prep_f = prep_segments(lattice, f, bf, ell, alpha, h, mode);

  Schedule s{L, {}};
  for (const auto& seg : prep_o) s.append(seg);
  s.append(Segment{1.0, {HamiltonianTerm::from_matrix({f}, unitary_generator(hadamard(), 1.0))}});
  for (const auto& seg : prep_f) s.append(seg);

  const double V = static_cast<double>(bo.size()), Vf = static_cast<double>(bf.size());
  coupling = h / std::pow(max_distance(lattice, bo, bf), alpha);
  link_time = kPi / (4.0 * coupling * V * Vf);
  Segment link{link_time, {}};
  for (Site i : bo)
    for (Site j : bf) link.terms.push_back(HamiltonianTerm::from_pauli("ZZ", {i, j}, coupling));
  s.append(std::move(link));

  s.append(Schedule{L, prep_f}.inverse());
  s.append(Segment{1.0,
                   {HamiltonianTerm::from_matrix({f}, unitary_generator(hadamard_sdag(), 1.0)),
                    HamiltonianTerm::from_pauli("Z", {o}, -kPi / 4.0)}});
  s.append(Schedule{L, prep_o}.inverse());
  return s;
}

}  // namespace

MatrixXcd unitary_generator(const MatrixXcd& U, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  Eigen::ComplexSchur<MatrixXcd> schur(U);
  const MatrixXcd& T = schur.matrixT();
  const MatrixXcd& Q = schur.matrixU();
  const double off = (T - MatrixXcd(T.diagonal().asDiagonal())).norm();
  if (off > 1e-10 * std::max(1.0, T.norm())) throw std::invalid_argument("matrix is not normal");
  Eigen::VectorXcd phases(T.rows());
  for (Eigen::Index k = 0; k < T.rows(); ++k) {
    if (std::abs(std::abs(T(k, k)) - 1.0) > 1e-10) throw std::invalid_argument("matrix is not unitary");
    phases[k] = -std::arg(T(k, k)) / duration;
  }
  MatrixXcd H = Q * phases.asDiagonal() * Q.adjoint();
  return 0.5 * (H + H.adjoint());
}

double ghz_transfer_duration(int r, double alpha, int d, GhzMode mode, int ell, double h) {
  if (ell < 0 || 2 * ell >= r) throw std::invalid_argument("need 0 <= 2 ell < r");
  const double V = static_cast<double>(ball_volume(d, ell));
  const double link = kPi * std::pow(r + 2.0 * ell, alpha) / (4.0 * h * V * V);
  return 2.0 * (4.0 * prep_time(d, ell, alpha, h, mode) + 2.0 + link);
}

int ghz_optimal_ell(int r, double alpha, int d, GhzMode mode, double h) {
  int best = 0;
  double best_T = std::numeric_limits<double>::infinity();
  for (int ell = 0; 2 * ell < r; ++ell) {
    const double T = ghz_transfer_duration(r, alpha, d, mode, ell, h);
    if (T < best_T) {
      best_T = T;
      best = ell;
    } else if (T > 2.0 * best_T) {
      break;  // past the minimum; the duration only grows from here
    }
  }
  return best;
}

GhzTransfer ghz_transfer_schedule(const LatticeGraph& lattice, Site origin, Site target, double alpha, GhzMode mode,
                                  int ell, double h) {
  if (!lattice.valid(origin) || !lattice.valid(target)) throw std::out_of_range("site outside lattice");
  const int r = lattice.distance(origin, target);
  if (r < 1) throw std::invalid_argument("origin and target coincide");
  if (ell < 0) ell = ghz_optimal_ell(r, alpha, lattice.dimension(), mode, h);
  if (2 * ell >= r) throw std::invalid_argument("balls overlap: need 2 ell < r");
  if (mode == GhzMode::plain && h < kPi / 4.0) throw std::invalid_argument("h below the unit-time CNOT strength pi/4");

  GhzTransfer out;
  out.origin = origin;
  out.target = target;
  out.ell = ell;
  out.ball_origin = ball(lattice, origin, ell);
  out.ball_target = ball(lattice, target, ell);
  double c2 = 0.0, t2 = 0.0;
  out.schedule = pair_encoding(lattice, origin, target, ell, alpha, h, mode, out.link_coupling, out.link_duration);
  out.schedule.append(pair_encoding(lattice, target, origin, ell, alpha, h, mode, c2, t2).inverse());
  return out;
}

double ghz_transfer_fidelity(const GhzTransfer& transfer, cplx a, cplx b) {
  const int L = transfer.schedule.num_sites;
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  if (!(n > 0.0)) throw std::invalid_argument("zero input state");
  a /= n;
  b /= n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  psi[0] = a;
  psi[Eigen::Index{1} << transfer.origin] = b;
  spin::Evolver ev(transfer.schedule);
  ev.evolve_state(psi, 0.0, transfer.schedule.total_duration());

  const Eigen::Index bit = Eigen::Index{1} << transfer.target;
  double p0 = 0.0, p1 = 0.0;
  cplx coh = 0.0;  // <1|rho|0>
  for (Eigen::Index k = 0; k < psi.size(); ++k) {
    if (k & bit) continue;
    p0 += std::norm(psi[k]);
    p1 += std::norm(psi[k | bit]);
    coh += psi[k | bit] * std::conj(psi[k]);
  }
  // <phi|rho|phi> for phi = (a, b)
  const double f = std::norm(a) * p0 + std::norm(b) * p1 + 2.0 * std::real(std::conj(b) * coh * a);
  return f;
}

}  // namespace lightcone::protocols
