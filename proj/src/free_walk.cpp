#include "lightcone/free_walk.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lightcone/krylov.hpp"

namespace lightcone::free {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct HoppingMatrix::Fft {
  int n = 0;
  Eigen::VectorXcd kernel;  // FFT of the circulant first column, length 2n
};

namespace {
// kissfft caches twiddles per size; one engine per thread keeps apply() reentrant.
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}
}  // namespace

HoppingMatrix HoppingMatrix::from_hops(int num_sites, const std::vector<Hop>& hops) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(2 * hops.size());
  for (const auto& h : hops) {
    if (h.i < 0 || h.j < 0 || h.i >= num_sites || h.j >= num_sites) throw std::out_of_range("hop site out of range");
    if (h.i == h.j) {
      if (h.value.imag() != 0.0) throw std::invalid_argument("diagonal entry must be real");
      trip.emplace_back(h.i, h.i, h.value);
      continue;
    }
    trip.emplace_back(h.i, h.j, h.value);
    trip.emplace_back(h.j, h.i, std::conj(h.value));
  }
  SpMat m(num_sites, num_sites);
  m.setFromTriplets(trip.begin(), trip.end());
  return from_sparse(std::move(m));
}

HoppingMatrix HoppingMatrix::from_sparse(SpMat m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hopping matrix must be square");
  HoppingMatrix out;
  out.n_ = static_cast<int>(m.rows());
  m.makeCompressed();
  out.sparse_ = std::move(m);
  return out;
}

HoppingMatrix HoppingMatrix::toeplitz(std::vector<double> coupling) {
  HoppingMatrix out;
  out.n_ = static_cast<int>(coupling.size());
  if (out.n_ == 0) throw std::invalid_argument("empty Toeplitz coupling");
  coupling[0] = 0.0;
  out.coupling_ = std::move(coupling);
  auto fft = std::make_shared<Fft>();
  const int n = out.n_;
  fft->n = n;
  Eigen::VectorXcd col = Eigen::VectorXcd::Zero(2 * n);
  for (int g = 1; g < n; ++g) {
    col[g] = out.coupling_[static_cast<std::size_t>(g)];
    col[2 * n - g] = out.coupling_[static_cast<std::size_t>(g)];
  }
  fft_engine().fwd(fft->kernel, col);
  out.fft_ = std::move(fft);
  return out;
}

void HoppingMatrix::apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  if (x.size() != n_) throw std::invalid_argument("hopping apply: dimension mismatch");
  if (!fft_) {
    y.noalias() = sparse_ * x;
    return;
  }
  const int n = n_;
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(2 * n), freq, back;
  padded.head(n) = x;
  fft_engine().fwd(freq, padded);
  freq = freq.cwiseProduct(fft_->kernel);
  fft_engine().inv(back, freq);
  y = back.head(n);
}

Eigen::MatrixXcd HoppingMatrix::to_dense() const {
  if (fft_) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m(i, j) = coupling_[static_cast<std::size_t>(std::abs(i - j))];
    return m;
  }
  return Eigen::MatrixXcd(sparse_);
}

cplx HoppingMatrix::entry(Site i, Site j) const {
  if (fft_) return i == j ? 0.0 : coupling_[static_cast<std::size_t>(std::abs(i - j))];
  return sparse_.coeff(i, j);
}

HoppingMatrix HoppingMatrix::restricted(const Region& region) const {
  std::vector<char> in(static_cast<std::size_t>(n_), 0);
  for (Site s : region) in[static_cast<std::size_t>(s)] = 1;
  std::vector<Eigen::Triplet<cplx>> trip;
  if (fft_) {
    for (Site i : region)
      for (Site j : region)
        if (i != j) trip.emplace_back(i, j, coupling_[static_cast<std::size_t>(std::abs(i - j))]);
  } else {
    for (int i = 0; i < sparse_.outerSize(); ++i) {
      if (!in[static_cast<std::size_t>(i)]) continue;
      for (SpMat::InnerIterator it(sparse_, i); it; ++it)
        if (in[static_cast<std::size_t>(it.col())]) trip.emplace_back(i, static_cast<int>(it.col()), it.value());
    }
  }
  SpMat m(n_, n_);
  m.setFromTriplets(trip.begin(), trip.end());
  return from_sparse(std::move(m));
}

HoppingMatrix HoppingMatrix::scaled(double s) const {
  if (fft_) {
    auto c = coupling_;
    for (auto& v : c) v *= s;
    return toeplitz(std::move(c));
  }
  return from_sparse(SpMat(sparse_ * cplx(s)));
}

SingleParticleHamiltonian SingleParticleHamiltonian::constant(LatticeGraph lattice, HoppingMatrix H) {
  if (H.num_sites() != lattice.num_sites()) throw std::invalid_argument("hopping matrix does not match lattice");
  SingleParticleHamiltonian out;
  out.lattice = std::move(lattice);
  out.segments.push_back({std::numeric_limits<double>::infinity(), std::move(H)});
  return out;
}

double SingleParticleHamiltonian::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

SingleParticleHamiltonian SingleParticleHamiltonian::restricted(const Region& region) const {
  SingleParticleHamiltonian out;
  out.lattice = lattice;
  for (const auto& s : segments) out.segments.push_back({s.duration, s.H.restricted(region)});
  return out;
}

HoppingMatrix nearest_neighbor_hopping(const LatticeGraph& lattice, double h) {
  std::vector<Hop> hops;
  for (Site i = 0; i < lattice.num_sites(); ++i)
    for (Site j : lattice.neighbors(i))
      if (j > i) hops.push_back({i, j, h});
  return HoppingMatrix::from_hops(lattice.num_sites(), hops);
}

HoppingMatrix power_law_hopping(const LatticeGraph& lattice, double alpha, double h) {
  const int n = lattice.num_sites();
  if (lattice.dimension() == 1) {
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (int g = 1; g < n; ++g) c[static_cast<std::size_t>(g)] = h * std::pow(g, -alpha);
    return HoppingMatrix::toeplitz(std::move(c));
  }
  if (static_cast<double>(n) * n > 4e7) throw std::length_error("all-pairs hopping matrix too large");
  std::vector<Hop> hops;
  for (Site i = 0; i < n; ++i)
    for (Site j = i + 1; j < n; ++j) hops.push_back({i, j, h * std::pow(lattice.distance(i, j), -alpha)});
  return HoppingMatrix::from_hops(n, hops);
}

HoppingMatrix random_power_law_hopping(const LatticeGraph& lattice, double alpha, double h, std::mt19937_64& rng) {
  const int n = lattice.num_sites();
  if (static_cast<double>(n) * n > 4e7) throw std::length_error("all-pairs hopping matrix too large");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Hop> hops;
  for (Site i = 0; i < n; ++i)
    for (Site j = i + 1; j < n; ++j) {
      const double mag = unit(rng) * h * std::pow(lattice.distance(i, j), -alpha);
      hops.push_back({i, j, std::polar(mag, 2.0 * std::numbers::pi * unit(rng))});
    }
  return HoppingMatrix::from_hops(n, hops);
}

EnvelopeReport check_hopping_envelope(const SingleParticleHamiltonian& H, PowerLawEnvelope env) {
  EnvelopeReport rep;
  for (std::size_t k = 0; k < H.segments.size(); ++k) {
    H.segments[k].H.for_each_pair([&](int i, int j, cplx v) {
      const double limit = env(H.lattice, i, j);
      const double ratio = std::abs(v) / limit;
      if (ratio > rep.ratio) {
        rep.ratio = ratio;
        rep.segment = static_cast<int>(k);
        rep.i = i;
        rep.j = j;
        rep.value = std::abs(v);
        rep.limit = limit;
      }
    });
  }
  rep.ok = rep.ratio <= 1.0 + 1e-12;
  return rep;
}

void evolve_sp_between(WaveFunction& psi, const SingleParticleHamiltonian& H, double t0, double t1, double tol) {
  if (psi.size() != H.lattice.num_sites()) throw std::invalid_argument("wave function dimension mismatch");
  if (!(t0 >= 0.0) || !(t1 >= t0)) throw std::invalid_argument("evolve_sp needs 0 <= t0 <= t1");
  double start = 0.0;
  for (const auto& seg : H.segments) {
    const double end = start + seg.duration;
    const double a = std::max(start, t0), b = std::min(end, t1);
    if (b > a) {
      krylov::expv_hermitian([&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { seg.H.apply(x, y); }, psi, b - a,
                             tol);
    }
    start = end;
    if (start >= t1) break;
  }
}

WaveFunction evolve_sp(const WaveFunction& psi, const SingleParticleHamiltonian& H, double t, double tol) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve_sp needs t >= 0");
  WaveFunction out = psi;
  evolve_sp_between(out, H, 0.0, t, tol);
  return out;
}

WaveFunction basis_state(int num_sites, Site s) {
  if (s < 0 || s >= num_sites) throw std::out_of_range("basis_state site out of range");
  WaveFunction v = WaveFunction::Zero(num_sites);
  v[s] = 1.0;
  return v;
}

std::vector<double> position_distribution(const WaveFunction& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw std::invalid_argument("wave function is not normalized");
  std::vector<double> p(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(psi[i]);
  return p;
}

TailParams TailParams::make(double alpha, int d, double u, double epsilon) {
  TailParams p{alpha, d, epsilon, u};
  if (!(p.beta() > 0.0)) throw std::invalid_argument("beta = alpha - d - epsilon must be positive");
  if (!(u >= 0.0)) throw std::invalid_argument("u must be nonnegative");
  return p;
}

std::vector<double> radial_distribution(const LatticeGraph& lattice, const WaveFunction& psi, Site origin) {
  const auto P = position_distribution(psi);
  std::vector<double> radial;
  for (Site s = 0; s < lattice.num_sites(); ++s) {
    const auto D = static_cast<std::size_t>(lattice.distance(s, origin));
    if (radial.size() <= D) radial.resize(D + 1, 0.0);
    radial[D] += P[static_cast<std::size_t>(s)];
  }
  return radial;
}

double expectation_F_beta(const std::vector<double>& radial, const TailParams& p, double t) {
  const double beta = p.beta();
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  double acc = 0.0;
  for (std::size_t D = 0; D < radial.size(); ++D) {
    const double F = std::max(0.0, static_cast<double>(D) - p.u * t);
    if (F > 0.0) acc += radial[D] * std::pow(F, beta);
  }
  return acc;
}

double expectation_F_beta(const LatticeGraph& lattice, const WaveFunction& psi, Site origin, const TailParams& p,
                          double t) {
  return expectation_F_beta(radial_distribution(lattice, psi, origin), p, t);
}

double tail_probability(const std::vector<double>& radial, int r) {
  double acc = 0.0;
  for (std::size_t D = static_cast<std::size_t>(std::max(r, 0)); D < radial.size(); ++D) acc += radial[D];
  return acc;
}

double tail_probability(const LatticeGraph& lattice, const WaveFunction& psi, Site origin, int r) {
  return tail_probability(radial_distribution(lattice, psi, origin), r);
}

double markov_bound(const std::vector<double>& radial, const TailParams& p, double t, int r) {
  const double gap = r - p.u * t;
  if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
  return expectation_F_beta(radial, p, t) / std::pow(gap, p.beta());
}

double truncated_evolution_error(const SingleParticleHamiltonian& H, int r, double t, Site origin) {
  if (!H.lattice.valid(origin)) throw std::out_of_range("origin outside lattice");
  if (r < 0) throw std::invalid_argument("truncation radius must be nonnegative");
  const Region B = ball(H.lattice, origin, r);
  const auto n = H.lattice.num_sites();
  const WaveFunction psi0 = basis_state(n, origin);
  const WaveFunction full = evolve_sp(psi0, H, t);
  if (static_cast<int>(B.size()) == n) return 0.0;
  const WaveFunction trunc = evolve_sp(psi0, H.restricted(B), t);
  return (full - trunc).norm();
}

Trajectory record_trajectory(const SingleParticleHamiltonian& H, Site origin, const std::vector<double>& times) {
  Trajectory traj;
  WaveFunction psi = basis_state(H.lattice.num_sites(), origin);
  double now = 0.0;
  for (double t : times) {
    if (t < now) throw std::invalid_argument("trajectory times must be ascending");
    evolve_sp_between(psi, H, now, t);
    now = t;
    psi /= psi.norm();
    traj.push_back({t, radial_distribution(H.lattice, psi, origin)});
  }
  return traj;
}

double tail_constant_for_velocity(const std::vector<Trajectory>& trajectories, double beta, double u) {
  double K = 0.0;
  for (const auto& traj : trajectories)
    for (const auto& pt : traj) {
      // Suffix sums give every tail in one pass.
      double tail = 0.0;
      for (std::size_t r = pt.radial.size(); r-- > 1;) {
        tail += pt.radial[r];
        const double gap = static_cast<double>(r) - u * pt.t;
        if (!(gap > 0.0) || tail <= 0.0) continue;
        if (pt.t == 0.0) return std::numeric_limits<double>::infinity();
        K = std::max(K, tail * std::pow(gap, beta) / pt.t);
      }
    }
  return K;
}

TailFit fit_tail_constants(double alpha, int d, const std::vector<Trajectory>& trajectories,
                           const TailFitOptions& options) {
  bool any = false;
  for (const auto& t : trajectories) any = any || !t.empty();
  if (!any) throw std::invalid_argument("no trajectory points to fit");
  TailFit fit;
  fit.beta = alpha - d - options.epsilon;
  if (!(fit.beta > 0.0)) throw std::invalid_argument("beta = alpha - d - epsilon must be positive");
  if (alpha <= d + 1) {
    fit.u_forced_zero = true;
    fit.u = 0.0;
    fit.K = tail_constant_for_velocity(trajectories, fit.beta, 0.0);
    return fit;
  }
  const int steps = static_cast<int>(std::floor(options.u_max / options.u_step + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const double u = k * options.u_step;
    const double K = tail_constant_for_velocity(trajectories, fit.beta, u);
    if (K <= options.K_target) {
      fit.u = u;
      fit.K = K;
      return fit;
    }
  }
  fit.u = steps * options.u_step;
  fit.K = tail_constant_for_velocity(trajectories, fit.beta, fit.u);
  return fit;
}

}  // namespace lightcone::free
