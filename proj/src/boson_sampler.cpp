#include "lightcone/boson_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace lightcone::boson {

using cplx = std::complex<double>;

namespace {

int ceil_root(double x, int d) {
  int s = std::max(1, static_cast<int>(std::floor(std::pow(x, 1.0 / d))));
  while (std::pow(static_cast<double>(s), d) < x - 1e-9) ++s;
  return s;
}

struct Geometry {
  int side = 1;
  int per_axis = 1;
  int spacing = 1;
};

Geometry geometry(int N, double beta_density, int d) {
  if (N < 1) throw std::invalid_argument("need at least one boson");
  if (!(beta_density >= 1.0)) throw std::invalid_argument("beta_density must be >= 1");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  const double M = std::ceil(std::pow(static_cast<double>(N), beta_density) - 1e-9);
  if (M > static_cast<double>(kMaxSamplerSites)) throw std::length_error("lattice would exceed the site cap");
  Geometry g;
  g.side = ceil_root(M, d);
  if (std::pow(static_cast<double>(g.side), d) > static_cast<double>(kMaxSamplerSites))
    throw std::length_error("lattice would exceed the site cap");
  g.per_axis = ceil_root(N, d);
  g.spacing = std::max(1, g.side / g.per_axis);
  return g;
}

double mult_factor(const Outcome& y) {
  double f = 1.0;
  std::size_t run = 1;
  for (std::size_t k = 1; k <= y.size(); ++k) {
    if (k < y.size() && y[k] == y[k - 1]) {
      ++run;
    } else {
      for (std::size_t m = 2; m <= run; ++m) f *= static_cast<double>(m);
      run = 1;
    }
  }
  return f;
}

std::vector<Eigen::VectorXcd> propagator_columns(const BosonConfig& config, const free::SingleParticleHamiltonian& H,
                                                 double t) {
  std::vector<Eigen::VectorXcd> cols;
  for (Site j : config.initial)
    cols.push_back(free::evolve_sp(free::basis_state(config.lattice.num_sites(), j), H, t));
  return cols;
}

void check_oracle_caps(const BosonConfig& config) {
  if (config.N > kMaxOracleBosons) throw std::length_error("exact oracle supports at most 3 bosons");
  if (config.lattice.num_sites() > kMaxOracleSites) throw std::length_error("exact oracle supports at most 200 sites");
}

template <class F>
void for_each_multiset(int M, int N, F&& visit) {
  Outcome y(static_cast<std::size_t>(N), 0);
  while (true) {
    visit(y);
    int k = N - 1;
    while (k >= 0 && y[static_cast<std::size_t>(k)] == M - 1) --k;
    if (k < 0) return;
    const Site v = y[static_cast<std::size_t>(k)] + 1;
    for (int m = k; m < N; ++m) y[static_cast<std::size_t>(m)] = v;
  }
}

double factored_probability(const std::vector<std::vector<double>>& marginals, Outcome y) {
  double p = 0.0;
  do {
    double term = 1.0;
    for (std::size_t k = 0; k < y.size() && term > 0.0; ++k) term *= marginals[k][static_cast<std::size_t>(y[k])];
    p += term;
  } while (std::next_permutation(y.begin(), y.end()));
  return p;
}

}  // namespace

BosonConfig build_initial(int N, double beta_density, int d) {
  const Geometry g = geometry(N, beta_density, d);
  BosonConfig c;
  c.N = N;
  c.beta_density = beta_density;
  c.lattice = LatticeGraph(std::vector<int>(static_cast<std::size_t>(d), g.side));
  c.spacing = g.spacing;
  c.L_gap = 0.5 * g.spacing;
  std::vector<int> slot(static_cast<std::size_t>(d), 0), coord(static_cast<std::size_t>(d));
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i)
      coord[static_cast<std::size_t>(i)] = slot[static_cast<std::size_t>(i)] * g.spacing + g.spacing / 2;
    c.initial.push_back(c.lattice.index(coord));
    int a = d - 1;
    while (a >= 0 && slot[static_cast<std::size_t>(a)] == g.per_axis - 1) slot[static_cast<std::size_t>(a--)] = 0;
    if (a >= 0) ++slot[static_cast<std::size_t>(a)];
  }
  if (N == 1) {
    std::vector<Site> all(static_cast<std::size_t>(c.lattice.num_sites()));
    for (Site s = 0; s < c.lattice.num_sites(); ++s) all[static_cast<std::size_t>(s)] = s;
    c.balls.emplace_back(std::move(all));
    return c;
  }
  std::vector<std::vector<Site>> members(static_cast<std::size_t>(N));
  for (Site s = 0; s < c.lattice.num_sites(); ++s) {
    int best = -1, bestD = 0;
    for (int k = 0; k < N; ++k) {
      const int D = c.lattice.distance(s, c.initial[static_cast<std::size_t>(k)]);
      if (best < 0 || D < bestD) {
        best = k;
        bestD = D;
      }
    }
    if (bestD <= c.L_gap) members[static_cast<std::size_t>(best)].push_back(s);
  }
  for (auto& m : members) c.balls.emplace_back(std::move(m));
  return c;
}

free::SingleParticleHamiltonian power_law_hamiltonian(const BosonConfig& config, double alpha, double h) {
  return free::SingleParticleHamiltonian::constant(config.lattice, free::power_law_hopping(config.lattice, alpha, h));
}

std::vector<double> truncated_marginal(const BosonConfig& config, const free::SingleParticleHamiltonian& H, int k,
                                       double t) {
  if (k < 0 || k >= config.N) throw std::out_of_range("boson index out of range");
  const auto& region = config.balls[static_cast<std::size_t>(k)];
  auto psi = free::evolve_sp(free::basis_state(config.lattice.num_sites(), config.initial[static_cast<std::size_t>(k)]),
                             H.restricted(region), t);
  psi /= psi.norm();
  return free::position_distribution(psi);
}

namespace {

Site draw(const std::vector<double>& cdf, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, cdf.back());
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
  return static_cast<Site>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

std::vector<std::vector<double>> marginal_cdfs(const BosonConfig& config, const free::SingleParticleHamiltonian& H,
                                               double t) {
  std::vector<std::vector<double>> cdfs;
  for (int k = 0; k < config.N; ++k) {
    auto p = truncated_marginal(config, H, k, t);
    for (std::size_t i = 1; i < p.size(); ++i) p[i] += p[i - 1];
    cdfs.push_back(std::move(p));
  }
  return cdfs;
}

}  // namespace

SampleResult sample_positions(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t,
                              std::uint64_t seed) {
  return sample_many(config, H, t, 1, seed).front();
}

std::vector<SampleResult> sample_many(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t,
                                      int draws, std::uint64_t seed) {
  if (!(t >= 0.0)) throw std::invalid_argument("sampling time must be nonnegative");
  if (draws < 1) throw std::invalid_argument("need at least one draw");
  const auto cdfs = marginal_cdfs(config, H, t);
  std::mt19937_64 rng(seed);
  std::vector<SampleResult> out;
  out.reserve(static_cast<std::size_t>(draws));
  for (int n = 0; n < draws; ++n) {
    SampleResult r;
    r.seed = seed;
    r.t = t;
    for (const auto& cdf : cdfs) r.positions.push_back(draw(cdf, rng));
    out.push_back(std::move(r));
  }
  return out;
}

double easiness_time(double L_gap, int N, double alpha, int d, double epsilon) {
  if (!(alpha > d)) throw std::domain_error("easiness time needs alpha > d");
  if (N < 1 || !(L_gap > 0.0)) throw std::invalid_argument("easiness time needs N >= 1 and L_gap > 0");
  return std::pow(L_gap, (alpha - d - epsilon) / 3.0) * std::pow(static_cast<double>(N), -5.0 / 3.0);
}

double easiness_time(int N, double beta_density, double alpha, int d, double epsilon) {
  return easiness_time(0.5 * geometry(N, beta_density, d).spacing, N, alpha, d, epsilon);
}

cplx permanent(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("permanent needs a square matrix");
  switch (m.rows()) {
    case 0:
      return 1.0;
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) + m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) + m(1, 2) * m(2, 1)) + m(0, 1) * (m(1, 0) * m(2, 2) + m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) + m(1, 1) * m(2, 0));
    default:
      throw std::length_error("permanent implemented up to 3 x 3");
  }
}

std::vector<OutcomeProbability> exact_few_boson_distribution(const BosonConfig& config,
                                                             const free::SingleParticleHamiltonian& H, double t) {
  check_oracle_caps(config);
  const auto cols = propagator_columns(config, H, t);
  const int N = config.N;
  std::vector<OutcomeProbability> out;
  Eigen::MatrixXcd sub(N, N);
  for_each_multiset(config.lattice.num_sites(), N, [&](const Outcome& y) {
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) sub(a, b) = cols[static_cast<std::size_t>(b)][y[static_cast<std::size_t>(a)]];
    out.push_back({y, std::norm(permanent(sub)) / mult_factor(y)});
  });
  return out;
}

double sampler_tvd(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t) {
  const auto exact = exact_few_boson_distribution(config, H, t);
  std::vector<std::vector<double>> marginals;
  for (int k = 0; k < config.N; ++k) marginals.push_back(truncated_marginal(config, H, k, t));
  double tvd = 0.0;
  for (const auto& o : exact) tvd += std::abs(o.p - factored_probability(marginals, o.sites));
  return 0.5 * tvd;
}

double empirical_tvd(const BosonConfig& config, const free::SingleParticleHamiltonian& H, double t, int draws,
                     std::uint64_t seed) {
  const auto exact = exact_few_boson_distribution(config, H, t);
  std::map<Outcome, double> freq;
  for (auto& s : sample_many(config, H, t, draws, seed)) {
    Outcome y = s.positions;
    std::sort(y.begin(), y.end());
    freq[y] += 1.0 / draws;
  }
  double tvd = 0.0;
  for (const auto& o : exact) {
    const auto it = freq.find(o.sites);
    tvd += std::abs(o.p - (it == freq.end() ? 0.0 : it->second));
  }
  return 0.5 * tvd;
}

}  // namespace lightcone::boson
