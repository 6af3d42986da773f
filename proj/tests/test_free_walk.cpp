#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "lightcone/free_walk.hpp"
#include "lightcone/krylov.hpp"

using namespace lightcone;
using namespace lightcone::free;

namespace {

Eigen::VectorXcd dense_evolve(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& psi, double t) {
  Eigen::MatrixXcd U = (cplx(0, -t) * H).exp();
  return U * psi;
}

}  // namespace

TEST(Krylov, MatchesDenseExponential) {
  std::mt19937_64 rng(11);
  auto chain = LatticeGraph::chain(60);
  auto H = random_power_law_hopping(chain, 2.0, 1.0, rng);
  Eigen::MatrixXcd Hd = H.to_dense();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(60).normalized();
  for (double t : {0.3, 2.0, 17.0}) {
    Eigen::VectorXcd k = psi;
    krylov::expv_hermitian([&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { H.apply(x, y); }, k, t);
    EXPECT_LT((k - dense_evolve(Hd, psi, t)).norm(), 1e-9) << t;
  }
}

TEST(Hopping, ToeplitzMatchesDense) {
  auto chain = LatticeGraph::chain(37);
  auto H = power_law_hopping(chain, 2.5, 0.7);
  ASSERT_TRUE(H.is_toeplitz());
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(37, 37);
  for (int i = 0; i < 37; ++i)
    for (int j = 0; j < 37; ++j)
      if (i != j) D(i, j) = 0.7 * std::pow(std::abs(i - j), -2.5);
  Eigen::VectorXcd x = Eigen::VectorXcd::Random(37), y;
  H.apply(x, y);
  EXPECT_LT((y - D * x).norm(), 1e-12);
  Region R({3, 4, 10, 20});
  Eigen::MatrixXcd Dr = H.restricted(R).to_dense();
  EXPECT_NEAR(std::abs(Dr(4, 20)), 0.7 * std::pow(16, -2.5), 1e-15);
  EXPECT_EQ(std::abs(Dr(4, 5)), 0.0);
}

TEST(EvolveSp, ZeroTimeAndTwoSiteRotation) {
  auto pair = LatticeGraph::chain(2);
  const double h = 1.7;
  auto H = SingleParticleHamiltonian::constant(pair, nearest_neighbor_hopping(pair, h));
  auto psi0 = basis_state(2, 0);
  EXPECT_EQ((evolve_sp(psi0, H, 0.0) - psi0).norm(), 0.0);
  // exp(-i h t sigma_x)|0> = cos(ht)|0> - i sin(ht)|1>.
  auto out = evolve_sp(psi0, H, std::numbers::pi / (2 * h));
  EXPECT_NEAR(std::abs(out[1]), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(out[0]), 0.0, 1e-12);
  auto mid = evolve_sp(psi0, H, 0.4);
  EXPECT_NEAR(std::abs(mid[0] - std::cos(h * 0.4)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(mid[1] - cplx(0, -std::sin(h * 0.4))), 0.0, 1e-12);
  EXPECT_THROW(evolve_sp(basis_state(3, 0), H, 1.0), std::invalid_argument);
}

TEST(EvolveSp, NormPreservedOverManySegments) {
  std::mt19937_64 rng(5);
  auto chain = LatticeGraph::chain(40);
  std::vector<HoppingMatrix> pool;
  for (int k = 0; k < 8; ++k) pool.push_back(random_power_law_hopping(chain, 3.0, 1.0, rng));
  SingleParticleHamiltonian H;
  H.lattice = chain;
  std::uniform_real_distribution<double> dur(0.01, 0.3);
  for (int k = 0; k < 1000; ++k) H.segments.push_back({dur(rng), pool[static_cast<std::size_t>(k % 8)]});
  auto out = evolve_sp(basis_state(40, 20), H, H.total_duration());
  EXPECT_NEAR(out.norm(), 1.0, 1e-9);
  // Segment order matters: compare against a dense product over the first 20 segments.
  const double t20 = [&] {
    double s = 0;
    for (int k = 0; k < 20; ++k) s += H.segments[static_cast<std::size_t>(k)].duration;
    return s;
  }();
  Eigen::VectorXcd ref = basis_state(40, 20);
  for (int k = 0; k < 20; ++k)
    ref = dense_evolve(H.segments[static_cast<std::size_t>(k)].H.to_dense(), ref, H.segments[static_cast<std::size_t>(k)].duration);
  EXPECT_LT((evolve_sp(basis_state(40, 20), H, t20) - ref).norm(), 1e-9);
}

TEST(Distribution, BasicCases) {
  auto p = position_distribution(basis_state(5, 2));
  EXPECT_EQ(p[2], 1.0);
  EXPECT_EQ(p[0] + p[1] + p[3] + p[4], 0.0);
  WaveFunction u = WaveFunction::Constant(8, 1.0 / std::sqrt(8.0));
  for (double v : position_distribution(u)) EXPECT_NEAR(v, 0.125, 1e-15);
  EXPECT_THROW(position_distribution(WaveFunction::Constant(3, 1.0)), std::invalid_argument);
  auto chain = LatticeGraph::chain(30);
  auto H = SingleParticleHamiltonian::constant(chain, power_law_hopping(chain, 2.0, 1.0));
  auto out = position_distribution(evolve_sp(basis_state(30, 7), H, 3.0));
  double s = 0;
  for (double v : out) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Tail, FExpectationExamples) {
  auto sq = LatticeGraph({9, 9});
  const Site c = sq.index(std::vector<int>{4, 4});
  EXPECT_EQ(expectation_F_beta(sq, basis_state(81, c), c, TailParams::make(3.0, 1), 0.0), 0.0);
  // Uniform over the ball of radius 3, u = 0, beta = 1: the mean distance.
  Region B = ball(sq, c, 3);
  WaveFunction psi = WaveFunction::Zero(81);
  double mean = 0.0;
  for (Site s : B) {
    psi[s] = 1.0 / std::sqrt(static_cast<double>(B.size()));
    mean += sq.distance(s, c);
  }
  mean /= static_cast<double>(B.size());
  // Ball of radius 3 in Z^2 has 1 + 4 + 8 + 12 = 25 sites and mean distance (4 + 16 + 36) / 25.
  EXPECT_EQ(B.size(), 25u);
  EXPECT_NEAR(mean, 56.0 / 25.0, 1e-15);
  TailParams p{3.1, 2, 0.1, 0.0};  // beta = 1
  EXPECT_NEAR(expectation_F_beta(sq, psi, c, p, 0.0), mean, 1e-14);
  EXPECT_EQ(tail_probability(sq, basis_state(81, c), c, 1), 0.0);
  EXPECT_NEAR(tail_probability(sq, psi, c, 0), 1.0, 1e-14);
  EXPECT_THROW(TailParams::make(1.05, 1), std::invalid_argument);
}

TEST(Tail, MarkovHoldsOnEveryPoint) {
  auto chain = LatticeGraph::chain(401);
  auto H = SingleParticleHamiltonian::constant(chain, power_law_hopping(chain, 3.0, 1.0));
  auto traj = record_trajectory(H, 200, {0.5, 1.0, 2.0, 4.0, 8.0});
  int checked = 0;
  for (double u : {0.0, 0.5, 2.0})
    for (const auto& pt : traj) {
      auto p = TailParams::make(3.0, 1, u);
      for (int r = 1; r < static_cast<int>(pt.radial.size()); ++r) {
        const double mb = markov_bound(pt.radial, p, pt.t, r);
        if (!std::isfinite(mb)) continue;
        EXPECT_LE(tail_probability(pt.radial, r), mb * (1 + 1e-12));
        ++checked;
      }
    }
  EXPECT_GT(checked, 2000);
}

// Linear growth of E[F^beta] on random power-law hoppings with alpha = d + 2.
TEST(Tail, FBetaGrowsAtMostLinearly) {
  std::mt19937_64 rng(17);
  auto chain = LatticeGraph::chain(301);
  auto H = SingleParticleHamiltonian::constant(chain, random_power_law_hopping(chain, 3.0, 1.0, rng));
  auto p = TailParams::make(3.0, 1, 2.0);
  std::vector<double> times;
  for (int k = 1; k <= 16; ++k) times.push_back(0.5 * k);
  auto traj = record_trajectory(H, 150, times);
  double K = 0.0;
  for (const auto& pt : traj) K = std::max(K, expectation_F_beta(pt.radial, p, pt.t) / pt.t);
  // The ratio at late times does not exceed the early maximum by much.
  double late = 0.0;
  for (std::size_t k = 8; k < traj.size(); ++k) late = std::max(late, expectation_F_beta(traj[k].radial, p, traj[k].t) / traj[k].t);
  EXPECT_LE(late, K);
  EXPECT_LT(K, 1.0);
}

TEST(TailFit, ZeroHamiltonianAndForcedVelocity) {
  auto chain = LatticeGraph::chain(21);
  auto zero = SingleParticleHamiltonian::constant(chain, HoppingMatrix::from_hops(21, {}));
  auto traj = record_trajectory(zero, 10, {1.0, 2.0});
  auto fit = fit_tail_constants(3.0, 1, {traj});
  EXPECT_EQ(fit.K, 0.0);
  EXPECT_EQ(fit.u, 0.0);
  EXPECT_THROW(fit_tail_constants(3.0, 1, {}), std::invalid_argument);

  auto big = LatticeGraph::chain(801);
  auto H = SingleParticleHamiltonian::constant(big, power_law_hopping(big, 1.5, 1.0));
  auto fit2 = fit_tail_constants(1.5, 1, {record_trajectory(H, 400, {1.0, 2.0, 4.0})});
  EXPECT_TRUE(fit2.u_forced_zero);
  EXPECT_EQ(fit2.u, 0.0);
  EXPECT_TRUE(std::isfinite(fit2.K));
  EXPECT_NEAR(fit2.beta, 0.4, 1e-15);
}

// Nearest-neighbor hopping moves ballistically at speed 2h.
TEST(TailFit, NearestNeighborVelocity) {
  const double h = 1.0;
  std::vector<double> us;
  for (int n : {512, 1024, 2048}) {
    auto chain = LatticeGraph::chain(n);
    auto H = SingleParticleHamiltonian::constant(chain, nearest_neighbor_hopping(chain, h));
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k) times.push_back(n / 64.0 * k / 8.0 * 4.0);
    auto fit = fit_tail_constants(3.0, 1, {record_trajectory(H, n / 2, times)});
    us.push_back(fit.u);
    EXPECT_LE(fit.K, 1.0);
  }
  // The fitted velocity creeps up towards 2h from below as t grows.
  for (std::size_t k = 0; k < us.size(); ++k) {
    EXPECT_GT(us[k], 1.4 * h);
    EXPECT_LE(us[k], 2.0 * h);
    if (k > 0) EXPECT_LE(us[k] - us[k - 1], 0.1 + 1e-12);
  }
}

TEST(Truncation, ZeroWhenBallCoversLattice) {
  auto chain = LatticeGraph::chain(41);
  auto H = SingleParticleHamiltonian::constant(chain, power_law_hopping(chain, 3.0, 1.0));
  EXPECT_LT(truncated_evolution_error(H, 40, 2.0, 20), 1e-12);
  EXPECT_LT(truncated_evolution_error(H, 20, 2.0, 20), 1e-12);
  EXPECT_GT(truncated_evolution_error(H, 19, 2.0, 20), 0.0);
}

TEST(Truncation, MonotoneInRadius) {
  auto chain = LatticeGraph::chain(513);
  auto H = SingleParticleHamiltonian::constant(chain, power_law_hopping(chain, 3.0, 1.0));
  double prev = 1e300;
  for (int r : {4, 8, 16, 32, 64, 128}) {
    const double e = truncated_evolution_error(H, r, 1.0, 256);
    EXPECT_LE(e, prev) << r;
    prev = e;
  }
}

TEST(Envelope, HoppingCheck) {
  auto chain = LatticeGraph::chain(20);
  auto H = SingleParticleHamiltonian::constant(chain, power_law_hopping(chain, 3.0, 1.0));
  EXPECT_TRUE(check_hopping_envelope(H, {3.0, 1.0}).ok);
  auto bad = SingleParticleHamiltonian::constant(chain, HoppingMatrix::from_hops(20, {{2, 5, 0.1}}));
  auto rep = check_hopping_envelope(bad, {3.0, 1.0});
  EXPECT_FALSE(rep.ok);
  EXPECT_EQ(rep.i, 2);
  EXPECT_EQ(rep.j, 5);
  EXPECT_NEAR(rep.ratio, 2.7, 1e-12);
}
