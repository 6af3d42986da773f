#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lightcone/transfer.hpp"

using namespace lightcone;
using namespace lightcone::transfer;
using free::WaveFunction;

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double num = 0, den = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    num += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    den += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return num / den;
}

Site axis_target(const LatticeGraph& lat, int D) {
  std::vector<int> c(static_cast<std::size_t>(lat.dimension()), 0);
  c[0] = D;
  return lat.index(c);
}

}  // namespace

TEST(NearestNeighbor, TimesAndFidelity) {
  auto chain = LatticeGraph::chain(12);
  auto p1 = nearest_neighbor_plan(chain, 0, 1, 1.0);
  EXPECT_DOUBLE_EQ(p1.total_time, std::numbers::pi / 2);
  auto p10 = nearest_neighbor_plan(chain, 0, 10, 1.0);
  EXPECT_NEAR(p10.total_time, 5 * std::numbers::pi, 1e-12);
  EXPECT_EQ(p10.stages.size(), 10u);
  EXPECT_GE(fidelity(p10), 1.0 - 1e-10);
  auto sq = LatticeGraph({4, 5});
  auto p2 = nearest_neighbor_plan(sq, 0, sq.index(std::vector<int>{3, 4}), 2.0);
  EXPECT_NEAR(p2.total_time, 7 * std::numbers::pi / 4, 1e-12);
  EXPECT_GE(fidelity(p2), 1.0 - 1e-10);
  EXPECT_THROW(nearest_neighbor_plan(chain, 3, 3, 1.0), std::invalid_argument);
}

TEST(Pulse, DurationExamples) {
  EXPECT_DOUBLE_EQ(pulse_duration(1, 1, std::numbers::pi / 2, 1.0), std::numbers::pi / 2);
  EXPECT_EQ(pulse_duration(3, 7, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(pulse_duration(4, 12, std::numbers::pi / 2, 1.0), std::numbers::pi / (2 * std::sqrt(48.0)));
  auto chain = LatticeGraph::chain(10);
  EXPECT_THROW(superposition_pulse(chain, Region({1, 2}), Region({2, 3}), 0.3, 0.01, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(superposition_pulse(chain, Region({1}), Region({5}), 0.3, 0.3, {1.0, 1.0}), std::invalid_argument);
  EXPECT_NO_THROW(superposition_pulse(chain, Region({1}), Region({5}), 0.3, 0.25, {1.0, 1.0}));
}

// Amplitudes after the pulse are cos(theta)/sqrt|A| on A and sin(theta)/sqrt|B| on B.
TEST(Pulse, AmplitudesFollowClosedForm) {
  std::mt19937 rng(8);
  auto sq = LatticeGraph({16, 16});
  std::vector<Site> all(256);
  for (int k = 0; k < 256; ++k) all[static_cast<std::size_t>(k)] = k;
  std::uniform_real_distribution<double> th(-std::numbers::pi / 2, std::numbers::pi / 2);
  for (auto [na, nb] : std::vector<std::pair<int, int>>{{1, 1}, {1, 64}, {7, 30}, {64, 64}, {64, 5}}) {
    std::shuffle(all.begin(), all.end(), rng);
    Region A(std::vector<Site>(all.begin(), all.begin() + na));
    Region B(std::vector<Site>(all.begin() + na, all.begin() + na + nb));
    const double theta = th(rng);
    const double C = 0.5 * std::pow(30.0, -1.5);
    auto pulse = superposition_pulse(sq, A, B, theta, C, {1.5, 1.0});
    auto H = free::SingleParticleHamiltonian::constant(sq, pulse.H);
    WaveFunction psi = WaveFunction::Zero(256);
    for (Site s : A) psi[s] = 1.0 / std::sqrt(static_cast<double>(na));
    auto out = free::evolve_sp(psi, H, pulse.duration);
    double err = 0.0;
    for (Site s : A) err = std::max(err, std::abs(out[s] - std::cos(theta) / std::sqrt(static_cast<double>(na))));
    for (Site s : B) err = std::max(err, std::abs(out[s] - std::sin(theta) / std::sqrt(static_cast<double>(nb))));
    EXPECT_LT(err, 1e-10) << na << " " << nb;
  }
}

TEST(Cubes, SequenceExamples) {
  EXPECT_EQ(cube_count(5), 3);
  EXPECT_EQ(cube_count(4), 3);
  EXPECT_EQ(cube_count(64), 7);
  auto l5 = transfer_lattice(1, 5);
  auto c5 = cube_sequence(l5, 0, 5);
  EXPECT_EQ(c5.q, 3);
  EXPECT_DOUBLE_EQ(c5.sizes[0], 5.0 / 4.0);
  auto c4 = cube_sequence(transfer_lattice(1, 4), 0, 4);
  EXPECT_DOUBLE_EQ(c4.sizes[0], 1.0);
  auto c16 = cube_sequence(transfer_lattice(2, 16), 0, axis_target(transfer_lattice(2, 16), 16));
  for (int s = 1; s <= c16.q; ++s) EXPECT_DOUBLE_EQ(c16.sizes[static_cast<std::size_t>(s - 1)], std::ldexp(c16.sizes[0], s - 1));
  for (const auto* seq : {&c5, &c16}) {
    for (std::size_t s = 0; s < seq->sizes.size(); ++s) {
      if (s > 0) {
        EXPECT_TRUE(seq->from_origin[s - 1].subset_of(seq->from_origin[s]));
        EXPECT_TRUE(seq->from_target[s - 1].subset_of(seq->from_target[s]));
      }
    }
    EXPECT_EQ(seq->from_origin.back(), seq->from_target.back());
    EXPECT_GE(seq->sizes[0], 1.0);
    EXPECT_LT(seq->sizes[0], 2.0);
  }
  EXPECT_TRUE(c5.from_origin[0].contains(0));
  EXPECT_TRUE(c5.from_target[0].contains(5));
  EXPECT_THROW(cube_sequence(transfer_lattice(1, 2), 0, 2), std::domain_error);
  EXPECT_THROW(cube_sequence(LatticeGraph({9, 3}), 0, 8 * 3), std::length_error);
}

TEST(Plan, PerfectTransferAndTiming) {
  for (int d : {1, 2})
    for (double alpha : {0.5, 1.0, 1.5})
      for (int D : {4, 8, 16, 32, 64}) {
        if (d == 2 && D > 16) continue;
        auto lat = transfer_lattice(d, D);
        auto plan = build_transfer_plan(lat, 0, axis_target(lat, D), alpha);
        EXPECT_GE(fidelity(plan), 1.0 - 1e-9) << d << " " << alpha << " " << D;
        EXPECT_LE(plan.total_time, transfer_time_bound(d, alpha, D)) << d << " " << alpha << " " << D;
        EXPECT_TRUE(free::check_hopping_envelope(plan_hamiltonian(plan), {alpha, 1.0}).ok);
        for (std::size_t k = 1; k < plan.stages.size(); ++k)
          EXPECT_EQ(plan.stages[k - 1].output(), plan.stages[k].input());
        for (const auto& st : plan.stages)
          EXPECT_LE(st.duration, std::numbers::pi / (2 * st.C * std::sqrt(double(st.A.size() * st.B.size()))) + 1e-12);
      }
}

TEST(Plan, BoundExamples) {
  EXPECT_NEAR(transfer_time_bound(1, 1.0, 10), 2 * std::numbers::pi * (1 + std::log(10.0)), 1e-12);
  EXPECT_NEAR(transfer_time_bound(1, 3.0, 10), 5 * std::numbers::pi, 1e-12);
  // alpha = 1.5, d = 1, D = 64: q = 7 and the bound is 4 pi (2^4 - 1) / (sqrt 2 - 1).
  EXPECT_NEAR(transfer_time_bound(1, 1.5, 64), 4 * std::numbers::pi * 15 / (std::sqrt(2.0) - 1), 1e-9);
}

TEST(Plan, StagesProduceUniformSuperpositions) {
  auto lat = transfer_lattice(2, 8);
  auto plan = build_transfer_plan(lat, 0, axis_target(lat, 8), 1.0);
  for (std::size_t k = 1; k <= plan.stages.size(); ++k) {
    const auto psi = run_stages(plan, k);
    const Region out = plan.stages[k - 1].output();
    const double u = 1.0 / static_cast<double>(out.size());
    const auto P = free::position_distribution(psi / psi.norm());
    double err = 0.0;
    for (Site s = 0; s < lat.num_sites(); ++s) err = std::max(err, std::abs(P[static_cast<std::size_t>(s)] - (out.contains(s) ? u : 0.0)));
    EXPECT_LT(err, 1e-9) << k;
  }
  EXPECT_LT(std::norm(run_stages(plan, plan.stages.size() - 1)[plan.target]), 1.0 - 1e-3);
}

TEST(Plan, OffAxisTargetUsesLegs) {
  auto sq = LatticeGraph({9, 9});
  auto plan = build_transfer_plan(sq, 0, sq.index(std::vector<int>{8, 4}), 1.5);
  EXPECT_GE(fidelity(plan), 1.0 - 1e-9);
  auto nn = build_transfer_plan(LatticeGraph::chain(9), 0, 8, 2.5);
  EXPECT_NEAR(nn.total_time, 4 * std::numbers::pi, 1e-12);
  auto shortp = build_transfer_plan(LatticeGraph::chain(9), 0, 2, 0.5);
  EXPECT_EQ(shortp.stages.size(), 2u);
}

TEST(Plan, ScalingSlopes) {
  std::vector<double> Ds, Ts, nn;
  for (int D = 256; D <= 4096; D *= 2) {
    auto lat = transfer_lattice(1, D);
    Ds.push_back(D);
    Ts.push_back(build_transfer_plan(lat, 0, D, 1.5).total_time);
    nn.push_back(build_transfer_plan(lat, 0, D, 2.5).total_time);
  }
  // Asymptotic window; at D <= 64 the early stages still pull the fitted slope up.
  EXPECT_NEAR(loglog_slope(Ds, Ts), 0.5, 0.1);
  EXPECT_NEAR(loglog_slope(Ds, nn), 1.0, 0.01);
}

TEST(Robustness, NoiseStatistics) {
  auto lat = transfer_lattice(1, 16);
  auto plan = build_transfer_plan(lat, 0, 16, 1.0);
  auto clean = robustness_mc(plan, {0.0, NoiseDistribution::gaussian, 3}, 5);
  EXPECT_LT(clean.max_infidelity, 1e-9);
  auto a = robustness_mc(plan, {0.01, NoiseDistribution::uniform, 9}, 50);
  auto b = robustness_mc(plan, {0.01, NoiseDistribution::uniform, 9}, 50);
  EXPECT_EQ(a.mean_infidelity, b.mean_infidelity);
  EXPECT_LE(a.median_infidelity, a.p95_infidelity);
  EXPECT_LE(a.p95_infidelity, a.max_infidelity);
  // Infidelity is quadratic in the coupling error: doubling epsilon quadruples it.
  auto c = robustness_mc(plan, {0.02, NoiseDistribution::uniform, 9}, 50);
  EXPECT_NEAR(c.mean_infidelity / a.mean_infidelity, 4.0, 0.1);
  EXPECT_LT(a.mean_infidelity, 0.01 / (std::sqrt(2.0) - 1));
}

TEST(Robustness, IncrementPerDoublingShrinks) {
  std::vector<double> mean;
  for (int D : {8, 16, 32, 64}) {
    auto lat = transfer_lattice(1, D);
    mean.push_back(robustness_mc(build_transfer_plan(lat, 0, D, 1.0), {0.01, NoiseDistribution::uniform, 42}, 200).mean_infidelity);
  }
  for (std::size_t k = 2; k < mean.size(); ++k) EXPECT_LT(mean[k] - mean[k - 1], mean[k - 1] - mean[k - 2]);
}
