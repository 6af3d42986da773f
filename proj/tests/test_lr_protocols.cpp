#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lightcone/lr_protocols.hpp"

using namespace lightcone;
using namespace lightcone::protocols;
using spin::OperatorState;

TEST(Spreading, BuildExamples) {
  auto b = build_spreading_protocol(10, 3.0, 3.0, 1);
  EXPECT_EQ(b.protocol.ell, 1);
  EXPECT_EQ(b.protocol.V, 3);
  EXPECT_DOUBLE_EQ(b.protocol.tau, 1.0 / 8000.0);
  EXPECT_EQ(b.protocol.lattice.num_sites(), 13);
  EXPECT_EQ(b.protocol.lattice.distance(b.protocol.origin, b.protocol.target), 10);
  EXPECT_DOUBLE_EQ(b.schedule.total_duration(), 3.0);

  EXPECT_NO_THROW(build_spreading_protocol(4, 3.0, 3.0, 1));
  EXPECT_THROW(build_spreading_protocol(4, 6.0, 3.0, 1), std::invalid_argument);
  EXPECT_THROW(build_spreading_protocol(10, 4.0, 3.0, 1), std::invalid_argument);

  auto b2 = build_spreading_protocol(10, 6.0, 2.5, 2);
  EXPECT_EQ(b2.protocol.V, 13);
  EXPECT_DOUBLE_EQ(b2.schedule.total_duration(), 6.0);
}

TEST(Spreading, SchedulesRespectEnvelope) {
  for (int d : {1, 2})
    for (double alpha : {2.0, 3.0, 5.0})
      for (int r : {4, 8, 14})
        for (double t : {3.0, 6.0}) {
          if (2 * (t / 3) >= r) continue;
          auto b = build_spreading_protocol(r, t, alpha, d);
          auto rep = spin::validate_envelope(b.schedule, b.protocol.lattice, PowerLawEnvelope{alpha, 1.0});
          EXPECT_TRUE(rep.ok) << "d=" << d << " alpha=" << alpha << " r=" << r << " ratio " << rep.ratio;
          auto c = connected_correlator_schedule(b.protocol);
          EXPECT_TRUE(spin::validate_envelope(c, b.protocol.lattice, PowerLawEnvelope{alpha, 1.0}).ok);
        }
}

TEST(Spreading, LowerBoundExamples) {
  EXPECT_NEAR(commutator_lower_bound(3.0, 10, 3.0, 1), 6.25e-5, 1e-20);
  EXPECT_NEAR(commutator_lower_bound(3.0, 10, 5.0, 2), 1.5625e-7, 1e-22);
  // Pure t^{2d+1} scaling at fixed r.
  EXPECT_NEAR(commutator_lower_bound(3.3, 40, 3.0, 1) / commutator_lower_bound(3.0, 40, 3.0, 1), std::pow(1.1, 3),
              1e-12);
  EXPECT_THROW(commutator_lower_bound(2.0, 10, 3.0, 1), std::domain_error);
  EXPECT_THROW(commutator_lower_bound(3.0, 4, 0.1, 1), std::domain_error);
}

TEST(Spreading, MatrixElementClosedForms) {
  EXPECT_EQ(std::abs(matrix_element_a(0.0, 5)), 0.0);
  for (double tau : {0.01, 0.2, 1.3}) {
    EXPECT_NEAR(std::abs(matrix_element_a(tau, 1) - cplx(0, -2.0 * std::sin(2 * tau))), 0.0, 1e-14);
    for (int V : {1, 3, 5, 13, 25}) {
      const double c = std::cos(2 * tau * V), s = std::sin(2 * tau * V);
      cplx expect = std::pow(cplx(c, -s), V) - std::pow(cplx(c, s), V);
      EXPECT_NEAR(std::abs(matrix_element_a(tau, V) - expect), 0.0, 1e-12);
      EXPECT_NEAR(std::abs(matrix_element_a(tau, V)), 2.0 * std::abs(std::sin(2 * tau * V * V)), 1e-12);
    }
  }
}

// Dense simulation oracle at ell = 1 on lattices of at most 10 sites.
TEST(Spreading, DenseSimulationMatchesMatrixElement) {
  for (int r : {3, 5, 7})
    for (double alpha : {2.0, 3.0}) {
      auto b = build_spreading_protocol(r, 3.0, alpha, 1);
      ASSERT_LE(b.protocol.lattice.num_sites(), 10);
      const double dense = simulate_spreading_norm(b, SimulationPath::dense);
      const double pauli = simulate_spreading_norm(b, SimulationPath::pauli);
      EXPECT_NEAR(dense, std::abs(matrix_element_a(b.protocol.tau, b.protocol.V)), 1e-9);
      EXPECT_NEAR(pauli, dense, 1e-12);
    }
}

// With a strong coupling the maximum over the Z sectors is no longer at V^2; the
// simulation still follows the block closed form.
TEST(Spreading, ClosedFormTracksStrongCoupling) {
  for (double h : {300.0, 2000.0, 9000.0}) {
    auto b = build_spreading_protocol(4, 3.0, 3.0, 1, h);
    const double sim = simulate_spreading_norm(b, SimulationPath::pauli);
    EXPECT_NEAR(sim, spreading_norm_closed_form(b.protocol.tau, b.protocol.V), 1e-10) << h;
  }
}

TEST(Spreading, TwoDimensionalInstance) {
  auto b = build_spreading_protocol(4, 3.0, 5.0, 2);
  EXPECT_EQ(b.protocol.V, 5);
  auto res = run_spreading_experiment(b);
  EXPECT_TRUE(res.simulated);
  EXPECT_NEAR(res.exact_norm, res.closed_form, 1e-10);
  EXPECT_GE(res.exact_norm, res.lower_bound);
}

TEST(Spreading, ZeroTimeGivesZero) {
  auto b = build_spreading_protocol(6, 0.0, 3.0, 1);
  auto res = run_spreading_experiment(b);
  EXPECT_EQ(res.exact_norm, 0.0);
  EXPECT_TRUE(std::isnan(res.lower_bound));
}

TEST(Spreading, DominanceOnGrid) {
  int checked = 0;
  for (double t : {3.0, 6.0})
    for (int r : {8, 10, 14})
      for (double alpha : {2.0, 2.5, 3.0}) {
        auto b = build_spreading_protocol(r, t, alpha, 1);
        if (b.protocol.epsilon() >= 0.5) continue;
        auto res = run_spreading_experiment(b);
        ASSERT_TRUE(res.simulated);
        EXPECT_NEAR(res.exact_norm, res.closed_form, 1e-9);
        EXPECT_GE(res.exact_norm, res.lower_bound) << "t=" << t << " r=" << r << " alpha=" << alpha;
        ++checked;
      }
  EXPECT_GT(checked, 10);
}

// Step 2 is prod_j exp(-i tau sum_y Z_j Z_y), a diagonal unitary with commuting factors.
TEST(Spreading, StepTwoUnitaryReconstruction) {
  auto b = build_spreading_protocol(3, 3.0, 2.0, 1);
  const auto& p = b.protocol;
  const int L = p.lattice.num_sites();
  spin::Schedule step2 = b.schedule.slice(1.0, 2.0);
  ASSERT_EQ(step2.segments.size(), 1u);
  const Eigen::Index n = Eigen::Index{1} << L;
  spin::Evolver ev(step2);
  Eigen::MatrixXcd cols = Eigen::MatrixXcd::Identity(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd v = cols.col(k);
    ev.evolve_state(v, 0.0, 1.0);
    cols.col(k) = v;
  }
  std::vector<Eigen::MatrixXcd> factors;
  for (Site j : p.ball_origin) {
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index s = 0; s < n; ++s) {
      const double zj = (s >> j & 1) ? -1.0 : 1.0;
      double theta = 0.0;
      for (Site y : p.ball_target) theta += (s >> y & 1) ? -1.0 : 1.0;
      f(s, s) = std::exp(cplx(0.0, -p.tau * zj * theta));
    }
    factors.push_back(f);
  }
  Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& f : factors) prod = prod * f;
  EXPECT_LT((cols - prod).cwiseAbs().maxCoeff(), 1e-12);
  for (const auto& a : factors)
    for (const auto& c : factors) EXPECT_LT((a * c - c * a).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Correlator, ClosedFormMatchesSimulation) {
  EXPECT_EQ(connected_correlator_closed_form(0.0, 3), 0.0);
  for (int r : {3, 4, 10})
    for (double alpha : {2.0, 3.0}) {
      auto res = connected_correlator_experiment(3.0, r, alpha, 1);
      EXPECT_NEAR(res.simulated, res.closed_form, 1e-10) << r << " " << alpha;
      EXPECT_NEAR(res.closed_form, std::sin(2 * res.protocol.tau * 9), 1e-14);
    }
  // Strong coupling exercises the full closed form rather than its small-tau limit.
  auto b = build_spreading_protocol(4, 3.0, 3.0, 1, 900.0);
  EXPECT_NEAR(simulate_connected_correlator(b.protocol), connected_correlator_closed_form(b.protocol.tau, 3), 1e-10);
}

// Cross-check of the state-vector route against Heisenberg operators on 6 sites.
TEST(Correlator, HeisenbergOperatorsAgree) {
  auto b = build_spreading_protocol(3, 3.0, 2.0, 1, 50.0);
  const auto& p = b.protocol;
  const int L = p.lattice.num_sites();
  auto sched = connected_correlator_schedule(p);
  auto X = spin::evolve_operator(OperatorState::single(L, p.origin, 'X').as_dense(), sched).to_dense();
  auto Z = spin::evolve_operator(OperatorState::single(L, p.target, 'Z').as_dense(), sched).to_dense();
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << L);
  std::uint64_t mb = 0, mt = 0;
  for (Site s : p.ball_origin) mb |= 1ull << s;
  for (Site s : p.ball_target) mt |= 1ull << s;
  psi[0] = 0.5;
  psi[static_cast<Eigen::Index>(mb)] = cplx(0, 0.5);
  psi[static_cast<Eigen::Index>(mt)] = cplx(0, 0.5);
  psi[static_cast<Eigen::Index>(mb | mt)] = -0.5;
  const cplx zx = psi.dot(Z * X * psi), z = psi.dot(Z * psi), x = psi.dot(X * psi);
  EXPECT_NEAR((zx - z * x).real(), simulate_connected_correlator(p), 1e-10);
  EXPECT_NEAR(z.real(), 0.0, 1e-12);
}

TEST(Correlator, DominatesBoundOnGrid) {
  for (double t : {3.0, 6.0})
    for (int r : {8, 10, 14})
      for (double alpha : {2.0, 2.5, 3.0}) {
        auto res = connected_correlator_experiment(t, r, alpha, 1);
        if (std::isnan(res.lower_bound)) continue;
        EXPECT_GE(res.closed_form, res.lower_bound);
        if (!std::isnan(res.simulated)) EXPECT_NEAR(res.simulated, res.closed_form, 1e-10);
      }
  EXPECT_NEAR(connected_correlator_lower_bound(3.0, 10, 3.0, 1), 3.125e-5, 1e-20);
  EXPECT_GE(connected_correlator_experiment(3.0, 10, 3.0, 1).closed_form, 3.125e-5);
}
