#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "lightcone/frobenius_walk.hpp"

using namespace lightcone;
using namespace lightcone::walk;

namespace {

Subset set_of(std::initializer_list<int> elems) {
  Subset s = 0;
  for (int e : elems) s |= Subset{1} << (e - 1);
  return s;
}

Eigen::MatrixXd dense_of(const WalkMatrix& M) {
  const auto n = static_cast<Eigen::Index>(M.dim());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Subset S = 0; S < M.dim(); ++S)
    M.for_each_in_row(S, [&](Subset Q, double v) { D(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(Q)) += v; });
  return D;
}

}  // namespace

TEST(Frontier, Examples) {
  auto steep = FrontierFunctional::for_alpha(3.0);
  EXPECT_EQ(steep.regime, Regime::steep);
  EXPECT_EQ(frontier_value(set_of({3, 7}), steep), 7.0);
  EXPECT_EQ(frontier_value(0, steep), 0.0);
  auto shallow = FrontierFunctional::for_alpha(2.0);
  EXPECT_EQ(shallow.regime, Regime::shallow);
  EXPECT_DOUBLE_EQ(shallow.gamma, 0.5);
  EXPECT_DOUBLE_EQ(shallow.Kprime, 0.125);
  EXPECT_DOUBLE_EQ(frontier_value(set_of({4}), shallow), 2.0 / (1.0 + 0.125 * std::log(4.0)));
  EXPECT_EQ(frontier_value(0, shallow), 0.0);
  EXPECT_EQ(FrontierFunctional::for_alpha(2.5).regime, Regime::shallow);
  EXPECT_THROW(FrontierFunctional::for_alpha(1.5), std::invalid_argument);
}

TEST(Frontier, ShallowConvexity) {
  for (double alpha : {1.6, 2.0, 2.5}) {
    auto f = FrontierFunctional::for_alpha(alpha);
    for (int i = 2; i <= 1000; ++i)
      for (int j = 1; j < i; ++j)
        ASSERT_LE(std::abs(f.site_value(i) - f.site_value(j)), f.site_value(i - j) + 1e-12)
            << alpha << " " << i << " " << j;
  }
}

TEST(WalkMatrix, SmallExamples) {
  auto one = build_walk_matrix(1, 3.0, 1.0, WalkVariant::operator_walk);
  EXPECT_EQ(one.dim(), 2u);
  EXPECT_EQ(one.entry(0, 1), 1.0);
  EXPECT_EQ(one.entry(1, 0), 1.0);
  EXPECT_EQ(one.entry(0, 0), 0.0);

  auto m = build_walk_matrix(3, 3.0, 1.0, WalkVariant::operator_walk);
  EXPECT_DOUBLE_EQ(m.entry(set_of({1}), set_of({1, 3})), std::pow(2.0, 2.0 - 3.0));
  EXPECT_EQ(m.entry(set_of({1, 2}), set_of({1, 2})), 0.0);
  // Adding an element behind the frontier does not move it.
  EXPECT_EQ(m.entry(set_of({3}), set_of({1, 3})), 0.0);
  EXPECT_THROW(build_walk_matrix(21, 3.0, 1.0, WalkVariant::operator_walk), std::length_error);
}

TEST(WalkMatrix, SymmetricNonnegativeIrreducible) {
  for (auto variant : {WalkVariant::operator_walk, WalkVariant::state_transfer})
    for (double alpha : {2.0, 3.0}) {
      auto M = build_walk_matrix(6, alpha, 1.3, variant);
      Eigen::MatrixXd D = dense_of(M);
      EXPECT_LT((D - D.transpose()).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_GE(D.minCoeff(), 0.0);
      EXPECT_EQ(D.diagonal().cwiseAbs().maxCoeff(), 0.0);
      EXPECT_TRUE(M.irreducible());
    }
}

TEST(WalkMatrix, StateTransferSwapEntries) {
  auto M = build_walk_matrix(5, 3.0, 1.0, WalkVariant::state_transfer);
  // S = {1,4}, Q = {1,2}: R = {1}, frontier swap 4 -> 2.
  EXPECT_DOUBLE_EQ(M.entry(set_of({1, 4}), set_of({1, 2})), std::pow(2.0, 1.0 - 3.0));
  // R must sit behind both frontiers.
  EXPECT_EQ(M.entry(set_of({2, 4}), set_of({1, 4})), 0.0);
  auto O = build_walk_matrix(5, 3.0, 1.0, WalkVariant::operator_walk);
  EXPECT_EQ(O.entry(set_of({1, 4}), set_of({1, 2})), 0.0);
}

TEST(WalkMatrix, StreamedRowsMatchStoredMatrix) {
  auto M = build_walk_matrix(10, 2.75, 1.0, WalkVariant::state_transfer);
  ASSERT_TRUE(M.materialized());
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(M.dim()), 0.1, 2.0), y1, y2;
  M.multiply(x, y1);
  Eigen::MatrixXd D = dense_of(M);
  y2 = D * x;
  EXPECT_LT((y1 - y2).cwiseAbs().maxCoeff(), 1e-12);
  auto big = build_walk_matrix(17, 3.0, 1.0, WalkVariant::operator_walk);
  EXPECT_FALSE(big.materialized());
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(big.dim())), out;
  big.multiply(ones, out);
  // Row of the empty set: sum_k k^{-1}.
  double expect = 0.0;
  for (int k = 1; k <= 17; ++k) expect += 1.0 / k;
  EXPECT_NEAR(out[0], expect, 1e-12);
}

TEST(PowerIteration, TrivialAndDenseOracle) {
  auto one = build_walk_matrix(1, 3.0, 2.5, WalkVariant::operator_walk);
  EXPECT_NEAR(spectral_norm_power_iteration(one).lambda, 2.5, 1e-12);
  for (auto variant : {WalkVariant::operator_walk, WalkVariant::state_transfer})
    for (double alpha : {2.0, 2.75, 4.0})
      for (int L : {4, 8, 10}) {
        auto M = build_walk_matrix(L, alpha, 1.0, variant);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_of(M), Eigen::EigenvaluesOnly);
        const double exact = es.eigenvalues().maxCoeff();
        auto pi = spectral_norm_power_iteration(M);
        EXPECT_NEAR(pi.lambda, exact, 1e-8 * exact) << L << " " << alpha;
      }
}

TEST(Certificate, DominatesSpectralRadius) {
  for (auto variant : {WalkVariant::operator_walk, WalkVariant::state_transfer})
    for (double alpha : {2.0, 2.25, 2.75, 3.0, 4.0})
      for (int L : {3, 6, 9, 12}) {
        auto M = build_walk_matrix(L, alpha, 1.0, variant);
        const auto phi = TrialVector::standard(M.functional());
        EXPECT_GE(collatz_wielandt_bound(M, phi), spectral_norm_power_iteration(M).lambda * (1 - 1e-9))
            << L << " " << alpha;
      }
  // Any positive vector certifies, not just the ansatz.
  auto M = build_walk_matrix(8, 3.0, 1.0, WalkVariant::operator_walk);
  TrialVector flat{M.functional(), 0.0};
  EXPECT_GE(collatz_wielandt_bound(M, flat), spectral_norm_power_iteration(M).lambda);
}

TEST(Certificate, SteepCaseBelowAPlusAStar) {
  auto M = build_walk_matrix(10, 3.0, 1.0, WalkVariant::operator_walk);
  const double cw = collatz_wielandt_bound(M, TrialVector::standard(M.functional()));
  EXPECT_LE(cw, 1.0 + 2.0);  // A* = 2^{alpha+beta-3}/(alpha+beta-3) = 2
  double expect = 1.0;       // A + A sum_{m <= 9} m^{-2}, attained at S = {1}
  for (int m = 1; m <= 9; ++m) expect += 1.0 / (m * m);
  EXPECT_NEAR(cw, expect, 1e-12);
}

TEST(Certificate, ContractionIdentity) {
  for (double alpha : {2.0, 3.0, 3.7}) {
    auto M = build_walk_matrix(8, alpha, 1.7, WalkVariant::operator_walk);
    auto phi = TrialVector::standard(M.functional());
    for (Subset S = 1; S < M.dim(); ++S) {
      const int j = rightmost(S);
      const Subset R = S & ~(Subset{1} << (j - 1));
      EXPECT_NEAR(M.entry(S, R) * phi(R) / phi(S), 1.7, 1e-12);
    }
  }
  auto zero = build_walk_matrix(5, 3.0, 0.0, WalkVariant::operator_walk);
  EXPECT_EQ(collatz_wielandt_bound(zero, TrialVector::standard(zero.functional())), 0.0);
}

TEST(Certificate, RejectsNonPositiveTrial) {
  auto M = build_walk_matrix(4, 3.0, 1.0, WalkVariant::operator_walk);
  TrialVector underflow{M.functional(), 2000.0};  // 2^-2000 is zero in double precision
  EXPECT_THROW(collatz_wielandt_bound(M, underflow), std::invalid_argument);
  TrialVector overflow{M.functional(), -2000.0};
  EXPECT_THROW(collatz_wielandt_bound(M, overflow), std::invalid_argument);
}

TEST(WalkConstant, DominatesDirectSums) {
  for (double alpha : {1.8, 2.0, 3.0, 4.5}) {
    const double A = default_walk_constant(alpha, 1.0);
    for (int g = 1; g <= 300; ++g) {
      double tail = 0.0;
      for (int m = g; m <= 100000; ++m) tail += std::pow(m, -alpha);
      EXPECT_LE(2.0 * g * tail, A * std::pow(g, 2.0 - alpha) * (1 + 1e-12)) << alpha << " " << g;
    }
  }
  EXPECT_NEAR(default_walk_constant(3.0, 1.0), 2.0 * 1.2020569031595942, 1e-9);
}

TEST(T2, LowerBoundBranches) {
  EXPECT_DOUBLE_EQ(t2_lower_bound(100.0, 0.5, 3.0, 2.0), 0.25 * 100.0);
  EXPECT_DOUBLE_EQ(t2_lower_bound(16.0, 0.5, 2.0, 2.0), 0.25 * 4.0 / (1.0 + 0.125 * std::log(16.0)));
  EXPECT_DOUBLE_EQ(t2_lower_bound(1.0, 0.5, 3.0, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(t2_lower_bound(1.0, 0.5, 2.0, 2.0), 0.25);
  EXPECT_THROW(t2_lower_bound(4.0, 0.5, 1.5, 1.0), std::invalid_argument);
}

namespace {

spin::Schedule power_law_chain(int L, double alpha, double T, bool nearest_only) {
  spin::Schedule s{L, {}};
  spin::Segment seg{T, {}};
  for (int i = 0; i < L; ++i) {
    seg.terms.push_back(spin::HamiltonianTerm::from_pauli("X", {i}, 0.9));
    for (int j = i + 1; j < L; ++j) {
      if (nearest_only && j > i + 1) break;
      const double J = std::pow(j - i, -alpha);
      seg.terms.push_back(spin::HamiltonianTerm::from_pauli("ZZ", {i, j}, J));
      seg.terms.push_back(spin::HamiltonianTerm::from_pauli("XX", {i, j}, 0.5 * J));
    }
  }
  s.append(std::move(seg));
  return s;
}

std::vector<double> grid(double dt, double T) {
  std::vector<double> g;
  for (double t = 0.0; t <= T + 1e-12; t += dt) g.push_back(t);
  return g;
}

}  // namespace

TEST(T2, Measurement) {
  const int L = 7;
  auto op = spin::OperatorState::single(L, 0, 'Z');
  auto nn = power_law_chain(L, 3.0, 20.0, true);
  EXPECT_EQ(measure_t2_delta(nn, op, 0.0, 0, grid(0.5, 20.0)).t2, 0.0);
  EXPECT_THROW(measure_t2_delta(nn, spin::OperatorState::single(L, 2, 'Z'), 0.1, 3, grid(0.5, 20.0)),
               std::invalid_argument);

  std::vector<double> t2;
  for (int x = 1; x < L; ++x) {
    auto m = measure_t2_delta(nn, op, 0.1, x, grid(0.25, 20.0));
    ASSERT_TRUE(std::isfinite(m.t2)) << x;
    EXPECT_LT(m.uncertainty, 1e-8);
    t2.push_back(m.t2);
  }
  for (std::size_t k = 1; k < t2.size(); ++k) EXPECT_GT(t2[k], t2[k - 1]);
  // Linear growth: later increments do not shrink relative to the average speed.
  EXPECT_GE(t2.back() - t2.front(), 0.5 * (t2.size() - 1) * t2.front());

  // Never reached within a short grid.
  EXPECT_TRUE(std::isinf(measure_t2_delta(nn, op, 0.5, L - 1, grid(0.1, 0.3)).t2));
}

TEST(T2, MeasuredAboveCertifiedBound) {
  const int L = 7;
  const double alpha = 3.0;
  auto op = spin::OperatorState::single(L, 0, 'X');
  auto H = power_law_chain(L, alpha, 30.0, false);
  // Per-site coupling h = max over pairs of summed term norms times D^alpha.
  const double h = 1.5;
  const double A = default_walk_constant(alpha, h);
  auto M = build_walk_matrix(L - 1, alpha, A, WalkVariant::operator_walk);
  const double C = collatz_wielandt_bound(M, TrialVector::standard(M.functional()));
  for (int x = 2; x < L; ++x)
    for (double delta : {0.05, 0.2}) {
      auto m = measure_t2_delta(H, op, delta, x, grid(0.1, 30.0));
      if (std::isinf(m.t2)) continue;
      EXPECT_GE(m.t2, t2_lower_bound(x, delta, alpha, C)) << x << " " << delta;
    }
}

TEST(T2, MarkovConsistency) {
  const int L = 6;
  auto H = power_law_chain(L, 2.0, 2.0, false);
  auto O = spin::evolve_operator(spin::OperatorState::single(L, 0, 'Y').as_dense(), H);
  auto w = spin::right_weight_distribution(O);
  double mean = 0.0;
  for (int y = 0; y < L; ++y) mean += y * w[static_cast<std::size_t>(y)];
  for (int x = 1; x < L; ++x) {
    double tail = 0.0;
    for (int y = x; y < L; ++y) tail += w[static_cast<std::size_t>(y)];
    EXPECT_LE(tail, mean / x + 1e-15);
  }
}

TEST(Tightness, ClosedFormMatchesDense) {
  EXPECT_EQ(frobenius_tightness_weight(6, 3.0, 0.0), 0.0);
  EXPECT_THROW(frobenius_tightness_weight(7, 3.0, 1.0), std::invalid_argument);
  for (double t : {0.01, 0.5, 7.0, 40.0}) {
    const int L = 6;
    auto O = frobenius_tightness_operator(L);
    auto Ot = spin::evolve_operator(O.as_dense(), frobenius_tightness_schedule(L, 3.0, t));
    const double n2 = spin::frobenius_norm(Ot);
    auto w = spin::right_weight_distribution((1.0 / n2) * Ot);
    double beyond = 0.0;
    for (int y = 2 * L / 3; y < L; ++y) beyond += w[static_cast<std::size_t>(y)];
    EXPECT_NEAR(std::sqrt(beyond), frobenius_tightness_weight(L, 3.0, t), 1e-8) << t;
  }
  // The Pauli route agrees too (all generators commute).
  auto Op = spin::evolve_operator(frobenius_tightness_operator(9), frobenius_tightness_schedule(9, 2.5, 3.0));
  auto wp = spin::right_weight_distribution((1.0 / spin::frobenius_norm(Op)) * Op);
  double beyond = 0.0;
  for (int y = 6; y < 9; ++y) beyond += wp[static_cast<std::size_t>(y)];
  EXPECT_NEAR(std::sqrt(beyond), frobenius_tightness_weight(9, 2.5, 3.0), 1e-10);
}

TEST(Tightness, ScalingSlope) {
  std::vector<double> lx, ly;
  for (int L = 6; L <= 30; L += 3) {
    lx.push_back(std::log(L));
    ly.push_back(std::log(frobenius_tightness_weight(L, 3.0, 1e-3)));
  }
  const double n = lx.size();
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k] / n;
    my += ly[k] / n;
  }
  double num = 0, den = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    num += (lx[k] - mx) * (ly[k] - my);
    den += (lx[k] - mx) * (lx[k] - mx);
  }
  EXPECT_NEAR(num / den, -1.5, 0.05);
  // The exact small-t weight is sqrt(n) * 2 n t / L^alpha, twice the first-order expression.
  for (int L : {6, 12, 30}) {
    const double t = 1e-4;
    EXPECT_NEAR(frobenius_tightness_weight(L, 3.0, t) / frobenius_tightness_first_order(L, 3.0, t), 2.0, 1e-6);
  }
}
