#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lightcone/spin_sim.hpp"

namespace lightcone::walk {

// Subsets of {1, ..., L} are bitmasks: bit (i - 1) is element i. The empty set plays
// the role of the {0} sentinel (frontier value 0).
using Subset = std::uint64_t;

inline constexpr int kMaxWalkSites = 20;
inline constexpr int kMaxMaterializedSites = 16;

enum class Regime { steep, shallow };

struct FrontierFunctional {
  Regime regime = Regime::steep;
  double alpha = 3.0;
  double gamma = 0.0;   // shallow only: alpha - 3/2
  double Kprime = 0.0;  // shallow only: gamma / 4

  // Steep for alpha > 5/2, shallow for 3/2 < alpha <= 5/2.
  static FrontierFunctional for_alpha(double alpha);

  // F_{{j}}: j (steep) or j^gamma / (1 + K' ln j) (shallow); 0 for j = 0.
  double site_value(int j) const;
};

// Largest element of S, 0 for the empty set.
int rightmost(Subset S);

double frontier_value(Subset S, const FrontierFunctional& f);

enum class WalkVariant { operator_walk, state_transfer };

// Symmetric nonnegative walk matrix on the 2^L subsets. Entries depend on the gap g
// between the right-most elements of the two subsets:
//   add/remove one element (frontier moves): A g^{2-alpha} or A g^{gamma+1-alpha}/(1+K' ln g)
//   state_transfer swap of the right-most element: A g^{1-alpha} or A g^{gamma-alpha}/(1+K' ln g)
class WalkMatrix {
 public:
  WalkMatrix(int L, FrontierFunctional f, double A, WalkVariant variant);

  int L() const { return L_; }
  std::uint64_t dim() const { return std::uint64_t{1} << L_; }
  double A() const { return A_; }
  WalkVariant variant() const { return variant_; }
  const FrontierFunctional& functional() const { return f_; }

  // Calls visit(Q, M_SQ) for every nonzero entry of row S.
  void for_each_in_row(Subset S, const std::function<void(Subset, double)>& visit) const;
  double entry(Subset S, Subset Q) const;

  // y = M x; uses the stored sparse matrix when L <= 16 and streams rows otherwise.
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  bool materialized() const { return materialized_; }

  // Every subset reachable from the empty set through nonzero entries.
  bool irreducible() const;
  double max_row_sum() const;

 private:
  double add_remove_weight(int gap) const;
  double swap_weight(int gap) const;

  int L_;
  FrontierFunctional f_;
  double A_;
  WalkVariant variant_;
  bool materialized_ = false;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse_;
};

WalkMatrix build_walk_matrix(int L, double alpha, double A, WalkVariant variant);

// 2h sup_{g >= 1} g^{alpha-1} sum_{m >= g} m^{-alpha}: a finite witness for the
// constant A, valid in both regimes because F_g (1 + K' ln g) / g^{gamma+1-alpha} = g^{alpha-1}.
double default_walk_constant(double alpha, double h = 1.0);

// phi_S = prod_i w(n_i - n_{i-1}) over the ordered elements with n_0 = 0;
// w(g) = g^{-beta} (steep) or g^{gamma+1-alpha}/(1 + K' ln g) (shallow).
struct TrialVector {
  FrontierFunctional f;
  double beta = 1.0;

  static TrialVector standard(const FrontierFunctional& f);  // beta = alpha - 2
  double gap_factor(int g) const;
  double operator()(Subset S) const;
};

// max_S (1/phi_S) sum_Q M_SQ phi_Q, streamed over rows.
double collatz_wielandt_bound(const WalkMatrix& M, const TrialVector& phi);

struct PowerIterationResult {
  double lambda = 0.0;
  double residual = 0.0;  // ||M v - lambda v|| / lambda
  int iterations = 0;
};

// Largest eigenvalue of M via power iteration on M + c I (c = half the largest row sum,
// which removes the -lambda_max mirror of bipartite walks). Stops once the relative
// residual drops below tol; throws std::runtime_error with the residual otherwise.
PowerIterationResult spectral_norm_power_iteration(const WalkMatrix& M, double tol = 1e-9,
                                                   int max_iter = 2'000'000);

// K x (alpha > 5/2) or K x^{alpha-3/2} / (1 + K' ln x) with K = delta / C.
double t2_lower_bound(double x, double delta, double alpha, double C);

struct T2Measurement {
  double t2 = std::numeric_limits<double>::infinity();
  double uncertainty = 0.0;  // half-width of the final bracket
};

// First time at which sum_{y >= x} (O(t)|Q_y|O(t)) / (O|O) exceeds delta. Scans the
// grid, then bisects the bracketing step. op0 must act only on site 0.
T2Measurement measure_t2_delta(const spin::Schedule& schedule, const spin::OperatorState& op0, double delta, int x,
                               const std::vector<double>& grid, double bisection_tol = 1e-9);

// Operator prod_{i < L/3} X+_i + h.c. and H = sum_{j < L/3, k >= 2L/3} Z_j Z_k / L^alpha.
spin::OperatorState frobenius_tightness_operator(int L);
spin::Schedule frobenius_tightness_schedule(int L, double alpha, double t);

// Frobenius norm of the normalized part of O(t) whose right-most site is >= 2L/3:
// sqrt(1 - cos^{2n}(2 n t / L^alpha)), n = L/3.
double frobenius_tightness_weight(int L, double alpha, double t);

// sqrt(L/3) t / (3 L^{alpha-1}), the first-order expression to compare against.
double frobenius_tightness_first_order(int L, double alpha, double t);

}  // namespace lightcone::walk
