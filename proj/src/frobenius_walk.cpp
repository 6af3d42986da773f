#include "lightcone/frobenius_walk.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lightcone::walk {

using spin::OperatorState;

FrontierFunctional FrontierFunctional::for_alpha(double alpha) {
  if (!(alpha > 1.5)) throw std::invalid_argument("frontier functional needs alpha > 3/2");
  FrontierFunctional f;
  f.alpha = alpha;
  if (alpha > 2.5) {
    f.regime = Regime::steep;
  } else {
    f.regime = Regime::shallow;
    f.gamma = alpha - 1.5;
    f.Kprime = f.gamma / 4.0;
  }
  return f;
}

double FrontierFunctional::site_value(int j) const {
  if (j <= 0) return 0.0;
  if (regime == Regime::steep) return j;
  return std::pow(j, gamma) / (1.0 + Kprime * std::log(static_cast<double>(j)));
}

int rightmost(Subset S) { return S == 0 ? 0 : 64 - std::countl_zero(S); }

double frontier_value(Subset S, const FrontierFunctional& f) {
  // Both functionals increase with the site, so the maximum sits at the right-most element.
  return f.site_value(rightmost(S));
}

WalkMatrix::WalkMatrix(int L, FrontierFunctional f, double A, WalkVariant variant)
    : L_(L), f_(f), A_(A), variant_(variant) {
  if (L < 1 || L > kMaxWalkSites) throw std::length_error("walk matrix size outside 1..20");
  if (!(f.alpha > 1.5)) throw std::invalid_argument("walk matrix needs alpha > 3/2");
  if (!(A >= 0.0)) throw std::invalid_argument("A must be nonnegative");
  if (L <= kMaxMaterializedSites) {
    std::vector<Eigen::Triplet<double>> trip;
    for (Subset S = 0; S < dim(); ++S)
      for_each_in_row(S, [&](Subset Q, double v) {
        trip.emplace_back(static_cast<int>(S), static_cast<int>(Q), v);
      });
    sparse_.resize(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    sparse_.setFromTriplets(trip.begin(), trip.end());
    materialized_ = true;
  }
}

double WalkMatrix::add_remove_weight(int g) const {
  if (f_.regime == Regime::steep) return A_ * std::pow(g, 2.0 - f_.alpha);
  return A_ * std::pow(g, f_.gamma + 1.0 - f_.alpha) / (1.0 + f_.Kprime * std::log(static_cast<double>(g)));
}

double WalkMatrix::swap_weight(int g) const {
  if (f_.regime == Regime::steep) return A_ * std::pow(g, 1.0 - f_.alpha);
  return A_ * std::pow(g, f_.gamma - f_.alpha) / (1.0 + f_.Kprime * std::log(static_cast<double>(g)));
}

void WalkMatrix::for_each_in_row(Subset S, const std::function<void(Subset, double)>& visit) const {
  const int j = rightmost(S);
  const Subset R = j > 0 ? S & ~(Subset{1} << (j - 1)) : 0;
  const int jstar = rightmost(R);
  // Dropping the right-most element moves the frontier back to j*.
  if (j > 0) visit(R, add_remove_weight(j - jstar));
  // Adding an element beyond the frontier.
  for (int k = j + 1; k <= L_; ++k) visit(S | (Subset{1} << (k - 1)), add_remove_weight(k - j));
  if (variant_ == WalkVariant::state_transfer && j > 0) {
    for (int n = jstar + 1; n <= L_; ++n) {
      if (n == j) continue;
      visit(R | (Subset{1} << (n - 1)), swap_weight(std::abs(n - j)));
    }
  }
}

double WalkMatrix::entry(Subset S, Subset Q) const {
  double out = 0.0;
  for_each_in_row(S, [&](Subset q, double v) {
    if (q == Q) out = v;
  });
  return out;
}

void WalkMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  if (static_cast<std::uint64_t>(x.size()) != dim()) throw std::invalid_argument("vector size mismatch");
  if (materialized_) {
    y.noalias() = sparse_ * x;
    return;
  }
  y.resize(x.size());
  for (Subset S = 0; S < dim(); ++S) {
    double acc = 0.0;
    for_each_in_row(S, [&](Subset Q, double v) { acc += v * x[static_cast<Eigen::Index>(Q)]; });
    y[static_cast<Eigen::Index>(S)] = acc;
  }
}

bool WalkMatrix::irreducible() const {
  std::vector<char> seen(dim(), 0);
  std::vector<Subset> stack{0};
  seen[0] = 1;
  std::uint64_t count = 1;
  while (!stack.empty()) {
    const Subset S = stack.back();
    stack.pop_back();
    for_each_in_row(S, [&](Subset Q, double v) {
      if (v > 0.0 && !seen[Q]) {
        seen[Q] = 1;
        ++count;
        stack.push_back(Q);
      }
    });
  }
  return count == dim();
}

double WalkMatrix::max_row_sum() const {
  double best = 0.0;
  for (Subset S = 0; S < dim(); ++S) {
    double acc = 0.0;
    for_each_in_row(S, [&](Subset, double v) { acc += v; });
    best = std::max(best, acc);
  }
  return best;
}

WalkMatrix build_walk_matrix(int L, double alpha, double A, WalkVariant variant) {
  return WalkMatrix(L, FrontierFunctional::for_alpha(alpha), A, variant);
}

double default_walk_constant(double alpha, double h) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must exceed 1");
  // Hurwitz zeta(alpha, g) by direct summation up to N plus an Euler-Maclaurin tail.
  constexpr int N = 200000;
  const auto tail = [&](double n) {
    return std::pow(n, 1.0 - alpha) / (alpha - 1.0) + 0.5 * std::pow(n, -alpha) +
           alpha * std::pow(n, -alpha - 1.0) / 12.0;
  };
  std::vector<double> suffix(N + 2, 0.0);
  suffix[N + 1] = tail(N + 1.0);
  for (int m = N; m >= 1; --m) suffix[static_cast<std::size_t>(m)] = suffix[static_cast<std::size_t>(m) + 1] + std::pow(m, -alpha);
  double best = 0.0;
  for (int g = 1; g <= N; g = g < 100 ? g + 1 : g * 2)
    best = std::max(best, std::pow(g, alpha - 1.0) * suffix[static_cast<std::size_t>(g)]);
  return 2.0 * h * best;
}

TrialVector TrialVector::standard(const FrontierFunctional& f) { return TrialVector{f, f.alpha - 2.0}; }

double TrialVector::gap_factor(int g) const {
  if (f.regime == Regime::steep) return std::pow(g, -beta);
  return std::pow(g, f.gamma + 1.0 - f.alpha) / (1.0 + f.Kprime * std::log(static_cast<double>(g)));
}

double TrialVector::operator()(Subset S) const {
  double phi = 1.0;
  int prev = 0;
  while (S) {
    const int n = std::countr_zero(S) + 1;
    phi *= gap_factor(n - prev);
    prev = n;
    S &= S - 1;
  }
  return phi;
}

double collatz_wielandt_bound(const WalkMatrix& M, const TrialVector& phi) {
  double best = 0.0;
  for (Subset S = 0; S < M.dim(); ++S) {
    const double ps = phi(S);
    if (!(ps > 0.0) || !std::isfinite(ps)) throw std::invalid_argument("trial vector entry is not positive");
    double acc = 0.0;
    M.for_each_in_row(S, [&](Subset Q, double v) { acc += v * phi(Q); });
    best = std::max(best, acc / ps);
  }
  return best;
}

PowerIterationResult spectral_norm_power_iteration(const WalkMatrix& M, double tol, int max_iter) {
  const auto n = static_cast<Eigen::Index>(M.dim());
  const double shift = 0.5 * M.max_row_sum();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized(), w(n);
  PowerIterationResult res;
  if (shift == 0.0) return res;
  for (int it = 1; it <= max_iter; ++it) {
    M.multiply(v, w);
    const double lambda = v.dot(w);
    res.iterations = it;
    res.lambda = lambda;
    res.residual = (w - lambda * v).norm() / std::max(std::abs(lambda), 1e-300);
    if (res.residual < tol) return res;
    w += shift * v;
    v = w.normalized();
  }
  std::ostringstream msg;
  msg << "power iteration did not converge: residual " << res.residual << " after " << max_iter << " iterations";
  throw std::runtime_error(msg.str());
}

double t2_lower_bound(double x, double delta, double alpha, double C) {
  if (!(alpha > 1.5)) throw std::invalid_argument("t2 bound needs alpha > 3/2");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  const double K = delta / C;
  const auto f = FrontierFunctional::for_alpha(alpha);
  if (f.regime == Regime::steep) return K * x;
  return K * std::pow(x, alpha - 1.5) / (1.0 + f.Kprime * std::log(x));
}

T2Measurement measure_t2_delta(const spin::Schedule& schedule, const OperatorState& op0, double delta, int x,
                               const std::vector<double>& grid, double bisection_tol) {
  const int L = schedule.num_sites;
  if (op0.num_sites() != L) throw std::invalid_argument("operator/schedule size mismatch");
  if (L > spin::kMaxDenseOperatorSites) throw std::length_error("measure_t2_delta needs L <= 12");
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  Eigen::MatrixXcd m = op0.to_dense();
  const double nrm = std::sqrt((m.adjoint() * m).trace().real() / static_cast<double>(m.rows()));
  if (!(nrm > 0.0)) throw std::invalid_argument("zero operator");
  m /= nrm;
  {
    const auto w = spin::right_weight_distribution(OperatorState::from_dense(L, m));
    double outside = 0.0;
    for (int y = 1; y < L; ++y) outside += w[static_cast<std::size_t>(y)];
    if (outside > 1e-12) throw std::invalid_argument("op0 is not localized on site 0");
  }
  const auto beyond = [&](const Eigen::MatrixXcd& op) {
    const auto w = spin::right_weight_distribution(OperatorState::from_dense(L, op));
    double s = 0.0;
    for (int y = std::max(x, 0); y < L; ++y) s += w[static_cast<std::size_t>(y)];
    return s;
  };

  spin::Evolver ev(schedule);
  double t_prev = 0.0;
  Eigen::MatrixXcd prev = m;
  for (double t : grid) {
    if (t < t_prev) throw std::invalid_argument("time grid must be increasing");
    Eigen::MatrixXcd cur = prev;
    if (t > t_prev) ev.evolve_dense_operator(cur, t_prev, t);
    if (beyond(cur) > delta) {
      if (t == t_prev) return {t, 0.0};
      double lo = t_prev, hi = t;
      while (hi - lo > bisection_tol) {
        const double mid = 0.5 * (lo + hi);
        Eigen::MatrixXcd probe = prev;
        ev.evolve_dense_operator(probe, t_prev, mid);
        (beyond(probe) > delta ? hi : lo) = mid;
      }
      return {0.5 * (lo + hi), 0.5 * (hi - lo)};
    }
    prev = std::move(cur);
    t_prev = t;
  }
  return {};
}

OperatorState frobenius_tightness_operator(int L) {
  if (L < 3 || L % 3 != 0) throw std::invalid_argument("L must be a positive multiple of 3");
  const int n = L / 3;
  // prod (X + iY) = prod 2|0><1| on the left block, plus its adjoint.
  spin::PauliSum plus(L);
  for (std::uint64_t ymask = 0; ymask < (std::uint64_t{1} << n); ++ymask) {
    spin::PauliString p;
    p.x = (std::uint64_t{1} << n) - 1;
    p.z = ymask;
    const int ny = std::popcount(ymask);
    spin::cplx c = std::pow(spin::cplx(0.0, 1.0), ny);
    plus.add(p, c + std::conj(c));
  }
  plus.prune(1e-15);
  return OperatorState::from_pauli(std::move(plus));
}

spin::Schedule frobenius_tightness_schedule(int L, double alpha, double t) {
  if (L < 3 || L % 3 != 0) throw std::invalid_argument("L must be a positive multiple of 3");
  spin::Schedule s{L, {}};
  if (t <= 0.0) return s;
  spin::Segment seg{t, {}};
  const double J = std::pow(L, -alpha);
  for (int j = 0; j < L / 3; ++j)
    for (int k = 2 * L / 3; k < L; ++k) seg.terms.push_back(spin::HamiltonianTerm::from_pauli("ZZ", {j, k}, J));
  s.append(std::move(seg));
  return s;
}

double frobenius_tightness_weight(int L, double alpha, double t) {
  if (L < 3 || L % 3 != 0) throw std::invalid_argument("L must be a positive multiple of 3");
  const double n = L / 3;
  const double phi = 2.0 * n * t / std::pow(L, alpha);
  // 1 - cos^{2n} without cancellation for small phi: cos(phi) = 1 - 2 sin^2(phi/2).
  const double s = std::sin(0.5 * phi);
  const double c_minus_1 = -2.0 * s * s;
  const double log_c = c_minus_1 > -1.0 ? std::log1p(c_minus_1) : std::log(std::abs(std::cos(phi)));
  const double log_c2n = 2.0 * n * log_c;
  return std::sqrt(-std::expm1(log_c2n));
}

double frobenius_tightness_first_order(int L, double alpha, double t) {
  return std::sqrt(L / 3.0) * t / (3.0 * std::pow(L, alpha - 1.0));
}

}  // namespace lightcone::walk
