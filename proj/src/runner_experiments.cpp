#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <sstream>

#include "lightcone/boson_sampler.hpp"
#include "lightcone/bounds.hpp"
#include "lightcone/free_io.hpp"
#include "lightcone/free_walk.hpp"
#include "lightcone/frobenius_walk.hpp"
#include "lightcone/lr_protocols.hpp"
#include "lightcone/spin_io.hpp"
#include "lightcone/spin_sim.hpp"
#include "lightcone/transfer.hpp"
#include "runner_internal.hpp"

namespace lightcone::runner {

namespace {

using Row = std::vector<std::string>;

std::string cell(double x) { return format_real(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell(long long x) { return std::to_string(x); }
std::string cell(const std::string& s) { return s; }
std::string cell(const char* s) { return s; }
std::string cell(std::string_view s) { return std::string(s); }

template <class... T>
Row row(const T&... xs) {
  return Row{cell(xs)...};
}

template <class T>
void require_nonempty(const ExperimentConfig& c, const std::string& key, const std::vector<T>& v) {
  if (v.empty()) throw c.error(key, "grid is empty");
}

template <class T, class P>
void require_all(const ExperimentConfig& c, const std::string& key, const std::vector<T>& v, P&& ok,
                 const std::string& what) {
  require_nonempty(c, key, v);
  for (const auto& x : v)
    if (!ok(x)) throw c.error(key, what);
}

int single_dimension(const ExperimentConfig& c, int lo, int hi) {
  const int d = c.integer("d", 1);
  if (d < lo || d > hi) throw c.error("d", "dimension must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return d;
}

// Every (a, b) pair in row-major order.
template <class A, class B>
std::vector<std::pair<A, B>> product(const std::vector<A>& a, const std::vector<B>& b) {
  std::vector<std::pair<A, B>> out;
  for (const auto& x : a)
    for (const auto& y : b) out.emplace_back(x, y);
  return out;
}

std::vector<Row> flatten(std::vector<std::vector<Row>> groups) {
  std::vector<Row> out;
  for (auto& g : groups)
    for (auto& r : g) out.push_back(std::move(r));
  return out;
}

// ---------------------------------------------------------------------------

struct SpreadPoint {
  int d;
  double alpha, t;
  int r;
};

std::vector<SpreadPoint> spread_grid(const ExperimentConfig& c, const Context& ctx) {
  const int d = single_dimension(c, 1, 3);
  const auto alphas = c.reals("alpha", {2.0, 2.5, 3.0});
  const auto ts = c.reals("t", {3.0, 6.0});
  const auto rs = c.ints("r", {8, 10, 14});
  require_all(c, "alpha", alphas, [](double a) { return a > 0.0; }, "alpha must be positive");
  require_all(c, "t", ts, [](double t) { return t >= 0.0 && std::fmod(t, 3.0) == 0.0; }, "t must be a nonnegative multiple of 3");
  require_all(c, "r", rs, [](int r) { return r >= 1; }, "r must be positive");
  std::vector<SpreadPoint> pts;
  for (double a : alphas)
    for (double t : ts)
      for (int r : rs) {
        const int ell = static_cast<int>(t / 3.0);
        if (!(2 * ell < r)) throw c.error("t", "t/3 must stay below r/2 (t = " + format_real(t) + ", r = " + std::to_string(r) + ")");
        ctx.check_extent(c, "r", r + 2 * ell + 1);
        ctx.check_sites(c, "r", static_cast<long long>(r + 2 * ell + 1) * static_cast<long long>(std::pow(2 * ell + 1, d - 1)));
        pts.push_back({d, a, t, r});
      }
  return pts;
}

RunOutput run_spread(const ExperimentConfig& c, const Context& ctx) {
  const double h = c.real("h", 1.0);
  if (!(h >= std::numbers::pi / 4.0)) throw c.error("h", "h must be at least pi/4 for unit-time CNOT layers");
  const auto pts = spread_grid(c, ctx);
  RunOutput out;
  out.table.columns = {
      {"d", "1", "lattice dimension"},
      {"alpha", "1", "power-law exponent"},
      {"t", "1/h", "protocol time"},
      {"r", "sites", "distance between the two operators"},
      {"ell", "sites", "ball radius t/3"},
      {"V", "sites", "sites per ball"},
      {"tau", "1/h", "coupling phase (t/3) h / (2r)^alpha"},
      {"lower_bound", "1", "t^{2d+1}/(3^{1+2d} 2^{1+alpha} r^alpha); nan when V^2 tau >= 1/2"},
      {"exact_norm", "1", "||[X_0(t), X_r]||"},
      {"ratio", "1", "exact_norm / lower_bound"},
  };
  out.table.checks = {"exact_norm >= lower_bound wherever lower_bound is defined"};
  out.table.rows = parallel_map<Row>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto& p = pts[k];
    const auto b = protocols::build_spreading_protocol(p.r, p.t, p.alpha, p.d, h);
    const auto res = protocols::run_spreading_experiment(b);
    return row(p.d, p.alpha, p.t, p.r, b.protocol.ell, static_cast<long long>(b.protocol.V), b.protocol.tau,
               res.lower_bound, res.exact_norm, res.exact_norm / res.lower_bound);
  });
  int held = 0, checked = 0;
  for (const auto& r : out.table.rows)
    if (r[7] != "nan") {
      ++checked;
      held += std::stod(r[8]) >= std::stod(r[7]);
    }
  out.summary = "spread: " + std::to_string(held) + "/" + std::to_string(checked) + " points above the lower bound";
  return out;
}

RunOutput run_correlator(const ExperimentConfig& c, const Context& ctx) {
  const double h = c.real("h", 1.0);
  if (!(h >= std::numbers::pi / 4.0)) throw c.error("h", "h must be at least pi/4 for unit-time CNOT layers");
  const auto pts = spread_grid(c, ctx);
  RunOutput out;
  out.table.columns = {
      {"d", "1", "lattice dimension"},
      {"alpha", "1", "power-law exponent"},
      {"t", "1/h", "protocol time"},
      {"r", "sites", "distance between the balls"},
      {"V", "sites", "sites per ball"},
      {"closed_form", "1", "(i/2)((c - is)^V - (c + is)^V), c = cos 2 tau V, s = sin 2 tau V"},
      {"simulated", "1", "state-vector value; nan above the state cap"},
      {"lower_bound", "1", "t^{2d+1}/(3^{1+2d} 2^{2+alpha} r^alpha); nan when V^2 tau >= 1/2"},
  };
  out.table.checks = {"simulated == closed_form within 1e-10", "closed_form >= lower_bound wherever defined"};
  out.table.rows = parallel_map<Row>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto& p = pts[k];
    const auto res = protocols::connected_correlator_experiment(p.t, p.r, p.alpha, p.d, h);
    return row(p.d, p.alpha, p.t, p.r, static_cast<long long>(res.protocol.V), res.closed_form, res.simulated,
               res.lower_bound);
  });
  out.summary = "correlator: " + std::to_string(out.table.rows.size()) + " points";
  return out;
}

// ---------------------------------------------------------------------------

walk::WalkVariant parse_variant(const ExperimentConfig& c, const std::string& v) {
  if (v == "operator") return walk::WalkVariant::operator_walk;
  if (v == "state_transfer") return walk::WalkVariant::state_transfer;
  throw c.error("variant", "variant must be operator or state_transfer");
}

RunOutput run_frobenius(const ExperimentConfig& c, const Context& ctx) {
  const auto Ls = c.ints("L", {6, 8, 10, 12});
  const auto alphas = c.reals("alpha", {2.0, 2.75, 3.0, 4.0});
  const auto variants = c.words("variant", {"operator"});
  const double h = c.real("h", 1.0);
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  require_all(c, "L", Ls, [](int L) { return L >= 1; }, "L must be positive");
  require_all(c, "alpha", alphas, [](double a) { return a > 1.5; }, "alpha must exceed 3/2");
  require_nonempty(c, "variant", variants);
  for (const auto& v : variants) parse_variant(c, v);
  for (int L : Ls) {
    ctx.check_extent(c, "L", L);
    if (L > walk::kMaxWalkSites || (std::int64_t{1} << L) > ctx.caps.max_subsets)
      throw ResourceCapError(c.source() + ": `L` = " + std::to_string(L) + " gives 2^L subsets above max_subsets = " +
                             std::to_string(ctx.caps.max_subsets));
  }
  struct Point {
    std::string variant;
    double alpha;
    int L;
  };
  std::vector<Point> pts;
  for (const auto& v : variants)
    for (double a : alphas)
      for (int L : Ls) pts.push_back({v, a, L});
  RunOutput out;
  out.table.columns = {
      {"L", "sites", "walk length (subsets of 1..L)"},
      {"alpha", "1", "power-law exponent"},
      {"variant", "-", "operator or state_transfer walk"},
      {"cw_bound", "h", "Collatz-Wielandt bound max_S (M phi)_S / phi_S with the product trial vector"},
      {"lambda_max", "h", "largest eigenvalue of M by power iteration"},
      {"ratio", "1", "cw_bound / lambda_max"},
  };
  out.table.checks = {"cw_bound >= lambda_max", "cw_bound grows by less than 1% per step in L"};
  out.table.rows = parallel_map<Row>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto& p = pts[k];
    const double A = c.real("A", walk::default_walk_constant(p.alpha, h));
    const auto M = walk::build_walk_matrix(p.L, p.alpha, A, parse_variant(c, p.variant));
    const double cw = walk::collatz_wielandt_bound(M, walk::TrialVector::standard(M.functional()));
    const double lam = walk::spectral_norm_power_iteration(M).lambda;
    return row(p.L, p.alpha, p.variant, cw, lam, cw / lam);
  });
  out.summary = "frobenius: " + std::to_string(out.table.rows.size()) + " walk matrices";
  return out;
}

spin::Schedule long_range_chain(int L, double alpha, double field, double T) {
  spin::Schedule s{L, {}};
  spin::Segment seg{T, {}};
  for (int i = 0; i < L; ++i) {
    seg.terms.push_back(spin::HamiltonianTerm::from_pauli("X", {i}, field));
    for (int j = i + 1; j < L; ++j) {
      const double J = std::pow(j - i, -alpha);
      seg.terms.push_back(spin::HamiltonianTerm::from_pauli("ZZ", {i, j}, J));
      seg.terms.push_back(spin::HamiltonianTerm::from_pauli("XX", {i, j}, 0.5 * J));
    }
  }
  s.append(std::move(seg));
  return s;
}

RunOutput run_t2(const ExperimentConfig& c, const Context& ctx) {
  const int L = c.integer("L", 7);
  const double alpha = c.real("alpha", 3.0);
  const double field = c.real("field", 0.9);
  const double T = c.real("T", 30.0);
  const double dt = c.real("dt", 0.1);
  const auto deltas = c.reals("delta", {0.05, 0.2});
  std::vector<int> xs_default;
  for (int x = 1; x < L; ++x) xs_default.push_back(x);
  const auto xs = c.ints("x", xs_default);
  if (L < 2) throw c.error("L", "need at least two sites");
  if (!(alpha > 1.5)) throw c.error("alpha", "alpha must exceed 3/2");
  if (!(T > 0.0)) throw c.error("T", "T must be positive");
  if (!(dt > 0.0 && dt <= T)) throw c.error("dt", "dt must be in (0, T]");
  require_all(c, "delta", deltas, [](double d) { return d > 0.0 && d < 1.0; }, "delta must be in (0, 1)");
  require_all(c, "x", xs, [L](int x) { return x >= 1 && x < L; }, "x must be in [1, L)");
  ctx.check_extent(c, "L", L);
  if (L > spin::kMaxDenseOperatorSites)
    throw ResourceCapError(c.source() + ": `L` above the dense operator cap of " + std::to_string(spin::kMaxDenseOperatorSites));

  const auto H = long_range_chain(L, alpha, field, T);
  const auto chain = LatticeGraph::chain(L);
  // Smallest h for which the Hamiltonian obeys h / D^alpha.
  const double h = spin::validate_envelope(H, chain, PowerLawEnvelope{alpha, 1.0}).ratio;
  const auto M = walk::build_walk_matrix(L - 1, alpha, walk::default_walk_constant(alpha, h), walk::WalkVariant::operator_walk);
  const double C = walk::collatz_wielandt_bound(M, walk::TrialVector::standard(M.functional()));
  std::vector<double> grid;
  for (int k = 0; k * dt <= T + 1e-12; ++k) grid.push_back(k * dt);
  const auto op = spin::OperatorState::single(L, 0, 'X');
  const auto pts = product(xs, deltas);

  RunOutput out;
  out.table.columns = {
      {"L", "sites", "chain length"},
      {"alpha", "1", "power-law exponent"},
      {"x", "sites", "distance from the operator's site"},
      {"delta", "1", "weight threshold"},
      {"measured_t2", "1/h", "first time the weight at sites >= x exceeds delta; inf if never within T"},
      {"bound_t2", "1/h", "certified lower bound from the walk's Collatz-Wielandt constant"},
  };
  out.table.checks = {"measured_t2 >= bound_t2"};
  out.table.rows = parallel_map<Row>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto [x, delta] = pts[k];
    const auto m = walk::measure_t2_delta(H, op, delta, x, grid);
    return row(L, alpha, x, delta, m.t2, walk::t2_lower_bound(x, delta, alpha, C));
  });
  out.summary = "t2: C = " + format_real(C) + ", h = " + format_real(h);
  return out;
}

// ---------------------------------------------------------------------------

RunOutput run_free_tail(const ExperimentConfig& c, const Context& ctx) {
  const std::string model = c.text("model", "power");
  if (model != "power" && model != "nn" && model != "random") throw c.error("model", "model must be power, nn or random");
  const int d = single_dimension(c, 1, 3);
  const auto alphas = c.reals("alpha", {3.0});
  const auto ns = c.ints("n", {1024});
  const int steps = c.integer("t_steps", 8);
  const double h = c.real("h", 1.0);
  const double eps = c.real("epsilon", 0.1);
  require_all(c, "alpha", alphas, [d](double a) { return a > d; }, "alpha must exceed d");
  require_all(c, "n", ns, [](int n) { return n >= 3; }, "n must be at least 3");
  if (steps < 1) throw c.error("t_steps", "need at least one time step");
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  if (!(eps > 0.0)) throw c.error("epsilon", "epsilon must be positive");
  for (double a : alphas)
    if (!(a - d - eps > 0.0)) throw c.error("epsilon", "beta = alpha - d - epsilon must be positive");
  if (c.has("t_max") && !(c.real("t_max", 1.0) > 0.0)) throw c.error("t_max", "t_max must be positive");
  for (int n : ns) {
    ctx.check_extent(c, "n", n);
    const long long sites = static_cast<long long>(std::llround(std::pow(n, d)));
    ctx.check_sites(c, "n", sites);
    if (model != "nn" && d > 1 && static_cast<double>(sites) * sites > 4e7)
      throw ResourceCapError(c.source() + ": `n` gives an all-pairs hopping matrix above 4e7 entries");
  }
  std::vector<int> rs_cfg = c.ints("r", {});
  std::optional<std::uint64_t> seed;
  if (model == "random") seed = ctx.require_seed(c);
  const auto pts = product(alphas, ns);

  RunOutput out;
  out.seed = seed;
  out.table.columns = {
      {"model", "-", "nn, power (h/D^alpha) or random (|h_ij| <= h/D^alpha)"},
      {"n", "sites", "lattice extent per axis"},
      {"alpha", "1", "power-law exponent (sets beta = alpha - d - epsilon)"},
      {"d", "1", "lattice dimension"},
      {"t", "1/h", "time"},
      {"r", "sites", "tail radius"},
      {"tail", "1", "probability at distance >= r from the origin"},
      {"markov_bound", "1", "E[F^beta] / (r - u t)^beta with F = max(0, D - u t) and the fitted u"},
      {"K_fit", "1", "max over (t, r) of tail (r - u t)^beta / t at the fitted u"},
      {"u_fit", "h", "smallest grid velocity with K(u) <= 1; 0 when alpha <= d + 1"},
  };
  out.table.checks = {"tail <= markov_bound", "K_fit and u_fit settle as n doubles"};
  auto groups = parallel_map<std::vector<Row>>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto [alpha, n] = pts[k];
    const LatticeGraph lat(std::vector<int>(static_cast<std::size_t>(d), n));
    const Site origin = lat.index(std::vector<int>(static_cast<std::size_t>(d), n / 2));
    free::HoppingMatrix hop;
    if (model == "nn") {
      hop = free::nearest_neighbor_hopping(lat, h);
    } else if (model == "power") {
      hop = free::power_law_hopping(lat, alpha, h);
    } else {
      std::mt19937_64 rng(*seed + k);
      hop = free::random_power_law_hopping(lat, alpha, h, rng);
    }
    const auto H = free::SingleParticleHamiltonian::constant(lat, std::move(hop));
    const double t_max = c.real("t_max", n / 16.0);
    std::vector<double> times;
    for (int s = 1; s <= steps; ++s) times.push_back(t_max * s / steps);
    const auto traj = free::record_trajectory(H, origin, times);
    free::TailFitOptions opts;
    opts.epsilon = eps;
    const auto fit = free::fit_tail_constants(alpha, d, {traj}, opts);
    std::vector<int> rs = rs_cfg;
    if (rs.empty())
      for (int r = 2; r <= n / 2; r *= 2) rs.push_back(r);
    const auto p = free::TailParams::make(alpha, d, fit.u, eps);
    std::vector<Row> rows;
    for (const auto& pt : traj)
      for (int r : rs)
        rows.push_back(row(model, n, alpha, d, pt.t, r, free::tail_probability(pt.radial, r),
                           free::markov_bound(pt.radial, p, pt.t, r), fit.K, fit.u));
    return rows;
  });
  out.table.rows = flatten(std::move(groups));
  out.summary = "free-tail: " + std::to_string(out.table.rows.size()) + " rows";
  return out;
}

// ---------------------------------------------------------------------------

struct TransferPoint {
  int d;
  double alpha;
  int D;
};

std::vector<TransferPoint> transfer_grid(const ExperimentConfig& c, const Context& ctx) {
  const int d = single_dimension(c, 1, 3);
  const auto alphas = c.reals("alpha", {0.5, 1.0, 1.5});
  const auto Ds = c.ints("D", {4, 8, 16, 32, 64});
  require_all(c, "alpha", alphas, [](double a) { return a >= 0.0; }, "alpha must be nonnegative");
  require_all(c, "D", Ds, [](int D) { return D >= 1; }, "D must be positive");
  std::vector<TransferPoint> pts;
  for (double a : alphas)
    for (int D : Ds) {
      ctx.check_extent(c, "D", D + 1);
      ctx.check_sites(c, "D", static_cast<long long>(std::llround(std::pow(D + 1, d))));
      pts.push_back({d, a, D});
    }
  return pts;
}

transfer::TransferPlan plan_for(const TransferPoint& p, double h) {
  const auto lat = transfer::transfer_lattice(p.d, p.D);
  std::vector<int> x(static_cast<std::size_t>(p.d), 0);
  x[0] = p.D;
  return transfer::build_transfer_plan(lat, 0, lat.index(x), p.alpha, h);
}

int cube_stages(const TransferPoint& p) {
  return p.alpha < p.d + 1 && p.D > 2 ? transfer::cube_count(p.D) : 0;
}

const std::vector<Column>& transfer_columns() {
  static const std::vector<Column> cols = {
      {"d", "1", "lattice dimension"},
      {"alpha", "1", "power-law exponent"},
      {"D", "sites", "transfer distance along axis 0"},
      {"q", "1", "number of cube sizes (0 for the nearest-neighbour chain)"},
      {"total_time", "1/h", "duration of the protocol"},
      {"bound_time", "1/h", "closed-form timing bound"},
      {"fidelity", "1", "|<x|U|origin>|^2"},
  };
  return cols;
}

RunOutput run_transfer(const ExperimentConfig& c, const Context& ctx) {
  const double h = c.real("h", 1.0);
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  const bool emit = c.flag("emit_plans");
  const auto pts = transfer_grid(c, ctx);
  RunOutput out;
  out.table.columns = transfer_columns();
  out.table.checks = {"fidelity >= 1 - 1e-9", "total_time <= bound_time"};
  struct Result {
    Row row;
    nlohmann::json plan;
  };
  auto results = parallel_map<Result>(pts.size(), ctx.options.threads, [&](std::size_t k) {
    const auto& p = pts[k];
    const auto plan = plan_for(p, h);
    Result r;
    r.row = row(p.d, p.alpha, p.D, cube_stages(p), plan.total_time, transfer::transfer_time_bound(p.d, p.alpha, p.D, h),
                transfer::fidelity(plan));
    if (emit)
      r.plan = {{"d", p.d}, {"alpha", p.alpha}, {"D", p.D}, {"origin", plan.origin}, {"target", plan.target},
                {"total_time", plan.total_time}, {"schedule", free::schedule_to_json(transfer::plan_hamiltonian(plan))}};
    return r;
  });
  nlohmann::json plans = nlohmann::json::array();
  for (auto& r : results) {
    out.table.rows.push_back(std::move(r.row));
    if (emit) plans.push_back(std::move(r.plan));
  }
  if (emit) out.extra_files.emplace_back("transfer_plans.json", plans.dump() + "\n");
  out.summary = "transfer: " + std::to_string(out.table.rows.size()) + " plans";
  return out;
}

RunOutput run_transfer_noise(const ExperimentConfig& c, const Context& ctx) {
  const double h = c.real("h", 1.0);
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  const auto eps = c.reals("epsilon", {0.01, 0.02});
  const int samples = c.integer("samples", 200);
  const std::string dist = c.text("distribution", "uniform");
  require_all(c, "epsilon", eps, [](double e) { return e >= 0.0; }, "epsilon must be nonnegative");
  if (samples < 1) throw c.error("samples", "need at least one sample");
  if (dist != "uniform" && dist != "gaussian") throw c.error("distribution", "distribution must be uniform or gaussian");
  const auto pts = transfer_grid(c, ctx);
  const std::uint64_t seed = ctx.require_seed(c);
  const auto grid = product(pts, eps);

  RunOutput out;
  out.seed = seed;
  out.table.columns = transfer_columns();
  out.table.columns.push_back({"epsilon", "1", "relative coupling noise amplitude"});
  out.table.columns.push_back({"samples", "1", "Monte Carlo samples"});
  out.table.columns.push_back({"mean_infidelity", "1", "mean of 1 - fidelity"});
  out.table.columns.push_back({"p95_infidelity", "1", "95th percentile of 1 - fidelity"});
  out.table.checks = {"mean_infidelity grows quadratically in epsilon"};
  out.table.rows = parallel_map<Row>(grid.size(), ctx.options.threads, [&](std::size_t k) {
    const auto& [p, e] = grid[k];
    const auto plan = plan_for(p, h);
    transfer::NoiseModel noise;
    noise.epsilon = e;
    noise.distribution = dist == "gaussian" ? transfer::NoiseDistribution::gaussian : transfer::NoiseDistribution::uniform;
    noise.seed = seed;
    const auto st = transfer::robustness_mc(plan, noise, samples);
    return row(p.d, p.alpha, p.D, cube_stages(p), plan.total_time, transfer::transfer_time_bound(p.d, p.alpha, p.D, h),
               transfer::fidelity(plan), e, samples, st.mean_infidelity, st.p95_infidelity);
  });
  out.summary = "transfer-noise: " + std::to_string(out.table.rows.size()) + " points";
  return out;
}

// ---------------------------------------------------------------------------

RunOutput run_boson(const ExperimentConfig& c, const Context& ctx) {
  const int N = c.integer("N", 2);
  const double beta = c.real("beta", 6.0);
  const int d = single_dimension(c, 1, 3);
  const double alpha = c.real("alpha", d + 2.0);
  const double h = c.real("h", 1.0);
  const double eps = c.real("epsilon", 0.1);
  const auto fracs = c.reals("t_fraction", {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0});
  const int draws = c.integer("draws", 0);
  const bool emit = c.flag("emit_samples");
  if (N < 1) throw c.error("N", "need at least one boson");
  if (!(beta >= 1.0)) throw c.error("beta", "beta must be at least 1");
  if (!(alpha > d)) throw c.error("alpha", "alpha must exceed d");
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  require_all(c, "t_fraction", fracs, [](double f) { return f >= 0.0; }, "t_fraction must be nonnegative");
  if (draws < 0) throw c.error("draws", "draws must be nonnegative");
  if (emit && draws == 0) throw c.error("emit_samples", "emitting samples needs draws > 0");
  const double M = std::ceil(std::pow(static_cast<double>(N), beta) - 1e-9);
  if (M > static_cast<double>(ctx.caps.max_sites) || M > static_cast<double>(boson::kMaxSamplerSites))
    throw ResourceCapError(c.source() + ": N^beta exceeds the site cap");
  const auto config = boson::build_initial(N, beta, d);
  ctx.check_extent(c, "beta", config.lattice.extents().front());
  if (N > boson::kMaxOracleBosons || config.lattice.num_sites() > boson::kMaxOracleSites)
    throw ResourceCapError(c.source() + ": the permanent oracle needs N <= 3 and at most 200 sites");
  std::optional<std::uint64_t> seed;
  if (draws > 0) seed = ctx.require_seed(c);

  const auto H = boson::power_law_hamiltonian(config, alpha, h);
  const double t_star = boson::easiness_time(config.L_gap, N, alpha, d, eps);
  RunOutput out;
  out.seed = seed;
  out.table.columns = {
      {"N", "1", "bosons"},
      {"M", "sites", "lattice sites"},
      {"alpha", "1", "power-law exponent"},
      {"t", "1/h", "evolution time"},
      {"t_star", "1/h", "L_gap^{(alpha-d-epsilon)/3} N^{-5/3}"},
      {"tvd", "1", "total-variation distance between the factored sampler and the permanent oracle"},
      {"draws", "1", "samples behind tvd; 0 means the exact factored distribution"},
  };
  out.table.checks = {"tvd <= 0.05 at t = t_star/10", "tvd non-decreasing in t"};
  struct Result {
    Row row;
    std::string samples;
  };
  auto results = parallel_map<Result>(fracs.size(), ctx.options.threads, [&](std::size_t k) {
    const double t = fracs[k] * t_star;
    Result r;
    const double tvd = draws > 0 ? boson::empirical_tvd(config, H, t, draws, *seed) : boson::sampler_tvd(config, H, t);
    r.row = row(N, config.lattice.num_sites(), alpha, t, t_star, tvd, draws);
    if (emit)
      for (const auto& s : boson::sample_many(config, H, t, draws, *seed))
        r.samples += nlohmann::json{{"t", s.t}, {"seed", s.seed}, {"positions", s.positions}}.dump() + "\n";
    return r;
  });
  std::string samples;
  for (auto& r : results) {
    out.table.rows.push_back(std::move(r.row));
    samples += r.samples;
  }
  if (emit) out.extra_files.emplace_back("boson_samples.jsonl", samples);
  out.summary = "boson: t_star = " + format_real(t_star);
  return out;
}

// ---------------------------------------------------------------------------

RunOutput run_bounds_table(const ExperimentConfig& c, const Context&) {
  const int d = single_dimension(c, 1, 3);
  std::vector<double> grid;
  for (int k = 1; k <= 100; ++k) grid.push_back(0.05 * k);
  const auto alphas = c.reals("alpha", grid);
  require_all(c, "alpha", alphas, [](double a) { return a >= 0.0; }, "alpha must be nonnegative");
  std::vector<std::string> kind_default = {"lieb_robinson", "frobenius", "free"};
  if (d != 1) kind_default = {"lieb_robinson", "free"};
  const auto kinds = c.words("kinds", kind_default);
  require_nonempty(c, "kinds", kinds);
  std::vector<bounds::ConeKind> parsed;
  for (const auto& k : kinds) {
    if (k == "lieb_robinson") parsed.push_back(bounds::ConeKind::lieb_robinson);
    else if (k == "free") parsed.push_back(bounds::ConeKind::free);
    else if (k == "frobenius") {
      if (d != 1) throw c.error("kinds", "the frobenius light cone is only available for d = 1");
      parsed.push_back(bounds::ConeKind::frobenius);
    } else {
      throw c.error("kinds", "unknown kind `" + k + "`");
    }
  }
  RunOutput out;
  out.table.columns = {
      {"kind", "-", "lieb_robinson, frobenius or free"},
      {"d", "1", "lattice dimension"},
      {"alpha", "1", "power-law exponent"},
      {"exponent", "1", "kappa in t ~ r^kappa"},
      {"guaranteed", "1", "exponent actually guaranteed (0 for upper limits)"},
      {"status", "-", "linear, boundary, upper_limit, log_corrected or no_light_cone"},
  };
  out.table.checks = {"guaranteed exponents ordered free >= frobenius >= lieb_robinson at every alpha"};
  for (auto k : parsed)
    for (double a : alphas) {
      const auto e = bounds::lightcone_exponent(a, d, k);
      out.table.rows.push_back(row(bounds::to_string(k), d, a, e.exponent, e.guaranteed, bounds::to_string(e.status)));
    }
  out.summary = "bounds-table: " + std::to_string(out.table.rows.size()) + " rows";
  return out;
}

// ---------------------------------------------------------------------------

RunOutput run_validate(const ExperimentConfig& c, const Context& ctx) {
  const double alpha = c.real("alpha", 3.0);
  const double h = c.real("h", 1.0);
  if (!(alpha >= 0.0)) throw c.error("alpha", "alpha must be nonnegative");
  if (!(h > 0.0)) throw c.error("h", "h must be positive");
  const PowerLawEnvelope env{alpha, h};
  const std::string protocol = c.text("protocol", "none");
  if (c.has("schedule") && protocol != "none") throw c.error("protocol", "give either `schedule` or `protocol`");

  EnvelopeReport rep;
  rep.ok = true;
  std::string what = "empty schedule";
  if (c.has("schedule")) {
    const auto path = c.base_dir() / c.text("schedule", "");
    std::ifstream in(path);
    if (!in) throw c.error("schedule", "cannot read " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw c.error("schedule", std::string("invalid JSON: ") + e.what());
    }
    try {
      if (j.value("kind", "spin") == "single_particle") {
        const auto H = free::schedule_from_json(j);
        ctx.check_sites(c, "schedule", H.lattice.num_sites());
        rep = free::check_hopping_envelope(H, env);
      } else {
        const auto s = spin::schedule_from_json(j);
        const auto lat = spin::lattice_from_json(j).value_or(LatticeGraph::chain(s.num_sites));
        rep = spin::validate_envelope(s, lat, env);
      }
    } catch (const std::exception& e) {
      throw c.error("schedule", e.what());
    }
    what = path.filename().string();
  } else if (protocol == "spread") {
    const int r = c.integer("r", 10);
    const double t = c.real("t", 6.0);
    const int d = single_dimension(c, 1, 3);
    if (!(t >= 0.0 && std::fmod(t, 3.0) == 0.0 && 2 * static_cast<int>(t / 3.0) < r))
      throw c.error("t", "t must be a multiple of 3 with t/3 < r/2");
    const auto b = protocols::build_spreading_protocol(r, t, alpha, d, h);
    rep = spin::validate_envelope(b.schedule, b.protocol.lattice, env);
    what = "spreading protocol";
  } else if (protocol == "transfer") {
    const TransferPoint p{single_dimension(c, 1, 3), alpha, c.integer("D", 16)};
    if (p.D < 1) throw c.error("D", "D must be positive");
    ctx.check_extent(c, "D", p.D + 1);
    rep = free::check_hopping_envelope(transfer::plan_hamiltonian(plan_for(p, h)), env);
    what = "transfer plan";
  } else if (protocol != "none") {
    throw c.error("protocol", "protocol must be spread, transfer or none");
  }

  RunOutput out;
  out.table.columns = {
      {"ok", "-", "pass or fail"},
      {"segment", "1", "segment of the worst pair (-1 if none)"},
      {"i", "site", "first site of the worst pair"},
      {"j", "site", "second site of the worst pair"},
      {"value", "h", "summed coupling norm on the pair"},
      {"limit", "h", "h / D(i,j)^alpha"},
      {"ratio", "1", "value / limit"},
  };
  out.table.checks = {"ratio <= 1 on every pair and segment"};
  const bool any = rep.ratio > 0.0;
  out.table.rows.push_back(row(rep.ok ? "pass" : "fail", any ? rep.segment : -1, any ? rep.i : -1, any ? rep.j : -1,
                               rep.value, rep.limit, rep.ratio));
  out.summary = std::string(rep.ok ? "PASS" : "FAIL") + " " + what;
  if (any)
    out.summary += ": worst pair (" + std::to_string(rep.i) + ", " + std::to_string(rep.j) + ") in segment " +
                   std::to_string(rep.segment) + ", ratio " + format_real(rep.ratio);
  return out;
}

}  // namespace

const std::vector<ExperimentSpec>& experiment_table() {
  static const std::vector<ExperimentSpec> table = {
      {"spread", {"d", "alpha", "t", "r", "h"}, run_spread},
      {"correlator", {"d", "alpha", "t", "r", "h"}, run_correlator},
      {"frobenius", {"L", "alpha", "variant", "h", "A"}, run_frobenius},
      {"t2", {"L", "alpha", "field", "T", "dt", "delta", "x"}, run_t2},
      {"free-tail", {"model", "d", "alpha", "n", "t_max", "t_steps", "r", "h", "epsilon"}, run_free_tail},
      {"transfer", {"d", "alpha", "D", "h", "emit_plans"}, run_transfer},
      {"transfer-noise", {"d", "alpha", "D", "h", "epsilon", "samples", "distribution"}, run_transfer_noise},
      {"boson", {"N", "beta", "d", "alpha", "h", "epsilon", "t_fraction", "draws", "emit_samples"}, run_boson},
      {"bounds-table", {"d", "alpha", "kinds"}, run_bounds_table},
      {"validate", {"alpha", "h", "schedule", "protocol", "r", "t", "d", "D"}, run_validate},
  };
  return table;
}

}  // namespace lightcone::runner
