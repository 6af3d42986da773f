#pragma once

#include <string_view>

namespace lightcone::bounds {

// Envelope plus the existential constants of the individual bounds. None of the constants
// are known; every one defaults to 1 and is meant to be supplied or fitted by the caller.
struct BoundParams {
  double alpha = 3.0;
  int d = 1;
  double h = 1.0;
  double c = 1.0;
  double vbar = 1.0;
  double K = 1.0;
  double Delta = 1.0;  // spectral gap, clustering only
  double epsilon = 0.1;
};

// c |X| t^{d+1} ln^{2d} r / (r - vbar t)^{alpha-d}. Needs alpha > 2d + 1 and r >= 2.
// Returns +inf inside the light cone (r <= vbar t), where the bound says nothing.
double lr_bound_multisite(double t, double r, int support_size, const BoundParams& p);
// Single-site form (|X| = 1).
double lr_bound(double t, double r, const BoundParams& p);

// K t^{d+2} ln^{2d} r / r^{alpha-d} for r >= 4 vbar t and r >= 2.
double local_obs_truncation_error(double t, double r, const BoundParams& p);

// max{t^{(d+2)/(alpha-d)} ln t, t}; plain t for t <= 1.
double simulation_radius(double t, const BoundParams& p);

// alpha / (alpha - d), the o(1) slack dropped.
double gate_count_exponent(const BoundParams& p);
// (N_r t)^{alpha/(alpha-d)}.
double gate_count_estimate(double N_r, double t, const BoundParams& p);

// L for alpha > 3d + 1, L^{(alpha-2d)/(d+1)} / ln^{2d} L for 2d + 1 <= alpha <= 3d + 1.
// Throws for alpha < 2d + 1.
double topo_time_bound(double L, const BoundParams& p);

// alpha (alpha - d + 1) / (alpha - 2d).
double clustering_gamma(double alpha, int d);
// [2^{gamma-1} c Gamma(gamma/2) alpha^{gamma/2} / (pi Delta^gamma) + 1] ln^{gamma/2} r / r^alpha.
double clustering_bound(double r, const BoundParams& p);
// Smallest c >= 0 for which clustering_bound(r) >= value.
double clustering_constant_needed(double r, double value, const BoundParams& p);

enum class ConeKind { lieb_robinson, frobenius, free };
enum class ExponentStatus {
  linear,          // exponent 1, strictly inside the linear regime
  boundary,        // at a regime threshold
  upper_limit,     // only an upper limit on the exponent is known here
  log_corrected,   // power law up to logarithmic factors
  no_light_cone,   // exponent 0
};

struct LightconeExponent {
  double exponent = 0.0;    // t ~ r^exponent
  ExponentStatus status = ExponentStatus::no_light_cone;
  // Exponent this work actually guarantees: equals `exponent` except for upper limits,
  // where nothing is guaranteed (0).
  double guaranteed = 0.0;
};

// Light-cone shape t ~ r^kappa for each kind of bound. The frobenius kind exists for
// d = 1 only.
LightconeExponent lightcone_exponent(double alpha, int d, ConeKind kind);

std::string_view to_string(ConeKind kind);
std::string_view to_string(ExponentStatus status);

}  // namespace lightcone::bounds
