#include "lightcone/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lightcone::bounds {

namespace {

void check_common(const BoundParams& p) {
  if (p.d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(p.c > 0.0 && p.vbar > 0.0 && p.K > 0.0 && p.h > 0.0))
    throw std::invalid_argument("bound constants must be positive");
}

void require_lr_regime(const BoundParams& p) {
  check_common(p);
  if (!(p.alpha > 2 * p.d + 1)) throw std::domain_error("bound needs alpha > 2d + 1");
}

void require_log_radius(double r) {
  if (!(r >= 2.0)) throw std::domain_error("distance must be at least 2");
}

}  // namespace

double lr_bound_multisite(double t, double r, int support_size, const BoundParams& p) {
  require_lr_regime(p);
  require_log_radius(r);
  if (support_size < 1) throw std::invalid_argument("support must be nonempty");
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (t == 0.0) return 0.0;
  const double gap = r - p.vbar * t;
  if (gap <= 0.0) return std::numeric_limits<double>::infinity();
  const int d = p.d;
  return p.c * support_size * std::pow(t, d + 1) * std::pow(std::log(r), 2 * d) / std::pow(gap, p.alpha - d);
}

double lr_bound(double t, double r, const BoundParams& p) { return lr_bound_multisite(t, r, 1, p); }

double local_obs_truncation_error(double t, double r, const BoundParams& p) {
  require_lr_regime(p);
  require_log_radius(r);
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (r < 4.0 * p.vbar * t) throw std::domain_error("truncation radius must be at least 4 vbar t");
  const int d = p.d;
  return p.K * std::pow(t, d + 2) * std::pow(std::log(r), 2 * d) / std::pow(r, p.alpha - d);
}

double simulation_radius(double t, const BoundParams& p) {
  require_lr_regime(p);
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (t <= 1.0) return t;
  return std::max(std::pow(t, (p.d + 2) / (p.alpha - p.d)) * std::log(t), t);
}

double gate_count_exponent(const BoundParams& p) {
  check_common(p);
  if (!(p.alpha > p.d)) throw std::domain_error("gate count needs alpha > d");
  return p.alpha / (p.alpha - p.d);
}

double gate_count_estimate(double N_r, double t, const BoundParams& p) {
  if (!(N_r >= 0.0 && t >= 0.0)) throw std::invalid_argument("site count and time must be nonnegative");
  return std::pow(N_r * t, gate_count_exponent(p));
}

double topo_time_bound(double L, const BoundParams& p) {
  check_common(p);
  const int d = p.d;
  if (p.alpha < 2 * d + 1) throw std::domain_error("topological time bound needs alpha >= 2d + 1");
  if (!(L > 1.0)) throw std::domain_error("system size must exceed 1");
  if (p.alpha > 3 * d + 1) return L;
  return std::pow(L, (p.alpha - 2 * d) / (d + 1)) / std::pow(std::log(L), 2 * d);
}

double clustering_gamma(double alpha, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(alpha > 2 * d)) throw std::domain_error("clustering bound needs alpha > 2d");
  return alpha * (alpha - d + 1) / (alpha - 2 * d);
}

namespace {

// Coefficient of c inside the bracket.
double clustering_slope(const BoundParams& p) {
  const double g = clustering_gamma(p.alpha, p.d);
  if (!(p.Delta > 0.0)) throw std::domain_error("clustering bound needs a positive gap");
  return std::exp((g - 1) * std::log(2.0) + std::lgamma(0.5 * g) + 0.5 * g * std::log(p.alpha) -
                  g * std::log(p.Delta)) /
         std::numbers::pi;
}

double clustering_decay(double r, const BoundParams& p) {
  require_log_radius(r);
  const double g = clustering_gamma(p.alpha, p.d);
  return std::pow(std::log(r), 0.5 * g) / std::pow(r, p.alpha);
}

}  // namespace

double clustering_bound(double r, const BoundParams& p) {
  check_common(p);
  return (p.c * clustering_slope(p) + 1.0) * clustering_decay(r, p);
}

double clustering_constant_needed(double r, double value, const BoundParams& p) {
  const double need = std::abs(value) / clustering_decay(r, p) - 1.0;
  return need <= 0.0 ? 0.0 : need / clustering_slope(p);
}

LightconeExponent lightcone_exponent(double alpha, int d, ConeKind kind) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  LightconeExponent e;
  auto set = [&e](double x, ExponentStatus s) {
    e.exponent = x;
    e.status = s;
    e.guaranteed = s == ExponentStatus::upper_limit ? 0.0 : x;
  };
  switch (kind) {
    case ConeKind::lieb_robinson: {
      const double edge = 2 * d + 1;
      if (alpha > edge) set(1.0, ExponentStatus::linear);
      else if (alpha == edge) set(1.0, ExponentStatus::boundary);
      else set(alpha / edge, ExponentStatus::upper_limit);
      break;
    }
    case ConeKind::frobenius:
      if (d != 1) throw std::domain_error("frobenius light cone is only established for d = 1");
      if (alpha > 2.5) set(1.0, ExponentStatus::linear);
      else if (alpha > 1.5) set(alpha - 1.5, alpha == 2.5 ? ExponentStatus::boundary : ExponentStatus::log_corrected);
      else set(0.0, ExponentStatus::no_light_cone);
      break;
    case ConeKind::free:
      if (alpha > d + 1) set(1.0, ExponentStatus::linear);
      else if (alpha == d + 1) set(1.0, ExponentStatus::boundary);
      else if (alpha > d) set(alpha - d, ExponentStatus::log_corrected);
      else if (alpha == d) set(0.0, ExponentStatus::log_corrected);
      else set(0.0, ExponentStatus::no_light_cone);
      break;
  }
  return e;
}

std::string_view to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::lieb_robinson: return "lieb_robinson";
    case ConeKind::frobenius: return "frobenius";
    case ConeKind::free: return "free";
  }
  return "?";
}

std::string_view to_string(ExponentStatus status) {
  switch (status) {
    case ExponentStatus::linear: return "linear";
    case ExponentStatus::boundary: return "boundary";
    case ExponentStatus::upper_limit: return "upper_limit";
    case ExponentStatus::log_corrected: return "log_corrected";
    case ExponentStatus::no_light_cone: return "no_light_cone";
  }
  return "?";
}

}  // namespace lightcone::bounds
