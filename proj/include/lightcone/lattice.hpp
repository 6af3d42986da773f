#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lightcone {

using Site = int;

// Open-boundary hypercubic lattice Z^d clipped to [0, extent_k) on each axis.
// Sites are numbered row-major: the last axis varies fastest.
class LatticeGraph {
 public:
  explicit LatticeGraph(std::vector<int> extents);
  static LatticeGraph chain(int num_sites);

  int dimension() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  int num_sites() const { return num_sites_; }

  bool valid(Site s) const { return s >= 0 && s < num_sites_; }
  bool contains(std::span<const int> coords) const;
  std::vector<int> coordinates(Site s) const;
  Site index(std::span<const int> coords) const;

  int distance(Site a, Site b) const;
  std::vector<Site> neighbors(Site s) const;
  int diameter() const;

  bool operator==(const LatticeGraph& other) const { return extents_ == other.extents_; }

 private:
  std::vector<int> extents_;
  std::vector<int> strides_;
  int num_sites_ = 0;
};

// Sorted, duplicate-free set of sites.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Site> sites);

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  bool contains(Site s) const;
  bool subset_of(const Region& other) const;
  bool disjoint_from(const Region& other) const;

  Region united(const Region& other) const;
  Region minus(const Region& other) const;

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }
  bool operator==(const Region& other) const = default;

 private:
  std::vector<Site> sites_;
};

// Pair envelope h / D^alpha.
struct PowerLawEnvelope {
  double alpha = 0.0;
  double h = 1.0;

  double at_distance(double D) const;
  double operator()(const LatticeGraph& lattice, Site i, Site j) const;
};

int manhattan_distance(const LatticeGraph& lattice, Site a, Site b);

// All sites within Manhattan distance `radius` of `center`, clipped to the lattice.
Region ball(const LatticeGraph& lattice, Site center, int radius);

// Number of points of Z^d with |x|_1 <= radius.
std::int64_t ball_volume(int d, std::int64_t radius);

// Axis-aligned box [lo_k, hi_k] (inclusive, real bounds) intersected with the lattice.
Region box(const LatticeGraph& lattice, std::span<const double> lo, std::span<const double> hi);

// Largest distance between a site of `a` and a site of `b`.
int max_distance(const LatticeGraph& lattice, const Region& a, const Region& b);

// sum over sites k with D(i,k) > r of D(i,k)^-alpha.
double tail_sum(const LatticeGraph& lattice, Site i, int r, double alpha);

// sum over k not in {i,j} of D(i,k)^-alpha D(j,k)^-alpha.
double convolution_sum(const LatticeGraph& lattice, Site i, Site j, double alpha);

}  // namespace lightcone

namespace lightcone {

// Worst pair found when checking a schedule against a power-law envelope.
struct EnvelopeReport {
  bool ok = true;
  int segment = -1;
  Site i = -1;
  Site j = -1;
  double value = 0.0;  // coupling strength summed over terms touching {i, j}
  double limit = 0.0;  // h / D(i,j)^alpha
  double ratio = 0.0;  // value / limit, maximized over pairs and segments
};

}  // namespace lightcone
