#include "lightcone/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lightcone {

LatticeGraph::LatticeGraph(std::vector<int> extents) : extents_(std::move(extents)) {
  if (extents_.empty()) throw std::invalid_argument("lattice needs at least one axis");
  // Row-major: the last axis varies fastest.
  std::int64_t n = 1;
  strides_.resize(extents_.size());
  for (std::size_t k = extents_.size(); k-- > 0;) {
    if (extents_[k] < 1) throw std::invalid_argument("lattice extent must be positive");
    strides_[k] = static_cast<int>(n);
    n *= extents_[k];
    if (n > (std::int64_t{1} << 30)) throw std::invalid_argument("lattice too large");
  }
  num_sites_ = static_cast<int>(n);
}

LatticeGraph LatticeGraph::chain(int num_sites) { return LatticeGraph({num_sites}); }

bool LatticeGraph::contains(std::span<const int> coords) const {
  if (coords.size() != extents_.size()) return false;
  for (std::size_t k = 0; k < coords.size(); ++k)
    if (coords[k] < 0 || coords[k] >= extents_[k]) return false;
  return true;
}

std::vector<int> LatticeGraph::coordinates(Site s) const {
  if (!valid(s)) throw std::out_of_range("site " + std::to_string(s) + " not in lattice");
  std::vector<int> c(extents_.size());
  for (std::size_t k = extents_.size(); k-- > 0;) {
    c[k] = s % extents_[k];
    s /= extents_[k];
  }
  return c;
}

Site LatticeGraph::index(std::span<const int> coords) const {
  if (!contains(coords)) throw std::out_of_range("coordinates outside lattice");
  Site s = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) s += coords[k] * strides_[k];
  return s;
}

int LatticeGraph::distance(Site a, Site b) const {
  if (!valid(a) || !valid(b)) throw std::out_of_range("site not in lattice");
  int d = 0;
  for (std::size_t k = extents_.size(); k-- > 0;) {
    int ca = a % extents_[k], cb = b % extents_[k];
    d += std::abs(ca - cb);
    a /= extents_[k];
    b /= extents_[k];
  }
  return d;
}

std::vector<Site> LatticeGraph::neighbors(Site s) const {
  auto c = coordinates(s);
  std::vector<Site> out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] > 0) out.push_back(s - strides_[k]);
    if (c[k] + 1 < extents_[k]) out.push_back(s + strides_[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int LatticeGraph::diameter() const {
  int d = 0;
  for (int e : extents_) d += e - 1;
  return d;
}

Region::Region(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool Region::contains(Site s) const { return std::binary_search(sites_.begin(), sites_.end(), s); }

bool Region::subset_of(const Region& other) const {
  return std::includes(other.sites_.begin(), other.sites_.end(), sites_.begin(), sites_.end());
}

bool Region::disjoint_from(const Region& other) const {
  std::vector<Site> common;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(common));
  return common.empty();
}

Region Region::united(const Region& other) const {
  std::vector<Site> out;
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(out));
  return Region(std::move(out));
}

Region Region::minus(const Region& other) const {
  std::vector<Site> out;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                      std::back_inserter(out));
  return Region(std::move(out));
}

double PowerLawEnvelope::at_distance(double D) const {
  if (D <= 0) throw std::invalid_argument("envelope undefined at distance 0");
  return h / std::pow(D, alpha);
}

double PowerLawEnvelope::operator()(const LatticeGraph& lattice, Site i, Site j) const {
  if (i == j) throw std::invalid_argument("envelope undefined for i == j");
  return at_distance(lattice.distance(i, j));
}

int manhattan_distance(const LatticeGraph& lattice, Site a, Site b) { return lattice.distance(a, b); }

Region ball(const LatticeGraph& lattice, Site center, int radius) {
  if (radius < 0) throw std::invalid_argument("ball radius must be non-negative");
  auto c = lattice.coordinates(center);
  const int d = lattice.dimension();
  std::vector<Site> sites;
  // Enumerate the bounding box and keep points within the L1 radius.
  std::vector<int> lo(d), hi(d), x(d);
  for (int k = 0; k < d; ++k) {
    lo[k] = std::max(0, c[k] - radius);
    hi[k] = std::min(lattice.extents()[k] - 1, c[k] + radius);
    x[k] = lo[k];
  }
  while (true) {
    int dist = 0;
    for (int k = 0; k < d; ++k) dist += std::abs(x[k] - c[k]);
    if (dist <= radius) sites.push_back(lattice.index(x));
    int k = 0;
    while (k < d && ++x[k] > hi[k]) {
      x[k] = lo[k];
      ++k;
    }
    if (k == d) break;
  }
  return Region(std::move(sites));
}

std::int64_t ball_volume(int d, std::int64_t radius) {
  if (d < 1 || radius < 0) throw std::invalid_argument("ball_volume needs d >= 1, radius >= 0");
  // sum_k 2^k C(d,k) C(radius,k)
  std::int64_t total = 0;
  std::int64_t cd = 1, cr = 1, pow2 = 1;
  for (int k = 0; k <= d; ++k) {
    if (k > radius) break;
    total += pow2 * cd * cr;
    cd = cd * (d - k) / (k + 1);
    cr = cr * (radius - k) / (k + 1);
    pow2 *= 2;
  }
  return total;
}

Region box(const LatticeGraph& lattice, std::span<const double> lo, std::span<const double> hi) {
  const int d = lattice.dimension();
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
    throw std::invalid_argument("box bounds must match lattice dimension");
  std::vector<int> a(d), b(d), x(d);
  for (int k = 0; k < d; ++k) {
    a[k] = std::max(0, static_cast<int>(std::ceil(lo[k] - 1e-9)));
    b[k] = std::min(lattice.extents()[k] - 1, static_cast<int>(std::floor(hi[k] + 1e-9)));
    if (a[k] > b[k]) return Region();
    x[k] = a[k];
  }
  std::vector<Site> sites;
  while (true) {
    sites.push_back(lattice.index(x));
    int k = 0;
    while (k < d && ++x[k] > b[k]) {
      x[k] = a[k];
      ++k;
    }
    if (k == d) break;
  }
  return Region(std::move(sites));
}

int max_distance(const LatticeGraph& lattice, const Region& a, const Region& b) {
  int best = 0;
  for (Site i : a)
    for (Site j : b) best = std::max(best, lattice.distance(i, j));
  return best;
}

double tail_sum(const LatticeGraph& lattice, Site i, int r, double alpha) {
  double s = 0.0;
  for (Site k = 0; k < lattice.num_sites(); ++k) {
    int D = lattice.distance(i, k);
    if (D > r) s += std::pow(D, -alpha);
  }
  return s;
}

double convolution_sum(const LatticeGraph& lattice, Site i, Site j, double alpha) {
  if (i == j) throw std::invalid_argument("convolution_sum needs i != j");
  double s = 0.0;
  for (Site k = 0; k < lattice.num_sites(); ++k) {
    if (k == i || k == j) continue;
    s += std::pow(lattice.distance(i, k), -alpha) * std::pow(lattice.distance(j, k), -alpha);
  }
  return s;
}

}  // namespace lightcone
