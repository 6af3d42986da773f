#include "lightcone/free_io.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lightcone::free {

using nlohmann::json;

json schedule_to_json(const SingleParticleHamiltonian& H) {
  json segs = json::array();
  for (const auto& seg : H.segments) {
    json hops = json::array();
    seg.H.for_each_pair([&](int i, int j, cplx v) { hops.push_back({i, j, v.real(), v.imag()}); });
    json s = {{"hops", hops}};
    // JSON has no infinity; an open-ended segment omits its duration.
    if (std::isfinite(seg.duration)) s["duration"] = seg.duration;
    segs.push_back(std::move(s));
  }
  return {{"kind", "single_particle"},
          {"num_sites", H.lattice.num_sites()},
          {"lattice", {{"extents", H.lattice.extents()}}},
          {"segments", segs}};
}

SingleParticleHamiltonian schedule_from_json(const json& j) {
  if (j.value("kind", "") != "single_particle") throw std::invalid_argument("not a single-particle schedule");
  SingleParticleHamiltonian H;
  H.lattice = LatticeGraph(j.at("lattice").at("extents").get<std::vector<int>>());
  const int n = H.lattice.num_sites();
  if (j.value("num_sites", n) != n) throw std::invalid_argument("num_sites does not match the lattice");
  for (const auto& s : j.at("segments")) {
    std::vector<Hop> hops;
    for (const auto& h : s.at("hops")) {
      if (h.size() != 4) throw std::invalid_argument("hop entries are [i, j, re, im]");
      const Site a = h[0].get<Site>(), b = h[1].get<Site>();
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) throw std::invalid_argument("hop endpoints out of range");
      hops.push_back({a, b, cplx(h[2].get<double>(), h[3].get<double>())});
    }
    const double duration = s.contains("duration") ? s.at("duration").get<double>() : std::numeric_limits<double>::infinity();
    if (!(duration > 0.0)) throw std::invalid_argument("segment durations must be positive");
    H.segments.push_back({duration, HoppingMatrix::from_hops(n, hops)});
  }
  return H;
}

}  // namespace lightcone::free
