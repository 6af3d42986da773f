#include "lightcone/spin_io.hpp"

#include <stdexcept>

namespace lightcone::spin {

using nlohmann::json;

namespace {

json pauli_list(const PauliSum& p) {
  json arr = json::array();
  for (const auto& [q, c] : p.terms())
    arr.push_back({{"ops", q.label(p.num_sites())}, {"re", c.real()}, {"im", c.imag()}});
  return arr;
}

PauliSum pauli_list_from(const json& arr, int num_sites) {
  PauliSum p(num_sites);
  for (const auto& e : arr) {
    const std::string ops = e.at("ops").get<std::string>();
    if (static_cast<int>(ops.size()) != num_sites) throw std::invalid_argument("Pauli label length mismatch");
    p.add(PauliString::from_label(ops), cplx(e.at("re").get<double>(), e.value("im", 0.0)));
  }
  return p;
}

}  // namespace

json operator_to_json(const OperatorState& op) {
  return {{"num_sites", op.num_sites()}, {"pauli", pauli_list(op.to_pauli())}};
}

OperatorState operator_from_json(const json& j) {
  const int L = j.at("num_sites").get<int>();
  return OperatorState::from_pauli(pauli_list_from(j.at("pauli"), L));
}

json state_to_json(const SpinState& psi) {
  json amps = json::array();
  for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i)
    amps.push_back({psi.amplitudes()[i].real(), psi.amplitudes()[i].imag()});
  return {{"num_sites", psi.num_sites()}, {"amplitudes", amps}};
}

SpinState state_from_json(const json& j) {
  const int L = j.at("num_sites").get<int>();
  const auto& a = j.at("amplitudes");
  Eigen::VectorXcd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = cplx(a[i].at(0).get<double>(), a[i].at(1).get<double>());
  return SpinState(L, std::move(v));
}

json schedule_to_json(const Schedule& s, const std::optional<LatticeGraph>& lattice) {
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json terms = json::array();
    for (const auto& t : seg.terms) {
      const int k = static_cast<int>(t.support.size());
      terms.push_back({{"sites", t.support.sites()}, {"pauli", pauli_list(dense_to_pauli(t.matrix, k))}});
    }
    segs.push_back({{"duration", seg.duration}, {"terms", terms}});
  }
  json out = {{"kind", "spin"}, {"num_sites", s.num_sites}, {"segments", segs}};
  if (lattice) out["lattice"] = {{"extents", lattice->extents()}};
  return out;
}

Schedule schedule_from_json(const json& j) {
  if (j.value("kind", std::string("spin")) != "spin") throw std::invalid_argument("not a spin schedule");
  Schedule s{j.at("num_sites").get<int>(), {}};
  for (const auto& seg : j.at("segments")) {
    Segment out;
    out.duration = seg.at("duration").get<double>();
    for (const auto& t : seg.at("terms")) {
      const auto sites = t.at("sites").get<std::vector<Site>>();
      PauliSum local = pauli_list_from(t.at("pauli"), static_cast<int>(sites.size()));
      out.terms.push_back(HamiltonianTerm::from_matrix(sites, pauli_to_dense(local)));
    }
    s.append(std::move(out));
  }
  s.validate();
  return s;
}

std::optional<LatticeGraph> lattice_from_json(const json& j) {
  if (!j.contains("lattice")) return std::nullopt;
  return LatticeGraph(j.at("lattice").at("extents").get<std::vector<int>>());
}

}  // namespace lightcone::spin
