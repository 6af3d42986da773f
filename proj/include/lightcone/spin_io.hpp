#pragma once

#include <json.hpp>
#include <optional>

#include "lightcone/lattice.hpp"
#include "lightcone/spin_sim.hpp"

namespace lightcone::spin {

// JSON interchange. Operators are Pauli-string lists with complex coefficients,
// states are [re, im] amplitude arrays, schedules list segments of Pauli terms.
nlohmann::json operator_to_json(const OperatorState& op);
OperatorState operator_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const SpinState& psi);
SpinState state_from_json(const nlohmann::json& j);

nlohmann::json schedule_to_json(const Schedule& s, const std::optional<LatticeGraph>& lattice = std::nullopt);
Schedule schedule_from_json(const nlohmann::json& j);
std::optional<LatticeGraph> lattice_from_json(const nlohmann::json& j);

}  // namespace lightcone::spin
