#pragma once

#include <json.hpp>

#include "lightcone/free_walk.hpp"

namespace lightcone::free {

// Same layout as spin schedules ("lattice", "segments" with "duration"), with
// kind "single_particle" and each segment listing its upper-triangular hoppings as
// [i, j, re, im].
nlohmann::json schedule_to_json(const SingleParticleHamiltonian& H);
SingleParticleHamiltonian schedule_from_json(const nlohmann::json& j);

}  // namespace lightcone::free
