#pragma once

#include <json.hpp>

#include "illum/stimulus.hpp"

namespace illum {

// {"family": "<tag>", "params": {...}}. Reading rejects unknown keys and
// fills absent keys with defaults; writing emits every field.
nlohmann::json to_json(const StimulusSpec& spec);
nlohmann::json to_json(const BaseSpec& spec);
StimulusSpec stimulus_from_json(const nlohmann::json& j);

std::string to_string(Side side);
std::string to_string(Waveform waveform);
std::string to_string(GridVariant variant);
std::string to_string(CarrierConvention convention);

Waveform waveform_from_string(std::string_view name);
GridVariant grid_variant_from_string(std::string_view name);

}  // namespace illum
