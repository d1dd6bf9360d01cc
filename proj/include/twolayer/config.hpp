#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "twolayer/run_spec.hpp"

namespace twolayer {

using Json = nlohmann::ordered_json;

/// Parses a JSON configuration. Every key is optional; omitted keys take the
/// reference-scenario defaults. Unknown keys, wrong types and inadmissible values
/// raise ValidationError. A run manifest (run.json) is accepted as well: its embedded
/// "config" object is used.
RunSpec parse_config(const std::string& text);
RunSpec load_config(const std::filesystem::path& path);

/// Full resolved configuration; parse_config(write_config(s).dump()) == s.
Json write_config(const RunSpec& spec);

/// Throws ValidationError unless parameters, solver settings, grid and probes are admissible.
void validate_run_spec(const RunSpec& spec);

}  // namespace twolayer
