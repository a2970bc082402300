#pragma once

// Scenario text format: `[section]` headers, `key = value` scalars and
// `kind key=value ...` records. See docs/scenario_format.md.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fwa/domain.hpp"

namespace fwa {

Scenario parse_scenario(std::istream& in, const std::string& name = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);
void write_scenario(std::ostream& out, const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

// Checks every invariant and fills derived fields (radio capacities).
// Throws ValidationError.
void validate_scenario(Scenario& scenario);

// Applies one `key=value` override (e.g. controller.p_fail_startup=0.1).
// Throws ValidationError for unknown keys or bad values.
void apply_scenario_override(Scenario& scenario, const std::string& key, const std::string& value);

// Name lookup in the bundled data directory, or a path as given.
std::filesystem::path resolve_scenario_path(const std::string& name_or_path);
std::filesystem::path data_dir();

}  // namespace fwa
