#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "scp/bench/bench.hpp"

namespace scp::bench {

// JSON round-trip for every config knob; every default appears explicitly in
// the serialized form so a dumped config is self-describing.
nlohmann::json to_json(const TrialSpec& spec);
nlohmann::json to_json(const SweepSpec& spec);

TrialSpec trial_from_json(const nlohmann::json& j);
SweepSpec sweep_from_json(const nlohmann::json& j);

// Loads a JSON config file (empty path -> defaults) and applies dotted-path
// overrides of the form "a.b.c=value" where value parses as JSON (bare words
// become strings). Throws std::runtime_error on unreadable files/paths.
nlohmann::json load_config(const std::string& path,
                           const std::vector<std::string>& overrides);

}  // namespace scp::bench
