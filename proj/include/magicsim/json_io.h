#pragma once

#include <string>

#include "json.hpp"
#include "magicsim/production.h"
#include "magicsim/profile.h"
#include "magicsim/scheduler.h"

namespace magicsim {

// Key order is preserved so written files are stable.
using Json = nlohmann::ordered_json;

// Mechanism fields only, with the exact config field names. Unset optional
// fields are written as null.
Json to_json(const MechanismConfig& cfg);

// Reads the fields of one mechanism's config. Unknown fields, wrong types and
// out-of-range values throw ConfigError.
MechanismConfig mechanism_from_json(Mechanism m, const Json& j);

// Overwrites `base` with the fields present in `j`; same error rules.
MechanismConfig merge_mechanism_json(const MechanismConfig& base, const Json& j);

Json to_json(const SimConfig& cfg);
Json to_json(const SimResult& r, bool include_traces = true);
Json to_json(const StaticProfile& p);

// Pretty-printed with a trailing newline; doubles round-trip exactly.
std::string dump(const Json& j);

// Throws ConfigError with `what` in the message on malformed JSON.
Json parse_json(const std::string& text, const std::string& what);

}  // namespace magicsim
