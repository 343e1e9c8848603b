#pragma once

#include "hanflab/structure.hpp"

#include <json.hpp>

#include <string>

namespace hanflab {

using Json = nlohmann::ordered_json;

/// Canonical serialization: fixed field order, relation tables sorted
/// lexicographically (already a Structure invariant).
Json structure_to_json(const Structure& s);

/// Parses and validates; throws an input error listing every violation.
Structure structure_from_json(const Json& j);

Structure load_structure_file(const std::string& path);
void save_structure_file(const Structure& s, const std::string& path);

Json radius_to_json(const Radius& r);
Radius radius_from_json(const Json& j);

} // namespace hanflab
