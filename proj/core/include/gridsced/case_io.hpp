#pragma once

#include <string>
#include <vector>

#include "gridsced/model.hpp"

namespace gridsced {

/// Native structured-text case format (JSON). Field names mirror the
/// model structs; optional fields take the struct defaults, and an
/// absent or null ramp_rate means ramp-unconstrained. Round-trips a
/// NetworkModel exactly.
NetworkModel parse_case_json(const std::string& text);
std::string write_case_json(const NetworkModel& model, int indent = 2);

NetworkModel load_case_json_file(const std::string& path);

/// Loads a case by extension: ".m" MATPOWER, ".json" native.
NetworkModel load_case(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace gridsced
