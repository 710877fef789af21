#pragma once

#include <string>
#include <vector>

#include "gridsced/model.hpp"

namespace gridsced {

/// Number of equal-width segments used when converting polynomial cost
/// rows to piecewise-linear form.
inline constexpr int kCostSegments = 10;

/// Parses MATPOWER case text (baseMVA scalar plus bus/gen/branch/gencost
/// matrices, standard column order). Polynomial cost rows are converted
/// to convex PWL by tangent sampling at kCostSegments segments over
/// [p_min, p_max]. rateA maps to rate_normal, rateC to rate_emergency; a
/// zero rating means the branch is unmonitored.
///
/// Throws DataError with line/column on syntax errors, and on unresolved
/// bus references, non-convex costs, or a missing slack bus. Non-fatal
/// oddities (clamped initial dispatch, ...) are appended to `warnings`.
NetworkModel parse_matpower_case(const std::string& text,
                                 std::vector<std::string>* warnings = nullptr);

NetworkModel load_matpower_file(const std::string& path,
                                std::vector<std::string>* warnings = nullptr);

/// Writes a model back out as a MATPOWER case. Cost curves are emitted as
/// PWL gencost rows (model 1), which round-trips them exactly. Reserve
/// prices and unlimited ramp markers have no MATPOWER column and are
/// dropped; use the native JSON format when full fidelity matters.
std::string write_matpower_case(const NetworkModel& model, const std::string& case_name = "case");

}  // namespace gridsced
