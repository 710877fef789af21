#pragma once

#include <string>
#include <vector>

#include "gridsced/case_io.hpp"
#include "gridsced/model.hpp"

namespace gridsced::testutil {

inline std::string data_path(const std::string& name) {
  return std::string(GRIDSCED_DATA_DIR) + "/cases/" + name;
}

inline NetworkModel load_fixture(const std::string& name) {
  return load_case(data_path(name));
}

/// Every bundled case small enough for exhaustive (all-outage, all-branch)
/// sweeps.
inline std::vector<std::string> small_fixtures() {
  return {"two_bus.m", "path3.json", "ring3.json", "ring4.json",
          "ring_spur.json", "lmp3.json", "zero_load.json", "parallel_pair.m"};
}

/// The fixtures that are meaningful dispatch studies under the default
/// configuration (multi-unit, reserve-feasible).
inline std::vector<std::string> dispatch_fixtures() {
  return {"path3.json", "ring3.json", "ring4.json", "ring_spur.json",
          "lmp3.json", "zero_load.json", "parallel_pair.m"};
}

}  // namespace gridsced::testutil
