#pragma once

#include <string>
#include <vector>

#include "gridsced/cts.hpp"
#include "gridsced/market.hpp"
#include "gridsced/model.hpp"
#include "gridsced/power_flow.hpp"
#include "gridsced/rtca.hpp"
#include "gridsced/sced.hpp"

namespace gridsced {

struct PipelineConfig {
  ScedConfig sced;
  PowerFlowOptions power_flow;
  int jobs = 1;
};

/// One monitoring pass over the network: base-case AC power flow, normal-
/// rating check, and the N-1 scan. Procedure B adds switching analysis —
/// a full candidate ranking before SCED, a replay of the stored actions
/// after it.
struct StageAnalysis {
  PowerFlowSolution base;
  std::vector<FlowViolation> base_violations;
  CaReport ca;
  CtsReport cts;
  bool has_cts = false;
};

struct PipelineReport {
  std::string procedure;  ///< "A" or "B"
  PipelineConfig config;
  StageAnalysis pre;
  std::vector<NetworkConstraint> constraints;  ///< as solved (pseudo applied if any)
  ScedSolution sced;
  MarketReport market;
  StageAnalysis post;  ///< at the re-dispatched operating point

  double pre_violation_mva = 0.0;   ///< N-1 violation total before re-dispatch
  double post_violation_mva = 0.0;  ///< and after
  double delta_violation_mva = 0.0;

  /// Procedure B with pseudo limits: the same selection solved with actual
  /// limits, for the cost comparison.
  bool has_sced_baseline = false;
  double baseline_total_cost = 0.0;
  double baseline_congestion_cost = 0.0;

  std::vector<std::string> warnings;
};

/// Monitor, dispatch, re-check: power flow and RTCA, constraint selection,
/// SCED at the configured variant, then the same monitoring at the new
/// dispatch points.
PipelineReport run_procedure_a(const NetworkModel& model, const PipelineConfig& config);

/// Procedure A with a switching stage spliced in: CTS ranking after RTCA,
/// pseudo emergency limits (when enabled) before the solve, and a replay of
/// the stored switch actions against the post-dispatch violations.
PipelineReport run_procedure_b(const NetworkModel& model, const PipelineConfig& config);

std::string pipeline_report_json(const PipelineReport& report, const NetworkModel& model);
std::string pipeline_summary_text(const PipelineReport& report, const NetworkModel& model);

/// Plot data (labeled CSV, no rendering): cost and payment bars.
std::string congestion_plot_csv(const PipelineReport& report);
std::string payment_plot_csv(const PipelineReport& report);

}  // namespace gridsced
