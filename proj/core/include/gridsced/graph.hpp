#pragma once

#include <set>
#include <utility>
#include <vector>

#include "gridsced/model.hpp"

namespace gridsced {

/// Connected components of an undirected multigraph. Returns a component
/// index per node, numbered by first appearance.
std::vector<int> connected_components(int num_nodes,
                                      const std::vector<std::pair<int, int>>& edges);

/// Indices of the edges whose removal disconnects their component.
/// Parallel edges are never bridges.
std::vector<int> find_bridges(int num_nodes, const std::vector<std::pair<int, int>>& edges);

/// Island index per bus for the in-service topology minus the given
/// out-of-service branch ids.
std::vector<int> island_membership(const NetworkModel& model, const std::set<int>& out_of_service);

/// Branch ids of the radial (bridge) branches of the in-service topology
/// minus `out_of_service`.
std::set<int> find_radial_branches(const NetworkModel& model,
                                   const std::set<int>& out_of_service = {});

/// True when removing `candidate_branch_id` (in addition to `out_of_service`)
/// leaves every currently-connected bus pair connected.
bool keeps_connectivity(const NetworkModel& model, const std::set<int>& out_of_service,
                        int candidate_branch_id);

}  // namespace gridsced
