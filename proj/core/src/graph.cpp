#include "gridsced/graph.hpp"

#include <algorithm>

namespace gridsced {

namespace {

// CSR adjacency over an undirected multigraph: neighbor node + edge index.
struct Adjacency {
  std::vector<int> head;
  std::vector<int> node;
  std::vector<int> edge;

  Adjacency(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
    std::vector<int> degree(num_nodes, 0);
    for (const auto& [a, b] : edges) {
      degree[a]++;
      degree[b]++;
    }
    head.assign(num_nodes + 1, 0);
    for (int i = 0; i < num_nodes; ++i) head[i + 1] = head[i] + degree[i];
    node.resize(head.back());
    edge.resize(head.back());
    std::vector<int> fill(head.begin(), head.end() - 1);
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      auto [a, b] = edges[e];
      node[fill[a]] = b;
      edge[fill[a]++] = e;
      node[fill[b]] = a;
      edge[fill[b]++] = e;
    }
  }
};

}  // namespace

std::vector<int> connected_components(int num_nodes,
                                      const std::vector<std::pair<int, int>>& edges) {
  Adjacency adj(num_nodes, edges);
  std::vector<int> component(num_nodes, -1);
  std::vector<int> stack;
  int next = 0;
  for (int start = 0; start < num_nodes; ++start) {
    if (component[start] >= 0) continue;
    component[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int i = adj.head[v]; i < adj.head[v + 1]; ++i) {
        int w = adj.node[i];
        if (component[w] < 0) {
          component[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return component;
}

// Iterative low-link DFS. The entry edge index (not the parent node) is
// skipped, so a parallel edge acts as a back edge and neither twin is a
// bridge.
std::vector<int> find_bridges(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  Adjacency adj(num_nodes, edges);
  std::vector<int> discovery(num_nodes, -1);
  std::vector<int> low(num_nodes, -1);
  std::vector<int> bridges;

  struct Frame {
    int node;
    int entry_edge;
    int cursor;
  };
  std::vector<Frame> stack;
  int time = 0;

  for (int root = 0; root < num_nodes; ++root) {
    if (discovery[root] >= 0) continue;
    discovery[root] = low[root] = time++;
    stack.push_back({root, -1, adj.head[root]});
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.cursor < adj.head[f.node + 1]) {
        int i = f.cursor++;
        int w = adj.node[i];
        int e = adj.edge[i];
        if (e == f.entry_edge) continue;
        if (discovery[w] >= 0) {
          low[f.node] = std::min(low[f.node], discovery[w]);
        } else {
          discovery[w] = low[w] = time++;
          stack.push_back({w, e, adj.head[w]});
        }
      } else {
        int v = f.node;
        int entry = f.entry_edge;
        stack.pop_back();
        if (!stack.empty()) {
          int parent = stack.back().node;
          low[parent] = std::min(low[parent], low[v]);
          if (low[v] > discovery[parent]) bridges.push_back(entry);
        }
      }
    }
  }
  std::sort(bridges.begin(), bridges.end());
  return bridges;
}

namespace {

// In-service branches minus overrides, as bus-offset edges tagged with the
// originating branch offset.
std::pair<std::vector<std::pair<int, int>>, std::vector<int>> active_edges(
    const NetworkModel& model, const std::set<int>& out_of_service) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> branch_offsets;
  for (int i = 0; i < static_cast<int>(model.branches.size()); ++i) {
    const Branch& br = model.branches[i];
    if (!br.in_service || out_of_service.count(br.id)) continue;
    edges.emplace_back(model.bus_offset(br.from_bus), model.bus_offset(br.to_bus));
    branch_offsets.push_back(i);
  }
  return {edges, branch_offsets};
}

}  // namespace

std::vector<int> island_membership(const NetworkModel& model,
                                   const std::set<int>& out_of_service) {
  auto [edges, offsets] = active_edges(model, out_of_service);
  (void)offsets;
  return connected_components(static_cast<int>(model.num_buses()), edges);
}

std::set<int> find_radial_branches(const NetworkModel& model,
                                   const std::set<int>& out_of_service) {
  auto [edges, offsets] = active_edges(model, out_of_service);
  std::set<int> result;
  for (int e : find_bridges(static_cast<int>(model.num_buses()), edges)) {
    result.insert(model.branches[offsets[e]].id);
  }
  return result;
}

bool keeps_connectivity(const NetworkModel& model, const std::set<int>& out_of_service,
                        int candidate_branch_id) {
  auto [edges, offsets] = active_edges(model, out_of_service);
  for (int e : find_bridges(static_cast<int>(model.num_buses()), edges)) {
    if (model.branches[offsets[e]].id == candidate_branch_id) return false;
  }
  return true;
}

}  // namespace gridsced
