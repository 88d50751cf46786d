// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "owa/core.hpp"

// Directed 4-neighbor grid graphs for the shortest-path task. Node weights
// convert to edge weights by the tail-node convention (edge u->v costs the
// weight of u); the sink weight is a path-independent constant, so the same
// argmin solves the node-weighted problem. The incidence matrix of any
// directed graph is totally unimodular, which keeps LP solutions integral.

namespace owa {

struct GridGraph {
    int rows = 0;
    int cols = 0;
    int source = 0;  // top-left
    int sink = 0;    // bottom-right
    std::vector<std::pair<int, int>> edges;  // directed (u, v), both directions per adjacency

    GridGraph() = default;
    GridGraph(int r, int c);

    int n_nodes() const { return rows * cols; }
    int n_edges() const { return static_cast<int>(edges.size()); }
    int node_id(int r, int c) const { return r * cols + c; }
};

struct PathSolution {
    std::vector<int> nodes;  // source..sink
    Vec node_x;              // 0/1 over nodes
    Vec edge_x;              // 0/1 over edges
    double cost = 0.0;       // total node cost including both endpoints
};

/// Minimum node-cost source->sink path by Dijkstra. Negative entries of
/// node_cost are clamped at 1e-6 for the solve only; cost reported on the
/// clamped weights. Ties are broken deterministically (lexicographic
/// (distance, node) heap order, strict-improvement relaxation).
PathSolution solve_shortest_path(const GridGraph& g, const Vec& node_cost);

/// Per-species total node cost of a path, rows of C indexed by species.
Vec species_path_costs(const Mat& C, const Vec& node_x);

/// Exact minimizer of w^T sort_desc(per-species path costs) over all simple
/// source->sink paths, i.e. the joint path maximizing the OWA of negated
/// species costs. Branch-and-bound over self-avoiding walks with per-species
/// shortest-path lower bounds; exact, intended for small grids.
PathSolution owa_optimal_joint_path(const GridGraph& g, const Mat& C, const OwaWeights& w);

/// All simple source->sink paths (test oracle scale only).
std::vector<std::vector<int>> enumerate_simple_paths(const GridGraph& g, size_t limit = 50'000'000);

}  // namespace owa
