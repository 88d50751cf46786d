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

#include "owa/grid.hpp"

#include <functional>
#include <limits>
#include <map>
#include <queue>

namespace owa {

namespace {
constexpr double kMinNodeCost = 1e-6;
}

GridGraph::GridGraph(int r, int c) : rows(r), cols(c) {
    if (r < 1 || c < 1) throw std::invalid_argument("GridGraph: grid must be at least 1x1");
    source = 0;
    sink = r * c - 1;
    const int dr[4] = {0, 1, 0, -1};
    const int dc[4] = {1, 0, -1, 0};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            for (int k = 0; k < 4; ++k) {
                const int ni = i + dr[k], nj = j + dc[k];
                if (ni < 0 || ni >= r || nj < 0 || nj >= c) continue;
                edges.emplace_back(node_id(i, j), node_id(ni, nj));
            }
}

namespace {

std::vector<std::vector<int>> adjacency(const GridGraph& g) {
    std::vector<std::vector<int>> adj(g.n_nodes());
    for (const auto& [u, v] : g.edges) adj[u].push_back(v);
    return adj;
}

// Dijkstra over node costs; dist[v] = cheapest cost of a start->v path
// counting every node on it, start and v included.
std::pair<Vec, std::vector<int>> dijkstra_from(const GridGraph& g, const Vec& cost, int start,
                                               const std::vector<std::vector<int>>& adj) {
    const int n = g.n_nodes();
    Vec dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> pred(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[start] = cost[start];
    heap.emplace(dist[start], start);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int v : adj[u]) {
            const double nd = d + cost[v];
            if (nd < dist[v]) {
                dist[v] = nd;
                pred[v] = u;
                heap.emplace(nd, v);
            }
        }
    }
    return {std::move(dist), std::move(pred)};
}

Vec clamp_costs(const Vec& node_cost) {
    Vec c = node_cost;
    for (double& x : c) {
        if (!std::isfinite(x)) throw std::invalid_argument("shortest path: node costs must be finite");
        x = std::max(x, kMinNodeCost);
    }
    return c;
}

PathSolution build_solution(const GridGraph& g, const std::vector<int>& nodes, const Vec& cost) {
    PathSolution sol;
    sol.nodes = nodes;
    sol.node_x.assign(g.n_nodes(), 0.0);
    for (int v : nodes) {
        sol.node_x[v] = 1.0;
        sol.cost += cost[v];
    }
    std::map<std::pair<int, int>, int> edge_index;
    for (int e = 0; e < g.n_edges(); ++e) edge_index[g.edges[e]] = e;
    sol.edge_x.assign(g.n_edges(), 0.0);
    for (size_t k = 0; k + 1 < nodes.size(); ++k)
        sol.edge_x[edge_index.at({nodes[k], nodes[k + 1]})] = 1.0;
    return sol;
}

}  // namespace

PathSolution solve_shortest_path(const GridGraph& g, const Vec& node_cost) {
    if (static_cast<int>(node_cost.size()) != g.n_nodes())
        throw std::invalid_argument("solve_shortest_path: cost dimension mismatch");
    const Vec cost = clamp_costs(node_cost);
    const auto adj = adjacency(g);
    auto [dist, pred] = dijkstra_from(g, cost, g.source, adj);
    if (!std::isfinite(dist[g.sink])) throw std::runtime_error("solve_shortest_path: sink unreachable");
    std::vector<int> rev;
    for (int v = g.sink; v != -1; v = pred[v]) rev.push_back(v);
    std::vector<int> nodes(rev.rbegin(), rev.rend());
    if (nodes.front() != g.source) throw std::runtime_error("solve_shortest_path: sink unreachable");
    return build_solution(g, nodes, cost);
}

Vec species_path_costs(const Mat& C, const Vec& node_x) {
    if (C.cols != static_cast<int>(node_x.size())) throw std::invalid_argument("species_path_costs: shape mismatch");
    return matvec(C, node_x);
}

PathSolution owa_optimal_joint_path(const GridGraph& g, const Mat& C, const OwaWeights& w) {
    const int n = g.n_nodes();
    const int m = C.rows;
    if (n > 62) throw std::invalid_argument("owa_optimal_joint_path: grid too large for exact search");
    if (C.cols != n || w.dim() != m) throw std::invalid_argument("owa_optimal_joint_path: shape mismatch");

    const auto adj = adjacency(g);
    std::vector<Vec> species_cost(m);
    for (int s = 0; s < m; ++s) species_cost[s] = clamp_costs(C.row_vec(s));

    // Aggregation to minimize: w on species costs sorted descending, which is
    // -OWA_w(-costs). Monotone in each coordinate, so per-species
    // shortest-path remainders give an admissible lower bound.
    auto aggregate = [&](Vec costs) {
        std::sort(costs.begin(), costs.end(), std::greater<>());
        double v = 0.0;
        for (int j = 0; j < m; ++j) v += w[j] * costs[j];
        return v;
    };
    auto path_costs = [&](const std::vector<int>& nodes) {
        Vec c(m, 0.0);
        for (int v : nodes)
            for (int s = 0; s < m; ++s) c[s] += species_cost[s][v];
        return c;
    };

    std::vector<Vec> to_sink(m);  // per species: best remaining cost from v, v included
    for (int s = 0; s < m; ++s)
        to_sink[s] = dijkstra_from(g, species_cost[s], g.sink, adj).first;  // grid adjacency is symmetric

    // Incumbents: each species' own optimal path and the mean-cost path.
    std::vector<int> best_nodes;
    double best_val = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& nodes) {
        const double v = aggregate(path_costs(nodes));
        if (v < best_val) {
            best_val = v;
            best_nodes = nodes;
        }
    };
    for (int s = 0; s < m; ++s) consider(solve_shortest_path(g, C.row_vec(s)).nodes);
    {
        Vec mean(n, 0.0);
        for (int s = 0; s < m; ++s) axpy(1.0 / m, species_cost[s], mean);
        consider(solve_shortest_path(g, mean).nodes);
    }

    std::vector<int> path{g.source};
    Vec acc(m);
    for (int s = 0; s < m; ++s) acc[s] = species_cost[s][g.source];
    uint64_t visited = 1ull << g.source;

    Vec lb(m);
    std::function<void(int)> dfs = [&](int u) {
        for (int s = 0; s < m; ++s) lb[s] = acc[s] - species_cost[s][u] + to_sink[s][u];
        if (aggregate(lb) >= best_val - 1e-12) return;
        if (u == g.sink) {
            consider(path);
            return;
        }
        for (int v : adj[u]) {
            if (visited & (1ull << v)) continue;
            visited |= 1ull << v;
            path.push_back(v);
            for (int s = 0; s < m; ++s) acc[s] += species_cost[s][v];
            dfs(v);
            for (int s = 0; s < m; ++s) acc[s] -= species_cost[s][v];
            path.pop_back();
            visited &= ~(1ull << v);
        }
    };
    dfs(g.source);

    PathSolution sol = build_solution(g, best_nodes, species_cost[0]);
    sol.cost = best_val;  // aggregate objective, not a single species' cost
    return sol;
}

std::vector<std::vector<int>> enumerate_simple_paths(const GridGraph& g, size_t limit) {
    if (g.n_nodes() > 62) throw std::invalid_argument("enumerate_simple_paths: grid too large");
    const auto adj = adjacency(g);
    std::vector<std::vector<int>> out;
    std::vector<int> path{g.source};
    uint64_t visited = 1ull << g.source;
    std::function<void(int)> dfs = [&](int u) {
        if (u == g.sink) {
            out.push_back(path);
            if (out.size() > limit) throw std::runtime_error("enumerate_simple_paths: limit exceeded");
            return;
        }
        for (int v : adj[u]) {
            if (visited & (1ull << v)) continue;
            visited |= 1ull << v;
            path.push_back(v);
            dfs(v);
            path.pop_back();
            visited &= ~(1ull << v);
        }
    };
    dfs(g.source);
    return out;
}

}  // namespace owa
