/// @file network.hpp
/// @brief Directed pipeline graphs: node roles, validation, refinement of
///        long pipes into short sub-edges, and assembly of the dense
///        weighted/signed incidence matrices used by the flow models.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pipeflow/common.hpp"

namespace pipeflow {

// ---------------------------------------------------------------------------
// Node and pipe descriptions
// ---------------------------------------------------------------------------

/// Boundary role of a network node.
enum class node_role {
    slack,       ///< pressure and inflow concentration prescribed
    injection,   ///< mass inflow rate and inflow concentration prescribed
    withdrawal,  ///< mass outflow rate prescribed
};

/// Display name of a node role.
inline const char* to_string(node_role r) {
    switch (r) {
        case node_role::slack: return "slack";
        case node_role::injection: return "injection";
        case node_role::withdrawal: return "withdrawal";
    }
    return "?";
}

/// A network node.  Auxiliary nodes created by refinement are withdrawal
/// nodes with zero outflow.
struct node {
    std::string id;  ///< unique name
    node_role role = node_role::withdrawal;
    bool auxiliary = false;  ///< true when created by edge refinement
};

/// A directed pipe segment from `from` to `to`.
///
/// `compressor_ratio` multiplies the tail-node pressure at the segment inlet
/// and `regulator_ratio` multiplies the head-node pressure at the segment
/// outlet; both are >= 1, with 1 meaning "no station installed".
struct pipe {
    std::string from;               ///< tail node id
    std::string to;                 ///< head node id
    double length_km = 0.0;         ///< segment length, km
    double diameter_m = 0.0;        ///< internal diameter, m
    double friction = 0.0;          ///< Darcy friction factor
    double compressor_ratio = 1.0;  ///< inlet pressure multiplier
    double regulator_ratio = 1.0;   ///< outlet pressure multiplier

    /// Cross-sectional area, m^2.
    double area() const { return kPi * diameter_m * diameter_m / 4.0; }
    /// Segment length in meters.
    double length_m() const { return length_km * 1000.0; }
};

/// A validated directed pipeline graph.
///
/// Nodes are stored in canonical order: all slack nodes first, then
/// injection nodes, then withdrawal nodes; refinement appends its auxiliary
/// nodes (withdrawal role) at the end.  Edges reference nodes by index into
/// `nodes`.
struct network_graph {
    std::vector<node> nodes;
    std::vector<pipe> pipes;

    std::vector<int> tail;  ///< per edge: index of the `from` node
    std::vector<int> head;  ///< per edge: index of the `to` node

    int n_slack = 0;       ///< number of slack nodes
    int n_injection = 0;   ///< number of non-slack injection nodes
    int n_withdrawal = 0;  ///< number of withdrawal nodes (incl. auxiliary)

    /// For each node, position of that node in the caller-supplied list
    /// (-1 for auxiliary nodes added by refinement).
    std::vector<int> input_position;

    /// Per refined edge: index of the originating pipe in the pre-refinement
    /// graph, plus whether this sub-edge is the first/last segment of it.
    std::vector<int> parent_edge;
    std::vector<bool> first_segment;
    std::vector<bool> last_segment;

    /// Incoming / outgoing edge lists per node.
    std::vector<std::vector<int>> in_edges;
    std::vector<std::vector<int>> out_edges;

    std::unordered_map<std::string, int> index_by_id;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int edge_count() const { return static_cast<int>(pipes.size()); }
    int non_slack_count() const { return node_count() - n_slack; }

    /// Index of a node id; throws input_error when unknown.
    int index_of(const std::string& id) const {
        auto it = index_by_id.find(id);
        if (it == index_by_id.end()) throw input_error("unknown node id '" + id + "'");
        return it->second;
    }

    bool has_node(const std::string& id) const {
        return index_by_id.find(id) != index_by_id.end();
    }

    node_role role_of(int node_index) const { return nodes[node_index].role; }

    /// Column index of a non-slack node inside the non-slack block
    /// (node index minus the slack count).
    int demand_index(int node_index) const { return node_index - n_slack; }
};

// ---------------------------------------------------------------------------
// Graph construction
// ---------------------------------------------------------------------------

namespace detail {

/// Rebuilds the per-node edge adjacency lists and the id lookup table.
inline void rebuild_adjacency(network_graph& g) {
    g.index_by_id.clear();
    for (int j = 0; j < g.node_count(); ++j) g.index_by_id[g.nodes[j].id] = j;
    g.tail.assign(g.edge_count(), -1);
    g.head.assign(g.edge_count(), -1);
    g.in_edges.assign(g.node_count(), {});
    g.out_edges.assign(g.node_count(), {});
    for (int k = 0; k < g.edge_count(); ++k) {
        g.tail[k] = g.index_of(g.pipes[k].from);
        g.head[k] = g.index_of(g.pipes[k].to);
        g.out_edges[g.tail[k]].push_back(k);
        g.in_edges[g.head[k]].push_back(k);
    }
}

/// Validates structural requirements shared by raw and refined graphs.
inline void validate_structure(const network_graph& g) {
    if (g.n_slack == 0) throw input_error("network has no slack node");
    for (int k = 0; k < g.edge_count(); ++k) {
        const pipe& e = g.pipes[k];
        if (!(e.length_km > 0.0) || !(e.diameter_m > 0.0) || !(e.friction > 0.0))
            throw input_error("pipe " + e.from + "->" + e.to +
                              " has nonpositive length, diameter, or friction");
        if (e.compressor_ratio < 1.0 || e.regulator_ratio < 1.0)
            throw input_error("pipe " + e.from + "->" + e.to + " has control ratio < 1");
        if (g.tail[k] == g.head[k])
            throw input_error("self-loop at node '" + e.from + "'");
    }
    // Connectivity over the undirected support.
    if (g.node_count() > 0) {
        std::vector<char> seen(g.node_count(), 0);
        std::queue<int> bfs;
        bfs.push(0);
        seen[0] = 1;
        int reached = 1;
        while (!bfs.empty()) {
            int j = bfs.front();
            bfs.pop();
            auto visit = [&](int other) {
                if (!seen[other]) {
                    seen[other] = 1;
                    ++reached;
                    bfs.push(other);
                }
            };
            for (int k : g.out_edges[j]) visit(g.head[k]);
            for (int k : g.in_edges[j]) visit(g.tail[k]);
        }
        if (reached != g.node_count()) throw input_error("network is disconnected");
    }
    // Slack nodes act as pure sources; every non-slack node needs at least
    // one incoming edge so that its storage coefficient is positive.
    for (int j = 0; j < g.node_count(); ++j) {
        if (g.nodes[j].role == node_role::slack) {
            if (!g.in_edges[j].empty())
                throw input_error("slack node '" + g.nodes[j].id + "' has an incoming edge");
        } else if (g.in_edges[j].empty()) {
            throw input_error("non-slack node '" + g.nodes[j].id + "' has no incoming edge");
        }
    }
}

}  // namespace detail

/// Builds a validated graph from node and pipe lists.
///
/// Nodes are reordered into canonical order (slack, injection, withdrawal;
/// stable within each class) and the original positions are recorded in
/// `input_position`.  Throws input_error for duplicate ids, unknown or
/// self-loop endpoints, nonpositive geometry, control ratios below 1,
/// missing slack nodes, disconnected graphs, slack nodes with incoming
/// edges, or non-slack nodes without incoming edges.
inline network_graph build_graph(std::vector<node> nodes, std::vector<pipe> pipes) {
    network_graph g;
    {
        std::unordered_map<std::string, int> seen;
        for (const node& n : nodes) {
            if (n.id.empty()) throw input_error("node with empty id");
            if (!seen.emplace(n.id, 1).second)
                throw input_error("duplicate node id '" + n.id + "'");
        }
    }
    // Canonical ordering: slack < injection < withdrawal, stable.
    std::vector<int> order(nodes.size());
    std::iota(order.begin(), order.end(), 0);
    auto rank = [](node_role r) {
        switch (r) {
            case node_role::slack: return 0;
            case node_role::injection: return 1;
            case node_role::withdrawal: return 2;
        }
        return 3;
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rank(nodes[a].role) < rank(nodes[b].role);
    });
    g.nodes.reserve(nodes.size());
    g.input_position.reserve(nodes.size());
    for (int pos : order) {
        g.nodes.push_back(nodes[pos]);
        g.input_position.push_back(pos);
    }
    for (const node& n : g.nodes) {
        if (n.role == node_role::slack) ++g.n_slack;
        else if (n.role == node_role::injection) ++g.n_injection;
        else ++g.n_withdrawal;
    }
    g.pipes = std::move(pipes);
    g.parent_edge.resize(g.pipes.size());
    std::iota(g.parent_edge.begin(), g.parent_edge.end(), 0);
    g.first_segment.assign(g.pipes.size(), true);
    g.last_segment.assign(g.pipes.size(), true);
    detail::rebuild_adjacency(g);
    detail::validate_structure(g);
    return g;
}

/// Splits every edge longer than `max_segment_km` into equal-length
/// sub-edges so that all refined edges have length <= max_segment_km.
///
/// A pipe of length L becomes ceil(L / max_segment_km) sub-edges joined by
/// auxiliary withdrawal nodes with zero outflow.  The compressor ratio stays
/// on the first sub-edge and the regulator ratio on the last; interior
/// sub-edges carry ratio 1.  Edge orientation, diameter, and friction are
/// inherited.  The operation is a no-op for edges already short enough.
inline network_graph refine(const network_graph& g, double max_segment_km) {
    if (!(max_segment_km > 0.0)) throw input_error("refinement length must be positive");

    std::vector<node> nodes = g.nodes;
    std::vector<pipe> out_pipes;
    std::vector<int> parent;
    std::vector<bool> first_seg, last_seg;

    for (int k = 0; k < g.edge_count(); ++k) {
        const pipe& e = g.pipes[k];
        const int parts = std::max(
            1, static_cast<int>(std::ceil(e.length_km / max_segment_km - 1e-12)));
        const double seg_len = e.length_km / parts;
        std::string prev = e.from;
        for (int s = 0; s < parts; ++s) {
            pipe sub = e;
            sub.length_km = seg_len;
            sub.from = prev;
            if (s + 1 < parts) {
                sub.to = e.from + "." + e.to + "." + std::to_string(s + 1);
                nodes.push_back({sub.to, node_role::withdrawal, /*auxiliary=*/true});
            } else {
                sub.to = e.to;
            }
            sub.compressor_ratio = (s == 0) ? e.compressor_ratio : 1.0;
            sub.regulator_ratio = (s + 1 == parts) ? e.regulator_ratio : 1.0;
            out_pipes.push_back(sub);
            parent.push_back(g.parent_edge[k]);
            first_seg.push_back(s == 0 && g.first_segment[k]);
            last_seg.push_back(s + 1 == parts && g.last_segment[k]);
            prev = sub.to;
        }
    }

    network_graph r;
    r.nodes = std::move(nodes);
    r.pipes = std::move(out_pipes);
    r.n_slack = g.n_slack;
    r.n_injection = g.n_injection;
    r.n_withdrawal = static_cast<int>(r.nodes.size()) - r.n_slack - r.n_injection;
    r.input_position = g.input_position;
    r.input_position.resize(r.nodes.size(), -1);
    r.parent_edge = std::move(parent);
    r.first_segment = std::move(first_seg);
    r.last_segment = std::move(last_seg);
    detail::rebuild_adjacency(r);
    detail::validate_structure(r);
    return r;
}

// ---------------------------------------------------------------------------
// Incidence matrices
// ---------------------------------------------------------------------------

/// Dense incidence-matrix bundle for a graph with edge control ratios
/// sampled at one instant.
///
/// M is the E x V weighted incidence matrix: row k holds +mu_upper_k in the
/// head-node column and -mu_lower_k in the tail-node column.  M_s / M_d are
/// its slack / non-slack column blocks; M_d_pos and M_d_neg are the
/// entrywise positive and negative parts of M_d (so M_d = M_d_pos + M_d_neg
/// and |M_d| = M_d_pos - M_d_neg); the Q matrices are entrywise signs.
struct incidence_set {
    mat M;        ///< E x V weighted incidence
    mat M_s;      ///< slack columns of M
    mat M_d;      ///< non-slack columns of M
    mat M_d_pos;  ///< entrywise max(M_d, 0)
    mat M_d_neg;  ///< entrywise min(M_d, 0)
    mat Q_d;      ///< sign(M_d)
    mat Q_d_pos;  ///< sign(M_d_pos)
    mat Q_d_neg;  ///< sign(M_d_neg)
    mat Q_s;      ///< sign(M_s)
    mat Q_s_neg;  ///< sign(min(M_s, 0))

    vec chi;         ///< per edge: cross-sectional area, m^2
    vec ell_m;       ///< per edge: length, m
    vec flux_coeff;  ///< per edge: sqrt(2 * diameter / (friction * length_m))
    vec mu_lower;    ///< per edge: inlet pressure multiplier
    vec mu_upper;    ///< per edge: outlet pressure multiplier
    vec r;           ///< per non-slack node: storage coefficient,
                     ///< sum over incoming edges of chi * length_m * mu_upper
};

/// Assembles the incidence bundle with per-edge control ratios supplied
/// explicitly (values sampled at some instant).  Throws input_error when a
/// ratio is below 1 or a vector has the wrong length.
inline incidence_set incidence_matrices(const network_graph& g, const vec& mu_lower,
                                        const vec& mu_upper) {
    const int E = g.edge_count();
    const int V = g.node_count();
    const int Vs = g.n_slack;
    const int Vd = V - Vs;
    if (mu_lower.size() != E || mu_upper.size() != E)
        throw input_error("control ratio vector length does not match edge count");
    for (int k = 0; k < E; ++k)
        if (mu_lower[k] < 1.0 || mu_upper[k] < 1.0)
            throw input_error("control ratio < 1 on edge " + std::to_string(k));

    incidence_set s;
    s.M = mat::Zero(E, V);
    for (int k = 0; k < E; ++k) {
        s.M(k, g.head[k]) += mu_upper[k];
        s.M(k, g.tail[k]) -= mu_lower[k];
    }
    s.M_s = s.M.leftCols(Vs);
    s.M_d = s.M.rightCols(Vd);
    s.M_d_pos = s.M_d.cwiseMax(0.0);
    s.M_d_neg = s.M_d.cwiseMin(0.0);
    auto sign_of = [](const mat& a) {
        return mat(a.unaryExpr(
            [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }));
    };
    s.Q_d = sign_of(s.M_d);
    s.Q_d_pos = sign_of(s.M_d_pos);
    s.Q_d_neg = sign_of(s.M_d_neg);
    s.Q_s = sign_of(s.M_s);
    s.Q_s_neg = sign_of(mat(s.M_s.cwiseMin(0.0)));

    s.chi.resize(E);
    s.ell_m.resize(E);
    s.flux_coeff.resize(E);
    s.mu_lower = mu_lower;
    s.mu_upper = mu_upper;
    for (int k = 0; k < E; ++k) {
        const pipe& e = g.pipes[k];
        s.chi[k] = e.area();
        s.ell_m[k] = e.length_m();
        s.flux_coeff[k] = std::sqrt(2.0 * e.diameter_m / (e.friction * e.length_m()));
    }
    s.r = vec::Zero(Vd);
    for (int k = 0; k < E; ++k) {
        const int j = g.demand_index(g.head[k]);
        s.r[j] += s.chi[k] * s.ell_m[k] * mu_upper[k];
    }
    for (int j = 0; j < Vd; ++j)
        if (!(s.r[j] > 0.0))
            throw numeric_error("nonpositive storage coefficient at node " +
                                g.nodes[Vs + j].id);
    return s;
}

/// Assembles the incidence bundle using the static ratios stored on the
/// pipes themselves.
inline incidence_set incidence_matrices(const network_graph& g) {
    const int E = g.edge_count();
    vec lo(E), hi(E);
    for (int k = 0; k < E; ++k) {
        lo[k] = g.pipes[k].compressor_ratio;
        hi[k] = g.pipes[k].regulator_ratio;
    }
    return incidence_matrices(g, lo, hi);
}

}  // namespace pipeflow
