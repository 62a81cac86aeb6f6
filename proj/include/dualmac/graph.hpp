#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dualmac/errors.hpp"

namespace dualmac {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

using Edge = std::pair<int, int>; // normalized u < v
using EdgeSet = std::set<Edge>;

// A dual graph: reliable edges E over a vertex set, plus an unreliable
// superset E'. Adjacency lists are kept in sync with the edge sets so both
// O(1)-ish neighbor iteration and set-level queries stay cheap.
class DualGraph {
public:
    DualGraph() = default;
    explicit DualGraph(int n);

    int n() const { return n_; }

    // add_edge_g inserts into both E and E' (E must stay a subset of E').
    void add_edge_g(int u, int v);
    void add_edge_gp(int u, int v);

    bool has_edge_g(int u, int v) const;
    bool has_edge_gp(int u, int v) const;

    const std::vector<int>& neighbors_g(int v) const { return adj_g_.at(v); }
    const std::vector<int>& neighbors_gp(int v) const { return adj_gp_.at(v); }

    const EdgeSet& edges_g() const { return edges_g_; }
    const EdgeSet& edges_gp() const { return edges_gp_; }

    bool has_positions() const { return positions_.has_value(); }
    const std::vector<Point>& positions() const;
    void set_positions(std::vector<Point> pts);

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<std::string>& labels() const;
    void set_labels(std::vector<std::string> labels);

    // Throws PreconditionViolation if a structural invariant is broken
    // (E not a subset of E', self-loop, vertex out of range).
    void validate() const;

    std::string to_json() const;
    static DualGraph from_json(const std::string& text);

    friend bool operator==(const DualGraph& a, const DualGraph& b);

private:
    void check_vertex(int v) const;

    int n_ = 0;
    EdgeSet edges_g_;
    EdgeSet edges_gp_;
    std::vector<std::vector<int>> adj_g_;
    std::vector<std::vector<int>> adj_gp_;
    std::optional<std::vector<Point>> positions_;
    std::optional<std::vector<std::string>> labels_;
};

struct GraphMetrics {
    int diameter_g = 0;                      // max over components
    int diameter_gp = 0;
    std::vector<std::vector<int>> components; // partition of V by G-connectivity
};

// --- generators ---------------------------------------------------------

// Path graph on n vertices, E' = E, positions (i, 0).
DualGraph make_line(int n);

// Star u_1..u_{k-1} around hub u_k, plus pendant v behind the hub; E' = E.
// Vertices: 0..k-2 = leaves, k-1 = hub, k = v.
DualGraph make_star_bridge(int k);

// Two disjoint reliable lines a_1..a_d and b_1..b_d with crossing unreliable
// edges (a_i, b_{i+1}) and (b_i, a_{i+1}). Vertices 0..d-1 are a_1..a_d and
// d..2d-1 are b_1..b_d; rows sit at y = 0 and y = 1.1 so the embedding is
// grey-zone valid with c = 1.5.
DualGraph make_double_line(int d);

int double_line_a(int i); // vertex index of a_i (1-based i)
int double_line_b(const DualGraph& g, int i); // vertex index of b_i

struct GreyZoneParams {
    int n = 1;
    double c = 1.5;
    double side = 1.0;
    double p_link = 0.5;   // inclusion probability for each pair in (1, c]
    bool connected = false;
    int max_retries = 64;  // resample budget when connected is requested
};

// Random geometric dual graph on a side x side square: E is the unit-disk
// graph, E' adds each pair at distance in (1, c] independently with
// probability p_link. Deterministic per seed.
DualGraph make_grey_zone(const GreyZoneParams& params, std::uint64_t seed);

// --- queries ------------------------------------------------------------

// Hop distances in G from src; unreachable = -1.
std::vector<int> bfs_distances(const DualGraph& g, int src);

// Every E' edge joins vertices at G-distance <= r (false across components).
bool is_r_restricted(const DualGraph& g, int r);

// Both grey-zone embedding conditions for this c:
//   (u,v) in E  <=>  dist <= 1, and (u,v) in E'  =>  dist <= c.
bool verify_grey_zone(const DualGraph& g, double c);

// Edge set of G^r: all pairs at G-distance in [1, r].
EdgeSet power_graph(const DualGraph& g, int r);

GraphMetrics metrics(const DualGraph& g);

// Explicit upper bound ceil((2d+1)^2) on the size of any set of points with
// pairwise distance > 1 inside a radius-d disk: the open radius-1/2 disks
// around the points are disjoint and fit inside a radius d+1/2 disk.
std::int64_t sphere_pack_limit(double d);

} // namespace dualmac
