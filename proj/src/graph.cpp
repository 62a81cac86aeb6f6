#include "dualmac/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <json.hpp>

#include "dualmac/rng.hpp"

namespace dualmac {

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

DualGraph::DualGraph(int n) : n_(n), adj_g_(n), adj_gp_(n) {
    if (n < 0) throw InvalidParameter("DualGraph: negative vertex count");
}

void DualGraph::check_vertex(int v) const {
    if (v < 0 || v >= n_)
        throw InvalidParameter("DualGraph: vertex " + std::to_string(v) + " out of range");
}

static Edge norm_edge(int u, int v) {
    return u < v ? Edge{u, v} : Edge{v, u};
}

void DualGraph::add_edge_gp(int u, int v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw InvalidParameter("DualGraph: self-loop");
    if (edges_gp_.insert(norm_edge(u, v)).second) {
        adj_gp_[u].push_back(v);
        adj_gp_[v].push_back(u);
    }
}

void DualGraph::add_edge_g(int u, int v) {
    check_vertex(u);
    check_vertex(v);
    if (u == v) throw InvalidParameter("DualGraph: self-loop");
    if (edges_g_.insert(norm_edge(u, v)).second) {
        adj_g_[u].push_back(v);
        adj_g_[v].push_back(u);
    }
    add_edge_gp(u, v);
}

bool DualGraph::has_edge_g(int u, int v) const {
    if (u == v) return false;
    return edges_g_.count(norm_edge(u, v)) > 0;
}

bool DualGraph::has_edge_gp(int u, int v) const {
    if (u == v) return false;
    return edges_gp_.count(norm_edge(u, v)) > 0;
}

const std::vector<Point>& DualGraph::positions() const {
    if (!positions_) throw PreconditionViolation("DualGraph: positions not set");
    return *positions_;
}

void DualGraph::set_positions(std::vector<Point> pts) {
    if (int(pts.size()) != n_)
        throw InvalidParameter("DualGraph: position count != n");
    positions_ = std::move(pts);
}

const std::vector<std::string>& DualGraph::labels() const {
    if (!labels_) throw PreconditionViolation("DualGraph: labels not set");
    return *labels_;
}

void DualGraph::set_labels(std::vector<std::string> labels) {
    if (int(labels.size()) != n_)
        throw InvalidParameter("DualGraph: label count != n");
    labels_ = std::move(labels);
}

void DualGraph::validate() const {
    for (const auto& [u, v] : edges_g_) {
        if (u == v) throw PreconditionViolation("DualGraph: self-loop in E");
        if (!edges_gp_.count({u, v}))
            throw PreconditionViolation("DualGraph: E not a subset of E'");
    }
    for (const auto& [u, v] : edges_gp_) {
        if (u == v) throw PreconditionViolation("DualGraph: self-loop in E'");
        if (u < 0 || v >= n_)
            throw PreconditionViolation("DualGraph: edge endpoint out of range");
    }
}

bool operator==(const DualGraph& a, const DualGraph& b) {
    if (a.n_ != b.n_ || a.edges_g_ != b.edges_g_ || a.edges_gp_ != b.edges_gp_)
        return false;
    if (a.positions_.has_value() != b.positions_.has_value()) return false;
    if (a.positions_) {
        for (int i = 0; i < a.n_; ++i) {
            if ((*a.positions_)[i].x != (*b.positions_)[i].x ||
                (*a.positions_)[i].y != (*b.positions_)[i].y)
                return false;
        }
    }
    if (a.labels_ != b.labels_) return false;
    return true;
}

std::string DualGraph::to_json() const {
    nlohmann::json j;
    j["n"] = n_;
    auto dump_edges = [](const EdgeSet& es) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [u, v] : es) arr.push_back({u, v});
        return arr;
    };
    j["edges_g"] = dump_edges(edges_g_);
    j["edges_gp"] = dump_edges(edges_gp_);
    if (positions_) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : *positions_) arr.push_back({p.x, p.y});
        j["positions"] = arr;
    }
    if (labels_) j["labels"] = *labels_;
    return j.dump(2) + "\n";
}

DualGraph DualGraph::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    try {
        DualGraph g(j.at("n").get<int>());
        for (const auto& e : j.at("edges_gp"))
            g.add_edge_gp(e.at(0).get<int>(), e.at(1).get<int>());
        for (const auto& e : j.at("edges_g"))
            g.add_edge_g(e.at(0).get<int>(), e.at(1).get<int>());
        if (j.contains("positions")) {
            std::vector<Point> pts;
            for (const auto& p : j["positions"])
                pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            g.set_positions(std::move(pts));
        }
        if (j.contains("labels"))
            g.set_labels(j["labels"].get<std::vector<std::string>>());
        g.validate();
        return g;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
}

// --- generators ---------------------------------------------------------

DualGraph make_line(int n) {
    if (n < 1) throw InvalidParameter("make_line: n must be >= 1");
    DualGraph g(n);
    std::vector<Point> pts(n);
    for (int i = 0; i < n; ++i) {
        pts[i] = {double(i), 0.0};
        if (i + 1 < n) g.add_edge_g(i, i + 1);
    }
    g.set_positions(std::move(pts));
    return g;
}

DualGraph make_star_bridge(int k) {
    if (k < 2) throw InvalidParameter("make_star_bridge: k must be >= 2");
    DualGraph g(k + 1);
    int hub = k - 1, v = k;
    std::vector<std::string> labels(k + 1);
    for (int i = 0; i < k - 1; ++i) {
        g.add_edge_g(i, hub);
        labels[i] = "u" + std::to_string(i + 1);
    }
    g.add_edge_g(hub, v);
    labels[hub] = "u" + std::to_string(k);
    labels[v] = "v";
    g.set_labels(std::move(labels));
    return g;
}

int double_line_a(int i) { return i - 1; }

int double_line_b(const DualGraph& g, int i) { return g.n() / 2 + i - 1; }

DualGraph make_double_line(int d) {
    if (d < 2) throw InvalidParameter("make_double_line: d must be >= 2");
    DualGraph g(2 * d);
    std::vector<Point> pts(2 * d);
    std::vector<std::string> labels(2 * d);
    auto a = [&](int i) { return i - 1; };
    auto b = [&](int i) { return d + i - 1; };
    for (int i = 1; i <= d; ++i) {
        pts[a(i)] = {double(i), 0.0};
        pts[b(i)] = {double(i), 1.1};
        labels[a(i)] = "a" + std::to_string(i);
        labels[b(i)] = "b" + std::to_string(i);
        if (i < d) {
            g.add_edge_g(a(i), a(i + 1));
            g.add_edge_g(b(i), b(i + 1));
            g.add_edge_gp(a(i), b(i + 1));
            g.add_edge_gp(b(i), a(i + 1));
        }
    }
    g.set_positions(std::move(pts));
    g.set_labels(std::move(labels));
    return g;
}

static bool is_connected_g(const DualGraph& g) {
    if (g.n() == 0) return true;
    auto dist = bfs_distances(g, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

DualGraph make_grey_zone(const GreyZoneParams& params, std::uint64_t seed) {
    if (params.n < 1) throw InvalidParameter("make_grey_zone: n must be >= 1");
    if (params.c < 1.0) throw InvalidParameter("make_grey_zone: c must be >= 1");
    if (params.side <= 0.0) throw InvalidParameter("make_grey_zone: side must be > 0");
    if (params.p_link < 0.0 || params.p_link > 1.0)
        throw InvalidParameter("make_grey_zone: p_link must be in [0, 1]");

    Rng root(seed);
    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
        Rng rng = root.fork(std::uint64_t(attempt));
        DualGraph g(params.n);
        std::vector<Point> pts(params.n);
        for (int i = 0; i < params.n; ++i)
            pts[i] = {rng.real() * params.side, rng.real() * params.side};
        for (int u = 0; u < params.n; ++u) {
            for (int v = u + 1; v < params.n; ++v) {
                double dist = distance(pts[u], pts[v]);
                if (dist <= 1.0) {
                    g.add_edge_g(u, v);
                } else if (dist <= params.c && rng.bernoulli(params.p_link)) {
                    g.add_edge_gp(u, v);
                }
            }
        }
        g.set_positions(std::move(pts));
        if (!params.connected || is_connected_g(g)) return g;
    }
    throw GenerationFailed("make_grey_zone: could not sample a connected graph "
                           "within the retry budget");
}

// --- queries ------------------------------------------------------------

std::vector<int> bfs_distances(const DualGraph& g, int src) {
    std::vector<int> dist(g.n(), -1);
    std::deque<int> queue{src};
    dist.at(src) = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int v : g.neighbors_g(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

bool is_r_restricted(const DualGraph& g, int r) {
    if (r < 1) throw InvalidParameter("is_r_restricted: r must be >= 1");
    for (int u = 0; u < g.n(); ++u) {
        if (g.neighbors_gp(u).empty()) continue;
        auto dist = bfs_distances(g, u);
        for (int v : g.neighbors_gp(u)) {
            if (dist[v] < 0 || dist[v] > r) return false;
        }
    }
    return true;
}

bool verify_grey_zone(const DualGraph& g, double c) {
    const auto& pts = g.positions(); // throws if missing
    for (int u = 0; u < g.n(); ++u) {
        for (int v = u + 1; v < g.n(); ++v) {
            double dist = distance(pts[u], pts[v]);
            if (g.has_edge_g(u, v) != (dist <= 1.0)) return false;
            if (g.has_edge_gp(u, v) && dist > c) return false;
        }
    }
    return true;
}

EdgeSet power_graph(const DualGraph& g, int r) {
    if (r < 1) throw InvalidParameter("power_graph: r must be >= 1");
    EdgeSet out;
    for (int u = 0; u < g.n(); ++u) {
        auto dist = bfs_distances(g, u);
        for (int v = u + 1; v < g.n(); ++v) {
            if (dist[v] >= 1 && dist[v] <= r) out.insert({u, v});
        }
    }
    return out;
}

GraphMetrics metrics(const DualGraph& g) {
    GraphMetrics m;
    std::vector<bool> seen(g.n(), false);
    for (int s = 0; s < g.n(); ++s) {
        if (seen[s]) continue;
        auto dist = bfs_distances(g, s);
        std::vector<int> comp;
        for (int v = 0; v < g.n(); ++v) {
            if (dist[v] >= 0) {
                seen[v] = true;
                comp.push_back(v);
            }
        }
        m.components.push_back(std::move(comp));
    }
    for (int u = 0; u < g.n(); ++u) {
        auto dist = bfs_distances(g, u);
        for (int d : dist) m.diameter_g = std::max(m.diameter_g, d);
    }
    // E'-diameter via BFS over the E' adjacency.
    for (int u = 0; u < g.n(); ++u) {
        std::vector<int> dist(g.n(), -1);
        std::deque<int> queue{u};
        dist[u] = 0;
        while (!queue.empty()) {
            int x = queue.front();
            queue.pop_front();
            for (int y : g.neighbors_gp(x)) {
                if (dist[y] < 0) {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        for (int d : dist) m.diameter_gp = std::max(m.diameter_gp, d);
    }
    return m;
}

std::int64_t sphere_pack_limit(double d) {
    if (d < 0.0) throw InvalidParameter("sphere_pack_limit: d must be >= 0");
    double bound = (2.0 * d + 1.0) * (2.0 * d + 1.0);
    return std::int64_t(std::ceil(bound));
}

} // namespace dualmac
