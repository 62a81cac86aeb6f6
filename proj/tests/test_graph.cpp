#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dualmac/graph.hpp"
#include "dualmac/rng.hpp"

using namespace dualmac;

namespace {

// Independent BFS oracle: Floyd-Warshall-style distances over E.
std::vector<std::vector<int>> all_pairs_oracle(const DualGraph& g) {
    const int inf = 1 << 20;
    int n = g.n();
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (int i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& [u, v] : g.edges_g()) d[u][v] = d[v][u] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    return d;
}

} // namespace

TEST_CASE("make_line basics") {
    auto g1 = make_line(1);
    CHECK(g1.n() == 1);
    CHECK(g1.edges_g().empty());

    auto g2 = make_line(2);
    CHECK(g2.edges_g() == EdgeSet{{0, 1}});
    CHECK(g2.edges_gp() == g2.edges_g());

    auto g5 = make_line(5);
    auto oracle = all_pairs_oracle(g5);
    int diameter = 0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) diameter = std::max(diameter, oracle[i][j]);
    CHECK(diameter == 4);
    CHECK(metrics(g5).diameter_g == 4);

    CHECK_THROWS_AS(make_line(0), InvalidParameter);
}

TEST_CASE("make_star_bridge shapes") {
    auto g = make_star_bridge(2);
    CHECK(g.n() == 3);
    CHECK(g.edges_g().size() == 2);

    auto g4 = make_star_bridge(4);
    CHECK(g4.neighbors_g(3).size() == 4); // hub u_4
    CHECK(g4.neighbors_g(4).size() == 1); // v
    CHECK(g4.labels()[3] == "u4");
    CHECK(g4.labels()[4] == "v");

    auto g32 = make_star_bridge(32);
    auto dist = bfs_distances(g32, 0); // u_1
    CHECK(dist[32] == 2);              // v is two hops from any leaf

    CHECK_THROWS_AS(make_star_bridge(1), InvalidParameter);
}

TEST_CASE("make_double_line structure and embedding") {
    auto g = make_double_line(2);
    CHECK(g.n() == 4);
    CHECK(g.edges_g().size() == 2);
    EdgeSet cross;
    for (const auto& e : g.edges_gp())
        if (!g.edges_g().count(e)) cross.insert(e);
    // a1=0, a2=1, b1=2, b2=3: cross edges (a1,b2) and (b1,a2)
    CHECK(cross == EdgeSet{{0, 3}, {1, 2}});
    CHECK(verify_grey_zone(g, 1.5));
    CHECK_FALSE(verify_grey_zone(g, 1.2));

    auto g40 = make_double_line(40);
    auto m = metrics(g40);
    CHECK(m.components.size() == 2);
    CHECK(m.components[0].size() == 40);
    CHECK(m.components[1].size() == 40);
    CHECK(m.diameter_g == 39);

    CHECK_THROWS_AS(make_double_line(1), InvalidParameter);
}

TEST_CASE("grey zone generator") {
    GreyZoneParams p;
    p.n = 1;
    auto g1 = make_grey_zone(p, 1);
    CHECK(g1.n() == 1);
    CHECK(g1.edges_gp().empty());

    p.n = 60;
    p.c = 1.0;
    p.side = 6.0;
    p.p_link = 1.0;
    auto collapsed = make_grey_zone(p, 3);
    CHECK(collapsed.edges_g() == collapsed.edges_gp());

    p.c = 1.5;
    p.side = 7.0;
    p.n = 100;
    p.p_link = 0.5;
    auto g = make_grey_zone(p, 7);
    CHECK(verify_grey_zone(g, 1.5));
    g.validate();

    // determinism: same parameters and seed give the identical graph
    auto again = make_grey_zone(p, 7);
    CHECK(g == again);
    CHECK(g.to_json() == again.to_json());
    auto other = make_grey_zone(p, 8);
    CHECK_FALSE(g == other);

    p.connected = true;
    p.n = 40;
    p.side = 4.0;
    auto connected = make_grey_zone(p, 11);
    CHECK(metrics(connected).components.size() == 1);

    // Unreachable density: the retry budget runs out.
    p.n = 30;
    p.side = 40.0;
    p.max_retries = 3;
    CHECK_THROWS_AS(make_grey_zone(p, 1), GenerationFailed);
}

TEST_CASE("r-restricted checks") {
    auto line = make_line(4);
    CHECK(is_r_restricted(line, 1)); // E' = E

    auto dl = make_double_line(4);
    CHECK_FALSE(is_r_restricted(dl, 1)); // cross edges join separate components

    auto g = make_line(4);
    g.add_edge_gp(0, 3);
    CHECK(is_r_restricted(g, 3));
    CHECK_FALSE(is_r_restricted(g, 2));
}

TEST_CASE("power graph") {
    auto line3 = make_line(3);
    CHECK(power_graph(line3, 1) == line3.edges_g());
    CHECK(power_graph(line3, 2) == EdgeSet{{0, 1}, {0, 2}, {1, 2}});

    auto dl = make_double_line(3);
    auto clique = power_graph(dl, dl.n());
    // one clique per G-component: 2 * C(3,2) = 6 edges
    CHECK(clique.size() == 6);
    for (const auto& [u, v] : clique) {
        bool same_side = (u < 3) == (v < 3);
        CHECK(same_side);
    }
}

TEST_CASE("r-restricted iff E' within power graph") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + int(rng.below(8));
        DualGraph g(n);
        for (int i = 0; i + 1 < n; ++i) g.add_edge_g(i, i + 1); // keep connected
        for (int e = 0; e < n; ++e) {
            int u = int(rng.below(std::uint64_t(n)));
            int v = int(rng.below(std::uint64_t(n)));
            if (u == v) continue;
            if (rng.below(2))
                g.add_edge_g(u, v);
            else
                g.add_edge_gp(u, v);
        }
        for (int r = 1; r <= 3; ++r) {
            auto pg = power_graph(g, r);
            bool subset = std::all_of(
                g.edges_gp().begin(), g.edges_gp().end(), [&](const Edge& e) {
                    return pg.count(e) > 0 || g.edges_g().count(e) > 0;
                });
            CHECK(is_r_restricted(g, r) == subset);
        }
    }
}

TEST_CASE("metrics") {
    CHECK(metrics(make_line(1)).diameter_g == 0);
    auto m = metrics(make_double_line(10));
    CHECK(m.components.size() == 2);
    CHECK(m.diameter_g == 9);
}

TEST_CASE("sphere pack limit formula and oracle") {
    CHECK(sphere_pack_limit(0) == 1);
    CHECK(sphere_pack_limit(1) == 9);
    CHECK(sphere_pack_limit(3) == 49);
    CHECK_THROWS_AS(sphere_pack_limit(-1), InvalidParameter);

    // randomized maximal packing search never beats the bound
    Rng rng(99);
    for (double d : {1.0, 2.0, 3.0}) {
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<Point> kept;
            for (int c = 0; c < 400; ++c) {
                double ang = rng.real() * 2.0 * 3.14159265358979;
                double rad = std::sqrt(rng.real()) * d;
                Point p{rad * std::cos(ang), rad * std::sin(ang)};
                bool ok = std::all_of(kept.begin(), kept.end(), [&](const Point& q) {
                    return distance(p, q) > 1.0;
                });
                if (ok) kept.push_back(p);
            }
            CHECK(std::int64_t(kept.size()) <= sphere_pack_limit(d));
        }
    }
}

TEST_CASE("generator outputs satisfy the dual-graph invariants") {
    std::vector<DualGraph> graphs;
    graphs.push_back(make_line(7));
    graphs.push_back(make_star_bridge(5));
    graphs.push_back(make_double_line(6));
    GreyZoneParams p;
    p.n = 50;
    p.side = 5;
    graphs.push_back(make_grey_zone(p, 21));
    for (const auto& g : graphs) {
        CHECK_NOTHROW(g.validate());
        for (const auto& e : g.edges_g()) CHECK(g.edges_gp().count(e) == 1);
    }
}

TEST_CASE("json round trip") {
    auto g = make_double_line(5);
    auto back = DualGraph::from_json(g.to_json());
    CHECK(g == back);
    CHECK(g.to_json() == back.to_json());

    GreyZoneParams p;
    p.n = 30;
    p.side = 4;
    auto grey = make_grey_zone(p, 13);
    auto grey_back = DualGraph::from_json(grey.to_json());
    CHECK(grey == grey_back);

    CHECK_THROWS_AS(DualGraph::from_json("{"), ParseError);
    CHECK_THROWS_AS(verify_grey_zone(make_star_bridge(3), 1.5), PreconditionViolation);
}
