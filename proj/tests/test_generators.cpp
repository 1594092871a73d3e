#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "patrol/error.hpp"
#include "patrol/evaluator.hpp"
#include "patrol/generators.hpp"

using namespace patrol;

namespace {

int edge_time(const PatrollingGraph& g, const std::string& a, const std::string& b) {
    for (const Edge& e : g.edges())
        if (e.from == g.vertex(a) && e.to == g.vertex(b)) return e.time;
    return -1;
}

}  // namespace

TEST_SUITE("generators") {

TEST_CASE("point graphs") {
    const PatrollingGraph two = gen_points_complete({{0, 0}, {3, 4}}, {});
    CHECK(two.n_edges() == 2);
    for (const Edge& e : two.edges()) CHECK(e.time == 7);

    PointSpec ext;
    ext.attack_time_rule = AttackTimeRule::extended;
    const PatrollingGraph five = gen_points_complete({{0, 0}, {0, 5}}, ext);
    for (VertexId v : five.target_vertices()) CHECK(five.target(v).attack_time == 15);

    const PatrollingGraph line = gen_points_complete({{0, 0}, {0, 3}, {0, 7}}, {});
    CHECK(edge_time(line, "p0", "p1") == 3);
    CHECK(edge_time(line, "p0", "p2") == 7);
    CHECK(edge_time(line, "p1", "p2") == 4);

    const PatrollingGraph big = gen_points_complete(random_points(18, 100, 4), {});
    CHECK(big.n_targets() == 18);
    CHECK(big.n_edges() == 306);
    CHECK(strongly_connected(big));

    CHECK_THROWS_AS(gen_points_complete({{1, 1}, {1, 1}}, {}), ValidationError);
}

TEST_CASE("grid rule") {
    GridSpec spec;
    spec.n = 4;
    spec.k = 10;
    spec.seed = 12;
    const PatrollingGraph g = gen_grid(spec);
    CHECK(g.n_targets() == 10);
    int tmax = 0;
    double tsum = 0;
    for (const Edge& e : g.edges()) {
        tmax = std::max(tmax, e.time);
        tsum += e.time;
    }
    const int d = tmax + static_cast<int>(std::lround(tsum / g.n_edges())) + 3;
    for (VertexId v : g.target_vertices()) {
        CHECK(g.target(v).attack_time == d);
        CHECK(g.target(v).detection == 1.0);
        CHECK(g.target(v).cost >= 180.0);
        CHECK(g.target(v).cost <= 200.0);
    }
    CHECK(serialize_graph(gen_grid(spec)) == serialize_graph(g));

    spec.beta_rule = BetaRule::uniform;
    const PatrollingGraph u = gen_grid(spec);
    for (VertexId v : u.target_vertices()) {
        CHECK(u.target(v).detection >= 0.8);
        CHECK(u.target(v).detection <= 1.0);
    }
}

TEST_CASE("grid points are distinct and seeded") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = grid_points(9, 10, seed);
        const std::set<Point> uniq(pts.begin(), pts.end());
        CHECK(uniq.size() == 10);
        for (const auto& [x, y] : pts) {
            CHECK(x >= 0);
            CHECK(x < 9);
            CHECK(y >= 0);
            CHECK(y < 9);
        }
    }
    CHECK(grid_points(9, 10, 1) != grid_points(9, 10, 2));
    CHECK_THROWS_AS(grid_points(2, 5, 0), ValidationError);
}

TEST_CASE("office building") {
    const PatrollingGraph one = gen_office(1);
    CHECK(one.n_vertices() == 14);
    CHECK(one.n_targets() == 10);
    CHECK(one.n_edges() == 26);
    const PatrollingGraph three = gen_office(3);
    CHECK(three.n_vertices() == 42);
    CHECK(three.n_targets() == 30);
    CHECK(three.n_edges() == 86);
    CHECK(edge_time(three, "f1_c1", "f2_c1") == 10);
    CHECK(edge_time(three, "f2_c4", "f3_c4") == 10);
    for (VertexId v : three.target_vertices()) {
        CHECK(three.target(v).cost == 100.0);
        CHECK(three.target(v).detection == 0.9);
        CHECK(three.target(v).attack_time == 300);
    }
    CHECK(strongly_connected(three));

    const auto walk = testing::office_tour();
    int total = 0;
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) total += edge_time(one, walk[i], walk[i + 1]);
    CHECK(total == 112);

    const PatrollingGraph tight = gen_office_tight();
    for (VertexId v : tight.target_vertices()) {
        CHECK(tight.target(v).detection == 1.0);
        CHECK(tight.target(v).attack_time == 112);
    }
    CHECK_THROWS_AS(gen_office(0), ValidationError);
}

TEST_CASE("the office tour defends everything") {
    const PatrollingGraph g = gen_office_tight();
    const auto [idx, s] = testing::tour_strategy(g, testing::office_tour());
    CHECK(idx.mem()[g.vertex("f1_c1")] == 4);
    const ProtectionTable t = protection_table(g, idx, s);
    CHECK(hard_value(t, g, idx, s, 1e-6).value == doctest::Approx(100.0).epsilon(1e-12));
}

}
