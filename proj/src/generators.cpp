#include "patrol/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "patrol/error.hpp"
#include "patrol/rng.hpp"

namespace patrol {

int attack_time_for(AttackTimeRule rule, int time_max, double time_avg) {
    const double d = rule == AttackTimeRule::standard ? time_max + time_avg + 3.0
                                                      : 2.0 * time_max + time_avg;
    return static_cast<int>(std::lround(d));
}

PatrollingGraph gen_points_complete(const std::vector<Point>& points, const PointSpec& spec) {
    if (points.size() < 2) throw ValidationError("need at least two points");
    if (std::set<Point>(points.begin(), points.end()).size() != points.size())
        throw ValidationError("duplicate points");
    if (!(spec.cost_min > 0.0) || spec.cost_max < spec.cost_min)
        throw ValidationError("invalid cost range");

    const int k = static_cast<int>(points.size());
    std::vector<Edge> edges;
    long long total = 0;
    int time_max = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const int dist = std::abs(points[i].first - points[j].first) +
                             std::abs(points[i].second - points[j].second);
            const int t = std::max(1, dist);
            edges.push_back({i, j, t});
            total += t;
            time_max = std::max(time_max, t);
        }
    const double time_avg = static_cast<double>(total) / static_cast<double>(edges.size());
    const int d = attack_time_for(spec.attack_time_rule, time_max, time_avg);

    std::mt19937_64 rng(derive_seed(spec.seed, 1));
    std::uniform_real_distribution<double> cost(spec.cost_min, spec.cost_max);
    std::uniform_real_distribution<double> beta(0.8, 1.0);
    std::vector<std::string> ids;
    std::vector<std::optional<Target>> targets;
    for (int i = 0; i < k; ++i) {
        ids.push_back("p" + std::to_string(i));
        Target t;
        t.cost = cost(rng);
        t.attack_time = d;
        // U(0.8, 1) is half-open; 1.0 itself is still a valid detection probability.
        t.detection = spec.beta_rule == BetaRule::perfect ? 1.0 : beta(rng);
        targets.emplace_back(t);
    }
    return PatrollingGraph(std::move(ids), std::move(targets), std::move(edges));
}

std::vector<Point> grid_points(int n, int k, std::uint64_t seed) {
    if (n < 1 || k < 1) throw ValidationError("grid side and target count must be positive");
    if (static_cast<long long>(k) > static_cast<long long>(n) * n)
        throw ValidationError("more targets than grid points");
    std::vector<int> cells(static_cast<std::size_t>(n) * n);
    std::iota(cells.begin(), cells.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, 0));
    // Partial Fisher-Yates: the first k cells are a uniform sample without replacement.
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, static_cast<int>(cells.size()) - 1);
        std::swap(cells[i], cells[pick(rng)]);
    }
    std::vector<Point> pts;
    for (int i = 0; i < k; ++i) pts.emplace_back(cells[i] % n, cells[i] / n);
    return pts;
}

PatrollingGraph gen_grid(const GridSpec& spec) {
    return gen_points_complete(grid_points(spec.n, spec.k, spec.seed), spec);
}

std::vector<Point> random_points(int count, int box, std::uint64_t seed) {
    return grid_points(box, count, seed);
}

PatrollingGraph gen_office(int floors, const OfficeOverrides& overrides) {
    if (floors < 1 || floors > 3) throw ValidationError("floors must be 1, 2 or 3");
    Target office{100.0, overrides.attack_time.value_or(100 * floors),
                  overrides.detection.value_or(0.9)};

    std::vector<std::string> ids;
    std::vector<std::optional<Target>> targets;
    std::vector<Edge> edges;
    auto add_vertex = [&](std::string id, bool is_target) {
        ids.push_back(std::move(id));
        targets.push_back(is_target ? std::optional<Target>(office) : std::nullopt);
        return static_cast<VertexId>(ids.size() - 1);
    };
    auto link = [&](VertexId a, VertexId b, int time) {
        edges.push_back({a, b, time});
        edges.push_back({b, a, time});
    };

    std::vector<VertexId> first_junction, last_junction;
    for (int f = 1; f <= floors; ++f) {
        const std::string p = "f" + std::to_string(f) + "_";
        const VertexId left_end = add_vertex(p + "r0", true);
        VertexId junction[4];
        for (int i = 0; i < 4; ++i) junction[i] = add_vertex(p + "c" + std::to_string(i + 1), false);
        const VertexId right_end = add_vertex(p + "r5", true);
        link(left_end, junction[0], 5);
        for (int i = 0; i < 4; ++i) {
            if (i > 0) link(junction[i - 1], junction[i], 2);
            const VertexId up = add_vertex(p + "o" + std::to_string(i + 1) + "a", true);
            const VertexId down = add_vertex(p + "o" + std::to_string(i + 1) + "b", true);
            link(junction[i], up, 5);
            link(junction[i], down, 5);
        }
        link(junction[3], right_end, 5);
        first_junction.push_back(junction[0]);
        last_junction.push_back(junction[3]);
    }
    for (int f = 0; f + 1 < floors; ++f) {
        link(first_junction[f], first_junction[f + 1], 10);
        link(last_junction[f], last_junction[f + 1], 10);
    }
    return PatrollingGraph(std::move(ids), std::move(targets), std::move(edges));
}

PatrollingGraph gen_office_tight() {
    return gen_office(1, OfficeOverrides{1.0, 112});
}

}  // namespace patrol
