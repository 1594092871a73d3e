#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "patrol/graph.hpp"

namespace patrol {

enum class AttackTimeRule {
    standard,  // time_max + time_avg + 3
    extended,  // 2 * time_max + time_avg
};

enum class BetaRule {
    perfect,  // beta = 1
    uniform,  // beta ~ U(0.8, 1)
};

struct PointSpec {
    std::uint64_t seed = 0;
    double cost_min = 180.0;
    double cost_max = 200.0;
    AttackTimeRule attack_time_rule = AttackTimeRule::standard;
    BetaRule beta_rule = BetaRule::perfect;
};

struct GridSpec : PointSpec {
    int n = 4;
    int k = 10;
};

using Point = std::pair<int, int>;

/// Complete digraph on the points, edge time = L1 distance (at least 1), all vertices targets.
PatrollingGraph gen_points_complete(const std::vector<Point>& points, const PointSpec& spec);

/// k distinct points drawn uniformly without replacement from the n x n lattice.
std::vector<Point> grid_points(int n, int k, std::uint64_t seed);
PatrollingGraph gen_grid(const GridSpec& spec);

/// `count` distinct random points in [0, box) x [0, box).
std::vector<Point> random_points(int count, int box, std::uint64_t seed);

/// Attack time for a rule, rounded to the nearest integer.
int attack_time_for(AttackTimeRule rule, int time_max, double time_avg);

struct OfficeOverrides {
    std::optional<double> detection;
    std::optional<int> attack_time;
};

/**
 * Office building: per floor a corridor of four junctions (time 2 between neighbours),
 * two offices on each junction (time 5), one office at each corridor end (time 5), and
 * stairs (time 10) joining the first and last junctions of consecutive floors.
 * All offices are targets with cost 100, detection 0.9 and attack time 100 per floor.
 */
PatrollingGraph gen_office(int floors, const OfficeOverrides& overrides = {});

/// The tight one-floor instance: perfect detection, attack time 112.
PatrollingGraph gen_office_tight();

}  // namespace patrol
