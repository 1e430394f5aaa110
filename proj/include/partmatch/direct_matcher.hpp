#pragma once

#include <cstdint>
#include <vector>

#include "partmatch/geometry.hpp"
#include "partmatch/ranking.hpp"

namespace partmatch {

struct DmmConfig {
    int hypothesis_count = 500;
    RotationMode rotation_mode = RotationMode::kManhattan4;
    std::uint64_t seed = 0;
    double grid_resolution = 0.1;
};

struct DmmResult {
    std::size_t score = 0;            // best inlier count v
    RigidTransform2 best_transform;
    double normalized_score = 0.0;    // score / |query points|
};

/// Hypothesize-and-test matching of `query` against `target`. Hypothesis 0
/// is always the identity; the rest pair one random point from each map with
/// a random rotation from the mode's candidate set, translating so the pair
/// coincides. Hypotheses form a seed-determined sequence, so the best score
/// is non-decreasing in hypothesis_count. Ties keep the earliest hypothesis.
DmmResult ransac_match(const PointSetMap& query, const PointSetMap& target,
                       const DmmConfig& cfg);
DmmResult ransac_match_serial(const PointSetMap& query, const PointSetMap& target,
                              const DmmConfig& cfg);

/// Same search against a pre-rasterized target (grid built at
/// cfg.grid_resolution from target.points). Lets callers cache grids.
DmmResult ransac_match_grid(const PointSetMap& query, const PointSetMap& target,
                            const OccupancyGrid& target_grid, const DmmConfig& cfg);

/// Matches the query against every database map and ranks by score
/// descending, ties by id ascending. Each target's hypothesis stream is
/// seeded from (cfg.seed, target id), so the ranking is independent of
/// database order and of how entries are scheduled across workers.
Ranking rank_database(const PointSetMap& query, const std::vector<PointSetMap>& db,
                      const DmmConfig& cfg);
Ranking rank_database_serial(const PointSetMap& query, const std::vector<PointSetMap>& db,
                             const DmmConfig& cfg);

}  // namespace partmatch
