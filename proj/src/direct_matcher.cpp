#include "partmatch/direct_matcher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "partmatch/rng.hpp"

namespace partmatch {

namespace {

void validate(const PointSetMap& query, const PointSetMap& target, const DmmConfig& cfg) {
    if (query.points.empty() || target.points.empty()) {
        throw std::invalid_argument("ransac_match: empty map");
    }
    if (cfg.hypothesis_count < 1) {
        throw std::invalid_argument("ransac_match: hypothesis_count must be >= 1");
    }
    if (cfg.grid_resolution <= 0.0) {
        throw std::invalid_argument("ransac_match: grid_resolution must be positive");
    }
}

// Hypothesis i is fully determined by (seed, i): the stream is generated
// sequentially so a longer run extends, never reshuffles, a shorter one.
std::vector<RigidTransform2> make_hypotheses(const PointSetMap& query,
                                             const PointSetMap& target,
                                             const DmmConfig& cfg) {
    const std::vector<double> rotations = rotation_candidates(cfg.rotation_mode);
    std::vector<RigidTransform2> hypotheses;
    hypotheses.reserve(static_cast<std::size_t>(cfg.hypothesis_count));
    hypotheses.push_back(RigidTransform2{});  // identity, always hypothesis 0
    std::mt19937_64 rng(cfg.seed);
    for (int i = 1; i < cfg.hypothesis_count; ++i) {
        const Point2& p = query.points[uniform_index(rng, query.points.size())];
        const Point2& q = target.points[uniform_index(rng, target.points.size())];
        const double rot = rotations[uniform_index(rng, rotations.size())];
        // Translate so the rotated query point lands on the target point.
        const Point2 rp = apply_transform(RigidTransform2{rot, 0.0, 0.0}, p);
        hypotheses.push_back(RigidTransform2{rot, q.x - rp.x, q.y - rp.y});
    }
    return hypotheses;
}

DmmResult pick_best(const PointSetMap& query, const std::vector<RigidTransform2>& hypotheses,
                    const std::vector<std::size_t>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    DmmResult result;
    result.score = scores[best];
    result.best_transform = hypotheses[best];
    result.normalized_score =
        static_cast<double>(result.score) / static_cast<double>(query.points.size());
    return result;
}

DmmResult match_impl(const PointSetMap& query, const PointSetMap& target,
                     const OccupancyGrid& grid, const DmmConfig& cfg, bool parallel) {
    validate(query, target, cfg);
    const std::vector<RigidTransform2> hypotheses = make_hypotheses(query, target, cfg);
    std::vector<std::size_t> scores(hypotheses.size(), 0);
    if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(hypotheses.size()); ++i) {
            scores[static_cast<std::size_t>(i)] =
                inlier_count(query.points, hypotheses[static_cast<std::size_t>(i)], grid);
        }
    } else {
        for (std::size_t i = 0; i < hypotheses.size(); ++i) {
            scores[i] = inlier_count(query.points, hypotheses[i], grid);
        }
    }
    return pick_best(query, hypotheses, scores);
}

Ranking rank_impl(const PointSetMap& query, const std::vector<PointSetMap>& db,
                  const DmmConfig& cfg, bool parallel) {
    if (db.empty()) {
        throw std::invalid_argument("rank_database: empty database");
    }
    std::vector<ScoredMap> rows(db.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (long long i = 0; i < static_cast<long long>(db.size()); ++i) {
        const PointSetMap& target = db[static_cast<std::size_t>(i)];
        DmmConfig entry_cfg = cfg;
        entry_cfg.seed = mix_seed(cfg.seed, fnv1a(target.id));
        const DmmResult r = ransac_match_serial(query, target, entry_cfg);
        rows[static_cast<std::size_t>(i)] =
            ScoredMap{target.id, static_cast<double>(r.score)};
    }
    std::sort(rows.begin(), rows.end(), [](const ScoredMap& a, const ScoredMap& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.map_id < b.map_id;
    });
    return rows;
}

}  // namespace

DmmResult ransac_match(const PointSetMap& query, const PointSetMap& target,
                       const DmmConfig& cfg) {
    validate(query, target, cfg);
    const OccupancyGrid grid = rasterize(target.points, cfg.grid_resolution);
    return match_impl(query, target, grid, cfg, true);
}

DmmResult ransac_match_serial(const PointSetMap& query, const PointSetMap& target,
                              const DmmConfig& cfg) {
    validate(query, target, cfg);
    const OccupancyGrid grid = rasterize(target.points, cfg.grid_resolution);
    return match_impl(query, target, grid, cfg, false);
}

DmmResult ransac_match_grid(const PointSetMap& query, const PointSetMap& target,
                            const OccupancyGrid& target_grid, const DmmConfig& cfg) {
    return match_impl(query, target, target_grid, cfg, false);
}

Ranking rank_database(const PointSetMap& query, const std::vector<PointSetMap>& db,
                      const DmmConfig& cfg) {
    return rank_impl(query, db, cfg, true);
}

Ranking rank_database_serial(const PointSetMap& query, const std::vector<PointSetMap>& db,
                             const DmmConfig& cfg) {
    return rank_impl(query, db, cfg, false);
}

}  // namespace partmatch
