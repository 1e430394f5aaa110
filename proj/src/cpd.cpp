#include "partmatch/cpd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "partmatch/errors.hpp"
#include "partmatch/rng.hpp"

namespace partmatch {

namespace {

double score_or_min(const Part& p) {
    return p.as_score ? *p.as_score : -1.0;
}

std::vector<Point2> crop_points(const PointSetMap& map, const BBox& bb) {
    std::vector<Point2> crop;
    for (const Point2& p : map.points) {
        if (bb.contains(p)) {
            crop.push_back(p);
        }
    }
    return crop;
}

void validate_cfg(const CpdConfig& cfg) {
    if (cfg.candidate_samples < 1) {
        throw std::invalid_argument("cpd: candidate_samples must be >= 1");
    }
    if (cfg.pool_size < 1 || cfg.pool_size > cfg.candidate_samples) {
        throw std::invalid_argument("cpd: pool_size must be in [1, candidate_samples]");
    }
    if (cfg.t_size <= 0.0 || cfg.t_size > 1.0) {
        throw std::invalid_argument("cpd: t_size must be in (0, 1]");
    }
    if (cfg.grid_resolution <= 0.0 || cfg.translation_step <= 0.0) {
        throw std::invalid_argument("cpd: resolutions must be positive");
    }
    if (cfg.descriptor_proposals < 1) {
        throw std::invalid_argument("cpd: descriptor_proposals must be >= 1");
    }
}

// Best inlier count for pre-cropped points; the transform enumeration here
// is the contract documented on appearance_similarity.
double as_score_for_crop(std::span<const Point2> crop, const BBox& keypoint_bb,
                         const OccupancyGrid& dict_grid, const BBox& descriptor_bb,
                         const CpdConfig& cfg) {
    const Point2 center{(keypoint_bb.x_begin + keypoint_bb.x_end) / 2.0,
                        (keypoint_bb.y_begin + keypoint_bb.y_end) / 2.0};
    const double step = cfg.translation_step;
    std::size_t best = 0;
    for (double rot : rotation_candidates(cfg.rotation_mode)) {
        const RigidTransform2 pure_rot{rot, 0.0, 0.0};
        // Axis-aligned bounds of the keypoint box rotated about its center.
        const Point2 corners[4] = {
            {keypoint_bb.x_begin, keypoint_bb.y_begin},
            {keypoint_bb.x_end, keypoint_bb.y_begin},
            {keypoint_bb.x_end, keypoint_bb.y_end},
            {keypoint_bb.x_begin, keypoint_bb.y_end},
        };
        BBox aabb{center.x, center.x, center.y, center.y};
        for (const Point2& corner : corners) {
            const Point2 r = apply_transform(pure_rot, Point2{corner.x - center.x,
                                                              corner.y - center.y});
            aabb.x_begin = std::min(aabb.x_begin, r.x + center.x);
            aabb.x_end = std::max(aabb.x_end, r.x + center.x);
            aabb.y_begin = std::min(aabb.y_begin, r.y + center.y);
            aabb.y_end = std::max(aabb.y_end, r.y + center.y);
        }
        const Point2 rc = apply_transform(pure_rot, center);
        const double pivot_x = center.x - rc.x;
        const double pivot_y = center.y - rc.y;
        const double base_x = descriptor_bb.x_begin - aabb.x_begin;
        const double base_y = descriptor_bb.y_begin - aabb.y_begin;
        const long long kx_max = std::max(
            0LL, static_cast<long long>(
                     std::floor((descriptor_bb.width() - aabb.width()) / step + 1e-9)));
        const long long ky_max = std::max(
            0LL, static_cast<long long>(
                     std::floor((descriptor_bb.height() - aabb.height()) / step + 1e-9)));
        for (long long kx = -1; kx <= kx_max + 1; ++kx) {
            for (long long ky = -1; ky <= ky_max + 1; ++ky) {
                const RigidTransform2 t{rot,
                                        pivot_x + base_x + static_cast<double>(kx) * step,
                                        pivot_y + base_y + static_cast<double>(ky) * step};
                best = std::max(best, inlier_count(crop, t, dict_grid));
            }
        }
    }
    return static_cast<double>(best) / static_cast<double>(crop.size());
}

// Clamps a proposed descriptor-box origin into the dictionary extent so the
// part stays encodable; when the extent is wider than the box the whole box
// is kept inside.
Point2 clamp_origin(Point2 origin, double width, double height, const BBox& dict_extent) {
    const double x_max = std::max(dict_extent.x_begin, dict_extent.x_end - width);
    const double y_max = std::max(dict_extent.y_begin, dict_extent.y_end - height);
    return Point2{std::clamp(origin.x, dict_extent.x_begin, x_max),
                  std::clamp(origin.y, dict_extent.y_begin, y_max)};
}

Part evaluate_candidate(const PointSetMap& map, const PointSetMap& dictionary,
                        const OccupancyGrid& dict_grid, const BBox& keypoint_bb,
                        std::uint64_t candidate_seed, const CpdConfig& cfg) {
    const std::vector<Point2> crop = crop_points(map, keypoint_bb);
    const double width = keypoint_bb.width();
    const double height = keypoint_bb.height();
    std::mt19937_64 rng(candidate_seed);

    Part part;
    part.keypoint_bb = keypoint_bb;
    double best = -1.0;
    for (int i = 0; i < cfg.descriptor_proposals; ++i) {
        Point2 origin{keypoint_bb.x_begin, keypoint_bb.y_begin};
        if (i > 0) {
            // Correspondence proposal: translate the box so a random cropped
            // point lands on a random dictionary point.
            const Point2& p = crop[uniform_index(rng, crop.size())];
            const Point2& q = dictionary.points[uniform_index(rng, dictionary.points.size())];
            origin.x += q.x - p.x;
            origin.y += q.y - p.y;
        }
        origin = clamp_origin(origin, width, height, dictionary.extent);
        const BBox descriptor_bb{origin.x, origin.x + width, origin.y, origin.y + height};
        const double score = as_score_for_crop(crop, keypoint_bb, dict_grid, descriptor_bb, cfg);
        if (score > best) {
            best = score;
            part.descriptor_bb = descriptor_bb;
        }
    }
    part.as_score = best;
    return part;
}

std::vector<Part> discover_impl(const PointSetMap& map, const PointSetMap& dictionary,
                                const CpdConfig& cfg, bool parallel) {
    validate_cfg(cfg);
    if (map.points.empty() || dictionary.points.empty()) {
        throw std::invalid_argument("discover_parts: empty map");
    }
    const OccupancyGrid dict_grid = rasterize(dictionary.points, cfg.grid_resolution);
    const std::vector<BBox> candidates = sample_candidate_bbs(map, cfg.candidate_samples,
                                                              cfg.seed);
    // Indices into `candidates` that pass MC; the original index also salts
    // the per-candidate proposal stream so results are schedule-independent.
    std::vector<std::size_t> passing;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (check_mc(map, candidates[i], cfg.t_size)) {
            passing.push_back(i);
        }
    }
    if (passing.empty()) {
        throw EmptyPoolError("discover_parts: no candidate passed the maximality criterion on '" +
                             map.id + "'");
    }

    std::vector<Part> parts(passing.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#else
    (void)parallel;
#endif
    for (long long j = 0; j < static_cast<long long>(passing.size()); ++j) {
        const std::size_t idx = passing[static_cast<std::size_t>(j)];
        parts[static_cast<std::size_t>(j)] =
            evaluate_candidate(map, dictionary, dict_grid, candidates[idx],
                               mix_seed(cfg.seed, idx), cfg);
    }
    std::sort(parts.begin(), parts.end(), part_order);

    if (cfg.gc == GcMode::kOff) {
        if (parts.size() > static_cast<std::size_t>(cfg.pool_size)) {
            parts.resize(static_cast<std::size_t>(cfg.pool_size));
        }
        return parts;
    }
    // Strict geometric criterion: admit in score order, requiring the
    // descriptor box to overlap every previously admitted one.
    std::vector<Part> pool;
    pool.reserve(static_cast<std::size_t>(cfg.pool_size));
    for (const Part& part : parts) {
        if (pool.size() == static_cast<std::size_t>(cfg.pool_size)) {
            break;
        }
        const bool compatible = std::all_of(pool.begin(), pool.end(), [&](const Part& admitted) {
            return !bbox_overlap(part.descriptor_bb, admitted.descriptor_bb).empty();
        });
        if (compatible) {
            pool.push_back(part);
        }
    }
    return pool;
}

}  // namespace

bool part_order(const Part& a, const Part& b) {
    const double sa = score_or_min(a);
    const double sb = score_or_min(b);
    if (sa != sb) {
        return sa > sb;
    }
    const double area_a = a.descriptor_bb.area();
    const double area_b = b.descriptor_bb.area();
    if (area_a != area_b) {
        return area_a > area_b;
    }
    const auto key = [](const Part& p) {
        return std::make_tuple(p.keypoint_bb.x_begin, p.keypoint_bb.x_end, p.keypoint_bb.y_begin,
                               p.keypoint_bb.y_end, p.descriptor_bb.x_begin,
                               p.descriptor_bb.y_begin);
    };
    return key(a) < key(b);
}

std::vector<BBox> sample_candidate_bbs(const PointSetMap& map, int n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("sample_candidate_bbs: n must be >= 1");
    }
    const BBox& extent = map.extent;
    const double longer = std::max({extent.width(), extent.height(), 1e-6});
    const double log_lo = std::log(0.3 * longer);
    const double log_hi = std::log(longer);
    std::mt19937_64 rng(seed);
    std::vector<BBox> boxes;
    boxes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double cx = uniform_range(rng, extent.x_begin, extent.x_end);
        const double cy = uniform_range(rng, extent.y_begin, extent.y_end);
        const double side = std::exp(uniform_range(rng, log_lo, log_hi));
        boxes.push_back(BBox{std::max(extent.x_begin, cx - side / 2.0),
                             std::min(extent.x_end, cx + side / 2.0),
                             std::max(extent.y_begin, cy - side / 2.0),
                             std::min(extent.y_end, cy + side / 2.0)});
    }
    return boxes;
}

bool check_mc(const PointSetMap& map, const BBox& bb, double t_size) {
    if (map.points.empty()) {
        throw std::invalid_argument("check_mc: empty map");
    }
    std::size_t inside = 0;
    for (const Point2& p : map.points) {
        if (bb.contains(p)) {
            ++inside;
        }
    }
    const double ratio =
        static_cast<double>(inside) / static_cast<double>(map.points.size());
    return ratio >= t_size;
}

double appearance_similarity(const PointSetMap& map, const BBox& keypoint_bb,
                             const OccupancyGrid& dict_grid, const BBox& descriptor_bb,
                             const CpdConfig& cfg) {
    if (cfg.translation_step <= 0.0) {
        throw std::invalid_argument("appearance_similarity: translation_step must be positive");
    }
    const std::vector<Point2> crop = crop_points(map, keypoint_bb);
    if (crop.empty()) {
        throw std::invalid_argument("appearance_similarity: keypoint_bb contains no points");
    }
    return as_score_for_crop(crop, keypoint_bb, dict_grid, descriptor_bb, cfg);
}

std::vector<Part> discover_parts(const PointSetMap& map, const PointSetMap& dictionary,
                                 const CpdConfig& cfg) {
    return discover_impl(map, dictionary, cfg, true);
}

std::vector<Part> discover_parts_serial(const PointSetMap& map, const PointSetMap& dictionary,
                                        const CpdConfig& cfg) {
    return discover_impl(map, dictionary, cfg, false);
}

}  // namespace partmatch
