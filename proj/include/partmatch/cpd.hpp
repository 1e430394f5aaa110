#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "partmatch/geometry.hpp"

namespace partmatch {

/// A discovered part: where it is on the input map (keypoint BB), what it
/// looks like on the dictionary map (descriptor BB, same width/height), and
/// how well the dictionary explains it (appearance similarity in [0,1]).
/// as_score is empty only for parts decoded from a file without the score
/// sidecar.
struct Part {
    BBox keypoint_bb;
    BBox descriptor_bb;
    std::optional<double> as_score;
};

/// Ordering used everywhere a part pool is ranked: appearance similarity
/// descending, ties by descriptor BB area descending, then lexicographic
/// BB coordinates. Parts without a score sort last.
bool part_order(const Part& a, const Part& b);

enum class GcMode { kStrict, kOff };

struct CpdConfig {
    int candidate_samples = 2000;
    int pool_size = 100;
    double t_size = 0.9;
    double grid_resolution = 0.1;
    RotationMode rotation_mode = RotationMode::kManhattan4;
    double translation_step = 0.1;
    std::uint64_t seed = 0;
    GcMode gc = GcMode::kStrict;
    int descriptor_proposals = 32;
};

/// Draws n candidate boxes: center uniform over map.extent, side log-uniform
/// in [0.3, 1.0] x the longer extent side, then clipped to the extent (the
/// part of a box outside the extent holds no points, and clipping keeps
/// every keypoint box inside the codec's addressable window). MC at
/// T^size ~ 0.9 only passes large boxes, hence the large-biased law.
std::vector<BBox> sample_candidate_bbs(const PointSetMap& map, int n, std::uint64_t seed);

/// Maximality criterion: the box captures at least t_size of the map points.
/// The boundary is inclusive (9 of 10 points passes t_size = 0.9).
bool check_mc(const PointSetMap& map, const BBox& bb, double t_size);

/// Appearance similarity: the keypoint-cropped points are placed into
/// descriptor_bb on the dictionary grid and the best inlier fraction over a
/// discrete transform search is returned.
///
/// Search space, exactly: for each rotation r of cfg.rotation_mode, points
/// rotate about the keypoint BB center; the rotated keypoint box's
/// axis-aligned bounds are slid so their min corner starts at descriptor_bb's
/// min corner, then stepped by cfg.translation_step per axis with offsets
/// k in [-1, K+1] where K = max(0, floor((descriptor side - rotated side) /
/// step + 1e-9)) — i.e. the box stays inside descriptor_bb dilated by one
/// step. Score = max inlier count / cropped point count.
double appearance_similarity(const PointSetMap& map, const BBox& keypoint_bb,
                             const OccupancyGrid& dict_grid, const BBox& descriptor_bb,
                             const CpdConfig& cfg);

/// Mines the part pool: sample candidates, keep MC passers, place each on
/// the dictionary by proposal search (identity placement plus
/// correspondence-anchored proposals pairing a random cropped point with a
/// random dictionary point), score with appearance_similarity, sort by
/// part_order, then admit greedily under the geometric criterion (every
/// admitted pair of descriptor BBs must overlap) up to pool_size.
/// Throws EmptyPoolError when no candidate passes MC.
std::vector<Part> discover_parts(const PointSetMap& map, const PointSetMap& dictionary,
                                 const CpdConfig& cfg);
std::vector<Part> discover_parts_serial(const PointSetMap& map, const PointSetMap& dictionary,
                                        const CpdConfig& cfg);

}  // namespace partmatch
