#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "partmatch/geometry.hpp"

namespace partmatch {

/// One pose sample of a trajectory: position plus cumulative travel distance.
struct TrajectoryPoint {
    Point2 position;
    double travel = 0.0;
};

/// Loads a point-set map from the text format: optional `# key: value` header
/// lines followed by one `x y` pair per line. The `id` header, when present,
/// overrides the fallback id derived from the file stem.
PointSetMap load_map(const std::filesystem::path& path);

/// Writes a map in the same text format with full round-trip precision.
void save_map(const PointSetMap& map, const std::filesystem::path& path);

std::vector<TrajectoryPoint> load_trajectory(const std::filesystem::path& path);
void save_trajectory(const std::vector<TrajectoryPoint>& trajectory,
                     const std::filesystem::path& path);

/// Loads every `*.map` file under `dir`, sorted by filename for determinism.
std::vector<PointSetMap> load_collection(const std::filesystem::path& dir);

struct ManhattanAlignment {
    double angle = 0.0;    // rotation applied to the input, in [0, pi/2)
    double entropy = 0.0;  // axis-histogram entropy at that angle
};

/// Rotates the point set so its dominant wall directions align with the
/// axes. Scans angles in [0, pi/2) at `angle_step` and keeps the one that
/// minimizes the summed Shannon entropy of the x and y coordinate
/// histograms (0.1 m bins): axis-aligned structure concentrates coordinates
/// into few bins. Ties resolve to the smallest angle.
ManhattanAlignment align_manhattan(std::vector<Point2>& points, double angle_step = 0.005);
ManhattanAlignment align_manhattan_serial(std::vector<Point2>& points,
                                          double angle_step = 0.005);

struct Submap {
    PointSetMap map;
    Point2 pose;           // centroid of the window's points
    double travel = 0.0;   // travel distance at the window center
};

/// Cuts a travel-stamped point stream into overlapping submaps. Windows are
/// `window` meters of travel, advanced by `stride`; a sample belongs to a
/// window if its travel lies in the closed interval. Ids are formed as
/// `<prefix>_NNN`. Throws EmptySubmapError if any window captures no points.
std::vector<Submap> segment_submaps(std::span<const TrajectoryPoint> samples, double window,
                                    double stride, const std::string& prefix);

}  // namespace partmatch
