#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "partmatch/descriptor.hpp"
#include "partmatch/descriptor_matcher.hpp"
#include "partmatch/geometry.hpp"

namespace partmatch {

/// Retrieval ground-truth annotation: map pose (point-cloud centroid) and
/// the cumulative travel distance at which the map was recorded.
struct MapAnnotation {
    Point2 pose;
    double travel = 0.0;
};

/// One retrieval task: rank `database` (size N) for `query`; ground_truth is
/// the single relevant entry.
struct MatchTask {
    std::string query_id;
    std::vector<std::string> database;
    std::string ground_truth;
};

struct HistogramBin {
    double fraction = 0.0;    // upper edge of the normalized-rank bin, in percent
    double cumulative = 0.0;  // share of tasks at or below the edge
};

struct AnrReport {
    std::string label;
    std::vector<double> normalized_ranks;  // 100 * rank / N per task
    double anr = 0.0;                      // their mean
    std::vector<HistogramBin> histogram;   // 5% bins, cumulative
};

/// Loop-closing pairs: ordered (query, relevant) pairs whose poses are
/// within pose_radius but whose travel distances differ by at least
/// min_travel_gap (near in space, far along the route).
std::vector<std::pair<std::string, std::string>> find_relevant_pairs(
    const std::vector<std::pair<std::string, MapAnnotation>>& maps, double pose_radius,
    double min_travel_gap);

/// ANR over ranked tasks. The rank of each ground truth is 1-based;
/// normalized rank = 100 * rank / N. Histogram bins are cumulative at 5%
/// steps and end at 1.
AnrReport compute_anr(const std::vector<std::pair<RankResult, std::string>>& results,
                      const std::string& label);

struct TimingRow {
    int k = 0;
    double per_pair_seconds = 0.0;
};

struct TimingReport {
    std::vector<TimingRow> rows;
    double slope = 0.0;      // seconds per unit k
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate_fit = false;  // fewer than two distinct k values
};

/// Times a method at each k (the callback returns mean per-pair seconds for
/// that k) and fits a line over (k, time). Needs at least two k values.
TimingReport timing_report(const std::function<double(int)>& per_pair_seconds,
                           const std::vector<int>& k_values);

struct SpaceRow {
    std::string map_id;
    std::size_t descriptor_bits = 0;  // 42 * K
    std::size_t raw_bits = 0;         // 14 * point count
    double ratio = 0.0;               // raw / descriptor
};

/// Compression accounting per map, sorted by map_id. Every descriptor must
/// have its original map present.
std::vector<SpaceRow> space_report(const std::vector<MapDescriptor>& descriptors,
                                   const std::vector<PointSetMap>& originals);

/// Builds one task per (query, relevant) pair: the database holds the
/// relevant map plus n-1 irrelevant globals sampled without replacement,
/// excluding the query itself and every global within pose_radius of the
/// query pose (anything spatially near the query is not a fair negative).
/// Sampling is seeded per pair, so tasks do not depend on pair order.
std::vector<MatchTask> build_tasks(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::map<std::string, MapAnnotation>& query_annotations,
    const std::map<std::string, MapAnnotation>& global_annotations, int n,
    double pose_radius, std::uint64_t seed);

}  // namespace partmatch
