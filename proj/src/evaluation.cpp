#include "partmatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "partmatch/rng.hpp"

namespace partmatch {

std::vector<std::pair<std::string, std::string>> find_relevant_pairs(
    const std::vector<std::pair<std::string, MapAnnotation>>& maps, double pose_radius,
    double min_travel_gap) {
    if (pose_radius < 0.0 || min_travel_gap < 0.0) {
        throw std::invalid_argument("find_relevant_pairs: thresholds must be non-negative");
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        for (std::size_t j = 0; j < maps.size(); ++j) {
            if (i == j) {
                continue;
            }
            const MapAnnotation& a = maps[i].second;
            const MapAnnotation& b = maps[j].second;
            const double dx = a.pose.x - b.pose.x;
            const double dy = a.pose.y - b.pose.y;
            if (std::hypot(dx, dy) <= pose_radius &&
                std::abs(a.travel - b.travel) >= min_travel_gap) {
                pairs.emplace_back(maps[i].first, maps[j].first);
            }
        }
    }
    return pairs;
}

AnrReport compute_anr(const std::vector<std::pair<RankResult, std::string>>& results,
                      const std::string& label) {
    if (results.empty()) {
        throw std::invalid_argument("compute_anr: no results");
    }
    AnrReport report;
    report.label = label;
    report.normalized_ranks.reserve(results.size());
    double sum = 0.0;
    for (const auto& [ranking, ground_truth] : results) {
        const auto& entries = ranking.entries;
        const auto it = std::find_if(entries.begin(), entries.end(),
                                     [&](const ScoredMap& row) {
                                         return row.map_id == ground_truth;
                                     });
        if (it == entries.end()) {
            throw std::invalid_argument("compute_anr: ground truth '" + ground_truth +
                                        "' missing from ranking of '" + ranking.query_id + "'");
        }
        const double rank = static_cast<double>(it - entries.begin()) + 1.0;
        const double normalized = 100.0 * rank / static_cast<double>(entries.size());
        report.normalized_ranks.push_back(normalized);
        sum += normalized;
    }
    report.anr = sum / static_cast<double>(report.normalized_ranks.size());

    report.histogram.reserve(20);
    for (int b = 1; b <= 20; ++b) {
        const double edge = 5.0 * b;
        const std::size_t covered = static_cast<std::size_t>(
            std::count_if(report.normalized_ranks.begin(), report.normalized_ranks.end(),
                          [&](double r) { return r <= edge; }));
        report.histogram.push_back(HistogramBin{
            edge, static_cast<double>(covered) /
                      static_cast<double>(report.normalized_ranks.size())});
    }
    return report;
}

TimingReport timing_report(const std::function<double(int)>& per_pair_seconds,
                           const std::vector<int>& k_values) {
    if (k_values.size() < 2) {
        throw std::invalid_argument("timing_report: need at least two k values");
    }
    TimingReport report;
    report.rows.reserve(k_values.size());
    for (int k : k_values) {
        report.rows.push_back(TimingRow{k, per_pair_seconds(k)});
    }

    const double n = static_cast<double>(report.rows.size());
    double mean_k = 0.0;
    double mean_t = 0.0;
    for (const TimingRow& row : report.rows) {
        mean_k += row.k;
        mean_t += row.per_pair_seconds;
    }
    mean_k /= n;
    mean_t /= n;
    double var_k = 0.0;
    double cov = 0.0;
    for (const TimingRow& row : report.rows) {
        var_k += (row.k - mean_k) * (row.k - mean_k);
        cov += (row.k - mean_k) * (row.per_pair_seconds - mean_t);
    }
    if (var_k == 0.0) {
        report.degenerate_fit = true;
        return report;
    }
    report.slope = cov / var_k;
    report.intercept = mean_t - report.slope * mean_k;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const TimingRow& row : report.rows) {
        const double fit = report.intercept + report.slope * row.k;
        ss_res += (row.per_pair_seconds - fit) * (row.per_pair_seconds - fit);
        ss_tot += (row.per_pair_seconds - mean_t) * (row.per_pair_seconds - mean_t);
    }
    report.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return report;
}

std::vector<SpaceRow> space_report(const std::vector<MapDescriptor>& descriptors,
                                   const std::vector<PointSetMap>& originals) {
    std::vector<SpaceRow> rows;
    rows.reserve(descriptors.size());
    for (const MapDescriptor& descriptor : descriptors) {
        const auto it = std::find_if(originals.begin(), originals.end(),
                                     [&](const PointSetMap& map) {
                                         return map.id == descriptor.map_id;
                                     });
        if (it == originals.end()) {
            throw std::invalid_argument("space_report: no original map for '" +
                                        descriptor.map_id + "'");
        }
        SpaceRow row;
        row.map_id = descriptor.map_id;
        row.descriptor_bits = 42 * descriptor.parts.size();
        row.raw_bits = 14 * it->points.size();
        row.ratio = static_cast<double>(row.raw_bits) / static_cast<double>(row.descriptor_bits);
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const SpaceRow& a, const SpaceRow& b) { return a.map_id < b.map_id; });
    return rows;
}

std::vector<MatchTask> build_tasks(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::map<std::string, MapAnnotation>& query_annotations,
    const std::map<std::string, MapAnnotation>& global_annotations, int n,
    double pose_radius, std::uint64_t seed) {
    if (n < 2) {
        throw std::invalid_argument("build_tasks: n must be >= 2");
    }
    std::vector<MatchTask> tasks;
    tasks.reserve(pairs.size());
    for (const auto& [query_id, relevant_id] : pairs) {
        const auto query_it = query_annotations.find(query_id);
        if (query_it == query_annotations.end()) {
            throw std::invalid_argument("build_tasks: no annotation for query '" + query_id +
                                        "'");
        }
        if (global_annotations.find(relevant_id) == global_annotations.end()) {
            throw std::invalid_argument("build_tasks: no annotation for relevant map '" +
                                        relevant_id + "'");
        }
        const Point2 query_pose = query_it->second.pose;
        // Eligible negatives: spatially far from the query (id order is
        // canonical because the annotation map is ordered).
        std::vector<std::string> eligible;
        for (const auto& [id, annotation] : global_annotations) {
            if (id == relevant_id || id == query_id) {
                continue;
            }
            const double dx = annotation.pose.x - query_pose.x;
            const double dy = annotation.pose.y - query_pose.y;
            if (std::hypot(dx, dy) > pose_radius) {
                eligible.push_back(id);
            }
        }
        const std::size_t need = static_cast<std::size_t>(n - 1);
        if (eligible.size() < need) {
            throw std::invalid_argument("build_tasks: only " +
                                        std::to_string(eligible.size()) +
                                        " eligible negatives for query '" + query_id +
                                        "', need " + std::to_string(need));
        }
        // Partial Fisher-Yates, seeded per pair so tasks are independent of
        // pair order and of each other.
        std::mt19937_64 rng(mix_seed(seed, fnv1a(query_id + "\x1f" + relevant_id)));
        for (std::size_t i = 0; i < need; ++i) {
            const std::size_t j = i + uniform_index(rng, eligible.size() - i);
            std::swap(eligible[i], eligible[j]);
        }
        eligible.resize(need);

        MatchTask task;
        task.query_id = query_id;
        task.ground_truth = relevant_id;
        task.database = std::move(eligible);
        task.database.push_back(relevant_id);
        std::sort(task.database.begin(), task.database.end());
        tasks.push_back(std::move(task));
    }
    return tasks;
}

}  // namespace partmatch
