#include "partmatch/descriptor_matcher.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "partmatch/errors.hpp"
#include "partmatch/rng.hpp"

namespace partmatch {

namespace {

bool ranking_order(const ScoredMap& a, const ScoredMap& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.map_id < b.map_id;
}

double best_rs_against(const BBox& query_bb, const MapDescriptor& db_entry) {
    double best = 0.0;
    for (const Part& part : db_entry.parts) {
        if (part.descriptor_bb.area() <= 0.0) {
            continue;
        }
        best = std::max(best, region_similarity(query_bb, part.descriptor_bb));
    }
    return best;
}

RankResult rank_impl(const MapDescriptor& query, const std::vector<MapDescriptor>& db,
                     MatchStrategy strategy, bool parallel) {
    if (db.empty()) {
        throw std::invalid_argument("rank_imm: empty database");
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<ScoredMap> rows(db.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#else
    (void)parallel;
#endif
    for (long long i = 0; i < static_cast<long long>(db.size()); ++i) {
        const MapDescriptor& entry = db[static_cast<std::size_t>(i)];
        rows[static_cast<std::size_t>(i)] =
            ScoredMap{entry.map_id, aggregate_score(query, entry, strategy)};
    }
    std::sort(rows.begin(), rows.end(), ranking_order);
    const auto stop = std::chrono::steady_clock::now();

    RankResult result;
    result.query_id = query.map_id;
    result.strategy = strategy;
    result.elapsed_seconds = std::chrono::duration<double>(stop - start).count();
    result.entries = std::move(rows);
    return result;
}

}  // namespace

MatchStrategy default_imm_strategy() { return MatchStrategy::kSumMax; }
MatchStrategy default_hmm_strategy() { return MatchStrategy::kSumMaxWeighted; }

double region_similarity(const BBox& a, const BBox& b) {
    const double area_a = a.area();
    const double area_b = b.area();
    if (area_a <= 0.0 || area_b <= 0.0) {
        throw std::invalid_argument("region_similarity: zero-area box");
    }
    const BBox overlap = bbox_overlap(a, b);
    if (overlap.empty()) {
        return 0.0;
    }
    return overlap.area() / std::sqrt(area_a * area_b);
}

double aggregate_score(const MapDescriptor& query, const MapDescriptor& db_entry,
                       MatchStrategy strategy) {
    if (query.dictionary_id != db_entry.dictionary_id) {
        throw IncompatibleDescriptorError("aggregate_score: descriptors use dictionaries '" +
                                          query.dictionary_id + "' and '" +
                                          db_entry.dictionary_id + "'");
    }
    double total = 0.0;
    double best = 0.0;
    for (const Part& part : query.parts) {
        if (part.descriptor_bb.area() <= 0.0) {
            continue;
        }
        const double rs = best_rs_against(part.descriptor_bb, db_entry);
        switch (strategy) {
            case MatchStrategy::kMaxMax:
                best = std::max(best, rs);
                break;
            case MatchStrategy::kSumMax:
                total += rs;
                break;
            case MatchStrategy::kSumMaxWeighted: {
                if (!part.as_score.has_value()) {
                    throw MissingScoresError(
                        "aggregate_score: sum-max-weighted needs appearance scores on the "
                        "query descriptor");
                }
                total += rs * (*part.as_score);
                break;
            }
        }
    }
    return strategy == MatchStrategy::kMaxMax ? best : total;
}

RankResult rank_imm(const MapDescriptor& query, const std::vector<MapDescriptor>& db,
                    MatchStrategy strategy) {
    return rank_impl(query, db, strategy, true);
}

RankResult rank_imm_serial(const MapDescriptor& query, const std::vector<MapDescriptor>& db,
                           MatchStrategy strategy) {
    return rank_impl(query, db, strategy, false);
}

RankResult rank_hmm(const PointSetMap& query_map, const PointSetMap& dictionary,
                    const std::vector<MapDescriptor>& db, const CpdConfig& cpd_cfg,
                    MatchStrategy strategy) {
    const MapDescriptor pool = build_query_pool(query_map, dictionary, cpd_cfg);
    RankResult result = rank_imm(pool, db, strategy);
    result.query_id = query_map.id;
    return result;
}

RankResult rerank_cascade(const RankResult& ranked, const PointSetMap& query_map,
                          const std::function<const PointSetMap*(const std::string&)>& original,
                          int r, const DmmConfig& dmm_cfg) {
    if (r < 0) {
        throw std::invalid_argument("rerank_cascade: r must be >= 0");
    }
    RankResult result = ranked;
    const std::size_t prefix = std::min(static_cast<std::size_t>(r), ranked.entries.size());
    if (prefix < 2) {
        return result;
    }
    std::vector<ScoredMap> top(prefix);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long i = 0; i < static_cast<long long>(prefix); ++i) {
        const std::string& id = ranked.entries[static_cast<std::size_t>(i)].map_id;
        const PointSetMap* target = original(id);
        if (target == nullptr) {
            top[static_cast<std::size_t>(i)] = ScoredMap{id, -1.0};
            continue;
        }
        DmmConfig entry_cfg = dmm_cfg;
        entry_cfg.seed = mix_seed(dmm_cfg.seed, fnv1a(id));
        const DmmResult match = ransac_match_serial(query_map, *target, entry_cfg);
        top[static_cast<std::size_t>(i)] = ScoredMap{id, static_cast<double>(match.score)};
    }
    for (const ScoredMap& row : top) {
        if (row.score < 0.0) {
            throw MissingMapError("rerank_cascade: no original map for '" + row.map_id + "'");
        }
    }
    std::sort(top.begin(), top.end(), ranking_order);
    std::copy(top.begin(), top.end(), result.entries.begin());
    return result;
}

const char* strategy_name(MatchStrategy strategy) {
    switch (strategy) {
        case MatchStrategy::kMaxMax: return "max-max";
        case MatchStrategy::kSumMax: return "sum-max";
        case MatchStrategy::kSumMaxWeighted: return "sum-max-weighted";
    }
    return "sum-max";
}

MatchStrategy parse_strategy(const std::string& name) {
    if (name == "max-max") return MatchStrategy::kMaxMax;
    if (name == "sum-max") return MatchStrategy::kSumMax;
    if (name == "sum-max-weighted") return MatchStrategy::kSumMaxWeighted;
    throw std::invalid_argument("unknown strategy '" + name +
                                "' (expected max-max, sum-max, or sum-max-weighted)");
}

}  // namespace partmatch
