#pragma once

#include <functional>
#include <string>
#include <vector>

#include "partmatch/descriptor.hpp"
#include "partmatch/direct_matcher.hpp"
#include "partmatch/geometry.hpp"
#include "partmatch/ranking.hpp"

namespace partmatch {

enum class MatchStrategy { kMaxMax, kSumMax, kSumMaxWeighted };

/// Default strategies per matching scheme: sum-max for iMM, sum-max-weighted
/// for hMM.
MatchStrategy default_imm_strategy();
MatchStrategy default_hmm_strategy();

struct RankResult {
    std::string query_id;
    MatchStrategy strategy = MatchStrategy::kSumMax;
    double elapsed_seconds = 0.0;
    Ranking entries;  // score descending, ties by map_id ascending
};

/// Pairwise box similarity: overlap area / sqrt(area(a) * area(b)).
/// Symmetric, in [0, 1], 0 when disjoint, 1 iff the boxes coincide.
/// Zero-area inputs are invalid.
double region_similarity(const BBox& a, const BBox& b);

/// The part-set similarity between two descriptors sharing a dictionary:
///   max-max:          max_i max_j f_RS
///   sum-max:          sum_i max_j f_RS
///   sum-max-weighted: sum_i (max_j f_RS) * as_i
/// where i runs over query parts, j over database parts, and f_RS compares
/// descriptor BBs. Parts whose descriptor BB has zero area are skipped on
/// either side (they carry no region). Weighted mode requires scores on the
/// query parts (MissingScoresError otherwise); a dictionary_id mismatch
/// raises IncompatibleDescriptorError.
double aggregate_score(const MapDescriptor& query, const MapDescriptor& db_entry,
                       MatchStrategy strategy);

/// Ranks every database descriptor against the query descriptor.
RankResult rank_imm(const MapDescriptor& query, const std::vector<MapDescriptor>& db,
                    MatchStrategy strategy);
RankResult rank_imm_serial(const MapDescriptor& query, const std::vector<MapDescriptor>& db,
                           MatchStrategy strategy);

/// The hybrid scheme: the query side is the full 100-part CPD pool from the
/// original query map; the database side keeps its compact descriptors.
RankResult rank_hmm(const PointSetMap& query_map, const PointSetMap& dictionary,
                    const std::vector<MapDescriptor>& db, const CpdConfig& cpd_cfg,
                    MatchStrategy strategy);

/// Re-scores the top r entries of a ranking with direct matching against the
/// original maps (raw inlier count) and reorders them; entries below r are
/// untouched. The lookup returns the original map for an id or null when
/// unavailable (MissingMapError). r = 1 (or 0) leaves the order unchanged
/// except for the dMM tie-break inside the prefix.
RankResult rerank_cascade(const RankResult& ranked, const PointSetMap& query_map,
                          const std::function<const PointSetMap*(const std::string&)>& original,
                          int r, const DmmConfig& dmm_cfg);

const char* strategy_name(MatchStrategy strategy);
MatchStrategy parse_strategy(const std::string& name);

}  // namespace partmatch
