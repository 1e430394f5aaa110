// Compares the OpenMP kernels against their serial reference twins on a
// seeded synthetic workload: wall-clock speedup plus an exact-equality check
// of the outputs (the parallel paths must not change any result).

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "partmatch/cpd.hpp"
#include "partmatch/descriptor.hpp"
#include "partmatch/descriptor_matcher.hpp"
#include "partmatch/direct_matcher.hpp"
#include "partmatch/ingest.hpp"
#include "partmatch/synth.hpp"

using namespace partmatch;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 0.0;
    for (int i = 0; i < repeats; ++i) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const std::chrono::duration<double> elapsed =
            std::chrono::steady_clock::now() - start;
        if (i == 0 || elapsed.count() < best) {
            best = elapsed.count();
        }
    }
    return best;
}

bool same_box(const BBox& a, const BBox& b) {
    return a.x_begin == b.x_begin && a.x_end == b.x_end && a.y_begin == b.y_begin &&
           a.y_end == b.y_end;
}

void report(const std::string& kernel, double serial_s, double parallel_s, bool equal) {
    std::printf("%-18s serial %9.4fs  parallel %9.4fs  speedup %5.2fx  outputs %s\n",
                kernel.c_str(), serial_s, parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0,
                equal ? "equal" : "DIFFER");
}

}  // namespace

int main() {
    SynthConfig synth_cfg;
    synth_cfg.seed = 9;
    const SynthDataset dataset = generate_dataset(synth_cfg);
    const PointSetMap& query = dataset.locals.front().map;
    std::vector<PointSetMap> db;
    for (std::size_t i = 0; i < 40 && i < dataset.globals.size(); ++i) {
        db.push_back(dataset.globals[i].map);
    }

    // Projection-histogram alignment sweep.
    {
        std::vector<Point2> serial_points = dataset.dictionary.points;
        std::vector<Point2> parallel_points = dataset.dictionary.points;
        ManhattanAlignment serial_result{}, parallel_result{};
        const double serial_s = best_of(3, [&] {
            std::vector<Point2> scratch = serial_points;
            serial_result = align_manhattan_serial(scratch);
        });
        const double parallel_s = best_of(3, [&] {
            std::vector<Point2> scratch = parallel_points;
            parallel_result = align_manhattan(scratch);
        });
        report("align_manhattan", serial_s, parallel_s,
               serial_result.angle == parallel_result.angle &&
                   serial_result.entropy == parallel_result.entropy);
    }

    // RANSAC ranking of a 40-map database.
    {
        DmmConfig cfg;
        cfg.seed = 9;
        Ranking serial_ranking, parallel_ranking;
        const double serial_s =
            best_of(3, [&] { serial_ranking = rank_database_serial(query, db, cfg); });
        const double parallel_s =
            best_of(3, [&] { parallel_ranking = rank_database(query, db, cfg); });
        bool equal = serial_ranking.size() == parallel_ranking.size();
        for (std::size_t i = 0; equal && i < serial_ranking.size(); ++i) {
            equal = serial_ranking[i].map_id == parallel_ranking[i].map_id &&
                    serial_ranking[i].score == parallel_ranking[i].score;
        }
        report("rank_database", serial_s, parallel_s, equal);
    }

    // Part discovery on one map.
    {
        CpdConfig cfg;
        cfg.seed = 9;
        cfg.candidate_samples = 600;
        cfg.t_size = 0.85;
        cfg.descriptor_proposals = 16;
        std::vector<Part> serial_pool, parallel_pool;
        const double serial_s = best_of(3, [&] {
            serial_pool = discover_parts_serial(query, dataset.dictionary, cfg);
        });
        const double parallel_s =
            best_of(3, [&] { parallel_pool = discover_parts(query, dataset.dictionary, cfg); });
        bool equal = serial_pool.size() == parallel_pool.size();
        for (std::size_t i = 0; equal && i < serial_pool.size(); ++i) {
            equal = same_box(serial_pool[i].keypoint_bb, parallel_pool[i].keypoint_bb) &&
                    same_box(serial_pool[i].descriptor_bb, parallel_pool[i].descriptor_bb) &&
                    serial_pool[i].as_score == parallel_pool[i].as_score;
        }
        report("discover_parts", serial_s, parallel_s, equal);

        // Descriptor ranking over the same database, reusing the pool.
        MapDescriptor query_descriptor;
        query_descriptor.map_id = query.id;
        query_descriptor.dictionary_id = dataset.dictionary.id;
        query_descriptor.parts = parallel_pool;
        query_descriptor.context.local_origin =
            Point2{query.extent.x_begin, query.extent.y_begin};
        query_descriptor.context.dict_extent = dataset.dictionary.extent;
        // Box overlaps are cheap, so replicate the database until one pass
        // takes a measurable slice of wall clock.
        std::vector<MapDescriptor> desc_db;
        for (int rep = 0; rep < 1000; ++rep) {
            for (const PointSetMap& m : db) {
                MapDescriptor d = query_descriptor;
                d.map_id = m.id + "_" + std::to_string(rep);
                desc_db.push_back(std::move(d));
            }
        }
        RankResult serial_rank, parallel_rank;
        const double serial_s2 = best_of(20, [&] {
            serial_rank = rank_imm_serial(query_descriptor, desc_db, MatchStrategy::kSumMax);
        });
        const double parallel_s2 = best_of(20, [&] {
            parallel_rank = rank_imm(query_descriptor, desc_db, MatchStrategy::kSumMax);
        });
        bool rank_equal = serial_rank.entries.size() == parallel_rank.entries.size();
        for (std::size_t i = 0; rank_equal && i < serial_rank.entries.size(); ++i) {
            rank_equal = serial_rank.entries[i].map_id == parallel_rank.entries[i].map_id &&
                         serial_rank.entries[i].score == parallel_rank.entries[i].score;
        }
        report("rank_imm", serial_s2, parallel_s2, rank_equal);
    }

    return 0;
}
