// Command-line front end: dataset synthesis, descriptor building, matching,
// and the ANR evaluation battery. Progress goes to stderr; data artifacts go
// to files (or stdout for match without --out) so runs compose in pipelines.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "partmatch/cpd.hpp"
#include "partmatch/descriptor.hpp"
#include "partmatch/descriptor_matcher.hpp"
#include "partmatch/direct_matcher.hpp"
#include "partmatch/errors.hpp"
#include "partmatch/evaluation.hpp"
#include "partmatch/geometry.hpp"
#include "partmatch/ingest.hpp"
#include "partmatch/log.hpp"
#include "partmatch/parallel.hpp"
#include "partmatch/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace partmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

// Raised for invocation problems discovered after parsing (bad combinations,
// bad enum values); distinguished from data errors in the exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string format_score(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", v);
    return buffer;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw std::runtime_error("failed while writing " + path.string());
    }
}

// Effective configuration (flags > config file > defaults) echoed next to
// every artifact for provenance.
void echo_run_config(CLI::App* sub, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_text_file(out_dir / "run_config.txt",
                    "# effective configuration: " + sub->get_name() + "\n" +
                        sub->config_to_str(true, false));
}

RotationMode parse_rotation(const std::string& name) {
    if (name == "manhattan") {
        return RotationMode::kManhattan4;
    }
    if (name == "free") {
        return RotationMode::kFreeAngle;
    }
    throw UsageError("unknown rotation mode '" + name + "' (expected manhattan|free)");
}

GcMode parse_gc(const std::string& name) {
    if (name == "strict") {
        return GcMode::kStrict;
    }
    if (name == "off") {
        return GcMode::kOff;
    }
    throw UsageError("unknown GC mode '" + name + "' (expected strict|off)");
}

std::vector<MapDescriptor> load_descriptor_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw CorruptRecordError("descriptor directory not found: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".desc") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<MapDescriptor> descriptors;
    descriptors.reserve(files.size());
    for (const fs::path& file : files) {
        descriptors.push_back(read_descriptor(file));
    }
    if (descriptors.empty()) {
        throw CorruptRecordError("no .desc files under " + dir.string());
    }
    return descriptors;
}

std::string ranking_csv(const RankResult& result) {
    std::string csv = "query_id,rank,map_id,score\n";
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        csv += result.query_id;
        csv += ',';
        csv += std::to_string(i + 1);
        csv += ',';
        csv += result.entries[i].map_id;
        csv += ',';
        csv += format_score(result.entries[i].score);
        csv += '\n';
    }
    return csv;
}

// ---------------------------------------------------------------- synth ---

struct SynthArgs {
    SynthConfig cfg;
    fs::path out;
};

int cmd_synth(const SynthArgs& args, CLI::App* sub) {
    const SynthDataset dataset = generate_dataset(args.cfg);
    fs::create_directories(args.out);
    write_dataset(dataset, args.out);
    echo_run_config(sub, args.out);
    log_info("synth: wrote " + std::to_string(dataset.globals.size()) + " globals, " +
             std::to_string(dataset.locals.size()) + " locals to " + args.out.string());
    return kExitOk;
}

// ---------------------------------------------------------------- build ---

struct BuildArgs {
    fs::path maps;
    fs::path dict;
    fs::path out;
    std::vector<int> ks{3};
    CpdConfig cpd;
    std::string rotation = "manhattan";
    std::string gc = "strict";
};

MapDescriptor descriptor_from_pool(const PointSetMap& map, const PointSetMap& dictionary,
                                   const std::vector<Part>& pool, int k,
                                   const CpdConfig& cfg) {
    MapDescriptor descriptor;
    descriptor.map_id = map.id;
    descriptor.dictionary_id = dictionary.id;
    descriptor.parts = select_top_k(pool, k);
    descriptor.context.local_origin = Point2{map.extent.x_begin, map.extent.y_begin};
    descriptor.context.local_resolution = cfg.grid_resolution;
    descriptor.context.dict_extent = dictionary.extent;
    return descriptor;
}

int cmd_build(BuildArgs args, CLI::App* sub) {
    if (args.ks.empty()) {
        throw UsageError("--k needs at least one value");
    }
    for (const int k : args.ks) {
        if (k < 1 || k > args.cpd.pool_size) {
            throw UsageError("--k values must be in [1, pool size]");
        }
    }
    args.cpd.rotation_mode = parse_rotation(args.rotation);
    args.cpd.gc = parse_gc(args.gc);

    const PointSetMap dictionary = load_map(args.dict);
    const std::vector<PointSetMap> maps = load_collection(args.maps);
    if (maps.empty()) {
        throw CorruptRecordError("no .map files under " + args.maps.string());
    }
    fs::create_directories(args.out);
    for (const int k : args.ks) {
        fs::create_directories(args.out / ("k" + std::to_string(k)));
    }

    std::string build_log = "map_id,pool_size,top_as\n";
    std::string failures;
    std::size_t done = 0;
    for (const PointSetMap& map : maps) {
        try {
            const std::vector<Part> pool = discover_parts(map, dictionary, args.cpd);
            for (const int k : args.ks) {
                const MapDescriptor descriptor =
                    descriptor_from_pool(map, dictionary, pool, k, args.cpd);
                write_descriptor(descriptor,
                                 args.out / ("k" + std::to_string(k)) / (map.id + ".desc"));
            }
            build_log += map.id + "," + std::to_string(pool.size()) + "," +
                         format_score(pool.front().as_score.value_or(0.0)) + "\n";
        } catch (const EmptyPoolError& e) {
            failures += map.id + ": " + e.what() + "\n";
            log_warn(std::string("build: ") + e.what());
        }
        ++done;
        if (done % 25 == 0 || done == maps.size()) {
            log_info("build: " + std::to_string(done) + "/" + std::to_string(maps.size()) +
                     " maps");
        }
    }
    write_text_file(args.out / "build_log.csv", build_log);
    echo_run_config(sub, args.out);
    if (!failures.empty()) {
        write_text_file(args.out / "failures.txt", failures);
        log_error("build: some maps produced no parts; see failures.txt");
        return kExitPartial;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- match ---

struct MatchArgs {
    std::string scheme;
    fs::path query;
    fs::path db;
    fs::path dict;
    fs::path maps;
    fs::path out;
    std::string strategy;  // empty -> scheme default
    int rerank_r = 0;
    std::uint64_t seed = 0;
    int hypotheses = 500;
    CpdConfig cpd;
    std::string rotation = "manhattan";
    std::string gc = "strict";
};

int cmd_match(MatchArgs args, CLI::App* sub) {
    if (args.scheme != "dmm" && args.scheme != "imm" && args.scheme != "hmm") {
        throw UsageError("unknown scheme '" + args.scheme + "' (expected dmm|imm|hmm)");
    }
    if (args.rerank_r < 0) {
        throw UsageError("--rerank must be >= 0");
    }
    if (args.rerank_r > 0 && args.scheme != "hmm") {
        throw UsageError("--rerank needs scheme=hmm (the query map drives the cascade)");
    }
    if (args.rerank_r > 0 && args.maps.empty()) {
        throw UsageError("--rerank needs --maps with the original database maps");
    }
    if (args.scheme == "hmm" && args.dict.empty()) {
        throw UsageError("scheme=hmm needs --dict with the dictionary map");
    }
    args.cpd.rotation_mode = parse_rotation(args.rotation);
    args.cpd.gc = parse_gc(args.gc);
    args.cpd.seed = args.seed;

    DmmConfig dmm_cfg;
    dmm_cfg.hypothesis_count = args.hypotheses;
    dmm_cfg.rotation_mode = parse_rotation(args.rotation);
    dmm_cfg.seed = args.seed;

    RankResult result;
    if (args.scheme == "dmm") {
        const PointSetMap query = load_map(args.query);
        const std::vector<PointSetMap> db = load_collection(args.db);
        if (db.empty()) {
            throw CorruptRecordError("no .map files under " + args.db.string());
        }
        result.query_id = query.id;
        result.entries = rank_database(query, db, dmm_cfg);
    } else {
        const std::vector<MapDescriptor> db = load_descriptor_dir(args.db);
        const MatchStrategy strategy =
            args.strategy.empty()
                ? (args.scheme == "imm" ? default_imm_strategy() : default_hmm_strategy())
                : parse_strategy(args.strategy);
        if (args.scheme == "imm") {
            const MapDescriptor query = read_descriptor(args.query);
            result = rank_imm(query, db, strategy);
        } else {
            const PointSetMap query_map = load_map(args.query);
            const PointSetMap dictionary = load_map(args.dict);
            result = rank_hmm(query_map, dictionary, db, args.cpd, strategy);
            if (args.rerank_r > 0) {
                const std::vector<PointSetMap> originals = load_collection(args.maps);
                std::map<std::string, const PointSetMap*> by_id;
                for (const PointSetMap& m : originals) {
                    by_id[m.id] = &m;
                }
                const auto lookup = [&](const std::string& id) -> const PointSetMap* {
                    const auto it = by_id.find(id);
                    return it == by_id.end() ? nullptr : it->second;
                };
                result = rerank_cascade(result, query_map, lookup, args.rerank_r, dmm_cfg);
            }
        }
    }

    const std::string csv = ranking_csv(result);
    if (args.out.empty()) {
        std::cout << csv;
    } else {
        fs::create_directories(args.out);
        write_text_file(args.out / "ranking.csv", csv);
        echo_run_config(sub, args.out);
        log_info("match: wrote " + (args.out / "ranking.csv").string());
    }
    return kExitOk;
}

// ----------------------------------------------------------------- eval ---

struct EvalArgs {
    fs::path data;
    fs::path out;
    std::uint64_t seed = 0;
    int db_size = 100;
    int k_max = 5;
    std::vector<int> rerank_rs{10, 20};
    double pose_radius = 5.0;
    int hypotheses = 500;
    CpdConfig cpd;
    std::string rotation = "manhattan";
    std::string gc = "strict";
    bool timing = false;
};

struct EvalData {
    PointSetMap dictionary;
    std::vector<PointSetMap> globals;
    std::vector<PointSetMap> locals;
    std::map<std::string, MapAnnotation> global_annotations;
    std::map<std::string, MapAnnotation> query_annotations;
    std::vector<std::pair<std::string, std::string>> pairs;
};

EvalData load_eval_data(const fs::path& dir) {
    EvalData data;
    data.dictionary = load_map(dir / "dictionary.map");
    data.globals = load_collection(dir / "globals");
    data.locals = load_collection(dir / "locals");
    if (data.globals.empty() || data.locals.empty()) {
        throw CorruptRecordError("dataset at " + dir.string() + " has no maps");
    }
    std::set<std::string> global_ids;
    for (const PointSetMap& m : data.globals) {
        global_ids.insert(m.id);
    }
    std::set<std::string> local_ids;
    for (const PointSetMap& m : data.locals) {
        local_ids.insert(m.id);
    }

    std::ifstream annotations(dir / "annotations.csv");
    if (!annotations) {
        throw CorruptRecordError("cannot open " + (dir / "annotations.csv").string());
    }
    std::string line;
    std::getline(annotations, line);  // header
    std::size_t line_number = 1;
    while (std::getline(annotations, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        std::stringstream row(line);
        std::string id, x, y, travel;
        if (!std::getline(row, id, ',') || !std::getline(row, x, ',') ||
            !std::getline(row, y, ',') || !std::getline(row, travel)) {
            throw ParseError("annotations.csv: expected id,x,y,travel", line_number);
        }
        MapAnnotation annotation;
        try {
            annotation.pose = Point2{std::stod(x), std::stod(y)};
            annotation.travel = std::stod(travel);
        } catch (const std::exception&) {
            throw ParseError("annotations.csv: bad number", line_number);
        }
        if (global_ids.count(id) != 0) {
            data.global_annotations[id] = annotation;
        } else if (local_ids.count(id) != 0) {
            data.query_annotations[id] = annotation;
        }
    }

    std::ifstream pairs(dir / "pairs.csv");
    if (!pairs) {
        throw CorruptRecordError("cannot open " + (dir / "pairs.csv").string());
    }
    std::getline(pairs, line);  // header
    while (std::getline(pairs, line)) {
        if (line.empty()) {
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw ParseError("pairs.csv: expected query_id,relevant_id", 0);
        }
        data.pairs.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    if (data.pairs.empty()) {
        throw CorruptRecordError("pairs.csv holds no pairs");
    }
    return data;
}

int cmd_eval(EvalArgs args, CLI::App* sub) {
    if (args.k_max < 1 || args.k_max > args.cpd.pool_size) {
        throw UsageError("--k-max must be in [1, pool size]");
    }
    if (args.db_size < 2) {
        throw UsageError("--db-size must be >= 2");
    }
    args.cpd.rotation_mode = parse_rotation(args.rotation);
    args.cpd.gc = parse_gc(args.gc);
    args.cpd.seed = args.seed;
    DmmConfig dmm_cfg;
    dmm_cfg.hypothesis_count = args.hypotheses;
    dmm_cfg.rotation_mode = args.cpd.rotation_mode;
    dmm_cfg.seed = args.seed;

    const EvalData data = load_eval_data(args.data);
    const std::vector<MatchTask> tasks =
        build_tasks(data.pairs, data.query_annotations, data.global_annotations,
                    args.db_size, args.pose_radius, args.seed);
    log_info("eval: " + std::to_string(tasks.size()) + " tasks, db size " +
             std::to_string(args.db_size));

    std::map<std::string, const PointSetMap*> globals_by_id;
    for (const PointSetMap& m : data.globals) {
        globals_by_id[m.id] = &m;
    }
    std::map<std::string, const PointSetMap*> locals_by_id;
    for (const PointSetMap& m : data.locals) {
        locals_by_id[m.id] = &m;
    }

    bool partial = false;

    // One CPD pass per map; every (scheme, K) row slices the same pools.
    std::map<std::string, std::vector<Part>> global_pools;
    std::size_t done = 0;
    for (const PointSetMap& m : data.globals) {
        try {
            global_pools[m.id] = discover_parts(m, data.dictionary, args.cpd);
        } catch (const EmptyPoolError& e) {
            log_warn(std::string("eval: ") + e.what());
            partial = true;
        }
        if (++done % 50 == 0) {
            log_info("eval: global pools " + std::to_string(done) + "/" +
                     std::to_string(data.globals.size()));
        }
    }
    std::map<std::string, MapDescriptor> query_pools;
    for (const PointSetMap& m : data.locals) {
        try {
            query_pools[m.id] = build_query_pool(m, data.dictionary, args.cpd);
        } catch (const EmptyPoolError& e) {
            log_warn(std::string("eval: ") + e.what());
            partial = true;
        }
    }
    log_info("eval: pools ready");

    // Database descriptor slices per K.
    std::vector<std::map<std::string, MapDescriptor>> db_by_k(
        static_cast<std::size_t>(args.k_max) + 1);
    for (int k = 1; k <= args.k_max; ++k) {
        for (const auto& [id, pool] : global_pools) {
            db_by_k[static_cast<std::size_t>(k)][id] =
                descriptor_from_pool(*globals_by_id.at(id), data.dictionary, pool, k,
                                     args.cpd);
        }
    }

    std::vector<AnrReport> reports;
    std::map<std::string, std::vector<std::pair<RankResult, std::string>>> hmm_results;

    // Row 1: direct matching on the original maps.
    {
        std::vector<std::pair<RankResult, std::string>> results;
        for (const MatchTask& task : tasks) {
            const PointSetMap& query = *locals_by_id.at(task.query_id);
            std::vector<PointSetMap> db;
            db.reserve(task.database.size());
            for (const std::string& id : task.database) {
                db.push_back(*globals_by_id.at(id));
            }
            RankResult result;
            result.query_id = task.query_id;
            result.entries = rank_database(query, db, dmm_cfg);
            results.emplace_back(std::move(result), task.ground_truth);
        }
        reports.push_back(compute_anr(results, "dmm"));
        log_info("eval: dmm ANR " + format_score(reports.back().anr));
    }

    const auto run_descriptor_row = [&](const std::string& label, int k, bool hybrid) {
        std::vector<std::pair<RankResult, std::string>> results;
        const auto& db_slice = db_by_k[static_cast<std::size_t>(k)];
        for (const MatchTask& task : tasks) {
            const auto pool_it = query_pools.find(task.query_id);
            if (pool_it == query_pools.end() ||
                db_slice.count(task.ground_truth) == 0) {
                log_warn("eval: skipping task " + task.query_id + " in " + label);
                continue;
            }
            MapDescriptor query = pool_it->second;
            if (!hybrid) {
                query.parts = select_top_k(query.parts, k);
            }
            std::vector<MapDescriptor> db;
            db.reserve(task.database.size());
            for (const std::string& id : task.database) {
                const auto it = db_slice.find(id);
                if (it != db_slice.end()) {
                    db.push_back(it->second);
                }
            }
            RankResult result = rank_imm(
                query, db, hybrid ? default_hmm_strategy() : default_imm_strategy());
            result.query_id = task.query_id;
            results.emplace_back(std::move(result), task.ground_truth);
        }
        if (results.empty()) {
            log_error("eval: no usable tasks for row " + label);
            partial = true;
            return;
        }
        if (hybrid) {
            hmm_results[label] = results;
        }
        reports.push_back(compute_anr(results, label));
        log_info("eval: " + label + " ANR " + format_score(reports.back().anr));
    };

    for (int k = 1; k <= args.k_max; ++k) {
        run_descriptor_row("imm_k" + std::to_string(k), k, false);
    }
    for (int k = 1; k <= args.k_max; ++k) {
        run_descriptor_row("hmm_k" + std::to_string(k), k, true);
    }

    // Rerank rows sit on top of hMM at K=3 (or k_max when smaller).
    const std::string base_label = "hmm_k" + std::to_string(std::min(3, args.k_max));
    const auto lookup_global = [&](const std::string& id) -> const PointSetMap* {
        const auto it = globals_by_id.find(id);
        return it == globals_by_id.end() ? nullptr : it->second;
    };
    for (const int r : args.rerank_rs) {
        const auto base_it = hmm_results.find(base_label);
        if (base_it == hmm_results.end()) {
            log_error("eval: missing base row " + base_label + " for rerank");
            partial = true;
            continue;
        }
        std::vector<std::pair<RankResult, std::string>> results;
        for (const auto& [base, ground_truth] : base_it->second) {
            const PointSetMap& query = *locals_by_id.at(base.query_id);
            results.emplace_back(rerank_cascade(base, query, lookup_global, r, dmm_cfg),
                                 ground_truth);
        }
        reports.push_back(compute_anr(results, "rerank_" + std::to_string(r)));
        log_info("eval: rerank_" + std::to_string(r) + " ANR " +
                 format_score(reports.back().anr));
    }

    // Space accounting over the K=3 (or k_max) database descriptors.
    std::vector<MapDescriptor> space_descriptors;
    const auto& space_slice = db_by_k[static_cast<std::size_t>(std::min(3, args.k_max))];
    for (const auto& [id, descriptor] : space_slice) {
        space_descriptors.push_back(descriptor);
    }
    const std::vector<SpaceRow> space_rows = space_report(space_descriptors, data.globals);

    // ---- reports ----
    fs::create_directories(args.out);
    std::string anr_csv = "label,anr,tasks\n";
    for (const AnrReport& report : reports) {
        anr_csv += report.label + "," + format_score(report.anr) + "," +
                   std::to_string(report.normalized_ranks.size()) + "\n";
    }
    write_text_file(args.out / "anr.csv", anr_csv);

    std::string histogram_csv = "label,edge,cumulative\n";
    for (const AnrReport& report : reports) {
        for (const HistogramBin& bin : report.histogram) {
            histogram_csv += report.label + "," + format_score(bin.fraction) + "," +
                             format_score(bin.cumulative) + "\n";
        }
    }
    write_text_file(args.out / "histogram.csv", histogram_csv);

    std::string space_csv = "map_id,descriptor_bits,raw_bits,ratio\n";
    double ratio_sum = 0.0;
    for (const SpaceRow& row : space_rows) {
        space_csv += row.map_id + "," + std::to_string(row.descriptor_bits) + "," +
                     std::to_string(row.raw_bits) + "," + format_score(row.ratio) + "\n";
        ratio_sum += row.ratio;
    }
    write_text_file(args.out / "space.csv", space_csv);

    ordered_json report_json;
    report_json["tasks"] = tasks.size();
    report_json["db_size"] = args.db_size;
    ordered_json anr_json;
    for (const AnrReport& report : reports) {
        anr_json[report.label] = report.anr;
    }
    report_json["anr"] = std::move(anr_json);
    ordered_json histogram_json;
    for (const AnrReport& report : reports) {
        ordered_json bins = ordered_json::array();
        for (const HistogramBin& bin : report.histogram) {
            bins.push_back(ordered_json{{"edge", bin.fraction}, {"cumulative", bin.cumulative}});
        }
        histogram_json[report.label] = std::move(bins);
    }
    report_json["histogram"] = std::move(histogram_json);
    report_json["space"] = ordered_json{
        {"maps", space_rows.size()},
        {"mean_ratio", space_rows.empty() ? 0.0 : ratio_sum / space_rows.size()}};

    if (args.timing) {
        // Mean per-pair descriptor-matching seconds at each K, measured over
        // the full task battery; timing lives behind a flag so default
        // reports stay byte-identical across runs.
        std::vector<int> k_values;
        for (int k = 1; k <= args.k_max; ++k) {
            k_values.push_back(k);
        }
        const auto per_pair_seconds = [&](int k) {
            const auto& db_slice = db_by_k[static_cast<std::size_t>(k)];
            double elapsed = 0.0;
            std::size_t pairs = 0;
            for (const MatchTask& task : tasks) {
                const auto pool_it = query_pools.find(task.query_id);
                if (pool_it == query_pools.end()) {
                    continue;
                }
                std::vector<MapDescriptor> db;
                for (const std::string& id : task.database) {
                    const auto it = db_slice.find(id);
                    if (it != db_slice.end()) {
                        db.push_back(it->second);
                    }
                }
                const RankResult result =
                    rank_imm(pool_it->second, db, default_hmm_strategy());
                elapsed += result.elapsed_seconds;
                pairs += db.size();
            }
            return pairs == 0 ? 0.0 : elapsed / static_cast<double>(pairs);
        };
        const TimingReport timing = timing_report(per_pair_seconds, k_values);
        std::string timing_csv = "k,per_pair_seconds\n";
        for (const TimingRow& row : timing.rows) {
            timing_csv +=
                std::to_string(row.k) + "," + format_score(row.per_pair_seconds) + "\n";
        }
        write_text_file(args.out / "timing.csv", timing_csv);
        report_json["timing"] =
            ordered_json{{"slope", timing.slope},
                         {"intercept", timing.intercept},
                         {"r_squared", timing.r_squared},
                         {"degenerate_fit", timing.degenerate_fit}};
    }

    write_text_file(args.out / "report.json", report_json.dump(2) + "\n");
    echo_run_config(sub, args.out);
    log_info("eval: wrote reports to " + args.out.string());
    return partial ? kExitPartial : kExitOk;
}

// ----------------------------------------------------------------- main ---

void add_cpd_options(CLI::App* sub, CpdConfig& cpd, std::string& rotation, std::string& gc) {
    sub->add_option("--samples", cpd.candidate_samples, "CPD candidate boxes per map");
    sub->add_option("--pool", cpd.pool_size, "CPD pool size");
    sub->add_option("--tsize", cpd.t_size, "maximality threshold T_size");
    sub->add_option("--proposals", cpd.descriptor_proposals,
                    "descriptor placement proposals per candidate");
    sub->add_option("--grid", cpd.grid_resolution, "occupancy grid resolution, meters");
    sub->add_option("--step", cpd.translation_step, "appearance search step, meters");
    sub->add_option("--rotation", rotation, "rotation search set: manhattan|free");
    sub->add_option("--gc", gc, "geometric-criteria mode: strict|off");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"part-based compact map description and 1-to-N matching"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value file");
    int workers = 0;
    app.add_option("--workers", workers, "worker threads (0 = library default)");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate the synthetic ring benchmark");
    synth->add_option("--out", synth_args.out, "output directory")->required();
    synth->add_option("--seed", synth_args.cfg.seed, "generator seed");
    synth->add_option("--noise", synth_args.cfg.noise_sigma, "point noise sigma, meters");
    synth->add_option("--world-width", synth_args.cfg.world_width, "outer wall width");
    synth->add_option("--world-height", synth_args.cfg.world_height, "outer wall height");
    synth->add_option("--corridor", synth_args.cfg.corridor_width, "corridor width");
    synth->add_option("--furniture", synth_args.cfg.furniture_count, "furniture boxes");
    synth->add_option("--window", synth_args.cfg.window, "submap travel window, meters");
    synth->add_option("--global-stride", synth_args.cfg.global_stride, "lap-1 stride");
    synth->add_option("--query-stride", synth_args.cfg.query_stride, "lap-2 stride");
    synth->add_option("--sensor-range", synth_args.cfg.sensor_range, "sensor range, meters");
    synth->add_option("--spacing", synth_args.cfg.point_spacing, "wall sampling pitch");

    BuildArgs build_args;
    CLI::App* build = app.add_subcommand("build", "build descriptor files for a map set");
    build->add_option("--maps", build_args.maps, "directory of .map files")->required();
    build->add_option("--dict", build_args.dict, "dictionary .map file")->required();
    build->add_option("--out", build_args.out, "output directory")->required();
    build->add_option("--k", build_args.ks, "descriptor sizes (repeat or comma-separate)")
        ->delimiter(',');
    build->add_option("--seed", build_args.cpd.seed, "CPD seed");
    add_cpd_options(build, build_args.cpd, build_args.rotation, build_args.gc);

    MatchArgs match_args;
    CLI::App* match = app.add_subcommand("match", "rank a database for one query");
    match->add_option("--scheme", match_args.scheme, "dmm|imm|hmm")->required();
    match->add_option("--query", match_args.query, "query file (.map or .desc)")->required();
    match->add_option("--db", match_args.db, "database directory")->required();
    match->add_option("--dict", match_args.dict, "dictionary .map (hmm)");
    match->add_option("--maps", match_args.maps, "original database maps (rerank)");
    match->add_option("--out", match_args.out, "output directory (default: stdout)");
    match->add_option("--strategy", match_args.strategy,
                      "max-max|sum-max|sum-max-weighted (default per scheme)");
    match->add_option("--rerank", match_args.rerank_r, "rerank cascade depth");
    match->add_option("--seed", match_args.seed, "matcher seed");
    match->add_option("--hypotheses", match_args.hypotheses, "dMM hypothesis count");
    add_cpd_options(match, match_args.cpd, match_args.rotation, match_args.gc);

    EvalArgs eval_args;
    eval_args.cpd.candidate_samples = 400;
    eval_args.cpd.descriptor_proposals = 24;
    CLI::App* eval = app.add_subcommand("eval", "run the ANR battery on a dataset");
    eval->add_option("--data", eval_args.data, "dataset directory (from synth)")->required();
    eval->add_option("--out", eval_args.out, "output directory")->required();
    eval->add_option("--seed", eval_args.seed, "evaluation seed");
    eval->add_option("--db-size", eval_args.db_size, "database size per task");
    eval->add_option("--k-max", eval_args.k_max, "largest descriptor size");
    eval->add_option("--rerank", eval_args.rerank_rs, "rerank depths")->delimiter(',');
    eval->add_option("--pose-radius", eval_args.pose_radius,
                     "exclusion radius around the query pose, meters");
    eval->add_option("--hypotheses", eval_args.hypotheses, "dMM hypothesis count");
    eval->add_flag("--timing", eval_args.timing, "measure and emit timing reports");
    add_cpd_options(eval, eval_args.cpd, eval_args.rotation, eval_args.gc);

    // Let app-level options (--workers, --config) appear after the subcommand.
    for (CLI::App* sub : {synth, build, match, eval}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    set_worker_count(workers);
    try {
        if (synth->parsed()) {
            return cmd_synth(synth_args, synth);
        }
        if (build->parsed()) {
            return cmd_build(std::move(build_args), build);
        }
        if (match->parsed()) {
            return cmd_match(std::move(match_args), match);
        }
        return cmd_eval(std::move(eval_args), eval);
    } catch (const UsageError& e) {
        log_error(e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        log_error(e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        log_error(e.what());
        return kExitData;
    }
}
