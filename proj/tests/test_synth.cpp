#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "partmatch/evaluation.hpp"
#include "partmatch/ingest.hpp"
#include "partmatch/synth.hpp"

using namespace partmatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("partmatch_synth_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("lap_length is the centerline perimeter") {
    SynthConfig cfg;
    CHECK(lap_length(cfg) == doctest::Approx(100.0).epsilon(1e-12));
    cfg.world_width = 20.0;
    cfg.world_height = 10.0;
    cfg.corridor_width = 2.0;
    CHECK(lap_length(cfg) == doctest::Approx(2.0 * (18.0 + 8.0)).epsilon(1e-12));
}

TEST_CASE("generate_dataset produces the advertised counts and pairing") {
    SynthConfig cfg;
    cfg.seed = 3;
    const SynthDataset data = generate_dataset(cfg);
    // Lap one at 0.5 m stride: 200 globals. Lap two at 2 m: 50 locals.
    CHECK(data.globals.size() == 200);
    CHECK(data.locals.size() == 50);
    CHECK(data.relevant_pairs.size() == 50);
    CHECK(data.globals[0].map.id == "g000");
    CHECK(data.locals[0].map.id == "q000");
    CHECK(!data.dictionary.points.empty());

    // Pair j: query q_j's travel is exactly one lap after its twin's.
    std::map<std::string, const Submap*> globals_by_id;
    for (const Submap& g : data.globals) {
        globals_by_id[g.map.id] = &g;
    }
    std::map<std::string, const Submap*> locals_by_id;
    for (const Submap& q : data.locals) {
        locals_by_id[q.map.id] = &q;
    }
    const double lap = lap_length(cfg);
    for (const auto& [query_id, twin_id] : data.relevant_pairs) {
        REQUIRE(locals_by_id.count(query_id) == 1);
        REQUIRE(globals_by_id.count(twin_id) == 1);
        const Submap* query = locals_by_id.at(query_id);
        const Submap* twin = globals_by_id.at(twin_id);
        CHECK(std::abs(query->travel - lap - twin->travel) < 1e-9);
        // Twins sit at the same pose up to noise.
        CHECK(std::hypot(query->pose.x - twin->pose.x, query->pose.y - twin->pose.y) < 0.5);
    }
}

TEST_CASE("noiseless twins are identical point sets") {
    SynthConfig cfg;
    cfg.seed = 11;
    cfg.noise_sigma = 0.0;
    const SynthDataset data = generate_dataset(cfg);
    std::map<std::string, const Submap*> globals_by_id;
    for (const Submap& g : data.globals) {
        globals_by_id[g.map.id] = &g;
    }
    REQUIRE(data.relevant_pairs.size() == data.locals.size());
    for (std::size_t j = 0; j < data.locals.size(); ++j) {
        const Submap& query = data.locals[j];
        CHECK(data.relevant_pairs[j].first == query.map.id);
        const Submap* twin = globals_by_id.at(data.relevant_pairs[j].second);
        REQUIRE(query.map.points.size() == twin->map.points.size());
        for (std::size_t i = 0; i < query.map.points.size(); ++i) {
            CHECK(query.map.points[i].x == twin->map.points[i].x);
            CHECK(query.map.points[i].y == twin->map.points[i].y);
        }
    }
}

TEST_CASE("submaps fit the descriptor codec window") {
    SynthConfig cfg;
    cfg.seed = 5;
    const SynthDataset data = generate_dataset(cfg);
    for (const auto* group : {&data.globals, &data.locals}) {
        for (const Submap& submap : *group) {
            CHECK(submap.map.extent.width() < 12.7);
            CHECK(submap.map.extent.height() < 12.7);
            CHECK(submap.map.points.size() >= 10);
        }
    }
}

TEST_CASE("planted pairs agree with pose-based relevance search") {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.noise_sigma = 0.0;
    const SynthDataset data = generate_dataset(cfg);
    // Combine each query with all globals and find loop-closing pairs the
    // generic way; every planted pair must be rediscovered.
    std::vector<std::pair<std::string, MapAnnotation>> maps;
    for (const Submap& g : data.globals) {
        maps.emplace_back(g.map.id, MapAnnotation{g.pose, g.travel});
    }
    for (const Submap& q : data.locals) {
        maps.emplace_back(q.map.id, MapAnnotation{q.pose, q.travel});
    }
    const auto pairs = find_relevant_pairs(maps, 1.0, 50.0);
    std::set<std::pair<std::string, std::string>> found(pairs.begin(), pairs.end());
    for (const auto& planted : data.relevant_pairs) {
        CHECK(found.count(planted) == 1);
    }
}

TEST_CASE("different seeds give different clutter, same architecture") {
    SynthConfig a_cfg;
    a_cfg.seed = 1;
    SynthConfig b_cfg;
    b_cfg.seed = 2;
    const SynthDataset a = generate_dataset(a_cfg);
    const SynthDataset b = generate_dataset(b_cfg);
    // Architecture (extent) is seed-independent.
    CHECK(a.dictionary.extent.x_end == doctest::Approx(b.dictionary.extent.x_end));
    CHECK(a.dictionary.extent.y_end == doctest::Approx(b.dictionary.extent.y_end));
    const auto differ = [](const PointSetMap& x, const PointSetMap& y) {
        if (x.points.size() != y.points.size()) {
            return true;
        }
        for (std::size_t i = 0; i < x.points.size(); ++i) {
            if (x.points[i].x != y.points[i].x || x.points[i].y != y.points[i].y) {
                return true;
            }
        }
        return false;
    };
    CHECK(differ(a.dictionary, b.dictionary));
    CHECK(differ(a.globals[0].map, b.globals[0].map));
}

TEST_CASE("generate_dataset validates its configuration") {
    SynthConfig cfg;
    cfg.corridor_width = 7.0;  // world_height 24 < 4 * 7
    CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.query_stride = 0.7;  // not a multiple of global_stride
    CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.global_stride = 0.3;  // does not divide the lap length
    CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.point_spacing = 0.0;
    CHECK_THROWS_AS(generate_dataset(cfg), std::invalid_argument);
}

TEST_CASE("write_dataset lays out files and is byte-deterministic") {
    SynthConfig cfg;
    cfg.seed = 9;
    // Shrink the world so the test stays fast.
    cfg.world_width = 16.0;
    cfg.world_height = 12.0;
    cfg.corridor_width = 2.0;
    cfg.furniture_count = 10;
    const SynthDataset data = generate_dataset(cfg);
    const fs::path dir_a = temp_dir();
    const fs::path dir_b = temp_dir();
    write_dataset(data, dir_a);
    write_dataset(generate_dataset(cfg), dir_b);

    CHECK(fs::exists(dir_a / "dictionary.map"));
    CHECK(fs::exists(dir_a / "annotations.csv"));
    CHECK(fs::exists(dir_a / "pairs.csv"));
    const auto globals = load_collection(dir_a / "globals");
    const auto locals = load_collection(dir_a / "locals");
    CHECK(globals.size() == data.globals.size());
    CHECK(locals.size() == data.locals.size());
    CHECK(globals[0].id == "g000");

    // Round-trip: the saved maps parse back bit-identically.
    const PointSetMap dict = load_map(dir_a / "dictionary.map");
    REQUIRE(dict.points.size() == data.dictionary.points.size());
    CHECK(dict.points[7].x == data.dictionary.points[7].x);

    for (const char* name : {"dictionary.map", "annotations.csv", "pairs.csv"}) {
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
    CHECK(slurp(dir_a / "globals" / "g000.map") == slurp(dir_b / "globals" / "g000.map"));
    CHECK(slurp(dir_a / "locals" / "q000.map") == slurp(dir_b / "locals" / "q000.map"));

    // annotations.csv holds one row per map plus a header.
    const std::string annotations = slurp(dir_a / "annotations.csv");
    const std::size_t rows =
        static_cast<std::size_t>(std::count(annotations.begin(), annotations.end(), '\n'));
    CHECK(rows == 1 + data.globals.size() + data.locals.size());
}

}  // TEST_SUITE
