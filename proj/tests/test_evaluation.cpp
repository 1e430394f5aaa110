#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "partmatch/evaluation.hpp"
#include "partmatch/rng.hpp"

using namespace partmatch;

namespace {

RankResult ranked(const std::string& query_id, const std::vector<ScoredMap>& entries) {
    RankResult r;
    r.query_id = query_id;
    r.entries = entries;
    return r;
}

MapAnnotation at(double x, double y, double travel) {
    return MapAnnotation{Point2{x, y}, travel};
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("find_relevant_pairs wants near poses and far travel") {
    std::vector<std::pair<std::string, MapAnnotation>> maps;
    maps.emplace_back("a", at(0.0, 0.0, 0.0));
    maps.emplace_back("b", at(0.5, 0.0, 50.0));   // near a, far along route
    maps.emplace_back("c", at(0.6, 0.0, 51.0));   // near b in space AND travel
    maps.emplace_back("d", at(40.0, 0.0, 25.0));  // far from everything
    const auto pairs = find_relevant_pairs(maps, 2.0, 10.0);
    std::set<std::pair<std::string, std::string>> got(pairs.begin(), pairs.end());
    // a<->b and a<->c qualify in both directions; b<->c fails the travel gap;
    // d pairs with nobody.
    const std::set<std::pair<std::string, std::string>> want{
        {"a", "b"}, {"b", "a"}, {"a", "c"}, {"c", "a"}};
    CHECK(got == want);
    CHECK(pairs.size() == 4);

    CHECK_THROWS_AS(find_relevant_pairs(maps, -1.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(find_relevant_pairs(maps, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("compute_anr on a hand-ranked task set") {
    // Ground truth at rank 5 of 20 entries: normalized rank 25.
    std::vector<ScoredMap> entries;
    for (int i = 0; i < 20; ++i) {
        entries.push_back(ScoredMap{"m_" + std::to_string(i), 20.0 - i});
    }
    std::vector<std::pair<RankResult, std::string>> results;
    results.emplace_back(ranked("q0", entries), "m_4");
    const AnrReport report = compute_anr(results, "demo");
    CHECK(report.label == "demo");
    REQUIRE(report.normalized_ranks.size() == 1);
    CHECK(report.normalized_ranks[0] == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(report.anr == doctest::Approx(25.0).epsilon(1e-12));

    // Histogram: 20 cumulative bins at 5% steps; everything below 25% only
    // from bin edge 25 onward.
    REQUIRE(report.histogram.size() == 20);
    CHECK(report.histogram[0].fraction == doctest::Approx(5.0));
    CHECK(report.histogram[19].fraction == doctest::Approx(100.0));
    CHECK(report.histogram[3].cumulative == 0.0);   // edge 20%
    CHECK(report.histogram[4].cumulative == 1.0);   // edge 25%
    CHECK(report.histogram[19].cumulative == 1.0);
    for (std::size_t i = 1; i < report.histogram.size(); ++i) {
        CHECK(report.histogram[i].cumulative >= report.histogram[i - 1].cumulative);
    }
}

TEST_CASE("compute_anr averages multiple tasks and validates ground truth") {
    std::vector<ScoredMap> entries;
    for (int i = 0; i < 10; ++i) {
        entries.push_back(ScoredMap{"m_" + std::to_string(i), 10.0 - i});
    }
    std::vector<std::pair<RankResult, std::string>> results;
    results.emplace_back(ranked("q0", entries), "m_0");  // rank 1 -> 10
    results.emplace_back(ranked("q1", entries), "m_9");  // rank 10 -> 100
    const AnrReport report = compute_anr(results, "avg");
    CHECK(report.anr == doctest::Approx(55.0).epsilon(1e-12));

    results.emplace_back(ranked("q2", entries), "absent");
    CHECK_THROWS_AS(compute_anr(results, "bad"), std::invalid_argument);
    CHECK_THROWS_AS(compute_anr({}, "empty"), std::invalid_argument);
}

TEST_CASE("random scoring concentrates ANR near 50") {
    // Monte Carlo over 400 tasks with N = 50: the mean normalized rank of a
    // uniformly random ground-truth position is 51 (=100*(N+1)/2N), with
    // standard error ~1.4, so [45, 57] is a >4-sigma window.
    std::mt19937_64 rng(97);
    std::vector<std::pair<RankResult, std::string>> results;
    for (int t = 0; t < 400; ++t) {
        std::vector<ScoredMap> entries;
        for (int i = 0; i < 50; ++i) {
            entries.push_back(ScoredMap{"m_" + std::to_string(i), uniform_unit(rng)});
        }
        std::sort(entries.begin(), entries.end(),
                  [](const ScoredMap& a, const ScoredMap& b) { return a.score > b.score; });
        results.emplace_back(ranked("q", entries), "m_7");
    }
    const AnrReport report = compute_anr(results, "random");
    CHECK(report.anr > 45.0);
    CHECK(report.anr < 57.0);
}

TEST_CASE("timing_report fits an exact line") {
    const auto linear = [](int k) { return 2.0 * k + 1.0; };
    const TimingReport report = timing_report(linear, {1, 2, 3, 4, 5});
    REQUIRE(report.rows.size() == 5);
    CHECK(report.rows[0].k == 1);
    CHECK(report.rows[0].per_pair_seconds == doctest::Approx(3.0));
    CHECK(report.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(!report.degenerate_fit);
}

TEST_CASE("timing_report handles degenerate inputs") {
    const auto constant = [](int) { return 4.0; };
    // All k equal: no slope is identifiable.
    const TimingReport degenerate = timing_report(constant, {3, 3, 3});
    CHECK(degenerate.degenerate_fit);
    // Constant times over distinct k still fit (slope 0, perfect fit).
    const TimingReport flat = timing_report(constant, {1, 2, 3});
    CHECK(!flat.degenerate_fit);
    CHECK(flat.slope == doctest::Approx(0.0));
    CHECK(flat.r_squared == doctest::Approx(1.0));

    CHECK_THROWS_AS(timing_report(constant, {1}), std::invalid_argument);
    CHECK_THROWS_AS(timing_report(constant, {}), std::invalid_argument);
}

TEST_CASE("space_report accounts bits per map") {
    MapDescriptor d1;
    d1.map_id = "beta";
    d1.dictionary_id = "dict";
    Part part;
    part.keypoint_bb = BBox{0.0, 1.0, 0.0, 1.0};
    part.descriptor_bb = part.keypoint_bb;
    part.as_score = 1.0;
    d1.parts = {part, part, part};  // K = 3
    MapDescriptor d2 = d1;
    d2.map_id = "alpha";
    d2.parts = {part};  // K = 1

    std::vector<PointSetMap> originals;
    std::vector<Point2> pts(200, Point2{1.0, 1.0});
    originals.push_back(make_point_set_map("beta", pts));
    originals.push_back(make_point_set_map("alpha", std::vector<Point2>(50, Point2{0.5, 0.5})));

    const auto rows = space_report({d1, d2}, originals);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].map_id == "alpha");  // sorted by id
    CHECK(rows[0].descriptor_bits == 42);
    CHECK(rows[0].raw_bits == 14 * 50);
    CHECK(rows[0].ratio == doctest::Approx(700.0 / 42.0).epsilon(1e-12));
    CHECK(rows[1].map_id == "beta");
    CHECK(rows[1].descriptor_bits == 126);
    CHECK(rows[1].raw_bits == 2800);
    CHECK(rows[1].ratio == doctest::Approx(2800.0 / 126.0).epsilon(1e-12));

    const auto missing = std::vector<PointSetMap>{originals[0]};
    CHECK_THROWS_AS(space_report({d1, d2}, missing), std::invalid_argument);
}

TEST_CASE("build_tasks samples fair negatives deterministically") {
    // Queries sit at the origin; globals g_00..g_29 along a line, the first
    // three within the 5 m exclusion radius.
    std::map<std::string, MapAnnotation> queries;
    queries["q_a"] = at(0.0, 0.0, 10.0);
    queries["q_b"] = at(1.0, 0.0, 30.0);
    std::map<std::string, MapAnnotation> globals;
    for (int i = 0; i < 30; ++i) {
        const std::string id = (i < 10 ? "g_0" : "g_") + std::to_string(i);
        globals[id] = at(2.0 * i, 0.0, 2.0 * i);
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.emplace_back("q_a", "g_05");
    pairs.emplace_back("q_b", "g_12");

    const auto tasks = build_tasks(pairs, queries, globals, 10, 5.0, 42);
    REQUIRE(tasks.size() == 2);
    for (const MatchTask& task : tasks) {
        CHECK(task.database.size() == 10);
        // Exactly one relevant entry, present exactly once.
        CHECK(std::count(task.database.begin(), task.database.end(), task.ground_truth) == 1);
        // No duplicates.
        std::set<std::string> unique(task.database.begin(), task.database.end());
        CHECK(unique.size() == task.database.size());
        // Database is sorted for determinism.
        CHECK(std::is_sorted(task.database.begin(), task.database.end()));
    }
    CHECK(tasks[0].query_id == "q_a");
    CHECK(tasks[0].ground_truth == "g_05");
    // Globals g_00..g_02 lie within 5 m of q_a's pose: excluded as negatives.
    for (const std::string near_id : {"g_00", "g_01", "g_02"}) {
        if (near_id != tasks[0].ground_truth) {
            CHECK(std::count(tasks[0].database.begin(), tasks[0].database.end(), near_id) == 0);
        }
    }

    // Same seed reproduces; the sampling is per pair, so dropping the first
    // pair does not change the second task.
    const auto again = build_tasks(pairs, queries, globals, 10, 5.0, 42);
    CHECK(again[0].database == tasks[0].database);
    CHECK(again[1].database == tasks[1].database);
    const auto only_second = build_tasks({pairs[1]}, queries, globals, 10, 5.0, 42);
    REQUIRE(only_second.size() == 1);
    CHECK(only_second[0].database == tasks[1].database);
    // A different seed draws different negatives.
    const auto reseeded = build_tasks(pairs, queries, globals, 10, 5.0, 43);
    CHECK(reseeded[0].database != tasks[0].database);
}

TEST_CASE("build_tasks validates inputs") {
    std::map<std::string, MapAnnotation> queries;
    queries["q"] = at(0.0, 0.0, 0.0);
    std::map<std::string, MapAnnotation> globals;
    globals["g_0"] = at(10.0, 0.0, 5.0);
    globals["g_1"] = at(20.0, 0.0, 10.0);
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.emplace_back("q", "g_0");

    // n larger than the eligible negatives plus the relevant map.
    CHECK_THROWS_AS(build_tasks(pairs, queries, globals, 5, 1.0, 1), std::invalid_argument);
    // n < 2 cannot hold a relevant and an irrelevant entry.
    CHECK_THROWS_AS(build_tasks(pairs, queries, globals, 1, 1.0, 1), std::invalid_argument);
    // Unknown ids.
    std::vector<std::pair<std::string, std::string>> bad_query;
    bad_query.emplace_back("nope", "g_0");
    CHECK_THROWS_AS(build_tasks(bad_query, queries, globals, 2, 1.0, 1), std::invalid_argument);
    std::vector<std::pair<std::string, std::string>> bad_relevant;
    bad_relevant.emplace_back("q", "nope");
    CHECK_THROWS_AS(build_tasks(bad_relevant, queries, globals, 2, 1.0, 1),
                    std::invalid_argument);

    // Exactly enough eligible maps works: g_1 is the only negative.
    const auto tasks = build_tasks(pairs, queries, globals, 2, 1.0, 1);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].database.size() == 2);
}

}  // TEST_SUITE
