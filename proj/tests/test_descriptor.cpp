#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "partmatch/descriptor.hpp"
#include "partmatch/errors.hpp"
#include "partmatch/rng.hpp"

using namespace partmatch;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("partmatch_desc_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

DecodeContext square_context(double side) {
    DecodeContext ctx;
    ctx.local_origin = Point2{0.0, 0.0};
    ctx.local_resolution = 0.1;
    ctx.dict_extent = BBox{0.0, side, 0.0, side};
    return ctx;
}

Part scored_part(const BBox& kbb, const BBox& dbb, double score) {
    Part part;
    part.keypoint_bb = kbb;
    part.descriptor_bb = dbb;
    part.as_score = score;
    return part;
}

std::vector<std::uint8_t> file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

void corrupt_byte(const fs::path& path, std::size_t offset, std::uint8_t value) {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    io.seekp(static_cast<std::streamoff>(offset));
    io.put(static_cast<char>(value));
}

}  // namespace

TEST_SUITE("descriptor") {

TEST_CASE("payload_bytes is ceil(42k/8)") {
    CHECK(payload_bytes(0) == 0);
    CHECK(payload_bytes(1) == 6);   // 42 bits
    CHECK(payload_bytes(2) == 11);  // 84 bits
    CHECK(payload_bytes(3) == 16);  // 126 bits
    CHECK(payload_bytes(4) == 21);  // 168 bits
    for (std::size_t k = 1; k <= 16; ++k) {
        CHECK(payload_bytes(k) == (42 * k + 7) / 8);
    }
}

TEST_CASE("pack_part quantizes a known example") {
    const DecodeContext ctx = square_context(12.8);
    // Keypoint box [1.0, 3.0] x [0.0, 10.0]: steps 10, 30, 0, 100.
    // Descriptor origin (6.4, 3.2) on a 12.8-wide 128-lattice: cell 64, 32.
    const Part part =
        scored_part(BBox{1.0, 3.0, 0.0, 10.0}, BBox{6.4, 8.4, 3.2, 13.2}, 1.0);
    const PackedPart packed = pack_part(part, ctx);
    CHECK(packed.x_begin == 10);
    CHECK(packed.x_end == 30);
    CHECK(packed.y_begin == 0);
    CHECK(packed.y_end == 100);
    CHECK(packed.dict_x == 64);
    CHECK(packed.dict_y == 32);

    const Part back = unpack_part(packed, ctx);
    CHECK(back.keypoint_bb.x_begin == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(back.keypoint_bb.y_end == doctest::Approx(10.0).epsilon(1e-12));
    // Decoded descriptor origin sits at the lattice cell center.
    CHECK(back.descriptor_bb.x_begin == doctest::Approx(6.45).epsilon(1e-12));
    CHECK(back.descriptor_bb.y_begin == doctest::Approx(3.25).epsilon(1e-12));
    CHECK(back.descriptor_bb.width() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(back.descriptor_bb.height() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(!back.as_score.has_value());
}

TEST_CASE("pack_part rejects out-of-window boxes") {
    const DecodeContext ctx = square_context(12.8);
    // 12.8 m exceeds the 12.7 m keypoint window.
    CHECK_THROWS_AS(
        pack_part(scored_part(BBox{0.0, 12.8, 0.0, 1.0}, BBox{0.0, 12.8, 0.0, 1.0}, 0.5), ctx),
        std::range_error);
    // Negative coordinates fall outside the local window.
    CHECK_THROWS_AS(
        pack_part(scored_part(BBox{-0.3, 1.0, 0.0, 1.0}, BBox{0.0, 1.3, 0.0, 1.0}, 0.5), ctx),
        std::range_error);
    // Descriptor origin outside the dictionary extent.
    CHECK_THROWS_AS(
        pack_part(scored_part(BBox{0.0, 1.0, 0.0, 1.0}, BBox{-0.5, 0.5, 0.0, 1.0}, 0.5), ctx),
        std::range_error);
}

TEST_CASE("unpack_part rejects inverted boxes and large fields") {
    const DecodeContext ctx = square_context(12.8);
    PackedPart packed;
    packed.x_begin = 20;
    packed.x_end = 10;  // inverted
    packed.y_begin = 0;
    packed.y_end = 5;
    CHECK_THROWS_AS(unpack_part(packed, ctx), CorruptRecordError);
    packed.x_end = 200;  // beyond 7 bits
    CHECK_THROWS_AS(unpack_part(packed, ctx), CorruptRecordError);
}

TEST_CASE("pack_payload lays out 7-bit fields MSB-first") {
    const DecodeContext ctx = square_context(12.8);
    // One part with known field values: 10, 30, 0, 100, 64, 32.
    const Part part =
        scored_part(BBox{1.0, 3.0, 0.0, 10.0}, BBox{6.4, 8.4, 3.2, 13.2}, 1.0);
    const auto payload = pack_payload({part}, ctx);
    REQUIRE(payload.size() == 6);
    // Bit string: 0001010 0011110 0000000 1100100 1000000 0100000 + 000000 pad,
    // regrouped into bytes.
    const std::uint8_t expected[6] = {
        0b00010100, 0b01111000, 0b00000110, 0b01001000, 0b00001000, 0b00000000};
    for (int i = 0; i < 6; ++i) {
        CHECK(payload[static_cast<std::size_t>(i)] == expected[i]);
    }
    const auto parts = unpack_payload(payload, 1, ctx);
    REQUIRE(parts.size() == 1);
    CHECK(pack_part(parts[0], ctx).x_end == 30);
}

TEST_CASE("unpack_payload rejects truncated payloads") {
    const DecodeContext ctx = square_context(12.8);
    const Part part = scored_part(BBox{0.0, 1.0, 0.0, 1.0}, BBox{0.0, 1.0, 0.0, 1.0}, 0.5);
    auto payload = pack_payload({part, part}, ctx);
    payload.pop_back();
    CHECK_THROWS_AS(unpack_payload(payload, 2, ctx), CorruptRecordError);
}

TEST_CASE("codec round-trip bounds over random parts") {
    std::mt19937_64 rng(77);
    const DecodeContext ctx = square_context(11.0);
    const double cell = 11.0 / 128.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double x0 = uniform_range(rng, 0.0, 9.0);
        const double y0 = uniform_range(rng, 0.0, 9.0);
        const double w = uniform_range(rng, 0.3, 2.0);
        const double h = uniform_range(rng, 0.3, 2.0);
        const double dx = uniform_range(rng, 0.0, 11.0 - w);
        const double dy = uniform_range(rng, 0.0, 11.0 - h);
        const Part part = scored_part(BBox{x0, x0 + w, y0, y0 + h},
                                      BBox{dx, dx + w, dy, dy + h}, 0.5);
        const Part back = unpack_part(pack_part(part, ctx), ctx);
        // Keypoint edges round to 0.1 m steps: error at most 0.05 m.
        CHECK(std::abs(back.keypoint_bb.x_begin - part.keypoint_bb.x_begin) <= 0.05 + 1e-12);
        CHECK(std::abs(back.keypoint_bb.x_end - part.keypoint_bb.x_end) <= 0.05 + 1e-12);
        CHECK(std::abs(back.keypoint_bb.y_begin - part.keypoint_bb.y_begin) <= 0.05 + 1e-12);
        CHECK(std::abs(back.keypoint_bb.y_end - part.keypoint_bb.y_end) <= 0.05 + 1e-12);
        // Descriptor origin lands at its cell center: error at most half a cell.
        CHECK(std::abs(back.descriptor_bb.x_begin - part.descriptor_bb.x_begin) <=
              cell / 2.0 + 1e-12);
        CHECK(std::abs(back.descriptor_bb.y_begin - part.descriptor_bb.y_begin) <=
              cell / 2.0 + 1e-12);
        // Quantization is idempotent: a decoded part re-encodes identically.
        const PackedPart again = pack_part(back, ctx);
        const PackedPart first = pack_part(part, ctx);
        CHECK(again.x_begin == first.x_begin);
        CHECK(again.x_end == first.x_end);
        CHECK(again.y_begin == first.y_begin);
        CHECK(again.y_end == first.y_end);
        CHECK(again.dict_x == first.dict_x);
        CHECK(again.dict_y == first.dict_y);
    }
}

TEST_CASE("select_top_k reorders and truncates") {
    std::vector<Part> pool;
    pool.push_back(scored_part(BBox{0.0, 1.0, 0.0, 1.0}, BBox{0.0, 1.0, 0.0, 1.0}, 0.3));
    pool.push_back(scored_part(BBox{1.0, 2.0, 0.0, 1.0}, BBox{1.0, 2.0, 0.0, 1.0}, 0.9));
    pool.push_back(scored_part(BBox{2.0, 3.0, 0.0, 1.0}, BBox{2.0, 3.0, 0.0, 1.0}, 0.6));
    const auto top2 = select_top_k(pool, 2);
    REQUIRE(top2.size() == 2);
    CHECK(*top2[0].as_score == 0.9);
    CHECK(*top2[1].as_score == 0.6);
    const auto top9 = select_top_k(pool, 9);
    CHECK(top9.size() == 3);
}

TEST_CASE("descriptor file round-trip preserves the quantized pool") {
    const fs::path dir = temp_dir();
    const DecodeContext ctx = square_context(11.0);
    MapDescriptor descriptor;
    descriptor.map_id = "fr101_007";
    descriptor.dictionary_id = "fr079";
    descriptor.context = ctx;
    std::mt19937_64 rng(31);
    for (int i = 0; i < 5; ++i) {
        const double x0 = uniform_range(rng, 0.0, 8.0);
        const double w = uniform_range(rng, 0.5, 2.0);
        descriptor.parts.push_back(scored_part(BBox{x0, x0 + w, 1.0, 2.5},
                                               BBox{x0, x0 + w, 1.0, 2.5},
                                               1.0 - 0.1 * i));
    }
    const fs::path path = dir / "d.desc";
    write_descriptor(descriptor, path);
    CHECK(fs::file_size(path) >=
          4 + 1 + 2 + descriptor.map_id.size() + 2 + descriptor.dictionary_id.size() +
              7 * 8 + 2 + payload_bytes(5) + 1 + 5);

    const MapDescriptor back = read_descriptor(path);
    CHECK(back.map_id == descriptor.map_id);
    CHECK(back.dictionary_id == descriptor.dictionary_id);
    CHECK(back.context.local_origin.x == ctx.local_origin.x);
    CHECK(back.context.local_resolution == ctx.local_resolution);
    CHECK(back.context.dict_extent.x_end == ctx.dict_extent.x_end);
    REQUIRE(back.parts.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const Part want = unpack_part(pack_part(descriptor.parts[i], ctx), ctx);
        CHECK(back.parts[i].keypoint_bb.x_begin == want.keypoint_bb.x_begin);
        CHECK(back.parts[i].keypoint_bb.x_end == want.keypoint_bb.x_end);
        CHECK(back.parts[i].descriptor_bb.x_begin == want.descriptor_bb.x_begin);
        CHECK(back.parts[i].descriptor_bb.y_begin == want.descriptor_bb.y_begin);
        // Scores survive at 1/255 resolution.
        REQUIRE(back.parts[i].as_score.has_value());
        CHECK(std::abs(*back.parts[i].as_score - *descriptor.parts[i].as_score) <=
              0.5 / 255.0 + 1e-12);
    }

    // Writing the decoded descriptor again is byte-stable (quantization is
    // idempotent), except scores already sit on the 1/255 lattice.
    const fs::path path2 = dir / "d2.desc";
    write_descriptor(back, path2);
    CHECK(file_bytes(path) == file_bytes(path2));
}

TEST_CASE("read_descriptor rejects corruption everywhere it can") {
    const fs::path dir = temp_dir();
    const DecodeContext ctx = square_context(11.0);
    MapDescriptor descriptor;
    descriptor.map_id = "m";
    descriptor.dictionary_id = "d";
    descriptor.context = ctx;
    descriptor.parts.push_back(
        scored_part(BBox{1.0, 2.0, 1.0, 2.0}, BBox{1.0, 2.0, 1.0, 2.0}, 0.8));
    const fs::path path = dir / "ok.desc";
    write_descriptor(descriptor, path);
    REQUIRE_NOTHROW(read_descriptor(path));
    const auto original = file_bytes(path);

    SUBCASE("bad magic") {
        corrupt_byte(path, 0, 'X');
        CHECK_THROWS_AS(read_descriptor(path), CorruptRecordError);
    }
    SUBCASE("bad version") {
        corrupt_byte(path, 4, 9);
        CHECK_THROWS_AS(read_descriptor(path), CorruptRecordError);
    }
    SUBCASE("truncated file") {
        fs::resize_file(path, original.size() - 3);
        CHECK_THROWS_AS(read_descriptor(path), CorruptRecordError);
    }
    SUBCASE("trailing garbage") {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out.put('z');
        out.close();
        CHECK_THROWS_AS(read_descriptor(path), CorruptRecordError);
    }
    SUBCASE("id length overrunning the file") {
        corrupt_byte(path, 5, 0xFF);
        CHECK_THROWS_AS(read_descriptor(path), CorruptRecordError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_descriptor(dir / "nope.desc"), CorruptRecordError);
    }
}

TEST_CASE("build_descriptor records context and respects k") {
    std::vector<Point2> map_pts;
    std::vector<Point2> dict_pts;
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 30; ++j) {
            map_pts.push_back(Point2{0.1 * i + 0.05, 0.1 * j + 0.05});
            dict_pts.push_back(Point2{0.1 * i + 0.05, 0.1 * j + 0.05});
        }
    }
    const PointSetMap map = make_point_set_map("local", std::move(map_pts));
    const PointSetMap dict = make_point_set_map("dict", std::move(dict_pts));
    CpdConfig cfg;
    cfg.candidate_samples = 256;
    cfg.pool_size = 16;
    cfg.descriptor_proposals = 4;
    cfg.t_size = 0.5;
    cfg.seed = 5;
    const MapDescriptor d3 = build_descriptor(map, dict, 3, cfg);
    CHECK(d3.map_id == "local");
    CHECK(d3.dictionary_id == "dict");
    CHECK(d3.parts.size() == 3);
    CHECK(d3.context.local_origin.x == map.extent.x_begin);
    CHECK(d3.context.dict_extent.x_end == dict.extent.x_end);
    CHECK(std::is_sorted(d3.parts.begin(), d3.parts.end(), part_order));

    const MapDescriptor d1 = build_descriptor(map, dict, 1, cfg);
    REQUIRE(d1.parts.size() == 1);
    // The single part is the same top part.
    CHECK(d1.parts[0].keypoint_bb.x_begin == d3.parts[0].keypoint_bb.x_begin);
    CHECK(*d1.parts[0].as_score == *d3.parts[0].as_score);

    CHECK_THROWS_AS(build_descriptor(map, dict, 0, cfg), std::invalid_argument);
}

TEST_CASE("build_query_pool returns the full scored pool") {
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 40; ++j) {
            pts.push_back(Point2{0.1 * i + 0.05, 0.1 * j + 0.05});
        }
    }
    const PointSetMap map = make_point_set_map("q", std::move(pts));
    CpdConfig cfg;
    cfg.candidate_samples = 600;
    cfg.descriptor_proposals = 4;
    cfg.t_size = 0.5;
    cfg.seed = 9;
    const MapDescriptor pool = build_query_pool(map, map, cfg);
    CHECK(pool.parts.size() <= 100);
    CHECK(pool.parts.size() > 10);
    for (const Part& part : pool.parts) {
        CHECK(part.as_score.has_value());
    }
}

TEST_CASE("descriptor build is deterministic on disk") {
    std::vector<Point2> pts;
    for (int i = 0; i < 25; ++i) {
        for (int j = 0; j < 25; ++j) {
            pts.push_back(Point2{0.1 * i + 0.05, 0.1 * j + 0.05});
        }
    }
    const PointSetMap map = make_point_set_map("m", std::move(pts));
    CpdConfig cfg;
    cfg.candidate_samples = 128;
    cfg.pool_size = 8;
    cfg.descriptor_proposals = 4;
    cfg.t_size = 0.5;
    cfg.seed = 14;
    const fs::path dir = temp_dir();
    write_descriptor(build_descriptor(map, map, 4, cfg), dir / "a.desc");
    write_descriptor(build_descriptor(map, map, 4, cfg), dir / "b.desc");
    CHECK(file_bytes(dir / "a.desc") == file_bytes(dir / "b.desc"));
}

}  // TEST_SUITE
