#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "partmatch/cpd.hpp"
#include "partmatch/geometry.hpp"

namespace partmatch {

/// One part quantized to 42 bits: four 7-bit keypoint-box edges (0.1 m steps
/// from the local origin) and a 7+7-bit descriptor-box origin on a 128x128
/// lattice spanning the dictionary extent. The descriptor box's end edges
/// are not stored; it shares the keypoint box's width and height.
struct PackedPart {
    std::uint8_t x_begin = 0;
    std::uint8_t x_end = 0;
    std::uint8_t y_begin = 0;
    std::uint8_t y_end = 0;
    std::uint8_t dict_x = 0;
    std::uint8_t dict_y = 0;
};

/// Everything needed to map packed fields back to meters.
struct DecodeContext {
    Point2 local_origin;            // min corner of the local map extent
    double local_resolution = 0.1;  // meters per keypoint quantization step
    BBox dict_extent;               // lattice span for descriptor origins
};

struct MapDescriptor {
    std::string map_id;
    std::string dictionary_id;
    std::vector<Part> parts;  // as_score-descending
    DecodeContext context;
};

/// Number of payload bytes for k packed parts: ceil(42k / 8).
std::size_t payload_bytes(std::size_t k);

/// First min(k, pool size) parts under part_order. The pool must already be
/// a CPD pool (scores present); it is re-sorted defensively.
std::vector<Part> select_top_k(std::vector<Part> pool, int k);

/// Quantizes a part. Keypoint edges round to the nearest 0.1 m step from
/// ctx.local_origin and must land in [0, 127] (a 12.7 m window) — outside
/// raises std::range_error. The descriptor origin floors to its lattice
/// cell and must lie inside ctx.dict_extent.
PackedPart pack_part(const Part& part, const DecodeContext& ctx);

/// Reconstructs a part from packed fields: keypoint edges at exact
/// quantization steps, descriptor origin at its lattice cell center, and the
/// descriptor box completed with the decoded keypoint width/height. The
/// score is not stored, so as_score is empty. Throws CorruptRecordError when
/// x_begin > x_end or y_begin > y_end.
Part unpack_part(const PackedPart& packed, const DecodeContext& ctx);

/// Concatenates parts MSB-first (field order: x_begin, x_end, y_begin,
/// y_end, dict_x, dict_y; 7 bits each), zero-padding the final byte.
std::vector<std::uint8_t> pack_payload(const std::vector<Part>& parts,
                                       const DecodeContext& ctx);
std::vector<Part> unpack_payload(const std::vector<std::uint8_t>& payload, std::size_t k,
                                 const DecodeContext& ctx);

/// Runs CPD and keeps the top k parts. The context records the map's extent
/// minimum as local origin, the CPD grid resolution, and the dictionary
/// extent.
MapDescriptor build_descriptor(const PointSetMap& map, const PointSetMap& dictionary, int k,
                               const CpdConfig& cfg);

/// The hMM query side: the full CPD pool (pool_size forced to 100) packaged
/// as a descriptor, scores included.
MapDescriptor build_query_pool(const PointSetMap& map, const PointSetMap& dictionary,
                               const CpdConfig& cfg);

/// Binary little-endian descriptor file:
///   magic "PSLM", version u8 (=1),
///   map_id, dictionary_id (u16 length + UTF-8 bytes each),
///   local_origin (2 f64), local_resolution (f64), dict_extent (4 f64),
///   K (u16), ceil(42K/8) payload bytes,
///   score flag (u8); if 1, K bytes of scores in 1/255 fixed point.
/// Writing quantizes parts through the codec; reading returns the decoded
/// (quantized) descriptor. Read errors raise CorruptRecordError.
void write_descriptor(const MapDescriptor& descriptor, const std::filesystem::path& path);
MapDescriptor read_descriptor(const std::filesystem::path& path);

}  // namespace partmatch
