#include "partmatch/descriptor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "partmatch/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "descriptor files are little-endian; big-endian hosts are unsupported");

namespace partmatch {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr char kMagic[4] = {'P', 'S', 'L', 'M'};
constexpr int kFieldBits = 7;
constexpr long long kFieldMax = 127;
constexpr int kLatticeCells = 128;

// MSB-first bit stream writer; the final byte is zero-padded on the right.
class BitWriter {
public:
    void write_field(std::uint8_t value) {
        acc_ = (acc_ << kFieldBits) | (value & kFieldMax);
        bits_ += kFieldBits;
        while (bits_ >= 8) {
            bytes_.push_back(static_cast<std::uint8_t>((acc_ >> (bits_ - 8)) & 0xff));
            bits_ -= 8;
        }
    }

    std::vector<std::uint8_t> finish() {
        if (bits_ > 0) {
            bytes_.push_back(static_cast<std::uint8_t>((acc_ << (8 - bits_)) & 0xff));
            bits_ = 0;
        }
        return std::move(bytes_);
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t acc_ = 0;
    int bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint8_t read_field() {
        std::uint64_t value = 0;
        for (int i = 0; i < kFieldBits; ++i) {
            const std::size_t byte = cursor_ / 8;
            if (byte >= bytes_.size()) {
                throw CorruptRecordError("descriptor payload truncated");
            }
            const int bit = 7 - static_cast<int>(cursor_ % 8);
            value = (value << 1) | ((bytes_[byte] >> bit) & 1u);
            ++cursor_;
        }
        return static_cast<std::uint8_t>(value);
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t cursor_ = 0;
};

std::uint8_t quantize_keypoint(double value, double origin, double resolution,
                               const char* label) {
    const long long q = std::llround((value - origin) / resolution);
    if (q < 0 || q > kFieldMax) {
        throw std::range_error(std::string("pack_part: keypoint ") + label +
                               " outside the 12.7 m addressable window");
    }
    return static_cast<std::uint8_t>(q);
}

std::uint8_t quantize_lattice(double value, double begin, double end, const char* label) {
    if (value < begin || value > end) {
        throw std::range_error(std::string("pack_part: descriptor origin ") + label +
                               " outside the dictionary extent");
    }
    const double cell = (end - begin) / kLatticeCells;
    if (cell <= 0.0) {
        return 0;
    }
    const long long idx = static_cast<long long>(std::floor((value - begin) / cell));
    return static_cast<std::uint8_t>(std::clamp(idx, 0ll, kFieldMax));
}

void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void write_u16(std::ofstream& out, std::uint16_t value) { write_bytes(out, &value, 2); }
void write_f64(std::ofstream& out, double value) { write_bytes(out, &value, 8); }

void write_string(std::ofstream& out, const std::string& s) {
    if (s.size() > 0xffff) {
        throw std::invalid_argument("write_descriptor: id longer than 65535 bytes");
    }
    write_u16(out, static_cast<std::uint16_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

// Sequential reader over a fully buffered file; every overrun is corruption.
class FileReader {
public:
    explicit FileReader(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}

    void read(void* into, std::size_t size) {
        if (cursor_ + size > bytes_.size()) {
            throw CorruptRecordError("descriptor file truncated");
        }
        std::memcpy(into, bytes_.data() + cursor_, size);
        cursor_ += size;
    }

    std::uint8_t read_u8() {
        std::uint8_t v = 0;
        read(&v, 1);
        return v;
    }

    std::uint16_t read_u16() {
        std::uint16_t v = 0;
        read(&v, 2);
        return v;
    }

    double read_f64() {
        double v = 0.0;
        read(&v, 8);
        return v;
    }

    std::string read_string() {
        const std::uint16_t size = read_u16();
        std::string s(size, '\0');
        read(s.data(), size);
        return s;
    }

    std::vector<std::uint8_t> read_block(std::size_t size) {
        std::vector<std::uint8_t> block(size);
        read(block.data(), size);
        return block;
    }

    bool exhausted() const { return cursor_ == bytes_.size(); }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t cursor_ = 0;
};

}  // namespace

std::size_t payload_bytes(std::size_t k) { return (42 * k + 7) / 8; }

std::vector<Part> select_top_k(std::vector<Part> pool, int k) {
    if (pool.empty()) {
        throw std::invalid_argument("select_top_k: empty pool");
    }
    if (k < 1) {
        throw std::invalid_argument("select_top_k: k must be >= 1");
    }
    std::sort(pool.begin(), pool.end(), part_order);
    if (pool.size() > static_cast<std::size_t>(k)) {
        pool.resize(static_cast<std::size_t>(k));
    }
    return pool;
}

PackedPart pack_part(const Part& part, const DecodeContext& ctx) {
    if (ctx.local_resolution <= 0.0) {
        throw std::invalid_argument("pack_part: local_resolution must be positive");
    }
    PackedPart packed;
    packed.x_begin = quantize_keypoint(part.keypoint_bb.x_begin, ctx.local_origin.x,
                                       ctx.local_resolution, "x_begin");
    packed.x_end = quantize_keypoint(part.keypoint_bb.x_end, ctx.local_origin.x,
                                     ctx.local_resolution, "x_end");
    packed.y_begin = quantize_keypoint(part.keypoint_bb.y_begin, ctx.local_origin.y,
                                       ctx.local_resolution, "y_begin");
    packed.y_end = quantize_keypoint(part.keypoint_bb.y_end, ctx.local_origin.y,
                                     ctx.local_resolution, "y_end");
    packed.dict_x = quantize_lattice(part.descriptor_bb.x_begin, ctx.dict_extent.x_begin,
                                     ctx.dict_extent.x_end, "x");
    packed.dict_y = quantize_lattice(part.descriptor_bb.y_begin, ctx.dict_extent.y_begin,
                                     ctx.dict_extent.y_end, "y");
    return packed;
}

Part unpack_part(const PackedPart& packed, const DecodeContext& ctx) {
    const std::uint8_t fields[6] = {packed.x_begin, packed.x_end, packed.y_begin,
                                    packed.y_end,   packed.dict_x, packed.dict_y};
    for (std::uint8_t f : fields) {
        if (f > kFieldMax) {
            throw CorruptRecordError("unpack_part: field exceeds 7 bits");
        }
    }
    if (packed.x_begin > packed.x_end || packed.y_begin > packed.y_end) {
        throw CorruptRecordError("unpack_part: inverted keypoint box");
    }
    Part part;
    const double res = ctx.local_resolution;
    part.keypoint_bb.x_begin = ctx.local_origin.x + packed.x_begin * res;
    part.keypoint_bb.x_end = ctx.local_origin.x + packed.x_end * res;
    part.keypoint_bb.y_begin = ctx.local_origin.y + packed.y_begin * res;
    part.keypoint_bb.y_end = ctx.local_origin.y + packed.y_end * res;

    const double width = (packed.x_end - packed.x_begin) * res;
    const double height = (packed.y_end - packed.y_begin) * res;
    const double cell_w = ctx.dict_extent.width() / kLatticeCells;
    const double cell_h = ctx.dict_extent.height() / kLatticeCells;
    const double ox = ctx.dict_extent.x_begin + (packed.dict_x + 0.5) * cell_w;
    const double oy = ctx.dict_extent.y_begin + (packed.dict_y + 0.5) * cell_h;
    part.descriptor_bb = BBox{ox, ox + width, oy, oy + height};
    part.as_score.reset();
    return part;
}

std::vector<std::uint8_t> pack_payload(const std::vector<Part>& parts,
                                       const DecodeContext& ctx) {
    BitWriter writer;
    for (const Part& part : parts) {
        const PackedPart packed = pack_part(part, ctx);
        writer.write_field(packed.x_begin);
        writer.write_field(packed.x_end);
        writer.write_field(packed.y_begin);
        writer.write_field(packed.y_end);
        writer.write_field(packed.dict_x);
        writer.write_field(packed.dict_y);
    }
    return writer.finish();
}

std::vector<Part> unpack_payload(const std::vector<std::uint8_t>& payload, std::size_t k,
                                 const DecodeContext& ctx) {
    if (payload.size() != payload_bytes(k)) {
        throw CorruptRecordError("unpack_payload: payload size mismatch");
    }
    BitReader reader(payload);
    std::vector<Part> parts;
    parts.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        PackedPart packed;
        packed.x_begin = reader.read_field();
        packed.x_end = reader.read_field();
        packed.y_begin = reader.read_field();
        packed.y_end = reader.read_field();
        packed.dict_x = reader.read_field();
        packed.dict_y = reader.read_field();
        parts.push_back(unpack_part(packed, ctx));
    }
    return parts;
}

MapDescriptor build_descriptor(const PointSetMap& map, const PointSetMap& dictionary, int k,
                               const CpdConfig& cfg) {
    if (k < 1) {
        throw std::invalid_argument("build_descriptor: k must be >= 1");
    }
    MapDescriptor descriptor;
    descriptor.map_id = map.id;
    descriptor.dictionary_id = dictionary.id;
    descriptor.parts = select_top_k(discover_parts(map, dictionary, cfg), k);
    descriptor.context.local_origin = Point2{map.extent.x_begin, map.extent.y_begin};
    descriptor.context.local_resolution = cfg.grid_resolution;
    descriptor.context.dict_extent = dictionary.extent;
    return descriptor;
}

MapDescriptor build_query_pool(const PointSetMap& map, const PointSetMap& dictionary,
                               const CpdConfig& cfg) {
    CpdConfig pool_cfg = cfg;
    pool_cfg.pool_size = 100;
    pool_cfg.candidate_samples = std::max(cfg.candidate_samples, pool_cfg.pool_size);
    MapDescriptor descriptor;
    descriptor.map_id = map.id;
    descriptor.dictionary_id = dictionary.id;
    descriptor.parts = discover_parts(map, dictionary, pool_cfg);
    descriptor.context.local_origin = Point2{map.extent.x_begin, map.extent.y_begin};
    descriptor.context.local_resolution = pool_cfg.grid_resolution;
    descriptor.context.dict_extent = dictionary.extent;
    return descriptor;
}

void write_descriptor(const MapDescriptor& descriptor, const std::filesystem::path& path) {
    if (descriptor.parts.empty()) {
        throw std::invalid_argument("write_descriptor: descriptor has no parts");
    }
    if (descriptor.parts.size() > 0xffff) {
        throw std::invalid_argument("write_descriptor: too many parts");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write descriptor file " + path.string());
    }
    write_bytes(out, kMagic, 4);
    write_bytes(out, &kVersion, 1);
    write_string(out, descriptor.map_id);
    write_string(out, descriptor.dictionary_id);
    write_f64(out, descriptor.context.local_origin.x);
    write_f64(out, descriptor.context.local_origin.y);
    write_f64(out, descriptor.context.local_resolution);
    write_f64(out, descriptor.context.dict_extent.x_begin);
    write_f64(out, descriptor.context.dict_extent.x_end);
    write_f64(out, descriptor.context.dict_extent.y_begin);
    write_f64(out, descriptor.context.dict_extent.y_end);
    write_u16(out, static_cast<std::uint16_t>(descriptor.parts.size()));

    const std::vector<std::uint8_t> payload = pack_payload(descriptor.parts,
                                                           descriptor.context);
    write_bytes(out, payload.data(), payload.size());

    const bool with_scores = std::all_of(descriptor.parts.begin(), descriptor.parts.end(),
                                         [](const Part& p) { return p.as_score.has_value(); });
    const std::uint8_t flag = with_scores ? 1 : 0;
    write_bytes(out, &flag, 1);
    if (with_scores) {
        for (const Part& part : descriptor.parts) {
            const double clamped = std::clamp(*part.as_score, 0.0, 1.0);
            const std::uint8_t b = static_cast<std::uint8_t>(std::llround(clamped * 255.0));
            write_bytes(out, &b, 1);
        }
    }
    if (!out) {
        throw std::runtime_error("failed while writing descriptor file " + path.string());
    }
}

MapDescriptor read_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptRecordError("cannot open descriptor file " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    FileReader reader(std::move(bytes));

    char magic[4] = {};
    reader.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw CorruptRecordError(path.string() + ": bad magic");
    }
    if (reader.read_u8() != kVersion) {
        throw CorruptRecordError(path.string() + ": unsupported version");
    }
    MapDescriptor descriptor;
    descriptor.map_id = reader.read_string();
    descriptor.dictionary_id = reader.read_string();
    descriptor.context.local_origin.x = reader.read_f64();
    descriptor.context.local_origin.y = reader.read_f64();
    descriptor.context.local_resolution = reader.read_f64();
    descriptor.context.dict_extent.x_begin = reader.read_f64();
    descriptor.context.dict_extent.x_end = reader.read_f64();
    descriptor.context.dict_extent.y_begin = reader.read_f64();
    descriptor.context.dict_extent.y_end = reader.read_f64();
    const std::uint16_t k = reader.read_u16();
    if (k == 0) {
        throw CorruptRecordError(path.string() + ": zero parts");
    }
    const std::vector<std::uint8_t> payload = reader.read_block(payload_bytes(k));
    descriptor.parts = unpack_payload(payload, k, descriptor.context);

    const std::uint8_t flag = reader.read_u8();
    if (flag > 1) {
        throw CorruptRecordError(path.string() + ": bad score flag");
    }
    if (flag == 1) {
        for (Part& part : descriptor.parts) {
            part.as_score = static_cast<double>(reader.read_u8()) / 255.0;
        }
    }
    if (!reader.exhausted()) {
        throw CorruptRecordError(path.string() + ": trailing bytes");
    }
    return descriptor;
}

}  // namespace partmatch
