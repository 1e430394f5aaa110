#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "partmatch/geometry.hpp"
#include "partmatch/ingest.hpp"

namespace partmatch {

/// Benchmark world: a rectangular ring corridor (outer and inner wall
/// rectangles) cluttered with randomly placed axis-aligned furniture boxes,
/// traversed twice along the corridor centerline. Lap 1 windows become the
/// global (database) maps, lap 2 windows the local (query) maps, so every
/// query has an exactly travel-aligned twin one lap earlier — the planted
/// relevant pair. The dictionary is a second world drawn with a derived
/// seed: same architecture, different clutter.
struct SynthConfig {
    std::uint64_t seed = 1;
    double world_width = 32.0;    // outer wall rectangle, meters
    double world_height = 24.0;
    double corridor_width = 3.0;
    int furniture_count = 60;
    double furniture_min_side = 0.4;
    double furniture_max_side = 1.0;
    double point_spacing = 0.1;   // wall sampling pitch
    double noise_sigma = 0.08;    // per-coordinate, truncated at 2.5 sigma
    double sensor_range = 3.5;    // points within range of the window's arc
    double window = 4.0;          // meters of travel per submap
    double global_stride = 0.5;   // lap-1 window spacing
    double query_stride = 2.0;    // lap-2 window spacing; multiple of global_stride
};

struct SynthDataset {
    PointSetMap dictionary;
    std::vector<Submap> globals;  // ids g000, g001, ...
    std::vector<Submap> locals;   // ids q000, q001, ...
    // Ground truth by construction: (query id, its lap-1 twin's id).
    std::vector<std::pair<std::string, std::string>> relevant_pairs;
};

/// Centerline length of the ring: 2 * ((W - cw) + (H - cw)).
double lap_length(const SynthConfig& cfg);

/// Fully seed-determined dataset. Twin submaps are identical point sets when
/// noise_sigma is 0.
SynthDataset generate_dataset(const SynthConfig& cfg);

/// Layout written under `dir`:
///   dictionary.map, globals/<id>.map, locals/<id>.map,
///   annotations.csv (id,x,y,travel), pairs.csv (query_id,relevant_id).
void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir);

}  // namespace partmatch
