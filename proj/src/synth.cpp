#include "partmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "partmatch/rng.hpp"

namespace partmatch {

namespace {

// Truncated standard normal via Box-Muller; truncation keeps submap extents
// inside the descriptor codec's 12.7 m window.
double truncated_gauss(std::mt19937_64& rng) {
    const double u1 = std::max(uniform_unit(rng), 1e-12);
    const double u2 = uniform_unit(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return std::clamp(z, -2.5, 2.5);
}

// Perimeter points of an axis-aligned rectangle, each edge half-open so
// corners appear once.
void rect_perimeter(double x0, double y0, double x1, double y1, double spacing,
                    std::vector<Point2>& out) {
    const auto edge = [&](Point2 a, Point2 b) {
        const double length = std::hypot(b.x - a.x, b.y - a.y);
        const int steps = static_cast<int>(std::floor(length / spacing + 1e-9));
        for (int i = 0; i < steps; ++i) {
            const double t = static_cast<double>(i) * spacing / length;
            out.push_back(Point2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    };
    edge(Point2{x0, y0}, Point2{x1, y0});
    edge(Point2{x1, y0}, Point2{x1, y1});
    edge(Point2{x1, y1}, Point2{x0, y1});
    edge(Point2{x0, y1}, Point2{x0, y0});
}

void validate(const SynthConfig& cfg) {
    if (cfg.world_width <= 4.0 * cfg.corridor_width ||
        cfg.world_height <= 4.0 * cfg.corridor_width) {
        throw std::invalid_argument("synth: world too small for the corridor width");
    }
    if (cfg.corridor_width <= 0.0 || cfg.point_spacing <= 0.0 || cfg.sensor_range <= 0.0 ||
        cfg.window <= 0.0 || cfg.global_stride <= 0.0 || cfg.query_stride <= 0.0) {
        throw std::invalid_argument("synth: sizes must be positive");
    }
    if (cfg.noise_sigma < 0.0) {
        throw std::invalid_argument("synth: noise_sigma must be non-negative");
    }
    if (cfg.furniture_count < 0 || cfg.furniture_min_side <= 0.0 ||
        cfg.furniture_max_side < cfg.furniture_min_side) {
        throw std::invalid_argument("synth: bad furniture settings");
    }
    const double ratio = cfg.query_stride / cfg.global_stride;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw std::invalid_argument("synth: query_stride must be a multiple of global_stride");
    }
    const double laps = lap_length(cfg) / cfg.global_stride;
    if (std::abs(laps - std::round(laps)) > 1e-9) {
        throw std::invalid_argument("synth: global_stride must divide the lap length");
    }
}

// The static obstacle points of one world: wall rectangles plus seeded
// furniture boxes inside the corridor band.
std::vector<Point2> world_points(const SynthConfig& cfg, std::uint64_t seed) {
    std::vector<Point2> points;
    const double W = cfg.world_width;
    const double H = cfg.world_height;
    const double cw = cfg.corridor_width;
    rect_perimeter(0.0, 0.0, W, H, cfg.point_spacing, points);
    rect_perimeter(cw, cw, W - cw, H - cw, cfg.point_spacing, points);

    std::mt19937_64 rng(seed);
    const double margin = 0.5;
    int placed = 0;
    int attempts = 0;
    while (placed < cfg.furniture_count && attempts < cfg.furniture_count * 200) {
        ++attempts;
        const double cx = uniform_range(rng, margin, W - margin);
        const double cy = uniform_range(rng, margin, H - margin);
        // Reject centers inside the inner courtyard (furniture lives in the
        // corridor band only).
        if (cx > cw + margin && cx < W - cw - margin && cy > cw + margin &&
            cy < H - cw - margin) {
            continue;
        }
        const double side = uniform_range(rng, cfg.furniture_min_side, cfg.furniture_max_side);
        rect_perimeter(cx - side / 2.0, cy - side / 2.0, cx + side / 2.0, cy + side / 2.0,
                       cfg.point_spacing, points);
        ++placed;
    }
    return points;
}

// Position on the corridor centerline at a given travel distance (wraps
// around the loop).
Point2 centerline(const SynthConfig& cfg, double travel) {
    const double half = cfg.corridor_width / 2.0;
    const double x0 = half;
    const double y0 = half;
    const double x1 = cfg.world_width - half;
    const double y1 = cfg.world_height - half;
    const double lx = x1 - x0;
    const double ly = y1 - y0;
    const double lap = 2.0 * (lx + ly);
    double t = std::fmod(travel, lap);
    if (t < 0.0) {
        t += lap;
    }
    if (t < lx) {
        return Point2{x0 + t, y0};
    }
    t -= lx;
    if (t < ly) {
        return Point2{x1, y0 + t};
    }
    t -= ly;
    if (t < lx) {
        return Point2{x1 - t, y1};
    }
    t -= lx;
    return Point2{x0, y1 - t};
}

// World points within sensor range of any centerline sample of the window's
// arc. Enumeration order follows the fixed world-point order, so two windows
// at the same arc (different laps) yield identical point lists.
std::vector<Point2> window_points(const SynthConfig& cfg, const std::vector<Point2>& world,
                                  double arc_start) {
    std::vector<Point2> samples;
    const int steps = static_cast<int>(std::floor(cfg.window / cfg.point_spacing + 1e-9));
    samples.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) {
        samples.push_back(centerline(cfg, arc_start + static_cast<double>(i) * cfg.point_spacing));
    }
    const double r2 = cfg.sensor_range * cfg.sensor_range;
    std::vector<Point2> points;
    for (const Point2& w : world) {
        for (const Point2& s : samples) {
            const double dx = w.x - s.x;
            const double dy = w.y - s.y;
            if (dx * dx + dy * dy <= r2) {
                points.push_back(w);
                break;
            }
        }
    }
    return points;
}

Submap make_submap(const SynthConfig& cfg, const std::vector<Point2>& world,
                   const std::string& id, double arc_start, double travel_offset) {
    std::vector<Point2> points = window_points(cfg, world, arc_start);
    if (cfg.noise_sigma > 0.0) {
        std::mt19937_64 rng(mix_seed(cfg.seed, fnv1a(id)));
        for (Point2& p : points) {
            p.x += cfg.noise_sigma * truncated_gauss(rng);
            p.y += cfg.noise_sigma * truncated_gauss(rng);
        }
    }
    Submap submap;
    submap.map = make_point_set_map(id, std::move(points));
    Point2 centroid{0.0, 0.0};
    for (const Point2& p : submap.map.points) {
        centroid.x += p.x;
        centroid.y += p.y;
    }
    const double n = static_cast<double>(submap.map.points.size());
    submap.pose = Point2{centroid.x / n, centroid.y / n};
    submap.travel = travel_offset + arc_start + cfg.window / 2.0;
    return submap;
}

}  // namespace

double lap_length(const SynthConfig& cfg) {
    return 2.0 * ((cfg.world_width - cfg.corridor_width) +
                  (cfg.world_height - cfg.corridor_width));
}

SynthDataset generate_dataset(const SynthConfig& cfg) {
    validate(cfg);
    const std::vector<Point2> world = world_points(cfg, mix_seed(cfg.seed, fnv1a("world")));
    const std::vector<Point2> dict_world =
        world_points(cfg, mix_seed(cfg.seed, fnv1a("dictionary")));

    SynthDataset dataset;
    dataset.dictionary = make_point_set_map("dictionary", dict_world);

    const double lap = lap_length(cfg);
    const int global_count = static_cast<int>(std::llround(lap / cfg.global_stride));
    const int query_count = static_cast<int>(std::floor(lap / cfg.query_stride + 1e-9));
    const int twin_step = static_cast<int>(std::llround(cfg.query_stride / cfg.global_stride));

    char id[16];
    dataset.globals.reserve(static_cast<std::size_t>(global_count));
    for (int i = 0; i < global_count; ++i) {
        std::snprintf(id, sizeof(id), "g%03d", i);
        dataset.globals.push_back(
            make_submap(cfg, world, id, static_cast<double>(i) * cfg.global_stride, 0.0));
    }
    dataset.locals.reserve(static_cast<std::size_t>(query_count));
    for (int j = 0; j < query_count; ++j) {
        std::snprintf(id, sizeof(id), "q%03d", j);
        dataset.locals.push_back(
            make_submap(cfg, world, id, static_cast<double>(j) * cfg.query_stride, lap));
        dataset.relevant_pairs.emplace_back(dataset.locals.back().map.id,
                                            dataset.globals[static_cast<std::size_t>(
                                                                j * twin_step)].map.id);
    }
    return dataset;
}

void write_dataset(const SynthDataset& dataset, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "globals");
    fs::create_directories(dir / "locals");
    save_map(dataset.dictionary, dir / "dictionary.map");
    for (const Submap& submap : dataset.globals) {
        save_map(submap.map, dir / "globals" / (submap.map.id + ".map"));
    }
    for (const Submap& submap : dataset.locals) {
        save_map(submap.map, dir / "locals" / (submap.map.id + ".map"));
    }

    std::ofstream annotations(dir / "annotations.csv");
    if (!annotations) {
        throw std::runtime_error("cannot write " + (dir / "annotations.csv").string());
    }
    annotations << "id,x,y,travel\n";
    char row[128];
    const auto write_row = [&](const Submap& submap) {
        std::snprintf(row, sizeof(row), "%s,%.6f,%.6f,%.3f\n", submap.map.id.c_str(),
                      submap.pose.x, submap.pose.y, submap.travel);
        annotations << row;
    };
    for (const Submap& submap : dataset.globals) {
        write_row(submap);
    }
    for (const Submap& submap : dataset.locals) {
        write_row(submap);
    }
    if (!annotations) {
        throw std::runtime_error("failed while writing annotations");
    }

    std::ofstream pairs(dir / "pairs.csv");
    if (!pairs) {
        throw std::runtime_error("cannot write " + (dir / "pairs.csv").string());
    }
    pairs << "query_id,relevant_id\n";
    for (const auto& [query_id, relevant_id] : dataset.relevant_pairs) {
        pairs << query_id << "," << relevant_id << "\n";
    }
    if (!pairs) {
        throw std::runtime_error("failed while writing pairs");
    }
}

}  // namespace partmatch
