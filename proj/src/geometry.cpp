#include "partmatch/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace partmatch {

BBox bbox_overlap(const BBox& a, const BBox& b) {
    const double x0 = std::max(a.x_begin, b.x_begin);
    const double x1 = std::min(a.x_end, b.x_end);
    const double y0 = std::max(a.y_begin, b.y_begin);
    const double y1 = std::min(a.y_end, b.y_end);
    if (x1 <= x0 || y1 <= y0) {
        return BBox{0.0, 0.0, 0.0, 0.0};
    }
    return BBox{x0, x1, y0, y1};
}

RigidTransform2 RigidTransform2::inverse() const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    // Inverse rotates by -rotation and undoes the translation in the
    // rotated frame: p = R^T (q - t).
    return RigidTransform2{-rotation, -(c * tx + s * ty), -(-s * tx + c * ty)};
}

Point2 apply_transform(const RigidTransform2& t, const Point2& p) {
    const double c = std::cos(t.rotation);
    const double s = std::sin(t.rotation);
    return Point2{c * p.x - s * p.y + t.tx, s * p.x + c * p.y + t.ty};
}

BBox compute_extent(std::span<const Point2> points) {
    if (points.empty()) {
        throw std::invalid_argument("compute_extent: empty point set");
    }
    BBox box{points[0].x, points[0].x, points[0].y, points[0].y};
    for (const Point2& p : points) {
        box.x_begin = std::min(box.x_begin, p.x);
        box.x_end = std::max(box.x_end, p.x);
        box.y_begin = std::min(box.y_begin, p.y);
        box.y_end = std::max(box.y_end, p.y);
    }
    return box;
}

PointSetMap make_point_set_map(std::string id, std::vector<Point2> points) {
    if (id.empty()) {
        throw std::invalid_argument("make_point_set_map: empty id");
    }
    if (points.empty()) {
        throw std::invalid_argument("make_point_set_map: map '" + id + "' has no points");
    }
    for (const Point2& p : points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("make_point_set_map: non-finite coordinate in map '" +
                                        id + "'");
        }
    }
    PointSetMap map;
    map.id = std::move(id);
    map.points = std::move(points);
    map.extent = compute_extent(map.points);
    return map;
}

std::vector<double> rotation_candidates(RotationMode mode) {
    constexpr double pi = std::numbers::pi;
    if (mode == RotationMode::kManhattan4) {
        return {0.0, pi / 2.0, pi, 3.0 * pi / 2.0};
    }
    std::vector<double> angles;
    angles.reserve(64);
    for (int k = 0; k < 64; ++k) {
        angles.push_back(2.0 * pi * static_cast<double>(k) / 64.0);
    }
    return angles;
}

OccupancyGrid::OccupancyGrid(Point2 origin, double resolution, std::size_t width,
                             std::size_t height)
    : origin_(origin), resolution_(resolution), width_(width), height_(height),
      occupied_(width * height, false) {
    if (resolution <= 0.0) {
        throw std::invalid_argument("OccupancyGrid: resolution must be positive");
    }
    if (width == 0 || height == 0) {
        throw std::invalid_argument("OccupancyGrid: zero-sized grid");
    }
}

void OccupancyGrid::mark(std::size_t col, std::size_t row) {
    occupied_[row * width_ + col] = true;
}

bool OccupancyGrid::cell(std::size_t col, std::size_t row) const {
    return occupied_[row * width_ + col];
}

bool OccupancyGrid::is_inlier(const Point2& p) const {
    const double fx = std::floor((p.x - origin_.x) / resolution_);
    const double fy = std::floor((p.y - origin_.y) / resolution_);
    if (fx < 0.0 || fy < 0.0 || fx >= static_cast<double>(width_) ||
        fy >= static_cast<double>(height_)) {
        return false;
    }
    return cell(static_cast<std::size_t>(fx), static_cast<std::size_t>(fy));
}

std::size_t OccupancyGrid::occupied_count() const {
    return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), true));
}

OccupancyGrid rasterize(std::span<const Point2> points, double resolution) {
    if (resolution <= 0.0) {
        throw std::invalid_argument("rasterize: resolution must be positive");
    }
    const BBox extent = compute_extent(points);
    // Snap the origin to the resolution lattice below the extent so cell
    // boundaries are stable, then pad by one cell on every side.
    const double ox = (std::floor(extent.x_begin / resolution) - 1.0) * resolution;
    const double oy = (std::floor(extent.y_begin / resolution) - 1.0) * resolution;
    const std::size_t width =
        static_cast<std::size_t>(std::floor((extent.x_end - ox) / resolution)) + 2;
    const std::size_t height =
        static_cast<std::size_t>(std::floor((extent.y_end - oy) / resolution)) + 2;
    OccupancyGrid grid(Point2{ox, oy}, resolution, width, height);
    for (const Point2& p : points) {
        const std::size_t col = static_cast<std::size_t>(std::floor((p.x - ox) / resolution));
        const std::size_t row = static_cast<std::size_t>(std::floor((p.y - oy) / resolution));
        grid.mark(col, row);
    }
    return grid;
}

std::size_t inlier_count(std::span<const Point2> x, const RigidTransform2& t,
                         const OccupancyGrid& grid) {
    const double c = std::cos(t.rotation);
    const double s = std::sin(t.rotation);
    std::size_t count = 0;
    for (const Point2& p : x) {
        const Point2 q{c * p.x - s * p.y + t.tx, s * p.x + c * p.y + t.ty};
        if (grid.is_inlier(q)) {
            ++count;
        }
    }
    return count;
}

}  // namespace partmatch
