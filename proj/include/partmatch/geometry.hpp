#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace partmatch {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box. Containment is closed on all four edges.
struct BBox {
    double x_begin = 0.0;
    double x_end = 0.0;
    double y_begin = 0.0;
    double y_end = 0.0;

    double width() const { return x_end - x_begin; }
    double height() const { return y_end - y_begin; }
    double area() const { return width() * height(); }
    bool empty() const { return width() <= 0.0 || height() <= 0.0; }

    bool contains(const Point2& p) const {
        return p.x >= x_begin && p.x <= x_end && p.y >= y_begin && p.y <= y_end;
    }
};

/// Intersection of two boxes. Disjoint inputs yield the canonical empty box
/// {0, 0, 0, 0} so that callers can compare against a single sentinel.
BBox bbox_overlap(const BBox& a, const BBox& b);

/// Rigid motion: rotate by `rotation` radians about the origin, then translate.
struct RigidTransform2 {
    double rotation = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    RigidTransform2 inverse() const;
};

Point2 apply_transform(const RigidTransform2& t, const Point2& p);

/// A 2D point-set map: the raw obstacle points plus a stable identifier.
struct PointSetMap {
    std::string id;
    std::vector<Point2> points;
    BBox extent;
};

BBox compute_extent(std::span<const Point2> points);

/// Validates and assembles a map: the id must be non-empty, the point set
/// non-empty, and every coordinate finite.
PointSetMap make_point_set_map(std::string id, std::vector<Point2> points);

enum class RotationMode { kManhattan4, kFreeAngle };

/// The rotation hypotheses searched for the given mode. Manhattan mode
/// returns the four axis-aligned angles; free mode returns 64 uniform steps.
std::vector<double> rotation_candidates(RotationMode mode);

/// Binary occupancy lookup over a uniform grid. Cells are half-open
/// [k*r, (k+1)*r) intervals; the origin is snapped to an integer multiple of
/// the resolution at or below the point-set minimum, with one cell of padding
/// on every side so boundary points never fall off the grid.
class OccupancyGrid {
public:
    OccupancyGrid(Point2 origin, double resolution, std::size_t width, std::size_t height);

    Point2 origin() const { return origin_; }
    double resolution() const { return resolution_; }
    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }

    void mark(std::size_t col, std::size_t row);
    bool cell(std::size_t col, std::size_t row) const;

    /// True iff `p` falls inside the grid and its cell is occupied.
    bool is_inlier(const Point2& p) const;

    std::size_t occupied_count() const;

private:
    Point2 origin_;
    double resolution_ = 0.0;
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<bool> occupied_;
};

/// Rasterizes a point set at the given resolution (default 0.1 m).
OccupancyGrid rasterize(std::span<const Point2> points, double resolution);

/// Number of points of `x` that land on occupied cells of `grid` after
/// applying `t`. This is the inner sum of the inlier-count similarity.
std::size_t inlier_count(std::span<const Point2> x, const RigidTransform2& t,
                         const OccupancyGrid& grid);

}  // namespace partmatch
