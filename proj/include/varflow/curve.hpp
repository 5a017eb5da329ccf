#pragma once

// Closed planar curves with discrete differential geometry: tangents, inward
// normals, Menger curvature, the per-node arclength measure, resampling and
// reparameterization.

#include <functional>
#include <span>
#include <vector>

namespace varflow {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);

/// Perimeter of the closed polygon through `pts` (wraps last -> first).
double polyline_length(std::span<const Vec2> pts);

/// Shoelace area, positive for counter-clockwise orientation.
double signed_area(std::span<const Vec2> pts);

/// Cyclic ordered point sequence. Construction canonicalizes the orientation
/// to counter-clockwise and rejects curves with fewer than 8 nodes or with
/// coincident consecutive points.
class ClosedCurve {
public:
    static constexpr std::size_t kMinNodes = 8;
    static constexpr double kMinSegment = 1e-9;

    explicit ClosedCurve(std::vector<Vec2> pts);

    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec2>& points() const { return pts_; }
    Vec2 point(std::size_t i) const { return pts_[i]; }
    Vec2 prev(std::size_t i) const { return pts_[(i + pts_.size() - 1) % pts_.size()]; }
    Vec2 next(std::size_t i) const { return pts_[(i + 1) % pts_.size()]; }

private:
    std::vector<Vec2> pts_;
};

struct CurveGeometry {
    std::vector<Vec2> tangents;        // unit, centered difference
    std::vector<Vec2> normals;         // unit, inward for CCW orientation
    std::vector<double> curvature;     // 1/pixels, positive on convex CCW arcs
    std::vector<double> node_weights;  // discrete arclength measure ds per node
    double total_length = 0.0;
};

CurveGeometry geometry(const ClosedCurve& c);

double length(const ClosedCurve& c);

/// New curve with max(8, round(length/target_spacing)) nodes at equal
/// arclength intervals along the piecewise-linear input.
ClosedCurve resample(const ClosedCurve& c, double target_spacing);

/// Same geometric trace, node i placed at arclength fraction phi(i/n) of the
/// input. phi must be strictly increasing with phi(0)=0 and phi(1)=1.
ClosedCurve reparameterize(const ClosedCurve& c, const std::function<double(double)>& phi);

/// Point on the polygon at arclength s from node 0 (s taken mod perimeter).
Vec2 point_at_arclength(std::span<const Vec2> pts, double s);

/// Distance from p to the closed polygon through pts.
double distance_to_polyline(Vec2 p, std::span<const Vec2> pts);

}  // namespace varflow
