#include "varflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace varflow {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

double polyline_length(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    double len = 0.0;
    for (std::size_t i = 0; i < n; ++i) len += norm(pts[(i + 1) % n] - pts[i]);
    return len;
}

double signed_area(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 p = pts[i], q = pts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

ClosedCurve::ClosedCurve(std::vector<Vec2> pts) : pts_(std::move(pts)) {
    if (pts_.size() < kMinNodes)
        throw std::invalid_argument("ClosedCurve: need at least 8 nodes");
    for (const Vec2& p : pts_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("ClosedCurve: non-finite coordinates");
    const std::size_t n = pts_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (norm(pts_[(i + 1) % n] - pts_[i]) <= kMinSegment)
            throw std::invalid_argument("ClosedCurve: coincident consecutive points");
    if (signed_area(pts_) < 0.0)  // canonicalize to CCW, keeping node 0 first
        std::reverse(pts_.begin() + 1, pts_.end());
}

CurveGeometry geometry(const ClosedCurve& c) {
    const std::size_t n = c.size();
    CurveGeometry g;
    g.tangents.resize(n);
    g.normals.resize(n);
    g.curvature.resize(n);
    g.node_weights.resize(n);
    g.total_length = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 pm = c.prev(i), p = c.point(i), pp = c.next(i);
        const Vec2 e_in = p - pm, e_out = pp - p;
        const double l_in = norm(e_in), l_out = norm(e_out);
        if (l_in <= ClosedCurve::kMinSegment || l_out <= ClosedCurve::kMinSegment)
            throw std::invalid_argument("geometry: degenerate neighbors");

        const Vec2 chord = pp - pm;
        const double l_chord = norm(chord);
        Vec2 t = l_chord > 0.0 ? chord / l_chord : e_out / l_out;
        g.tangents[i] = t;
        g.normals[i] = {-t.y, t.x};  // +90 degrees: inward for CCW

        // Menger curvature (circumscribed circle through the three nodes),
        // signed positive where the CCW curve turns left.
        g.curvature[i] = 2.0 * cross(e_in, e_out) / (l_out * l_in * std::max(l_chord, 1e-300));

        g.node_weights[i] = 0.5 * (l_in + l_out);
        g.total_length += l_out;
    }
    return g;
}

double length(const ClosedCurve& c) { return polyline_length(c.points()); }

namespace {

// Cumulative arclength table: cum[i] = distance from node 0 to node i, plus
// the closing total at cum[n].
std::vector<double> cumulative_lengths(std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + norm(pts[(i + 1) % n] - pts[i]);
    return cum;
}

Vec2 point_at(std::span<const Vec2> pts, const std::vector<double>& cum, double s) {
    const std::size_t n = pts.size();
    const double total = cum[n];
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t seg = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
    seg = std::min(seg, n - 1);
    const double t = (s - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
    const Vec2 a = pts[seg], b = pts[(seg + 1) % n];
    return a + (b - a) * t;
}

}  // namespace

Vec2 point_at_arclength(std::span<const Vec2> pts, double s) {
    return point_at(pts, cumulative_lengths(pts), s);
}

ClosedCurve resample(const ClosedCurve& c, double target_spacing) {
    if (!(target_spacing > 0.0)) throw std::invalid_argument("resample: target_spacing must be > 0");
    const auto& pts = c.points();
    const auto cum = cumulative_lengths(pts);
    const double total = cum[pts.size()];
    const std::size_t m =
        std::max<std::size_t>(ClosedCurve::kMinNodes,
                              static_cast<std::size_t>(std::llround(total / target_spacing)));
    std::vector<Vec2> out(m);
    for (std::size_t k = 0; k < m; ++k) out[k] = point_at(pts, cum, total * k / m);
    return ClosedCurve(std::move(out));
}

ClosedCurve reparameterize(const ClosedCurve& c, const std::function<double(double)>& phi) {
    const auto& pts = c.points();
    const std::size_t n = pts.size();
    const auto cum = cumulative_lengths(pts);
    const double total = cum[n];

    if (std::abs(phi(0.0)) > 1e-9 || std::abs(phi(1.0) - 1.0) > 1e-9)
        throw std::invalid_argument("reparameterize: phi must map 0 -> 0 and 1 -> 1");

    // node i sits at normalized arclength cum[i]/total; it moves to phi of
    // that position, so the identity map leaves every node exactly in place
    std::vector<Vec2> out(n);
    double prev = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = phi(cum[i] / total);
        if (t <= prev) throw std::invalid_argument("reparameterize: phi must be strictly increasing");
        prev = t;
        out[i] = i == 0 ? pts[0] : point_at(pts, cum, total * t);
    }
    return ClosedCurve(std::move(out));
}

double distance_to_polyline(Vec2 p, std::span<const Vec2> pts) {
    const std::size_t n = pts.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i], b = pts[(i + 1) % n];
        const Vec2 ab = b - a;
        const double len2 = dot(ab, ab);
        double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, norm(p - (a + ab * t)));
    }
    return best;
}

}  // namespace varflow
