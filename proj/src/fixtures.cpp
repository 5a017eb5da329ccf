#include "varflow/fixtures.hpp"

#include <cmath>
#include <numbers>

namespace varflow {

double Rng::uniform() {
    // 53-bit mantissa from the top bits of the 64-bit state
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
}

ScalarField disk_image(const GridSpec& spec, double cx, double cy, double r, double fg, double bg) {
    ScalarField out(spec);
    for (int y = 0; y < spec.ny; ++y)
        for (int x = 0; x < spec.nx; ++x) {
            const double d = std::hypot(x * spec.hx - cx, y * spec.hy - cy);
            out.at(x, y) = d <= r ? fg : bg;
        }
    return out;
}

ScalarField noisy_disk_image(const GridSpec& spec, double cx, double cy, double r,
                             double noise_sigma, std::uint64_t seed, double fg, double bg) {
    ScalarField out = disk_image(spec, cx, cy, r, fg, bg);
    Rng rng(seed);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += noise_sigma * rng.normal();
    return out;
}

ScalarField smooth_image(const GridSpec& spec, std::uint64_t seed, int modes) {
    Rng rng(seed);
    ScalarField out(spec, 0.0);
    for (int m = 0; m < modes; ++m) {
        const double a = rng.uniform(0.3, 1.0);
        const double kx = rng.uniform(0.5, 2.5) * 2.0 * std::numbers::pi / (spec.nx * spec.hx);
        const double ky = rng.uniform(0.5, 2.5) * 2.0 * std::numbers::pi / (spec.ny * spec.hy);
        const double ph = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int y = 0; y < spec.ny; ++y)
            for (int x = 0; x < spec.nx; ++x)
                out.at(x, y) += a * std::cos(kx * x * spec.hx + ky * y * spec.hy + ph);
    }
    const double lo = out.min(), hi = out.max();
    const double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - lo) * scale;
    return out;
}

ScalarField signed_distance_circle(const GridSpec& spec, double cx, double cy, double r) {
    ScalarField out(spec);
    for (int y = 0; y < spec.ny; ++y)
        for (int x = 0; x < spec.nx; ++x)
            out.at(x, y) = r - std::hypot(x * spec.hx - cx, y * spec.hy - cy);
    return out;
}

ClosedCurve circle_curve(double cx, double cy, double r, std::size_t n) {
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        pts[i] = {cx + r * std::cos(th), cy + r * std::sin(th)};
    }
    return ClosedCurve(std::move(pts));
}

ClosedCurve ellipse_curve(double cx, double cy, double a, double b, std::size_t n) {
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        pts[i] = {cx + a * std::cos(th), cy + b * std::sin(th)};
    }
    return ClosedCurve(std::move(pts));
}

ClosedCurve random_smooth_curve(double cx, double cy, double r0, std::size_t n,
                                std::uint64_t seed) {
    Rng rng(seed);
    constexpr int kModes = 4;
    double amp[kModes], ph[kModes];
    for (int k = 0; k < kModes; ++k) {
        amp[k] = rng.uniform(-0.12, 0.12) / (k + 1);
        ph[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    std::vector<Vec2> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
        double r = r0;
        for (int k = 0; k < kModes; ++k) r += r0 * amp[k] * std::cos((k + 2) * th + ph[k]);
        pts[i] = {cx + r * std::cos(th), cy + r * std::sin(th)};
    }
    return ClosedCurve(std::move(pts));
}

}  // namespace varflow
