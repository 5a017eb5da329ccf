#pragma once

// Seeded synthetic fixtures: disks, noise, smooth test images, circles and
// ellipses, signed distances. Generated in-code from a seed so runs and tests
// are self-contained and reproducible; normal deviates use an explicit
// Box-Muller transform to stay identical across standard libraries.

#include <cstdint>
#include <random>

#include "varflow/curve.hpp"
#include "varflow/grid.hpp"

namespace varflow {

/// Uniform in [0, 1) and standard normal deviates with stable cross-platform
/// output for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();                              // [0, 1)
    double uniform(double lo, double hi);
    double normal();                               // Box-Muller
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Crisp disk: fg inside radius r around (cx, cy), bg outside.
ScalarField disk_image(const GridSpec& spec, double cx, double cy, double r, double fg = 1.0,
                       double bg = 0.0);

/// Disk plus i.i.d. Gaussian noise of standard deviation sigma.
ScalarField noisy_disk_image(const GridSpec& spec, double cx, double cy, double r,
                             double noise_sigma, std::uint64_t seed, double fg = 1.0,
                             double bg = 0.0);

/// Smooth low-frequency image in [0, 1] from a few seeded cosine modes.
ScalarField smooth_image(const GridSpec& spec, std::uint64_t seed, int modes = 4);

/// phi = r - distance((x,y), (cx,cy)): positive inside, a signed distance.
ScalarField signed_distance_circle(const GridSpec& spec, double cx, double cy, double r);

ClosedCurve circle_curve(double cx, double cy, double r, std::size_t n);
ClosedCurve ellipse_curve(double cx, double cy, double a, double b, std::size_t n);

/// Smooth star-shaped curve r(theta) = r0 (1 + sum a_k cos(k theta + ph_k))
/// with seeded small amplitudes; useful for randomized descent tests.
ClosedCurve random_smooth_curve(double cx, double cy, double r0, std::size_t n,
                                std::uint64_t seed);

}  // namespace varflow
