#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "varflow/fixtures.hpp"
#include "varflow/grid.hpp"

using namespace varflow;

namespace {

ScalarField from_fn(const GridSpec& s, double (*f)(double, double)) {
    ScalarField out(s);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) out.at(x, y) = f(x * s.hx, y * s.hy);
    return out;
}

}  // namespace

TEST_CASE("grid spec validation") {
    CHECK_THROWS_AS(ScalarField(GridSpec{2, 8, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(GridSpec{8, 2, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(GridSpec{8, 8, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(GridSpec{8, 8, 1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(GridSpec{8, 8, 1.0, 1.0}, std::vector<double>(7)),
                    std::invalid_argument);
}

TEST_CASE("gradient of constant field is exactly zero") {
    const GridSpec s{12, 9, 0.7, 1.3};
    const ScalarField f(s, 4.25);
    for (auto scheme : {DiffScheme::Central, DiffScheme::Forward, DiffScheme::Backward}) {
        const VectorField g = gradient(f, scheme);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(g.u[i] == 0.0);
            CHECK(g.v[i] == 0.0);
        }
    }
}

TEST_CASE("central gradient is exact on linear fields at interior pixels") {
    const GridSpec s{8, 8, 1.0, 1.0};
    const ScalarField f = from_fn(s, [](double x, double y) { return 2.0 * x + 3.0 * y; });
    const VectorField g = gradient(f, DiffScheme::Central);
    for (int y = 1; y < 7; ++y)
        for (int x = 1; x < 7; ++x) {
            CHECK(g.u.at(x, y) == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(g.v.at(x, y) == doctest::Approx(3.0).epsilon(1e-12));
        }
}

TEST_CASE("central gradient matches the symbolic derivative of x^2 per pixel") {
    const GridSpec s{16, 16, 1.0, 1.0};
    const ScalarField f = from_fn(s, [](double x, double) { return x * x; });
    const VectorField g = gradient(f, DiffScheme::Central);
    for (int y = 0; y < 16; ++y)
        for (int x = 1; x < 15; ++x)  // symbolic oracle: d/dx x^2 = 2x, exact for quadratics
            CHECK(g.u.at(x, y) == doctest::Approx(2.0 * x).epsilon(1e-13));
}

TEST_CASE("gradient rejects non-finite input") {
    ScalarField f(GridSpec{8, 8, 1.0, 1.0}, 1.0);
    f.at(3, 3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(gradient(f, DiffScheme::Central), std::invalid_argument);
}

TEST_CASE("divergence of constant vector field is exactly zero") {
    const GridSpec s{10, 10, 1.0, 1.0};
    const VectorField w{ScalarField(s, 1.5), ScalarField(s, -2.5)};
    for (auto scheme : {DivScheme::Central, DivScheme::UpwindPair}) {
        const ScalarField d = divergence(w, scheme);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == 0.0);
    }
}

TEST_CASE("divergence of (x, y) is 2 at interior pixels") {
    const GridSpec s{10, 10, 1.0, 1.0};
    const VectorField w{from_fn(s, [](double x, double) { return x; }),
                        from_fn(s, [](double, double y) { return y; })};
    const ScalarField d = divergence(w, DivScheme::Central);
    for (int y = 1; y < 9; ++y)
        for (int x = 1; x < 9; ++x) CHECK(d.at(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("vector field components must share one spec") {
    CHECK_THROWS_AS(VectorField(ScalarField(GridSpec{8, 8, 1.0, 1.0}),
                                ScalarField(GridSpec{9, 8, 1.0, 1.0})),
                    std::invalid_argument);
}

TEST_CASE("divergence of unit normal field of a circle approximates 1/r") {
    // analytic oracle: level sets of the distance to a circle have curvature
    // 1/rad at radius rad
    const GridSpec s{101, 101, 1.0, 1.0};
    const double r = 18.0;
    const ScalarField phi = signed_distance_circle(s, 50.0, 50.0, r);
    VectorField n = gradient(phi, DiffScheme::Central);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double mag = std::hypot(n.u[i], n.v[i]);
        n.u[i] = mag > 1e-12 ? n.u[i] / mag : 0.0;  // the cone apex has zero gradient
        n.v[i] = mag > 1e-12 ? n.v[i] / mag : 0.0;
    }
    const ScalarField d = divergence(n, DivScheme::Central);
    const double tol = 2.0 * s.hx / (r * r);
    for (int y = 2; y < 99; ++y)
        for (int x = 2; x < 99; ++x) {
            const double rad = std::hypot(x - 50.0, y - 50.0);
            if (std::abs(rad - r) > 0.5) continue;
            CHECK(std::abs(std::abs(d.at(x, y)) - 1.0 / rad) <= tol);
        }
}

TEST_CASE("central gradient converges at second order") {
    auto max_interior_error = [](int n) {
        const GridSpec s{n, n, 2.0 * std::numbers::pi / (n - 1), 2.0 * std::numbers::pi / (n - 1)};
        const ScalarField f =
            from_fn(s, [](double x, double y) { return std::sin(x) * std::sin(y); });
        const VectorField g = gradient(f, DiffScheme::Central);
        double err = 0.0;
        for (int y = 1; y < n - 1; ++y)
            for (int x = 1; x < n - 1; ++x) {
                const double exact = std::cos(x * s.hx) * std::sin(y * s.hy);
                err = std::max(err, std::abs(g.u.at(x, y) - exact));
            }
        return err;
    };
    CHECK(max_interior_error(33) / max_interior_error(65) >= 3.5);
}

TEST_CASE("gaussian smooth: sigma zero is the identity") {
    const ScalarField f = smooth_image(GridSpec{16, 16, 1.0, 1.0}, 3);
    const ScalarField g = gaussian_smooth(f, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
}

TEST_CASE("gaussian smooth preserves constants and the mean") {
    const GridSpec s{24, 24, 1.0, 1.0};
    const ScalarField g = gaussian_smooth(ScalarField(s, 0.37), 1.7);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == doctest::Approx(0.37).epsilon(1e-14));

    ScalarField nearly(s, 1.0);
    nearly.at(11, 13) = 1.0 + 1e-6;
    nearly.at(3, 4) = 1.0 - 2e-6;
    CHECK(gaussian_smooth(nearly, 2.0).mean() == doctest::Approx(nearly.mean()).epsilon(1e-10));
}

TEST_CASE("gaussian smooth of a unit impulse matches a dense convolution oracle") {
    const GridSpec s{33, 33, 1.0, 1.0};
    ScalarField f(s, 0.0);
    f.at(16, 16) = 1.0;
    const double sigma = 2.0;
    const ScalarField g = gaussian_smooth(f, sigma);

    // oracle: direct dense 2D convolution with the same truncated kernel
    const int radius = 6;
    std::vector<double> k(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i)
        ksum += k[i + radius] = std::exp(-i * i / (2.0 * sigma * sigma));
    for (double& v : k) v /= ksum;
    for (int y = 0; y < 33; ++y)
        for (int x = 0; x < 33; ++x) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j)
                for (int i = -radius; i <= radius; ++i)
                    acc += k[i + radius] * k[j + radius] *
                           f.at(std::clamp(x + i, 0, 32), std::clamp(y + j, 0, 32));
            CHECK(g.at(x, y) == doctest::Approx(acc).epsilon(1e-12));
        }

    CHECK(g.at(16, 16) == doctest::Approx(k[radius] * k[radius]).epsilon(1e-12));
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) total += g[i];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bilinear sample: exact at nodes and on linear fields") {
    const GridSpec s{8, 8, 1.0, 1.0};
    const ScalarField f = from_fn(s, [](double x, double y) { return 2.0 * x + 3.0 * y; });
    CHECK(bilinear_sample(f, 4.0, 5.0) == doctest::Approx(23.0).epsilon(1e-14));
    CHECK(bilinear_sample(f, 1.5, 2.25) == doctest::Approx(9.75).epsilon(1e-14));
}

TEST_CASE("bilinear sample matches an independent four-corner oracle") {
    const GridSpec s{16, 12, 1.0, 1.0};
    ScalarField f(s);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = u(rng);

    for (int t = 0; t < 100; ++t) {
        const double x = u(rng) * 15.0, y = u(rng) * 11.0;
        const int i0 = std::min(static_cast<int>(x), 14), j0 = std::min(static_cast<int>(y), 10);
        const double tx = x - i0, ty = y - j0;
        const double expect = f.at(i0, j0) * (1 - tx) * (1 - ty) +
                              f.at(i0 + 1, j0) * tx * (1 - ty) + f.at(i0, j0 + 1) * (1 - tx) * ty +
                              f.at(i0 + 1, j0 + 1) * tx * ty;
        CHECK(bilinear_sample(f, x, y) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("bilinear sample clamps out-of-range coordinates") {
    const GridSpec s{8, 8, 1.0, 1.0};
    const ScalarField f = from_fn(s, [](double x, double y) { return x + y; });
    CHECK(bilinear_sample(f, -5.0, -5.0) == doctest::Approx(0.0));
    CHECK(bilinear_sample(f, 100.0, 100.0) == doctest::Approx(14.0));
}

TEST_CASE("bilinear gradient is the exact derivative of the interpolant") {
    const ScalarField f = smooth_image(GridSpec{16, 16, 1.0, 1.0}, 11);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.51, 14.49);
    for (int t = 0; t < 50; ++t) {
        const double x = u(rng), y = u(rng);
        const SampleGrad g = bilinear_sample_grad(f, x, y);
        const double h = 1e-7;
        const double ddx = (bilinear_sample(f, x + h, y) - bilinear_sample(f, x - h, y)) / (2 * h);
        const double ddy = (bilinear_sample(f, x, y + h) - bilinear_sample(f, x, y - h)) / (2 * h);
        CHECK(g.ddx == doctest::Approx(ddx).epsilon(1e-4));
        CHECK(g.ddy == doctest::Approx(ddy).epsilon(1e-4));
    }
}

TEST_CASE("gradient adjoint is the exact transpose of the central gradient") {
    // <grad f, w> must equal <f, adj w> for arbitrary fields
    const GridSpec s{9, 7, 0.8, 1.2};
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(s), wu(s), wv(s);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = u(rng);
        wu[i] = u(rng);
        wv[i] = u(rng);
    }
    const VectorField g = gradient(f, DiffScheme::Central);
    const ScalarField adj = gradient_adjoint(VectorField{wu, wv});
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        lhs += g.u[i] * wu[i] + g.v[i] * wv[i];
        rhs += f[i] * adj[i];
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
