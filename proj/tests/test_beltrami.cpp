#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "varflow/beltrami.hpp"
#include "varflow/fixtures.hpp"

using namespace varflow;

namespace {

ScalarField ramp(const GridSpec& s, double a, double b, double c = 0.0) {
    ScalarField out(s);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) out.at(x, y) = a * x * s.hx + b * y * s.hy + c;
    return out;
}

}  // namespace

TEST_CASE("induced metric of constant channels is the identity") {
    const GridSpec s{16, 16, 1.0, 1.0};
    const InducedMetric m = induced_metric({{ScalarField(s, 0.4)}, 1.0});
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(m.g11[i] == 1.0);
        CHECK(m.g12[i] == 0.0);
        CHECK(m.g22[i] == 1.0);
        CHECK(m.det_g[i] == 1.0);
    }
}

TEST_CASE("induced metric of a linear ramp, hand evaluation") {
    const GridSpec s{16, 16, 1.0, 1.0};
    const double a = 0.3, beta = 2.0;
    const InducedMetric m = induced_metric({{ramp(s, a, 0.0)}, beta});
    for (int y = 1; y < 15; ++y)
        for (int x = 1; x < 15; ++x) {
            CHECK(m.g11.at(x, y) == doctest::Approx(1.0 + beta * beta * a * a).epsilon(1e-12));
            CHECK(m.g12.at(x, y) == doctest::Approx(0.0));
            CHECK(m.g22.at(x, y) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(m.det_g.at(x, y) == doctest::Approx(1.0 + beta * beta * a * a).epsilon(1e-12));
        }
}

TEST_CASE("induced metric determinant is at least 1") {
    const GridSpec s{24, 24, 1.0, 1.0};
    EmbeddingMap e{{smooth_image(s, 3), smooth_image(s, 4), smooth_image(s, 5)}, 1.7};
    const InducedMetric m = induced_metric(e);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(m.det_g[i] >= 1.0 - 1e-12);
}

TEST_CASE("polyakov action of a flat embedding is twice the area") {
    const GridSpec s{20, 10, 0.5, 1.5};
    const EmbeddingMap e{{ScalarField(s, 0.9)}, 1.0};
    CHECK(polyakov_action(e, induced_metric(e)) == doctest::Approx(2.0 * s.area()).epsilon(1e-12));
}

TEST_CASE("polyakov action with frozen identity metric is Dirichlet plus constant") {
    const GridSpec s{32, 32, 1.0, 1.0};
    const double beta = 1.3;
    const ScalarField img = smooth_image(s, 6);
    const EmbeddingMap e{{img}, beta};
    const double action = polyakov_action(e, identity_metric(s));

    // direct summation oracle
    const VectorField g = gradient(img, DiffScheme::Central);
    double oracle = 2.0 * s.area();
    for (std::size_t i = 0; i < s.size(); ++i)
        oracle += beta * beta * (g.u[i] * g.u[i] + g.v[i] * g.v[i]) * s.hx * s.hy;
    CHECK(action == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("polyakov action on a ramp matches the closed form per interior pixel") {
    // integrand for I = a*x with its induced metric: 2*sqrt(1 + beta^2 a^2)
    const GridSpec s{16, 16, 1.0, 1.0};
    const double a = 0.25, beta = 1.5;
    const EmbeddingMap e{{ramp(s, a, 0.0)}, beta};
    const InducedMetric m = induced_metric(e);

    const double expect = 2.0 * std::sqrt(1.0 + beta * beta * a * a);
    const VectorField g = gradient(e.channels[0], DiffScheme::Central);
    for (int y = 1; y < 15; ++y)
        for (int x = 1; x < 15; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * 16 + x;
            const double det = m.det_g[i];
            const double q =
                (m.g11[i] + m.g22[i]) / det +
                beta * beta *
                    (m.g22[i] * g.u[i] * g.u[i] - 2.0 * m.g12[i] * g.u[i] * g.v[i] +
                     m.g11[i] * g.v[i] * g.v[i]) /
                    det;
            CHECK(std::sqrt(det) * q == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("polyakov action rejects non-positive metrics") {
    const GridSpec s{8, 8, 1.0, 1.0};
    const EmbeddingMap e{{ScalarField(s, 0.0)}, 1.0};
    InducedMetric m = identity_metric(s);
    m.det_g.at(4, 4) = -1.0;
    CHECK_THROWS_AS(polyakov_action(e, m), std::domain_error);
}

TEST_CASE("beltrami operator with identity metric is the Laplacian") {
    const GridSpec s{24, 24, 1.0, 1.0};
    ScalarField quad(s);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) quad.at(x, y) = x * x + y * y;
    const EmbeddingMap e{{quad}, 1.0};
    const ScalarField op = beltrami_operator(e, identity_metric(s), 0);
    for (int y = 2; y < 22; ++y)
        for (int x = 2; x < 22; ++x) CHECK(op.at(x, y) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("planes are minimal: operator vanishes on linear channels") {
    const GridSpec s{32, 32, 1.0, 1.0};
    const EmbeddingMap e{{ramp(s, 0.3, -0.2, 1.0)}, 1.4};
    const ScalarField op = beltrami_operator(e, induced_metric(e), 0);
    for (int y = 2; y < 30; ++y)
        for (int x = 2; x < 30; ++x) CHECK(std::abs(op.at(x, y)) <= 1e-10);
}

TEST_CASE("frozen-metric gradient check passes") {
    const GridSpec s{32, 32, 1.0, 1.0};
    EmbeddingMap e{{smooth_image(s, 12)}, 1.0};
    InducedMetric frozen = induced_metric(e);
    const std::vector<double> state = e.channels[0].values();
    const MetricWeights w = geometric_surface_weights(frozen.det_g);
    const PolyakovFunctional F(std::move(e), std::move(frozen), 0);
    const auto rep = check_gradient(F, w, state, 10, 9, 1e-4, smooth_grid_directions(s, false));
    CHECK(rep.pass);
    CHECK(rep.max_rel_error <= 1e-6);
}

TEST_CASE("constant image is a fixed point of the flow") {
    const GridSpec s{16, 16, 1.0, 1.0};
    BeltramiEvolveParams p;
    p.steps = 10;
    const BeltramiResult res = evolve_beltrami({{ScalarField(s, 0.42)}, 1.0}, p);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(res.embedding.channels[0][i] == 0.42);
}

TEST_CASE("small-beta limit matches an independent heat integrator") {
    const GridSpec s{32, 32, 1.0, 1.0};
    const ScalarField img = smooth_image(s, 20);
    BeltramiEvolveParams p;
    p.dt = 0.2;
    p.steps = 50;
    const BeltramiResult res = evolve_beltrami({{img}, 1e-3}, p);

    // oracle: explicit heat equation with the same div(grad .) central stencil,
    // written out directly
    std::vector<double> u = img.values(), next(u.size());
    auto cl = [&](int x, int y) {
        x = std::clamp(x, 0, 31);
        y = std::clamp(y, 0, 31);
        return u[static_cast<std::size_t>(y) * 32 + x];
    };
    for (int step = 0; step < p.steps; ++step) {
        std::vector<double> gx(u.size()), gy(u.size());
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                gx[y * 32 + x] = 0.5 * (cl(x + 1, y) - cl(x - 1, y));
                gy[y * 32 + x] = 0.5 * (cl(x, y + 1) - cl(x, y - 1));
            }
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                auto at = [&](const std::vector<double>& f, int xx, int yy) {
                    return f[static_cast<std::size_t>(std::clamp(yy, 0, 31)) * 32 +
                             std::clamp(xx, 0, 31)];
                };
                const double lap = 0.5 * (at(gx, x + 1, y) - at(gx, x - 1, y)) +
                                   0.5 * (at(gy, x, y + 1) - at(gy, x, y - 1));
                next[y * 32 + x] = u[y * 32 + x] + 0.2 * lap;
            }
        u.swap(next);
    }

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = res.embedding.channels[0][i] - u[i];
        num += d * d;
        den += u[i] * u[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-3);

    // the comparison assumes no step-halving happened
    for (const auto& row : res.trace.rows())
        if (row.step > 0) CHECK(res.trace.extra(row, "dt_eff") == doctest::Approx(0.2));
}

TEST_CASE("action is non-increasing along the flow") {
    for (std::uint64_t seed : {2u, 5u, 8u}) {
        const GridSpec s{32, 32, 1.0, 1.0};
        BeltramiEvolveParams p;
        p.steps = 60;
        const BeltramiResult res =
            evolve_beltrami({{noisy_disk_image(s, 16, 16, 8, 0.15, seed)}, 1.0}, p);
        const auto& rows = res.trace.rows();
        for (std::size_t k = 1; k < rows.size(); ++k)
            CHECK(rows[k].energy <= rows[k - 1].energy + 1e-9 * (1.0 + std::abs(rows[k].energy)));
    }
}

TEST_CASE("edges decay slower than under the heat flow") {
    // noisy vertical step: beta = 1 preserves the edge, the near-heat flow
    // (beta -> 0) blurs it; the noise (residual against a paired clean run,
    // which cancels the spreading edge profile) shrinks monotonically
    const GridSpec s{64, 64, 1.0, 1.0};
    ScalarField clean(s), noisy(s);
    Rng rng(31);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            clean.at(x, y) = x < 32 ? 0.2 : 0.8;
            noisy.at(x, y) = clean.at(x, y) + 0.05 * rng.normal();
        }

    auto edge_contrast = [](const ScalarField& f) {
        double c = 0.0;
        for (int y = 8; y < 56; ++y)
            c = std::max(c, std::abs(f.at(32, y) - f.at(31, y)));
        return c;
    };
    auto residual_variance = [](const ScalarField& a, const ScalarField& b) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
        mean /= static_cast<double>(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            var += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
        return var / static_cast<double>(a.size());
    };

    BeltramiEvolveParams p;
    p.steps = 120;
    const BeltramiResult beltrami = evolve_beltrami({{noisy}, 1.0}, p);
    const BeltramiResult heat = evolve_beltrami({{noisy}, 1e-3}, p);
    CHECK(edge_contrast(beltrami.embedding.channels[0]) >
          edge_contrast(heat.embedding.channels[0]));

    // flat-region noise decay, measured on a flat noisy patch so the
    // spreading edge profile cannot leak into the window
    ScalarField flat(s, 0.5);
    Rng rng2(32);
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += 0.05 * rng2.normal();
    double prev = residual_variance(flat, ScalarField(s, 0.0));
    EmbeddingMap e{{flat}, 1.0};
    for (int chunk = 0; chunk < 4; ++chunk) {
        BeltramiEvolveParams q;
        q.steps = 6;
        e = evolve_beltrami(std::move(e), q).embedding;
        const double v = residual_variance(e.channels[0], ScalarField(s, 0.0));
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("evolve validates parameters") {
    const GridSpec s{8, 8, 1.0, 1.0};
    BeltramiEvolveParams p;
    p.dt = 0.0;
    CHECK_THROWS_AS(evolve_beltrami({{ScalarField(s, 0.1)}, 1.0}, p), std::invalid_argument);
    CHECK_THROWS_AS(evolve_beltrami({{}, 1.0}, {}), std::invalid_argument);
    CHECK_THROWS_AS(evolve_beltrami({{ScalarField(s, 0.1)}, 0.0}, {}), std::invalid_argument);
}
