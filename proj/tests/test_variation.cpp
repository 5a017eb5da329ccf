#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "varflow/beltrami.hpp"
#include "varflow/curve.hpp"
#include "varflow/fixtures.hpp"
#include "varflow/variation.hpp"

using namespace varflow;

namespace {

// sum of squares with exact derivative 2x
class SumOfSquares : public DiscreteFunctional {
public:
    explicit SumOfSquares(std::size_t n) : n_(n) {}
    std::size_t dof() const override { return n_; }
    double evaluate(std::span<const double> s) const override {
        double e = 0.0;
        for (double v : s) e += v * v;
        return e;
    }
    std::vector<double> raw_variation(std::span<const double> s) const override {
        std::vector<double> r(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) r[i] = 2.0 * s[i];
        return r;
    }

private:
    std::size_t n_;
};

class CubicSum : public DiscreteFunctional {
public:
    explicit CubicSum(std::size_t n) : n_(n) {}
    std::size_t dof() const override { return n_; }
    double evaluate(std::span<const double> s) const override {
        double e = 0.0;
        for (double v : s) e += v * v * v;
        return e;
    }
    std::vector<double> raw_variation(std::span<const double> s) const override {
        std::vector<double> r(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) r[i] = 3.0 * s[i] * s[i];
        return r;
    }

private:
    std::size_t n_;
};

}  // namespace

TEST_CASE("fd directional derivative: quadratic exactness and constants") {
    const SumOfSquares F(2);
    const std::vector<double> state{1.0, 2.0};
    const std::vector<double> dir{1.0, 0.0};
    CHECK(fd_directional_derivative(F, state, dir, 1e-5) == doctest::Approx(2.0).epsilon(1e-9));

    class Constant : public DiscreteFunctional {
    public:
        std::size_t dof() const override { return 3; }
        double evaluate(std::span<const double>) const override { return 7.5; }
        std::vector<double> raw_variation(std::span<const double>) const override {
            return {0.0, 0.0, 0.0};
        }
    } C;
    const std::vector<double> s3{1.0, -2.0, 0.5}, d3{0.3, 0.2, -0.9};
    CHECK(std::abs(fd_directional_derivative(C, s3, d3, 1e-5)) <= 1e-12);
}

TEST_CASE("fd quotient error shrinks 4x when the step halves") {
    const CubicSum F(3);
    const std::vector<double> state{1.0, -0.7, 0.4};
    const std::vector<double> dir{0.5, 1.0, -0.25};
    double exact = 0.0;
    const auto raw = F.raw_variation(state);
    for (std::size_t i = 0; i < 3; ++i) exact += raw[i] * dir[i];

    const double e1 = std::abs(fd_directional_derivative(F, state, dir, 1e-2) - exact);
    const double e2 = std::abs(fd_directional_derivative(F, state, dir, 5e-3) - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("fd step scales with the state") {
    const std::vector<double> small{0.1, -0.2};
    const std::vector<double> big{10.0, -120.0};
    CHECK(fd_step_for(small) == doctest::Approx(1e-5));
    CHECK(fd_step_for(big) == doctest::Approx(120.0 * 1e-5));
}

TEST_CASE("gradient_from_variation divides componentwise") {
    MetricWeights w{{2.0, 2.0, 2.0}, "test"};
    const std::vector<double> raw{2.0, 4.0, 6.0};
    const auto g = gradient_from_variation(raw, w);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK(g[2] == doctest::Approx(3.0));

    const auto id = gradient_from_variation(raw, parameter_weights(3));
    for (int i = 0; i < 3; ++i) CHECK(id[i] == raw[i]);
}

TEST_CASE("parameter weights are all ones") {
    const MetricWeights w = parameter_weights(17);
    REQUIRE(w.weights.size() == 17);
    for (double v : w.weights) CHECK(v == 1.0);
}

TEST_CASE("curve weights: uniform polygon carries L/n at every node, twice") {
    const std::size_t n = 256;
    const ClosedCurve c = circle_curve(0, 0, 30.0, n);
    const CurveGeometry geo = geometry(c);
    const MetricWeights w = geometric_curve_weights(geo);
    REQUIRE(w.weights.size() == 2 * n);
    const double expect = geo.total_length / static_cast<double>(n);
    for (double v : w.weights) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("surface weights: flat metric gives hx*hy") {
    const GridSpec s{8, 8, 0.5, 2.0};
    const MetricWeights w = geometric_surface_weights(ScalarField(s, 1.0));
    for (double v : w.weights) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("surface weights reject non-positive determinants") {
    ScalarField det(GridSpec{8, 8, 1.0, 1.0}, 1.0);
    det.at(4, 4) = -0.5;
    CHECK_THROWS_AS(geometric_surface_weights(det), std::domain_error);
}

TEST_CASE("level-set measure weights are positive even where grad phi vanishes") {
    const GridSpec s{16, 16, 1.0, 1.0};
    const ScalarField flat(s, 2.0);  // grad = 0 everywhere
    const MetricWeights w = level_set_measure_weights(flat, 1.0, 1e-8);
    for (double v : w.weights) CHECK(v > 0.0);
}

TEST_CASE("check_gradient: exact raw variation passes tightly") {
    const SumOfSquares F(8);
    std::vector<double> state{0.3, -1.2, 0.9, 2.0, -0.1, 0.7, 1.4, -0.8};
    const GradCheckReport rep =
        check_gradient(F, parameter_weights(8), state, 20, 123, 1e-4);
    CHECK(rep.pass);
    CHECK(rep.max_rel_error <= 1e-7);
    CHECK(rep.trials.size() == 20);
}

TEST_CASE("check_gradient duality holds for any positive weights") {
    // the weights cancel in the pairing; this is the content of the identity
    const CubicSum F(6);
    std::vector<double> state{0.5, -0.4, 1.1, 0.2, -0.9, 0.8};
    MetricWeights w{{0.1, 2.0, 5.0, 0.01, 3.3, 7.7}, "arbitrary positive"};
    const GradCheckReport rep = check_gradient(F, w, state, 10, 77, 1e-4);
    CHECK(rep.pass);
}

TEST_CASE("check_gradient: zero probe direction gives zero on both sides") {
    const SumOfSquares F(4);
    std::vector<double> state{1.0, 2.0, 3.0, 4.0};
    DirectionSource zeros = [](std::mt19937_64&) { return std::vector<double>(4, 0.0); };
    const GradCheckReport rep =
        check_gradient(F, parameter_weights(4), state, 1, 5, 1e-4, zeros);
    CHECK(rep.trials[0].lhs == 0.0);
    CHECK(rep.trials[0].rhs == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("check_gradient reports non-finite energies") {
    class Bad : public DiscreteFunctional {
    public:
        std::size_t dof() const override { return 2; }
        double evaluate(std::span<const double> s) const override {
            return s[0] == 1.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
        }
        std::vector<double> raw_variation(std::span<const double>) const override {
            return {0.0, 0.0};
        }
    } F;
    std::vector<double> state{1.0, 1.0};
    CHECK_THROWS_AS(check_gradient(F, parameter_weights(2), state, 2, 3, 1e-4),
                    std::runtime_error);
}

TEST_CASE("check_gradient is deterministic in the seed") {
    const CubicSum F(6);
    std::vector<double> state{0.5, -0.4, 1.1, 0.2, -0.9, 0.8};
    const auto a = check_gradient(F, parameter_weights(6), state, 5, 99, 1e-4);
    const auto b = check_gradient(F, parameter_weights(6), state, 5, 99, 1e-4);
    for (int i = 0; i < 5; ++i) {
        CHECK(a.trials[i].lhs == b.trials[i].lhs);
        CHECK(a.trials[i].rhs == b.trials[i].rhs);
    }
}

TEST_CASE("smooth direction generators match their layouts") {
    std::mt19937_64 rng(4);
    const auto curve_dir = smooth_curve_directions(64)(rng);
    CHECK(curve_dir.size() == 128);
    double cmax = 0.0;
    for (double v : curve_dir) cmax = std::max(cmax, std::abs(v));
    CHECK(cmax == doctest::Approx(1.0));

    const GridSpec spec{12, 10, 1.0, 1.0};
    const auto grid_dir = smooth_grid_directions(spec, true)(rng);
    CHECK(grid_dir.size() == spec.size());
    for (int x = 0; x < 12; ++x) {
        CHECK(grid_dir[x] == 0.0);                   // first row vanishes
        CHECK(grid_dir[9 * 12 + x] == 0.0);          // last row vanishes
    }
    for (int y = 0; y < 10; ++y) {
        CHECK(grid_dir[y * 12] == 0.0);              // first column
        CHECK(grid_dir[y * 12 + 11] == 0.0);         // last column
    }
}
