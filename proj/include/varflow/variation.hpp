#pragma once

// Inner products with geometric integration measures, extraction of the
// gradient from a raw first variation, and the finite-difference checker that
// certifies every flow in this repository.
//
// The one identity everything here enforces: for an energy E with exact
// discrete partial derivatives r = dE/dstate and any positive weights w,
//
//     sum_i (r_i / w_i) * eta_i * w_i  ==  d/dt E(state + t*eta) |_{t=0}
//
// i.e. the gradient with respect to the weighted inner product, paired under
// that same inner product, reproduces the directional derivative. Dividing a
// raw variation by arclength, area, or curve-measure weights is therefore not
// an ad-hoc fixup: it is the gradient for that measure.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "varflow/curve.hpp"
#include "varflow/grid.hpp"

namespace varflow {

enum class InnerProductKind { ParameterL2, GeometricCurve, GeometricSurface, LevelSetCurveMeasure };

std::string to_string(InnerProductKind kind);

/// Positive integration weight per degree of freedom.
struct MetricWeights {
    std::vector<double> weights;
    std::string measure_name;

    void validate() const;  // rejects non-positive or non-finite weights
};

/// All weights 1: the Euclidean product with respect to the parameterization.
MetricWeights parameter_weights(std::size_t dof);

/// Discrete ds per node, expanded to the interleaved (x, y) state layout.
MetricWeights geometric_curve_weights(const CurveGeometry& geo);

/// sqrt(det g) * hx * hy per pixel.
MetricWeights geometric_surface_weights(const ScalarField& det_g);

/// (delta_eps(phi) * |grad phi| + eps_grad) * hx * hy per pixel; the same
/// regularized delta the Chan-Vese energy uses, with an explicit guard so the
/// weight stays positive where grad phi vanishes.
MetricWeights level_set_measure_weights(const ScalarField& phi, double eps_delta, double eps_grad);

/// Componentwise division raw_i / w_i: the discrete form of the 1/|C_p|,
/// 1/sqrt(g) and 1/(delta(phi)|grad phi|) corrections.
std::vector<double> gradient_from_variation(std::span<const double> raw, const MetricWeights& w);

/// Abstract energy with exact discrete first variation. raw_variation must be
/// the exact partial-derivative vector of evaluate; check_gradient certifies
/// exactly this.
class DiscreteFunctional {
public:
    virtual ~DiscreteFunctional() = default;
    virtual std::size_t dof() const = 0;
    virtual double evaluate(std::span<const double> state) const = 0;
    virtual std::vector<double> raw_variation(std::span<const double> state) const = 0;
};

/// Central quotient (F(state + step*dir) - F(state - step*dir)) / (2 step).
double fd_directional_derivative(const DiscreteFunctional& F, std::span<const double> state,
                                 std::span<const double> direction, double step);

/// 1e-5 times the characteristic scale of the state (max absolute coordinate,
/// floored at 1).
double fd_step_for(std::span<const double> state);

struct GradCheckTrial {
    int trial = 0;
    double lhs = 0.0;  // sum_i gradient_i * eta_i * w_i
    double rhs = 0.0;  // finite-difference directional derivative
    double rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckTrial> trials;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Produces one probe direction per call; must match the state layout.
using DirectionSource = std::function<std::vector<double>(std::mt19937_64&)>;

/// Seeded low-frequency trigonometric probe directions. Rough directions only
/// expose discretization noise, so probes are smooth by construction.
DirectionSource smooth_curve_directions(std::size_t n_nodes);
/// Grid probes; with boundary_vanishing the modes are sines that are zero on
/// the outermost pixel ring (used where a raw variation is only exact away
/// from the boundary strip).
DirectionSource smooth_grid_directions(const GridSpec& spec, bool boundary_vanishing = false);

/// For `trials` seeded probe directions eta, compares
/// lhs = sum_i gradient_i eta_i w_i against the finite-difference directional
/// derivative and reports the max relative error and pass/fail at `tolerance`.
GradCheckReport check_gradient(const DiscreteFunctional& F, const MetricWeights& w,
                               std::span<const double> state, int trials, std::uint64_t seed,
                               double tolerance = 1e-4, const DirectionSource& directions = {});

}  // namespace varflow
