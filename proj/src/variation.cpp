#include "varflow/variation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "varflow/chanvese.hpp"

namespace varflow {

std::string to_string(InnerProductKind kind) {
    switch (kind) {
        case InnerProductKind::ParameterL2: return "parameter_l2";
        case InnerProductKind::GeometricCurve: return "geometric_curve";
        case InnerProductKind::GeometricSurface: return "geometric_surface";
        case InnerProductKind::LevelSetCurveMeasure: return "level_set_curve_measure";
    }
    return "unknown";
}

void MetricWeights::validate() const {
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::domain_error("MetricWeights: non-positive weight in measure '" +
                                    measure_name + "' (degenerate curve or metric)");
}

MetricWeights parameter_weights(std::size_t dof) {
    MetricWeights w{std::vector<double>(dof, 1.0), "dp (parameter)"};
    w.validate();
    return w;
}

MetricWeights geometric_curve_weights(const CurveGeometry& geo) {
    MetricWeights w;
    w.measure_name = "ds = |C_p| dp";
    w.weights.reserve(2 * geo.node_weights.size());
    for (double nw : geo.node_weights) {
        w.weights.push_back(nw);
        w.weights.push_back(nw);
    }
    w.validate();
    return w;
}

MetricWeights geometric_surface_weights(const ScalarField& det_g) {
    const GridSpec& s = det_g.spec();
    MetricWeights w;
    w.measure_name = "dA = sqrt(g) dx dy";
    w.weights.resize(det_g.size());
    for (std::size_t i = 0; i < det_g.size(); ++i) {
        if (!(det_g[i] > 0.0))
            throw std::domain_error("geometric_surface_weights: det g must be positive");
        w.weights[i] = std::sqrt(det_g[i]) * s.hx * s.hy;
    }
    w.validate();
    return w;
}

MetricWeights level_set_measure_weights(const ScalarField& phi, double eps_delta, double eps_grad) {
    if (!(eps_delta > 0.0) || !(eps_grad > 0.0))
        throw std::invalid_argument("level_set_measure_weights: eps_delta and eps_grad must be > 0");
    const GridSpec& s = phi.spec();
    const VectorField g = gradient(phi, DiffScheme::Central);
    MetricWeights w;
    w.measure_name = "ds = delta(phi)|grad phi| dx dy";
    w.weights.resize(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double mag = std::hypot(g.u[i], g.v[i]);
        w.weights[i] = (heaviside_delta(phi[i], eps_delta).delta * mag + eps_grad) * s.hx * s.hy;
    }
    w.validate();
    return w;
}

std::vector<double> gradient_from_variation(std::span<const double> raw, const MetricWeights& w) {
    if (raw.size() != w.weights.size())
        throw std::invalid_argument("gradient_from_variation: layout mismatch");
    std::vector<double> g(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) g[i] = raw[i] / w.weights[i];
    return g;
}

double fd_directional_derivative(const DiscreteFunctional& F, std::span<const double> state,
                                 std::span<const double> direction, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("fd_directional_derivative: step must be > 0");
    if (state.size() != direction.size())
        throw std::invalid_argument("fd_directional_derivative: direction layout mismatch");

    std::vector<double> probe(state.begin(), state.end());
    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] += step * direction[i];
    const double plus = F.evaluate(probe);
    if (!std::isfinite(plus))
        throw std::runtime_error("fd_directional_derivative: non-finite energy at +step probe");

    for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = state[i] - step * direction[i];
    const double minus = F.evaluate(probe);
    if (!std::isfinite(minus))
        throw std::runtime_error("fd_directional_derivative: non-finite energy at -step probe");

    return (plus - minus) / (2.0 * step);
}

double fd_step_for(std::span<const double> state) {
    double scale = 1.0;
    for (double v : state) scale = std::max(scale, std::abs(v));
    return 1e-5 * scale;
}

DirectionSource smooth_curve_directions(std::size_t n_nodes) {
    return [n_nodes](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::vector<double> dir(2 * n_nodes, 0.0);
        for (int comp = 0; comp < 2; ++comp) {
            for (int k = 1; k <= 4; ++k) {
                const double a = amp(rng), ph = phase(rng);
                for (std::size_t i = 0; i < n_nodes; ++i)
                    dir[2 * i + comp] +=
                        a * std::cos(2.0 * std::numbers::pi * k * static_cast<double>(i) / n_nodes + ph);
            }
        }
        double m = 0.0;
        for (double v : dir) m = std::max(m, std::abs(v));
        for (double& v : dir) v /= m;
        return dir;
    };
}

DirectionSource smooth_grid_directions(const GridSpec& spec, bool boundary_vanishing) {
    return [spec, boundary_vanishing](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_int_distribution<int> freq(boundary_vanishing ? 1 : 0, 3);
        std::vector<double> dir(spec.size(), 0.0);
        for (int m = 0; m < 4; ++m) {
            const double a = amp(rng), phx = phase(rng), phy = phase(rng);
            const int kx = freq(rng), ky = freq(rng);
            for (int y = 0; y < spec.ny; ++y)
                for (int x = 0; x < spec.nx; ++x) {
                    double v;
                    if (boundary_vanishing) {
                        v = a * std::sin(std::numbers::pi * kx * x / (spec.nx - 1.0)) *
                            std::sin(std::numbers::pi * ky * y / (spec.ny - 1.0));
                    } else {
                        v = a * std::cos(2.0 * std::numbers::pi * kx * x / spec.nx + phx) *
                            std::cos(2.0 * std::numbers::pi * ky * y / spec.ny + phy);
                    }
                    dir[static_cast<std::size_t>(y) * spec.nx + x] += v;
                }
        }
        if (boundary_vanishing) {  // exact zeros, not sin(pi k) round-off
            for (int x = 0; x < spec.nx; ++x) {
                dir[x] = 0.0;
                dir[static_cast<std::size_t>(spec.ny - 1) * spec.nx + x] = 0.0;
            }
            for (int y = 0; y < spec.ny; ++y) {
                dir[static_cast<std::size_t>(y) * spec.nx] = 0.0;
                dir[static_cast<std::size_t>(y) * spec.nx + spec.nx - 1] = 0.0;
            }
        }
        double m = 0.0;
        for (double v : dir) m = std::max(m, std::abs(v));
        if (m == 0.0) m = 1.0;
        for (double& v : dir) v /= m;
        return dir;
    };
}

GradCheckReport check_gradient(const DiscreteFunctional& F, const MetricWeights& w,
                               std::span<const double> state, int trials, std::uint64_t seed,
                               double tolerance, const DirectionSource& directions) {
    if (trials < 1) throw std::invalid_argument("check_gradient: trials must be >= 1");
    w.validate();
    if (state.size() != F.dof() || w.weights.size() != F.dof())
        throw std::invalid_argument("check_gradient: layout mismatch");

    DirectionSource source = directions;
    if (!source) {
        // generic fallback: low-frequency modes over the flattened index
        const std::size_t n = state.size();
        source = [n](std::mt19937_64& rng) {
            std::uniform_real_distribution<double> amp(-1.0, 1.0);
            std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
            std::vector<double> dir(n, 0.0);
            for (int k = 1; k <= 4; ++k) {
                const double a = amp(rng), ph = phase(rng);
                for (std::size_t i = 0; i < n; ++i)
                    dir[i] += a * std::cos(2.0 * std::numbers::pi * k * static_cast<double>(i) / n + ph);
            }
            double m = 0.0;
            for (double v : dir) m = std::max(m, std::abs(v));
            for (double& v : dir) v /= m;
            return dir;
        };
    }

    const std::vector<double> raw = F.raw_variation(state);
    const std::vector<double> grad = gradient_from_variation(raw, w);
    const double step = fd_step_for(state);

    std::mt19937_64 rng(seed);
    GradCheckReport report;
    report.tolerance = tolerance;
    for (int t = 0; t < trials; ++t) {
        const std::vector<double> eta = source(rng);
        if (eta.size() != state.size())
            throw std::invalid_argument("check_gradient: direction layout mismatch");

        double lhs = 0.0;
        for (std::size_t i = 0; i < eta.size(); ++i) lhs += grad[i] * eta[i] * w.weights[i];
        const double rhs = fd_directional_derivative(F, state, eta, step);
        if (!std::isfinite(lhs) || !std::isfinite(rhs))
            throw std::runtime_error("check_gradient: non-finite pairing in trial " +
                                     std::to_string(t));

        const double denom = std::max({std::abs(lhs), std::abs(rhs), 1e-12});
        const double rel = std::abs(lhs - rhs) / denom;
        report.trials.push_back({t, lhs, rhs, rel});
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

}  // namespace varflow
