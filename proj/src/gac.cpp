#include "varflow/gac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace varflow {

ScalarField edge_indicator(const ScalarField& image, const EdgeIndicatorParams& params) {
    if (!(params.contrast > 0.0)) throw std::invalid_argument("edge_indicator: contrast must be > 0");
    const ScalarField smooth = gaussian_smooth(image, params.sigma);
    const VectorField g = gradient(smooth, DiffScheme::Central);
    ScalarField out(image.spec());
    const double c2 = params.contrast * params.contrast;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double m2 = g.u[i] * g.u[i] + g.v[i] * g.v[i];
        out[i] = 1.0 / (1.0 + m2 / c2);
    }
    return out;
}

GacState::GacState(ClosedCurve c, ScalarField g)
    : curve(std::move(c)), g_field(std::move(g)), geo(geometry(curve)) {
    if (!(g_field.min() > 0.0) || !(g_field.max() <= 1.0))
        throw std::invalid_argument("GacState: edge indicator values must lie in (0, 1]");
}

namespace {

double energy_points(std::span<const Vec2> pts, const ScalarField& g) {
    const std::size_t n = pts.size();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i], b = pts[(i + 1) % n];
        const Vec2 mid = (a + b) * 0.5;
        e += bilinear_sample(g, mid.x, mid.y) * norm(b - a);
    }
    return e;
}

std::vector<double> raw_variation_points(std::span<const Vec2> pts, const ScalarField& g) {
    const std::size_t n = pts.size();
    std::vector<double> raw(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const Vec2 a = pts[i], b = pts[j];
        const Vec2 e = b - a;
        const double len = norm(e);
        const Vec2 mid = (a + b) * 0.5;
        const SampleGrad sg = bilinear_sample_grad(g, mid.x, mid.y);
        const Vec2 unit = len > 0.0 ? e / len : Vec2{0.0, 0.0};
        // d/dP of G(mid)*|e|: the midpoint moves with dP/2 at both endpoints,
        // the length changes by -unit at the start and +unit at the end.
        raw[2 * i] += 0.5 * sg.ddx * len - sg.value * unit.x;
        raw[2 * i + 1] += 0.5 * sg.ddy * len - sg.value * unit.y;
        raw[2 * j] += 0.5 * sg.ddx * len + sg.value * unit.x;
        raw[2 * j + 1] += 0.5 * sg.ddy * len + sg.value * unit.y;
    }
    return raw;
}

}  // namespace

double gac_energy(const GacState& state) { return energy_points(state.curve.points(), state.g_field); }

std::vector<double> gac_raw_variation(const GacState& state) {
    return raw_variation_points(state.curve.points(), state.g_field);
}

std::vector<Vec2> gac_velocity(const GacState& state, InnerProductKind kind, bool project_normal) {
    if (kind != InnerProductKind::ParameterL2 && kind != InnerProductKind::GeometricCurve)
        throw std::invalid_argument("gac_velocity: kind must be ParameterL2 or GeometricCurve");
    const std::vector<double> raw = gac_raw_variation(state);
    const MetricWeights w = kind == InnerProductKind::ParameterL2
                                ? parameter_weights(raw.size())
                                : geometric_curve_weights(state.geo);
    const std::vector<double> grad = gradient_from_variation(raw, w);

    const std::size_t n = state.curve.size();
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = {-grad[2 * i], -grad[2 * i + 1]};
        if (project_normal) {
            const Vec2 nrm = state.geo.normals[i];
            v[i] = nrm * dot(v[i], nrm);
        }
    }
    return v;
}

std::vector<Vec2> gac_continuum_velocity(const GacState& state) {
    const auto& pts = state.curve.points();
    const std::size_t n = pts.size();
    std::vector<Vec2> flux(n);  // G * C_s at each segment
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i], b = pts[(i + 1) % n];
        const Vec2 e = b - a;
        const double len = norm(e);
        const Vec2 mid = (a + b) * 0.5;
        flux[i] = (e / len) * bilinear_sample(state.g_field, mid.x, mid.y);
    }
    std::vector<Vec2> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t im = (i + n - 1) % n;
        const SampleGrad sg = bilinear_sample_grad(state.g_field, pts[i].x, pts[i].y);
        const Vec2 dflux = (flux[i] - flux[im]) / state.geo.node_weights[i];
        v[i] = {-sg.ddx + dflux.x, -sg.ddy + dflux.y};
    }
    return v;
}

GacResult evolve_gac(GacState state, const GacEvolveParams& params) {
    if (!(params.dt > 0.0)) throw std::invalid_argument("evolve_gac: dt must be > 0");
    if (params.steps < 1) throw std::invalid_argument("evolve_gac: steps must be >= 1");

    double spacing = params.target_spacing;
    if (spacing <= 0.0) spacing = state.geo.total_length / static_cast<double>(state.curve.size());

    GacResult result{state.curve, EvolutionTrace({"curve_length", "dt_eff", "n_nodes", "resampled"}),
                     {}, false, -1};
    result.snapshots.emplace_back(0, state.curve);

    double time = 0.0;
    double energy = gac_energy(state);
    for (int step = 1; step <= params.steps; ++step) {
        const std::vector<Vec2> vel = gac_velocity(state, params.kind, params.project_normal);
        double vmax = 0.0;
        for (const Vec2& v : vel) vmax = std::max(vmax, norm(v));

        double min_seg = std::numeric_limits<double>::infinity();
        const auto& pts = state.curve.points();
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i)
            min_seg = std::min(min_seg, norm(pts[(i + 1) % n] - pts[i]));

        double dt_eff = params.dt;
        if (vmax > 0.0) dt_eff = std::min(dt_eff, 0.4 * min_seg / vmax);

        // descent step with halving until the energy does not increase
        std::vector<Vec2> trial(n);
        double e_new = energy;
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving) {
            bool degenerate = false;
            for (std::size_t i = 0; i < n; ++i) trial[i] = pts[i] + vel[i] * dt_eff;
            for (std::size_t i = 0; i < n && !degenerate; ++i)
                if (norm(trial[(i + 1) % n] - trial[i]) <= ClosedCurve::kMinSegment) degenerate = true;
            if (!degenerate) {
                e_new = energy_points(trial, state.g_field);
                if (e_new <= energy + 1e-12 * (1.0 + std::abs(energy))) accepted = true;
            }
            if (!accepted) dt_eff *= 0.5;
        }
        if (!accepted) {  // stationary to round-off: keep the curve in place
            trial.assign(pts.begin(), pts.end());
            e_new = energy;
            dt_eff = 0.0;
        }

        state = GacState(ClosedCurve(trial), std::move(state.g_field));
        time += dt_eff;
        energy = e_new;

        bool resampled = false;
        if (params.resample_every > 0 && step % params.resample_every == 0) {
            if (state.geo.total_length / spacing < static_cast<double>(ClosedCurve::kMinNodes)) {
                result.collapsed = true;
                result.collapse_step = step;
                result.curve = state.curve;
                result.trace.add_row(step, time, energy, vmax,
                                     {state.geo.total_length, dt_eff,
                                      static_cast<double>(state.curve.size()), 0.0});
                return result;
            }
            state = GacState(resample(state.curve, spacing), std::move(state.g_field));
            energy = gac_energy(state);
            resampled = true;
        }

        result.trace.add_row(step, time, energy, vmax,
                             {state.geo.total_length, dt_eff,
                              static_cast<double>(state.curve.size()), resampled ? 1.0 : 0.0});
        if (params.snapshot_every > 0 && step % params.snapshot_every == 0)
            result.snapshots.emplace_back(step, state.curve);
    }

    result.curve = state.curve;
    if (result.snapshots.back().first != params.steps)
        result.snapshots.emplace_back(params.steps, state.curve);
    return result;
}

GacFunctional::GacFunctional(ScalarField g_field, std::size_t n_nodes)
    : g_(std::move(g_field)), n_nodes_(n_nodes) {
    if (n_nodes_ < ClosedCurve::kMinNodes)
        throw std::invalid_argument("GacFunctional: need at least 8 nodes");
}

std::vector<double> GacFunctional::pack(const ClosedCurve& c) {
    std::vector<double> state(2 * c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        state[2 * i] = c.point(i).x;
        state[2 * i + 1] = c.point(i).y;
    }
    return state;
}

namespace {

std::vector<Vec2> unpack(std::span<const double> state) {
    std::vector<Vec2> pts(state.size() / 2);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {state[2 * i], state[2 * i + 1]};
    return pts;
}

}  // namespace

double GacFunctional::evaluate(std::span<const double> state) const {
    return energy_points(unpack(state), g_);
}

std::vector<double> GacFunctional::raw_variation(std::span<const double> state) const {
    return raw_variation_points(unpack(state), g_);
}

}  // namespace varflow
