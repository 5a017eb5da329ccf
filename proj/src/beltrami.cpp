#include "varflow/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varflow {

void EmbeddingMap::validate() const {
    if (channels.empty()) throw std::invalid_argument("EmbeddingMap: need at least one channel");
    if (!(beta > 0.0)) throw std::invalid_argument("EmbeddingMap: beta must be > 0");
    for (const auto& c : channels) {
        if (!(c.spec() == channels.front().spec()))
            throw std::invalid_argument("EmbeddingMap: channels must share one GridSpec");
        if (!c.all_finite()) throw std::invalid_argument("EmbeddingMap: non-finite channel values");
    }
}

InducedMetric induced_metric(const EmbeddingMap& e) {
    e.validate();
    const GridSpec& s = e.spec();
    InducedMetric m{ScalarField(s, 1.0), ScalarField(s, 0.0), ScalarField(s, 1.0), ScalarField(s, 1.0)};
    const double b2 = e.beta * e.beta;
    for (const auto& ch : e.channels) {
        const VectorField g = gradient(ch, DiffScheme::Central);
        for (std::size_t i = 0; i < s.size(); ++i) {
            m.g11[i] += b2 * g.u[i] * g.u[i];
            m.g12[i] += b2 * g.u[i] * g.v[i];
            m.g22[i] += b2 * g.v[i] * g.v[i];
        }
    }
    for (std::size_t i = 0; i < s.size(); ++i)
        m.det_g[i] = m.g11[i] * m.g22[i] - m.g12[i] * m.g12[i];
    return m;
}

InducedMetric identity_metric(const GridSpec& spec) {
    return {ScalarField(spec, 1.0), ScalarField(spec, 0.0), ScalarField(spec, 1.0),
            ScalarField(spec, 1.0)};
}

namespace {

void require_spd(const InducedMetric& m) {
    for (std::size_t i = 0; i < m.det_g.size(); ++i)
        if (!(m.det_g[i] > 0.0) || !(m.g11[i] > 0.0))
            throw std::domain_error("beltrami: metric must be positive definite (det g <= 0)");
}

// action contribution of one channel's gradient field under the metric
double quadratic_form_sum(const VectorField& g, const InducedMetric& m, double hxhy) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.det_g.size(); ++i) {
        const double det = m.det_g[i];
        const double sq = std::sqrt(det);
        // (grad X)^T G^{-1} grad X with the explicit 2x2 inverse
        const double q =
            (m.g22[i] * g.u[i] * g.u[i] - 2.0 * m.g12[i] * g.u[i] * g.v[i] +
             m.g11[i] * g.v[i] * g.v[i]) / det;
        acc += sq * q * hxhy;
    }
    return acc;
}

}  // namespace

double polyakov_action(const EmbeddingMap& e, const InducedMetric& m) {
    e.validate();
    require_spd(m);
    const GridSpec& s = e.spec();
    const double hxhy = s.hx * s.hy;

    // spatial maps sigma^1, sigma^2: (grad sigma^a)^T G^{-1} grad sigma^a sums
    // to trace(G^{-1}) = (g11 + g22)/det, exactly
    double action = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        action += std::sqrt(m.det_g[i]) * (m.g11[i] + m.g22[i]) / m.det_g[i] * hxhy;

    const double b2 = e.beta * e.beta;
    for (const auto& ch : e.channels) {
        const VectorField g = gradient(ch, DiffScheme::Central);
        action += b2 * quadratic_form_sum(g, m, hxhy);
    }
    return action;
}

namespace {

// flux sqrt(g) G^{-1} grad X at every pixel
VectorField metric_flux(const ScalarField& x, const InducedMetric& m) {
    const VectorField g = gradient(x, DiffScheme::Central);
    ScalarField fx(x.spec()), fy(x.spec());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double inv_sq = 1.0 / std::sqrt(m.det_g[i]);
        fx[i] = (m.g22[i] * g.u[i] - m.g12[i] * g.v[i]) * inv_sq;
        fy[i] = (-m.g12[i] * g.u[i] + m.g11[i] * g.v[i]) * inv_sq;
    }
    return {std::move(fx), std::move(fy)};
}

}  // namespace

ScalarField beltrami_operator(const EmbeddingMap& e, const InducedMetric& m, std::size_t channel) {
    e.validate();
    require_spd(m);
    if (channel >= e.channels.size()) throw std::invalid_argument("beltrami_operator: bad channel");
    const VectorField flux = metric_flux(e.channels[channel], m);
    ScalarField out = divergence(flux, DivScheme::Central);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= std::sqrt(m.det_g[i]);
    return out;
}

BeltramiResult evolve_beltrami(EmbeddingMap e, const BeltramiEvolveParams& params) {
    e.validate();
    if (!(params.dt > 0.0)) throw std::invalid_argument("evolve_beltrami: dt must be > 0");
    if (params.steps < 1) throw std::invalid_argument("evolve_beltrami: steps must be >= 1");
    if (params.refreeze_every < 1)
        throw std::invalid_argument("evolve_beltrami: refreeze_every must be >= 1");

    const GridSpec s = e.spec();  // by value: e is reassigned inside the loop
    const double h = std::min(s.hx, s.hy);
    const double dt_cap = std::min(params.dt, 0.2 * h * h);

    BeltramiResult result{e, EvolutionTrace({"dt_eff", "halvings"})};
    // the flow may run on a stale metric between refreezes; the traced action
    // always uses the current induced metric
    InducedMetric flow_metric = induced_metric(e);
    double action = polyakov_action(e, flow_metric);
    result.trace.add_row(0, 0.0, action, 0.0, {0.0, 0.0});

    double time = 0.0;
    for (int step = 1; step <= params.steps; ++step) {
        if ((step - 1) % params.refreeze_every == 0) flow_metric = induced_metric(e);

        std::vector<ScalarField> ops;
        ops.reserve(e.channels.size());
        double vmax = 0.0;
        for (std::size_t c = 0; c < e.channels.size(); ++c) {
            ops.push_back(beltrami_operator(e, flow_metric, c));
            if (!ops.back().all_finite())
                throw std::runtime_error("evolve_beltrami: non-finite velocity at step " +
                                         std::to_string(step));
            vmax = std::max(vmax, std::max(std::abs(ops.back().min()), std::abs(ops.back().max())));
        }

        double dt_eff = dt_cap;
        int halvings = 0;
        bool accepted = false;
        EmbeddingMap trial = e;
        while (halvings < 40 && !accepted) {
            for (std::size_t c = 0; c < e.channels.size(); ++c)
                for (std::size_t i = 0; i < s.size(); ++i)
                    trial.channels[c][i] = e.channels[c][i] + dt_eff * ops[c][i];
            const double ta = polyakov_action(trial, induced_metric(trial));
            if (ta <= action + 1e-12 * (1.0 + std::abs(action))) {
                e = std::move(trial);
                action = ta;
                accepted = true;
            } else {
                dt_eff *= 0.5;
                ++halvings;
                trial = e;
            }
        }
        if (!accepted) dt_eff = 0.0;  // stationary to round-off

        time += dt_eff;
        result.trace.add_row(step, time, action, vmax, {dt_eff, static_cast<double>(halvings)});
    }
    result.embedding = std::move(e);
    return result;
}

PolyakovFunctional::PolyakovFunctional(EmbeddingMap base, InducedMetric frozen, std::size_t channel)
    : base_(std::move(base)), frozen_(std::move(frozen)), channel_(channel) {
    base_.validate();
    require_spd(frozen_);
    if (channel_ >= base_.channels.size())
        throw std::invalid_argument("PolyakovFunctional: bad channel");
}

double PolyakovFunctional::evaluate(std::span<const double> state) const {
    EmbeddingMap probe = base_;
    probe.channels[channel_] =
        ScalarField(base_.spec(), std::vector<double>(state.begin(), state.end()));
    return polyakov_action(probe, frozen_);
}

std::vector<double> PolyakovFunctional::raw_variation(std::span<const double> state) const {
    const GridSpec& s = base_.spec();
    const ScalarField x(s, std::vector<double>(state.begin(), state.end()));
    const VectorField flux = metric_flux(x, frozen_);
    const ScalarField adj = gradient_adjoint(flux);
    std::vector<double> raw(state.size());
    const double scale = 2.0 * base_.beta * base_.beta * s.hx * s.hy;
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = scale * adj[i];
    return raw;
}

}  // namespace varflow
