#include "varflow/chanvese.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace varflow {

void CvParams::validate() const {
    if (!(mu >= 0.0)) throw std::invalid_argument("CvParams: mu must be >= 0");
    if (!(eps_h > 0.0)) throw std::invalid_argument("CvParams: eps_h must be > 0");
    if (!(eps_grad > 0.0)) throw std::invalid_argument("CvParams: eps_grad must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("CvParams: dt must be > 0");
    if (reinit_every < 0) throw std::invalid_argument("CvParams: reinit_every must be >= 0");
    if (max_steps < 1) throw std::invalid_argument("CvParams: max_steps must be >= 1");
    if (!(tol >= 0.0)) throw std::invalid_argument("CvParams: tol must be >= 0");
}

HeavisideDelta heaviside_delta(double s, double eps_h) {
    if (!(eps_h > 0.0)) throw std::invalid_argument("heaviside_delta: eps_h must be > 0");
    HeavisideDelta hd;
    hd.h = 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(s / eps_h));
    hd.delta = (1.0 / std::numbers::pi) * eps_h / (eps_h * eps_h + s * s);
    return hd;
}

RegionStats region_means(const ScalarField& image, const ScalarField& phi, double eps_h) {
    if (!(image.spec() == phi.spec()))
        throw std::invalid_argument("region_means: image and phi specs differ");
    double num1 = 0.0, den1 = 0.0, num2 = 0.0, den2 = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double h = heaviside_delta(phi[i], eps_h).h;
        num1 += image[i] * h;
        den1 += h;
        num2 += image[i] * (1.0 - h);
        den2 += 1.0 - h;
    }
    if (den1 < 1e-12 || den2 < 1e-12)
        throw std::domain_error("region_means: one-sided phi (a region has no mass)");
    return {num1 / den1, num2 / den2};
}

namespace {

ScalarField heaviside_field(const ScalarField& phi, double eps_h) {
    ScalarField h(phi.spec());
    for (std::size_t i = 0; i < phi.size(); ++i) h[i] = heaviside_delta(phi[i], eps_h).h;
    return h;
}

}  // namespace

double cv_energy(const LevelSetState& state, const CvParams& params) {
    params.validate();
    const GridSpec& s = state.phi.spec();
    const double hxhy = s.hx * s.hy;
    // length term via the co-area identity |grad H(phi)| = delta(phi)|grad phi|;
    // discretized as the gradient magnitude of the composite H(phi), whose
    // exact derivative is the raw-variation formula below
    const VectorField g = gradient(heaviside_field(state.phi, params.eps_h), DiffScheme::Central);
    double e = 0.0;
    for (std::size_t i = 0; i < state.phi.size(); ++i) {
        const HeavisideDelta hd = heaviside_delta(state.phi[i], params.eps_h);
        const double din = state.image[i] - state.stats.c1;
        const double dout = state.image[i] - state.stats.c2;
        const double mag = std::hypot(g.u[i], g.v[i]);
        e += (din * din * hd.h + dout * dout * (1.0 - hd.h) + params.mu * mag) * hxhy;
    }
    return e;
}

namespace {

// mu * Div(grad phi / (|grad phi| + eps)). The evolution uses the
// forward/backward pairing; the raw variation uses the all-central form,
// which is the closer semi-analytic match to the central-gradient length
// term in the discrete energy.
ScalarField curvature_term(const ScalarField& phi, double mu, double eps_grad, bool upwind_pair) {
    VectorField g = gradient(phi, upwind_pair ? DiffScheme::Forward : DiffScheme::Central);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double mag = std::hypot(g.u[i], g.v[i]) + eps_grad;
        g.u[i] /= mag;
        g.v[i] /= mag;
    }
    ScalarField div = divergence(g, upwind_pair ? DivScheme::UpwindPair : DivScheme::Central);
    for (std::size_t i = 0; i < div.size(); ++i) div[i] *= mu;
    return div;
}

}  // namespace

ScalarField cv_bracket(const LevelSetState& state, const CvParams& params) {
    ScalarField b = curvature_term(state.phi, params.mu, params.eps_grad, /*upwind_pair=*/true);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double din = state.image[i] - state.stats.c1;
        const double dout = state.image[i] - state.stats.c2;
        b[i] += -din * din + dout * dout;
    }
    return b;
}

ScalarField cv_velocity(const LevelSetState& state, const CvParams& params, CvMode mode) {
    params.validate();
    ScalarField v = cv_bracket(state, params);
    if (mode == CvMode::Classical) {
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] *= heaviside_delta(state.phi[i], params.eps_h).delta;
    } else {
        const VectorField g = gradient(state.phi, DiffScheme::Central);
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] /= std::hypot(g.u[i], g.v[i]) + params.eps_grad;
    }
    return v;
}

ScalarField cv_raw_variation(const LevelSetState& state, const CvParams& params) {
    params.validate();
    const GridSpec& s = state.phi.spec();
    const double hxhy = s.hx * s.hy;
    // unit normal of the level sets from grad H (same direction as grad phi
    // wherever delta > 0); the adjoint equals -Div up to the boundary rows, so
    // this is the exact derivative of the discrete length term above
    VectorField m = gradient(heaviside_field(state.phi, params.eps_h), DiffScheme::Central);
    for (std::size_t i = 0; i < m.u.size(); ++i) {
        const double mag = std::hypot(m.u[i], m.v[i]);
        if (mag > 0.0) {
            m.u[i] /= mag;
            m.v[i] /= mag;
        }
    }
    const ScalarField neg_div = gradient_adjoint(m);
    ScalarField raw(s);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double din = state.image[i] - state.stats.c1;
        const double dout = state.image[i] - state.stats.c2;
        raw[i] = heaviside_delta(state.phi[i], params.eps_h).delta *
                 (din * din - dout * dout + params.mu * neg_div[i]) * hxhy;
    }
    return raw;
}

// ---------------------------------------------------------------------------
// reinitialization by fast sweeping

namespace {

// Godunov update for |grad d| = 1 given the smaller neighbor values a (x axis)
// and b (y axis).
double eikonal_update(double a, double b, double hx, double hy) {
    const bool ha = std::isfinite(a), hb = std::isfinite(b);
    if (!ha && !hb) return std::numeric_limits<double>::infinity();
    if (!hb) return a + hx;
    if (!ha) return b + hy;
    // try the two-sided solution of ((d-a)/hx)^2 + ((d-b)/hy)^2 = 1
    const double ix2 = 1.0 / (hx * hx), iy2 = 1.0 / (hy * hy);
    const double A = ix2 + iy2;
    const double B = -2.0 * (a * ix2 + b * iy2);
    const double C = a * a * ix2 + b * b * iy2 - 1.0;
    const double disc = B * B - 4.0 * A * C;
    if (disc >= 0.0) {
        const double d = (-B + std::sqrt(disc)) / (2.0 * A);
        if (d >= std::max(a, b)) return d;
    }
    return std::min(a + hx, b + hy);  // one-sided fallback
}

}  // namespace

ScalarField reinitialize(const ScalarField& phi, double band) {
    (void)band;  // accuracy-contract parameter; the sweep covers the full grid
    const GridSpec& s = phi.spec();
    if (!phi.all_finite()) throw std::invalid_argument("reinitialize: non-finite phi");

    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (phi[i] > 0.0) has_pos = true;
        if (phi[i] < 0.0) has_neg = true;
    }
    if (!has_pos || !has_neg)
        throw std::domain_error("reinitialize: phi must change sign somewhere");

    const double inf = std::numeric_limits<double>::infinity();
    ScalarField dist(s, inf);

    // sub-pixel distances on interface-adjacent pixels: linear interpolation
    // per axis combined as d = dx dy / sqrt(dx^2 + dy^2) (distance to the line
    // through the two crossings), refined by the local gradient estimate
    // |phi| / |grad phi|, which is exact for scaled distance functions
    const VectorField grad_phi = gradient(phi, DiffScheme::Central);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            const double p = phi.at(x, y);
            if (p == 0.0) {
                dist.at(x, y) = 0.0;
                continue;
            }
            double dx = inf, dy = inf;
            for (int step : {-1, 1}) {
                const int xn = x + step;
                if (xn >= 0 && xn < s.nx && p * phi.at(xn, y) < 0.0)
                    dx = std::min(dx, s.hx * std::abs(p) / (std::abs(p) + std::abs(phi.at(xn, y))));
                const int yn = y + step;
                if (yn >= 0 && yn < s.ny && p * phi.at(x, yn) < 0.0)
                    dy = std::min(dy, s.hy * std::abs(p) / (std::abs(p) + std::abs(phi.at(x, yn))));
            }
            double d = inf;
            if (std::isfinite(dx) && std::isfinite(dy)) d = dx * dy / std::hypot(dx, dy);
            else if (std::isfinite(dx)) d = dx;
            else if (std::isfinite(dy)) d = dy;
            if (std::isfinite(d)) {
                const double mag = std::hypot(grad_phi.u.at(x, y), grad_phi.v.at(x, y));
                if (mag > 1e-12) {
                    const double dg = std::abs(p) / mag;
                    if (dg <= std::hypot(s.hx, s.hy)) d = std::min(d, dg);
                }
                dist.at(x, y) = d;
            }
        }

    // 4 sweep orders, repeated twice; diagonal neighbors enter as one-sided
    // bounds, which removes most of the 4-stencil overshoot along diagonals
    const double hdiag = std::hypot(s.hx, s.hy);
    for (int cycle = 0; cycle < 2; ++cycle) {
        for (int order = 0; order < 4; ++order) {
            const bool xup = order & 1, yup = order & 2;
            for (int jj = 0; jj < s.ny; ++jj) {
                const int y = yup ? jj : s.ny - 1 - jj;
                for (int ii = 0; ii < s.nx; ++ii) {
                    const int x = xup ? ii : s.nx - 1 - ii;
                    const double a = std::min(x > 0 ? dist.at(x - 1, y) : inf,
                                              x < s.nx - 1 ? dist.at(x + 1, y) : inf);
                    const double b = std::min(y > 0 ? dist.at(x, y - 1) : inf,
                                              y < s.ny - 1 ? dist.at(x, y + 1) : inf);
                    double d = eikonal_update(a, b, s.hx, s.hy);
                    for (int sx : {-1, 1})
                        for (int sy : {-1, 1}) {
                            const int xn = x + sx, yn = y + sy;
                            if (xn >= 0 && xn < s.nx && yn >= 0 && yn < s.ny)
                                d = std::min(d, dist.at(xn, yn) + hdiag);
                        }
                    if (d < dist.at(x, y)) dist.at(x, y) = d;
                }
            }
        }
    }

    ScalarField out(s);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            const double p = phi.at(x, y);
            out.at(x, y) = p > 0.0 ? dist.at(x, y) : (p < 0.0 ? -dist.at(x, y) : 0.0);
        }
    return out;
}

// ---------------------------------------------------------------------------
// evolution

CvResult evolve_cv(const ScalarField& image, const ScalarField& phi0, const CvParams& params,
                   CvMode mode) {
    params.validate();
    if (!(image.spec() == phi0.spec()))
        throw std::invalid_argument("evolve_cv: image and phi0 specs differ");
    const GridSpec& s = image.spec();
    const double h = std::min(s.hx, s.hy);

    LevelSetState state{phi0, image, {0.0, 0.0}};
    CvResult result{state, EvolutionTrace({"c1", "c2", "dt_eff", "reinit"}), false, false, 0};

    double time = 0.0;
    for (int step = 1; step <= params.max_steps; ++step) {
        bool reinit_done = false;
        if (params.reinit_every > 0 && step > 1 && (step - 1) % params.reinit_every == 0) {
            state.phi = reinitialize(state.phi);
            reinit_done = true;
        }

        // alternate minimization: means first (never increases the energy)
        state.stats = region_means(state.image, state.phi, params.eps_h);
        const double energy_before = cv_energy(state, params);

        const ScalarField vel = cv_velocity(state, params, mode);
        const VectorField g = gradient(state.phi, DiffScheme::Central);

        // stability clamps from pixels where the level-set structure is
        // regular; ridge/critical pixels of phi (medial axis, extrema) have
        // near-zero central gradients and are handled by the per-pixel
        // increment cap below instead of throttling the global step
        double grad_min_band = std::numeric_limits<double>::infinity();
        double vmax_regular = 0.0;
        for (std::size_t i = 0; i < vel.size(); ++i) {
            const double mag = std::hypot(g.u[i], g.v[i]);
            if (std::abs(state.phi[i]) <= 3.0 * params.eps_h)
                grad_min_band = std::min(grad_min_band, std::max(mag, 0.05) + params.eps_grad);
            if (mag >= 0.5) vmax_regular = std::max(vmax_regular, std::abs(vel[i]));
        }
        if (!std::isfinite(grad_min_band)) grad_min_band = 1.0;

        double dt_eff = params.dt;
        if (params.mu > 0.0) dt_eff = std::min(dt_eff, 0.2 * h * h * grad_min_band / params.mu);
        if (vmax_regular > 0.0) dt_eff = std::min(dt_eff, 0.5 * h / vmax_regular);

        const double cap = 0.49 * h;  // max phi change per pixel per step
        ScalarField trial(s);
        double e_new = energy_before;
        bool accepted = false;
        for (int halving = 0; halving < 40 && !accepted; ++halving) {
            for (std::size_t i = 0; i < trial.size(); ++i)
                trial[i] = state.phi[i] + std::clamp(dt_eff * vel[i], -cap, cap);
            const LevelSetState probe{trial, state.image, state.stats};
            e_new = cv_energy(probe, params);
            if (e_new <= energy_before + 1e-12 * (1.0 + std::abs(energy_before)))
                accepted = true;
            else
                dt_eff *= 0.5;
        }
        if (accepted) {
            state.phi = trial;
        } else {
            dt_eff = 0.0;
            e_new = energy_before;
        }

        time += dt_eff;
        result.trace.add_row(step, time, e_new, vmax_regular,
                             {state.stats.c1, state.stats.c2, dt_eff, reinit_done ? 1.0 : 0.0});
        result.steps_run = step;

        bool pos = false, neg = false;
        for (std::size_t i = 0; i < state.phi.size(); ++i) {
            if (state.phi[i] > 0.0) pos = true;
            if (state.phi[i] < 0.0) neg = true;
        }
        if (!pos || !neg) {
            result.collapsed = true;
            break;
        }
        if (vmax_regular < params.tol) {
            result.converged = true;
            break;
        }
    }

    result.state = std::move(state);
    return result;
}

CvFunctional::CvFunctional(ScalarField image, RegionStats stats, CvParams params)
    : image_(std::move(image)), stats_(stats), params_(params) {
    params_.validate();
}

double CvFunctional::evaluate(std::span<const double> state) const {
    const LevelSetState st{ScalarField(image_.spec(), std::vector<double>(state.begin(), state.end())),
                           image_, stats_};
    return cv_energy(st, params_);
}

std::vector<double> CvFunctional::raw_variation(std::span<const double> state) const {
    const LevelSetState st{ScalarField(image_.spec(), std::vector<double>(state.begin(), state.end())),
                           image_, stats_};
    const ScalarField raw = cv_raw_variation(st, params_);
    return raw.values();
}

}  // namespace varflow
