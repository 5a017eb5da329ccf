#pragma once

// Images as surfaces: the Polyakov action for a graph embedding
// (x, y, beta*I^1, ..., beta*I^k), the induced metric, and the Beltrami flow
// dI/dt = (1/sqrt(g)) div(sqrt(g) G^{-1} grad I) on the intensity channels.

#include <cstddef>
#include <vector>

#include "varflow/grid.hpp"
#include "varflow/trace.hpp"
#include "varflow/variation.hpp"

namespace varflow {

struct EmbeddingMap {
    std::vector<ScalarField> channels;  // intensity coordinates (unscaled)
    double beta = 1.0;                  // intensity/space aspect ratio

    void validate() const;  // shared spec, beta > 0, finite values
    const GridSpec& spec() const { return channels.front().spec(); }
};

struct InducedMetric {
    ScalarField g11, g12, g22;
    ScalarField det_g;
};

/// g_{mu nu} = delta_{mu nu} + beta^2 sum_i d_mu I^i d_nu I^i with central
/// differences; det g >= 1 by construction.
InducedMetric induced_metric(const EmbeddingMap& e);

/// Flat metric (identity everywhere), det g = 1.
InducedMetric identity_metric(const GridSpec& spec);

/// sum over pixels of sqrt(g) [(grad X^i)^T G^{-1} grad X^i summed over all
/// embedding coordinates] hx hy. The two spatial maps contribute trace(G^{-1})
/// exactly; intensity channels use central-difference gradients scaled by beta.
double polyakov_action(const EmbeddingMap& e, const InducedMetric& m);

/// (1/sqrt(g)) div(sqrt(g) G^{-1} grad I_channel) in flux form with central
/// differences. Vanishes on linear channels paired with their induced metric
/// (planes are minimal surfaces).
ScalarField beltrami_operator(const EmbeddingMap& e, const InducedMetric& m, std::size_t channel);

struct BeltramiEvolveParams {
    double dt = 0.2;
    int steps = 100;
    int refreeze_every = 1;  // recompute the induced metric every k steps
};

struct BeltramiResult {
    EmbeddingMap embedding;
    EvolutionTrace trace;  // extras: dt_eff, halvings
};

/// Explicit Euler on the intensity channels only (graph flow; the spatial
/// coordinates are not evolved), dt clamped to 0.2*min(hx,hy)^2 and halved
/// whenever a step would raise the action.
BeltramiResult evolve_beltrami(EmbeddingMap e, const BeltramiEvolveParams& params);

/// Polyakov action with a frozen metric as a functional of one channel's pixel
/// values; raw_variation applies the exact discrete adjoint of the flux form,
/// i.e. 2 beta^2 Dadj(sqrt(g) G^{-1} grad X) hx hy, which equals
/// -2 beta^2 div(sqrt(g) G^{-1} grad X) hx hy away from the boundary strip.
class PolyakovFunctional : public DiscreteFunctional {
public:
    PolyakovFunctional(EmbeddingMap base, InducedMetric frozen, std::size_t channel);

    std::size_t dof() const override { return base_.spec().size(); }
    double evaluate(std::span<const double> state) const override;
    std::vector<double> raw_variation(std::span<const double> state) const override;

    const InducedMetric& metric() const { return frozen_; }

private:
    EmbeddingMap base_;
    InducedMetric frozen_;
    std::size_t channel_;
};

}  // namespace varflow
