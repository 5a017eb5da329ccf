#include "varflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace varflow {

void GridSpec::validate() const {
    if (nx < 3 || ny < 3) throw std::invalid_argument("GridSpec: nx and ny must be >= 3");
    if (!(hx > 0.0) || !(hy > 0.0)) throw std::invalid_argument("GridSpec: hx and hy must be > 0");
}

ScalarField::ScalarField(GridSpec spec, double fill) : spec_(spec) {
    spec_.validate();
    values_.assign(spec_.size(), fill);
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.size())
        throw std::invalid_argument("ScalarField: values length must equal nx*ny");
}

double ScalarField::clamped(int x, int y) const {
    x = std::clamp(x, 0, spec_.nx - 1);
    y = std::clamp(y, 0, spec_.ny - 1);
    return at(x, y);
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

VectorField::VectorField(ScalarField u_, ScalarField v_) : u(std::move(u_)), v(std::move(v_)) {
    if (!(u.spec() == v.spec()))
        throw std::invalid_argument("VectorField: components must share one GridSpec");
}

namespace {

void require_finite(const ScalarField& f, const char* who) {
    if (!f.all_finite()) throw std::invalid_argument(std::string(who) + ": non-finite values in input");
}

}  // namespace

VectorField gradient(const ScalarField& f, DiffScheme scheme) {
    require_finite(f, "gradient");
    const GridSpec& s = f.spec();
    ScalarField u(s), v(s);
    for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
            double du = 0.0, dv = 0.0;
            switch (scheme) {
                case DiffScheme::Central:
                    du = (f.clamped(x + 1, y) - f.clamped(x - 1, y)) / (2.0 * s.hx);
                    dv = (f.clamped(x, y + 1) - f.clamped(x, y - 1)) / (2.0 * s.hy);
                    break;
                case DiffScheme::Forward:
                    du = (f.clamped(x + 1, y) - f.at(x, y)) / s.hx;
                    dv = (f.clamped(x, y + 1) - f.at(x, y)) / s.hy;
                    break;
                case DiffScheme::Backward:
                    du = (f.at(x, y) - f.clamped(x - 1, y)) / s.hx;
                    dv = (f.at(x, y) - f.clamped(x, y - 1)) / s.hy;
                    break;
            }
            u.at(x, y) = du;
            v.at(x, y) = dv;
        }
    }
    return {std::move(u), std::move(v)};
}

ScalarField divergence(const VectorField& w, DivScheme scheme) {
    require_finite(w.u, "divergence");
    require_finite(w.v, "divergence");
    const GridSpec& s = w.spec();
    ScalarField out(s);
    for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
            double d = 0.0;
            switch (scheme) {
                case DivScheme::Central:
                    d = (w.u.clamped(x + 1, y) - w.u.clamped(x - 1, y)) / (2.0 * s.hx) +
                        (w.v.clamped(x, y + 1) - w.v.clamped(x, y - 1)) / (2.0 * s.hy);
                    break;
                case DivScheme::UpwindPair:
                    d = (w.u.at(x, y) - w.u.clamped(x - 1, y)) / s.hx +
                        (w.v.at(x, y) - w.v.clamped(x, y - 1)) / s.hy;
                    break;
            }
            out.at(x, y) = d;
        }
    }
    return out;
}

namespace {

// Columns of the 1D replicate-boundary central-difference matrix, transposed.
// Rows of D:  (Dv)_0 = (v1 - v0)/2h,  (Dv)_i = (v_{i+1} - v_{i-1})/2h,
//             (Dv)_{n-1} = (v_{n-1} - v_{n-2})/2h.
double dtranspose_1d(const std::vector<double>& line, int q, double h) {
    const int n = static_cast<int>(line.size());
    if (q == 0) return (-line[0] - line[1]) / (2.0 * h);
    if (q == n - 1) return (line[n - 2] + line[n - 1]) / (2.0 * h);
    return (line[q - 1] - line[q + 1]) / (2.0 * h);
}

}  // namespace

ScalarField gradient_adjoint(const VectorField& w) {
    const GridSpec& s = w.spec();
    ScalarField out(s);
    std::vector<double> line;
    // Dx^T applied row by row
    line.resize(s.nx);
    for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) line[x] = w.u.at(x, y);
        for (int x = 0; x < s.nx; ++x) out.at(x, y) += dtranspose_1d(line, x, s.hx);
    }
    // Dy^T applied column by column
    line.resize(s.ny);
    for (int x = 0; x < s.nx; ++x) {
        for (int y = 0; y < s.ny; ++y) line[y] = w.v.at(x, y);
        for (int y = 0; y < s.ny; ++y) out.at(x, y) += dtranspose_1d(line, y, s.hy);
    }
    return out;
}

ScalarField gaussian_smooth(const ScalarField& f, double sigma) {
    require_finite(f, "gaussian_smooth");
    if (sigma < 0.0) throw std::invalid_argument("gaussian_smooth: sigma must be >= 0");
    if (sigma == 0.0) return f;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
        sum += kernel[k + radius];
    }
    for (double& w : kernel) w /= sum;

    const GridSpec& s = f.spec();
    ScalarField tmp(s), out(s);
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * f.clamped(x + k, y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < s.ny; ++y)
        for (int x = 0; x < s.nx; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp.clamped(x, y + k);
            out.at(x, y) = acc;
        }
    return out;
}

double bilinear_sample(const ScalarField& f, double x, double y) {
    return bilinear_sample_grad(f, x, y).value;
}

SampleGrad bilinear_sample_grad(const ScalarField& f, double x, double y) {
    const GridSpec& s = f.spec();
    double gx = x / s.hx;
    double gy = y / s.hy;
    const bool clamped_x = gx <= 0.0 || gx >= s.nx - 1;
    const bool clamped_y = gy <= 0.0 || gy >= s.ny - 1;
    gx = std::clamp(gx, 0.0, static_cast<double>(s.nx - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(s.ny - 1));

    int i0 = std::min(static_cast<int>(gx), s.nx - 2);
    int j0 = std::min(static_cast<int>(gy), s.ny - 2);
    const double tx = gx - i0;
    const double ty = gy - j0;

    const double f00 = f.at(i0, j0);
    const double f10 = f.at(i0 + 1, j0);
    const double f01 = f.at(i0, j0 + 1);
    const double f11 = f.at(i0 + 1, j0 + 1);

    SampleGrad g;
    g.value = (1.0 - tx) * (1.0 - ty) * f00 + tx * (1.0 - ty) * f10 + (1.0 - tx) * ty * f01 +
              tx * ty * f11;
    g.ddx = clamped_x ? 0.0 : ((f10 - f00) * (1.0 - ty) + (f11 - f01) * ty) / s.hx;
    g.ddy = clamped_y ? 0.0 : ((f01 - f00) * (1.0 - tx) + (f11 - f10) * tx) / s.hy;
    return g;
}

}  // namespace varflow
