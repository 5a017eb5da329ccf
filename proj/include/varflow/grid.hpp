#pragma once

// Regular-grid scalar and vector fields with finite-difference operators.
//
// Conventions shared by every module:
//   - row-major storage, index = y*nx + x, with x = column and y = row
//   - grid node (x, y) sits at physical position (x*hx, y*hy)
//   - all stencils use Neumann boundaries via edge replication, so
//     constant fields have exactly zero gradient and zero divergence

#include <cstddef>
#include <vector>

namespace varflow {

struct GridSpec {
    int nx = 0;
    int ny = 0;
    double hx = 1.0;
    double hy = 1.0;

    bool operator==(const GridSpec&) const = default;
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double area() const { return static_cast<double>(nx) * ny * hx * hy; }
    void validate() const;  // nx >= 3, ny >= 3, hx > 0, hy > 0
};

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(GridSpec spec, double fill = 0.0);
    ScalarField(GridSpec spec, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    int nx() const { return spec_.nx; }
    int ny() const { return spec_.ny; }
    std::size_t size() const { return values_.size(); }

    double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * spec_.nx + x]; }
    double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * spec_.nx + x]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Access with edge replication (any integer coordinates).
    double clamped(int x, int y) const;

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;
    double min() const;
    double max() const;
    double mean() const;

private:
    GridSpec spec_;
    std::vector<double> values_;
};

struct VectorField {
    ScalarField u;  // x component
    ScalarField v;  // y component

    VectorField() = default;
    VectorField(ScalarField u_, ScalarField v_);
    const GridSpec& spec() const { return u.spec(); }
};

enum class DiffScheme { Central, Forward, Backward };

/// Divergence stencils. UpwindPair is the backward-difference divergence meant
/// to be composed with a forward-difference gradient (the usual pairing for
/// curvature stencils Div(grad phi / |grad phi|)).
enum class DivScheme { Central, UpwindPair };

VectorField gradient(const ScalarField& f, DiffScheme scheme = DiffScheme::Central);
ScalarField divergence(const VectorField& w, DivScheme scheme = DivScheme::Central);

/// Exact discrete adjoint of the central-difference gradient: returns
/// Dx^T u + Dy^T v for the replicate-boundary central stencil. Equals
/// -divergence(w) away from the two outermost rows/columns; the boundary rows
/// differ, which is what makes energy derivatives exact rather than O(1) wrong
/// on the boundary strip.
ScalarField gradient_adjoint(const VectorField& w);

/// Separable Gaussian convolution, kernel truncated at radius ceil(3*sigma)
/// and renormalized to sum 1, replicate boundary. sigma = 0 returns the input.
ScalarField gaussian_smooth(const ScalarField& f, double sigma);

/// Bilinear interpolation at physical coordinates (x, y); out-of-range
/// coordinates clamp to the domain.
double bilinear_sample(const ScalarField& f, double x, double y);

struct SampleGrad {
    double value = 0.0;
    double ddx = 0.0;
    double ddy = 0.0;
};

/// Bilinear sample together with the exact derivative of the interpolant
/// (zero in a clamped direction, matching what bilinear_sample computes).
SampleGrad bilinear_sample_grad(const ScalarField& f, double x, double y);

}  // namespace varflow
