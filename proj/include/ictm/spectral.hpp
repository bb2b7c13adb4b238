#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ictm/grid.hpp"

namespace ictm {

/// How a nodal field is continued outside the box before the transform.
///   mirror   - even reflection about the end nodes on every axis (DCT-I).
///   periodic - the node array is treated as one period of a periodic signal.
enum class Extension { mirror, periodic };

Extension parse_extension(std::string_view s);
std::string_view to_string(Extension e);

struct KernelParams {
    double tau = 1e-4;
    Extension extension = Extension::mirror;
};

namespace detail {
struct SpectralPlan;
}

/// Heat-kernel smoothing u -> G_tau * u on a fixed grid.
///
/// Works in the spectral domain with the exact continuum symbol
/// exp(-tau |omega|^2), so filters compose exactly: G_a * G_b = G_{a+b}.
/// FFTW plans are shared between filters with the same grid shape and
/// extension; applying a filter is safe from any thread.
class GaussianFilter {
public:
    GaussianFilter(const GridSpec& grid, KernelParams params);

    const GridSpec& grid() const { return grid_; }
    const KernelParams& params() const { return params_; }

    std::vector<double> apply(std::span<const double> u) const;
    ScalarField apply(const ScalarField& u) const;

    /// Nodal quadrature weights under which the filter is self-adjoint:
    /// trapezoidal for the mirror extension, uniform cell volume otherwise.
    std::span<const double> weights() const { return weights_; }

    /// Sum_i w_i a_i b_i with the weights above.
    double inner(std::span<const double> a, std::span<const double> b) const;

    /// Diagonal entry of the discrete smoothing operator at node p.
    double diagonal(std::size_t p) const;

private:
    GridSpec grid_;
    KernelParams params_;
    std::shared_ptr<const detail::SpectralPlan> plan_;
    std::vector<double> multiplier_;
    std::vector<double> weights_;
};

/// Spectral heat-kernel convolution. Throws on invalid tau.
ScalarField convolve(const ScalarField& u, const KernelParams& k);

/// sqrt(pi/tau) * integral of chi * G_tau*(1 - chi), the convolution
/// estimate of the interface length (2D) or area (3D).
double perimeter_estimate(const IndicatorField& chi, const KernelParams& k);

/// Smoothed indicator value used for blending: clipped to [0,1], since the
/// truncated spectral kernel rings by O(1e-2) when tau is close to h^2.
inline double blend_fraction(double smoothed) {
    return smoothed < 0.0 ? 0.0 : (smoothed > 1.0 ? 1.0 : smoothed);
}

struct BlendedMaterials {
    ScalarField kappa;
    ScalarField q;
};

/// kappa = k2 + (k1 - k2) G*chi and q = q2 + (q1 - q2) G*chi, with G*chi
/// passed through blend_fraction.
BlendedMaterials blend_materials(const IndicatorField& chi, double kappa1, double kappa2,
                                 double q1, double q2, const KernelParams& k);

}  // namespace ictm
