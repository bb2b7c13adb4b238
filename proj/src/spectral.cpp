#include "ictm/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ictm {

Extension parse_extension(std::string_view s) {
    if (s == "mirror") return Extension::mirror;
    if (s == "periodic") return Extension::periodic;
    throw std::invalid_argument("unknown kernel extension '" + std::string(s) +
                                "' (expected mirror|periodic)");
}

std::string_view to_string(Extension e) {
    return e == Extension::mirror ? "mirror" : "periodic";
}

namespace detail {

namespace {
// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct SpectralPlan {
    Extension extension;
    std::vector<int> dims;  // slowest axis first, FFTW order
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    SpectralPlan(Extension ext, std::vector<int> d) : extension(ext), dims(std::move(d)) {
        real_size = 1;
        for (int n : dims) real_size *= static_cast<std::size_t>(n);
        const int rank = static_cast<int>(dims.size());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

        std::lock_guard lock(planner_mutex());
        if (ext == Extension::mirror) {
            std::vector<double> buf(real_size);
            std::vector<fftw_r2r_kind> kinds(dims.size(), FFTW_REDFT00);
            forward = fftw_plan_r2r(rank, dims.data(), buf.data(), buf.data(), kinds.data(), flags);
            backward = forward;  // DCT-I is its own inverse up to scaling
        } else {
            complex_size = real_size / dims.back() * (dims.back() / 2 + 1);
            std::vector<double> rbuf(real_size);
            auto* cbuf = fftw_alloc_complex(complex_size);
            forward = fftw_plan_dft_r2c(rank, dims.data(), rbuf.data(), cbuf, flags);
            backward = fftw_plan_dft_c2r(rank, dims.data(), cbuf, rbuf.data(), flags);
            fftw_free(cbuf);
        }
        if (!forward || !backward) throw std::runtime_error("FFTW failed to create a plan");
    }

    ~SpectralPlan() {
        std::lock_guard lock(planner_mutex());
        if (backward && backward != forward) fftw_destroy_plan(backward);
        if (forward) fftw_destroy_plan(forward);
    }

    SpectralPlan(const SpectralPlan&) = delete;
    SpectralPlan& operator=(const SpectralPlan&) = delete;
};

namespace {
std::shared_ptr<const SpectralPlan> cached_plan(Extension ext, const std::vector<int>& dims) {
    static std::mutex cache_mutex;
    static std::map<std::tuple<int, std::vector<int>>, std::shared_ptr<const SpectralPlan>> cache;
    std::lock_guard lock(cache_mutex);
    auto key = std::make_tuple(static_cast<int>(ext), dims);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto plan = std::make_shared<const SpectralPlan>(ext, dims);
    cache.emplace(std::move(key), plan);
    return plan;
}
}  // namespace

}  // namespace detail

GaussianFilter::GaussianFilter(const GridSpec& grid, KernelParams params)
    : grid_(grid), params_(params) {
    if (!(params.tau > 0.0) || !std::isfinite(params.tau))
        throw std::invalid_argument("kernel width tau must be positive");
    if (grid.dim() != 2 && grid.dim() != 3) throw std::invalid_argument("invalid grid");

    const int dim = grid.dim();
    std::vector<int> dims;
    for (int a = dim - 1; a >= 0; --a) dims.push_back(grid.nodes(a));
    plan_ = detail::cached_plan(params.extension, dims);

    constexpr double pi = std::numbers::pi;
    const double tau = params.tau;
    const int nx = grid.nodes(0), ny = grid.nodes(1), nz = grid.nodes(2);

    if (params.extension == Extension::mirror) {
        // Mode k on an axis of m cells has frequency pi k / L (period 2L).
        double scale = 1.0;
        for (int a = 0; a < dim; ++a) scale *= 2.0 * grid.cells(a);
        auto axis_symbol = [&](int a) {
            std::vector<double> s(grid.nodes(a));
            for (int k = 0; k < grid.nodes(a); ++k) {
                const double w = pi * k / grid.length(a);
                s[k] = std::exp(-tau * w * w);
            }
            return s;
        };
        auto sx = axis_symbol(0), sy = axis_symbol(1);
        std::vector<double> sz = dim == 3 ? axis_symbol(2) : std::vector<double>{1.0};
        multiplier_.resize(grid.node_count());
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx; ++i)
                    multiplier_[grid.index(i, j, k)] = sx[i] * sy[j] * sz[k] / scale;

        weights_.assign(grid.node_count(), grid.cell_volume());
        for (std::size_t p = 0; p < weights_.size(); ++p) {
            auto ijk = grid.ijk(p);
            for (int a = 0; a < dim; ++a)
                if (ijk[a] == 0 || ijk[a] == grid.cells(a)) weights_[p] *= 0.5;
        }
    } else {
        // n samples of spacing h form one period of length n h.
        const double scale = static_cast<double>(grid.node_count());
        auto axis_symbol = [&](int a, int count) {
            const int n = grid.nodes(a);
            std::vector<double> s(count);
            for (int k = 0; k < count; ++k) {
                const int kk = std::min(k, n - k);
                const double w = 2.0 * pi * kk / (n * grid.h(a));
                s[k] = std::exp(-tau * w * w);
            }
            return s;
        };
        const int nx_half = nx / 2 + 1;
        auto sx = axis_symbol(0, nx_half), sy = axis_symbol(1, ny);
        std::vector<double> sz = dim == 3 ? axis_symbol(2, nz) : std::vector<double>{1.0};
        multiplier_.resize(plan_->complex_size);
        for (int k = 0; k < nz; ++k)
            for (int j = 0; j < ny; ++j)
                for (int i = 0; i < nx_half; ++i)
                    multiplier_[i + static_cast<std::size_t>(nx_half) * (j + ny * k)] =
                        sx[i] * sy[j] * sz[k] / scale;
        weights_.assign(grid.node_count(), grid.cell_volume());
    }
}

std::vector<double> GaussianFilter::apply(std::span<const double> u) const {
    if (u.size() != grid_.node_count())
        throw std::invalid_argument("field size does not match the filter grid");
    for (double v : u)
        if (!std::isfinite(v)) throw std::invalid_argument("convolution input contains NaN/Inf");

    std::vector<double> out(u.begin(), u.end());
    if (params_.extension == Extension::mirror) {
        fftw_execute_r2r(plan_->forward, out.data(), out.data());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= multiplier_[i];
        fftw_execute_r2r(plan_->backward, out.data(), out.data());
    } else {
        auto* spec = fftw_alloc_complex(plan_->complex_size);
        fftw_execute_dft_r2c(plan_->forward, out.data(), spec);
        for (std::size_t i = 0; i < plan_->complex_size; ++i) {
            spec[i][0] *= multiplier_[i];
            spec[i][1] *= multiplier_[i];
        }
        fftw_execute_dft_c2r(plan_->backward, spec, out.data());
        fftw_free(spec);
    }
    return out;
}

ScalarField GaussianFilter::apply(const ScalarField& u) const {
    require_same_grid(u.grid(), grid_, "convolve");
    return ScalarField(grid_, apply(u.values()));
}

double GaussianFilter::inner(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * a[i] * b[i];
    return s;
}

double GaussianFilter::diagonal(std::size_t p) const {
    std::vector<double> e(grid_.node_count(), 0.0);
    e.at(p) = 1.0;
    return apply(e)[p];
}

ScalarField convolve(const ScalarField& u, const KernelParams& k) {
    return GaussianFilter(u.grid(), k).apply(u);
}

double perimeter_estimate(const IndicatorField& chi, const KernelParams& k) {
    GaussianFilter filter(chi.grid(), k);
    const auto chi_r = chi.as_real();
    const auto outside = filter.apply(chi.complement().as_real());
    return std::sqrt(std::numbers::pi / k.tau) * filter.inner(chi_r, outside);
}

BlendedMaterials blend_materials(const IndicatorField& chi, double kappa1, double kappa2,
                                 double q1, double q2, const KernelParams& k) {
    if (!(kappa1 > 0.0) || !(kappa2 > 0.0))
        throw std::invalid_argument("conductivities must be positive");
    GaussianFilter filter(chi.grid(), k);
    const auto smooth = filter.apply(chi.as_real());
    std::vector<double> kappa(smooth.size()), q(smooth.size());
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        const double f = blend_fraction(smooth[i]);
        kappa[i] = kappa2 + (kappa1 - kappa2) * f;
        q[i] = q2 + (q1 - q2) * f;
    }
    return {ScalarField(chi.grid(), std::move(kappa)), ScalarField(chi.grid(), std::move(q))};
}

}  // namespace ictm
