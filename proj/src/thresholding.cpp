#include "ictm/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ictm {

std::vector<std::uint8_t> select_smallest(std::span<const double> phi, std::size_t target,
                                          double* sigma) {
    if (target > phi.size())
        throw std::invalid_argument("volume target " + std::to_string(target) +
                                    " exceeds the node count " + std::to_string(phi.size()));
    for (double v : phi)
        if (std::isnan(v)) throw std::invalid_argument("sensitivity field contains NaN");

    std::vector<std::uint8_t> selected(phi.size(), 0);
    if (target == 0) {
        if (sigma) *sigma = -std::numeric_limits<double>::infinity();
        return selected;
    }
    std::vector<std::size_t> order(phi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
        return phi[a] < phi[b] || (phi[a] == phi[b] && a < b);
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(target - 1),
                     order.end(), less);
    const std::size_t pivot = order[target - 1];
    for (std::size_t i = 0; i < target; ++i) selected[order[i]] = 1;
    if (sigma) *sigma = phi[pivot];
    return selected;
}

ThresholdResult volume_threshold(const ScalarField& phi, std::size_t target_ones) {
    ThresholdResult r;
    auto sel = select_smallest(phi.values(), target_ones, &r.sigma);
    r.chi = IndicatorField(phi.grid(), std::move(sel));
    r.target_ones = target_ones;
    return r;
}

PredictionSets prediction_sets(std::span<const double> phi, std::span<const std::uint8_t> chi,
                               std::size_t target_ones) {
    if (phi.size() != chi.size()) throw std::invalid_argument("field size mismatch");
    const auto ones = static_cast<std::size_t>(std::count(chi.begin(), chi.end(), 1));
    if (ones != target_ones)
        throw std::invalid_argument("current design has " + std::to_string(ones) +
                                    " ones, volume target is " + std::to_string(target_ones));

    PredictionSets sets;
    select_smallest(phi, target_ones, &sets.sigma);
    for (std::size_t p = 0; p < phi.size(); ++p) {
        if (chi[p] == 0 && phi[p] <= sets.sigma) sets.A.push_back(p);
        if (chi[p] == 1 && phi[p] > sets.sigma) sets.B.push_back(p);
    }
    std::sort(sets.A.begin(), sets.A.end(), [&](std::size_t a, std::size_t b) {
        return phi[a] < phi[b] || (phi[a] == phi[b] && a < b);
    });
    std::sort(sets.B.begin(), sets.B.end(), [&](std::size_t a, std::size_t b) {
        return phi[a] > phi[b] || (phi[a] == phi[b] && a < b);
    });
    // Ties at sigma can unbalance the sets; drop the least favourable tails.
    sets.N = std::min(sets.A.size(), sets.B.size());
    sets.A.resize(sets.N);
    sets.B.resize(sets.N);
    return sets;
}

PredictionSets prediction_sets(const ScalarField& phi, const IndicatorField& chi,
                               std::size_t target_ones) {
    require_same_grid(phi.grid(), chi.grid(), "prediction_sets");
    return prediction_sets(phi.values(), chi.values(), target_ones);
}

IndicatorField apply_flips(const IndicatorField& chi, const PredictionSets& sets, std::size_t m) {
    if (m > sets.N) throw std::invalid_argument("flip count exceeds the prediction set size");
    std::vector<std::uint8_t> v(chi.values().begin(), chi.values().end());
    for (std::size_t i = 0; i < m; ++i) {
        v[sets.A[i]] = 1;
        v[sets.B[i]] = 0;
    }
    return IndicatorField(chi.grid(), std::move(v));
}

}  // namespace ictm
