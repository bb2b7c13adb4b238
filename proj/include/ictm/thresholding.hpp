#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ictm/grid.hpp"

namespace ictm {

struct ThresholdResult {
    IndicatorField chi;
    /// Phi at the last selected node; -infinity when nothing is selected.
    double sigma = 0.0;
    std::size_t target_ones = 0;
};

/// Marks the `target` nodes with the smallest phi, ties broken by ascending
/// node index. Throws if target exceeds the node count or phi has NaNs.
std::vector<std::uint8_t> select_smallest(std::span<const double> phi, std::size_t target,
                                          double* sigma = nullptr);

ThresholdResult volume_threshold(const ScalarField& phi, std::size_t target_ones);

/// Nodes the thresholding step would switch on (A) and off (B).
struct PredictionSets {
    std::vector<std::size_t> A;  // chi^k = 0 and Phi <= sigma, Phi ascending
    std::vector<std::size_t> B;  // chi^k = 1 and Phi > sigma, Phi descending
    double sigma = 0.0;
    std::size_t N = 0;           // |A| = |B| after equalisation
};

PredictionSets prediction_sets(std::span<const double> phi, std::span<const std::uint8_t> chi,
                               std::size_t target_ones);
PredictionSets prediction_sets(const ScalarField& phi, const IndicatorField& chi,
                               std::size_t target_ones);

/// chi + 1_{first m of A} - 1_{first m of B}.
IndicatorField apply_flips(const IndicatorField& chi, const PredictionSets& sets, std::size_t m);

}  // namespace ictm
