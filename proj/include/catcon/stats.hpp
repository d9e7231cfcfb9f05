#pragma once

#include <span>
#include <vector>

namespace catcon {

[[nodiscard]] double mean(std::span<double const> xs);
/// Sample standard deviation (n - 1 denominator); 0 when fewer than 2 values.
[[nodiscard]] double sample_sd(std::span<double const> xs);
[[nodiscard]] double median(std::vector<double> xs);
/// Ranks starting at 1; tied values share their average rank.
[[nodiscard]] std::vector<double> average_ranks(std::span<double const> xs);
/// Spearman's rho with tie correction (Pearson correlation of average
/// ranks). NaN when either side is constant or the sizes differ.
[[nodiscard]] double spearman(std::span<double const> xs, std::span<double const> ys);

}  // namespace catcon
