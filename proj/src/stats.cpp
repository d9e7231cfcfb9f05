#include "catcon/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace catcon {

double mean(std::span<double const> xs)
{
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<double const> xs)
{
    if (xs.size() < 2) return 0.0;
    double const m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs)
{
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    std::size_t const n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<double> average_ranks(std::span<double const> xs)
{
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) {
            ++j;
        }
        double const r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

double spearman(std::span<double const> xs, std::span<double const> ys)
{
    double const nan = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() != ys.size() || xs.size() < 2) return nan;
    auto const rx = average_ranks(xs);
    auto const ry = average_ranks(ys);
    double const mx = mean(rx);
    double const my = mean(ry);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return nan;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace catcon
