#include "photongate/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

namespace photongate {

std::uint64_t Histogram::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double Histogram::integrate(double from_ps, double to_ps) const noexcept {
    if (counts.empty() || !(to_ps > from_ps) || bin_ps <= 0) return 0.0;
    const double lo = lower_edge();
    const auto n = static_cast<std::ptrdiff_t>(counts.size());
    auto first = static_cast<std::ptrdiff_t>(std::floor((from_ps - lo) / bin_ps));
    auto last = static_cast<std::ptrdiff_t>(std::floor((to_ps - lo) / bin_ps));
    first = std::max<std::ptrdiff_t>(first, 0);
    last = std::min<std::ptrdiff_t>(last, n - 1);
    double sum = 0.0;
    for (auto i = first; i <= last; ++i) {
        const double b0 = lo + static_cast<double>(i) * bin_ps;
        const double b1 = b0 + bin_ps;
        const double covered = std::min(b1, to_ps) - std::max(b0, from_ps);
        if (covered <= 0) continue;
        sum += static_cast<double>(counts[static_cast<std::size_t>(i)]) * (covered / bin_ps);
    }
    return sum;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "bin_center_ps,counts\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << fmt::format("{:.10g},{}\n", h.center(i), h.counts[i]);
}

}  // namespace photongate
