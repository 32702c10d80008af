#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace photongate {

/// Uniformly binned event counts. Bin i is centered at
/// first_center_ps + i * bin_ps.
struct Histogram {
    double bin_ps = 0.0;
    double first_center_ps = 0.0;
    std::vector<std::uint64_t> counts;
    /// Acquisition metadata (zero when unknown).
    double rep_period_ps = 0.0;
    std::uint64_t n_periods = 0;

    double center(std::size_t i) const noexcept {
        return first_center_ps + static_cast<double>(i) * bin_ps;
    }
    double lower_edge() const noexcept { return first_center_ps - bin_ps / 2; }
    double upper_edge() const noexcept {
        return first_center_ps + (static_cast<double>(counts.size()) - 0.5) * bin_ps;
    }
    std::uint64_t total() const noexcept;

    /// Counts in [from_ps, to_ps), splitting partially covered bins in
    /// proportion to the covered width.
    double integrate(double from_ps, double to_ps) const noexcept;
};

/// Coincidence counts against delay tau = t_b - t_a.
using CorrelationHistogram = Histogram;

/// CSV `bin_center_ps,counts`.
void write_histogram_csv(std::ostream& out, const Histogram& h);

}  // namespace photongate
