#include "photongate/detector.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "photongate/error.hpp"
#include "photongate/rng.hpp"

namespace photongate {

void SpadSpec::validate() const {
    if (!(efficiency >= 0 && efficiency <= 1))
        throw ValidationError("detector.efficiency", "must lie in [0, 1]");
    if (!(jitter_sigma_ps >= 0) || !std::isfinite(jitter_sigma_ps))
        throw ValidationError("detector.jitter_sigma_ps", "must be >= 0");
    if (!(dead_time_ps >= 0) || !std::isfinite(dead_time_ps))
        throw ValidationError("detector.dead_time_ps", "must be >= 0");
}

SpadSpec SpadSpec::thick() { return {0.125, 700.0 / kFwhmPerSigma, 0.0}; }

SpadSpec SpadSpec::red_enhanced() { return {0.06, 100.0 / kFwhmPerSigma, 0.0}; }

SpadSpec SpadSpec::preset(std::string_view name) {
    if (name == "thick") return thick();
    if (name == "red_enhanced") return red_enhanced();
    if (name == "ideal") return {};
    throw ValidationError("detector", fmt::format("unknown preset '{}'", name));
}

void TcspcConfig::validate() const {
    const double ratio = bin_ps / kTickPs;
    if (!(bin_ps > 0) || ratio != std::floor(ratio))
        throw ValidationError("tcspc.bin_ps", "must be a positive multiple of 4 ps");
}

std::uint64_t to_ticks(double t_ps) noexcept {
    return static_cast<std::uint64_t>(std::floor(t_ps / kTickPs + 0.5));
}

std::vector<std::uint64_t> detect_ticks(std::span<const PhotonRecord> events, const SpadSpec& spad,
                                        std::uint64_t seed, std::uint8_t channel) {
    spad.validate();
    std::vector<std::uint64_t> ticks;
    ticks.reserve(static_cast<std::size_t>(events.size() * spad.efficiency) + 16);
    for (const auto& e : events) {
        EventRng rng(seed, Stream::Detection, e.id() * 4 + channel);
        if (!(rng.uniform() < spad.efficiency)) continue;
        double t = e.arrival_ps();
        if (spad.jitter_sigma_ps > 0) t += spad.jitter_sigma_ps * rng.normal();
        const double q = std::floor(t / kTickPs + 0.5);
        if (q < 0) continue;
        ticks.push_back(static_cast<std::uint64_t>(q));
    }
    return ticks;
}

void enforce_dead_time(std::vector<std::uint64_t>& ticks, double dead_time_ps) {
    if (dead_time_ps <= 0 || ticks.empty()) return;
    const auto dead = static_cast<std::uint64_t>(std::ceil(dead_time_ps / kTickPs));
    std::size_t kept = 1;
    for (std::size_t i = 1; i < ticks.size(); ++i) {
        if (ticks[i] - ticks[kept - 1] >= dead) ticks[kept++] = ticks[i];
    }
    ticks.resize(kept);
}

std::vector<TimeTag> detect(std::span<const PhotonRecord> events, const SpadSpec& spad,
                            std::uint64_t seed, std::uint8_t channel) {
    auto ticks = detect_ticks(events, spad, seed, channel);
    std::sort(ticks.begin(), ticks.end());
    enforce_dead_time(ticks, spad.dead_time_ps);
    std::vector<TimeTag> tags;
    tags.reserve(ticks.size());
    for (auto t : ticks) tags.push_back({channel, t});
    return tags;
}

std::vector<std::uint64_t> channel_ticks(std::span<const TimeTag> tags, std::uint8_t channel) {
    std::vector<std::uint64_t> out;
    for (const auto& t : tags)
        if (t.channel == channel) out.push_back(t.ticks);
    return out;
}

std::vector<TimeTag> merge_channels(std::span<const std::vector<std::uint64_t>> per_channel) {
    std::vector<TimeTag> out;
    for (std::size_t c = 0; c < per_channel.size(); ++c)
        for (auto t : per_channel[c]) out.push_back({static_cast<std::uint8_t>(c), t});
    std::sort(out.begin(), out.end(), [](const TimeTag& x, const TimeTag& y) {
        return x.ticks != y.ticks ? x.ticks < y.ticks : x.channel < y.channel;
    });
    return out;
}

Histogram start_stop_histogram(std::span<const double> trigger_ps,
                               std::span<const std::uint64_t> tag_ticks, double bin_ps,
                               double range_ps) {
    if (!(bin_ps > 0)) throw ValidationError("bin_ps", "must be positive");
    if (!(range_ps > 0)) throw ValidationError("range_ps", "must be positive");
    Histogram h;
    h.bin_ps = bin_ps;
    h.first_center_ps = bin_ps / 2;
    h.counts.assign(static_cast<std::size_t>(std::ceil(range_ps / bin_ps)), 0);
    if (trigger_ps.size() >= 2) h.rep_period_ps = trigger_ps[1] - trigger_ps[0];
    h.n_periods = trigger_ps.size();

    std::size_t j = 0;
    for (std::size_t i = 0; i < trigger_ps.size(); ++i) {
        const double start = trigger_ps[i];
        const double stop_limit = std::min(i + 1 < trigger_ps.size() ? trigger_ps[i + 1] : start + range_ps,
                                           start + range_ps);
        while (j < tag_ticks.size() && static_cast<double>(tag_ticks[j]) * kTickPs < start) ++j;
        if (j == tag_ticks.size()) break;
        const double delay = static_cast<double>(tag_ticks[j]) * kTickPs - start;
        if (start + delay >= stop_limit) continue;
        const auto bin = static_cast<std::size_t>(delay / bin_ps);
        if (bin < h.counts.size()) ++h.counts[bin];
    }
    return h;
}

namespace {

struct Binning {
    std::int64_t bin_ticks;
    std::int64_t window_ticks;
    std::int64_t half_bins;
};

std::int64_t bin_index(std::int64_t tau, std::int64_t bin_ticks) noexcept {
    const std::int64_t mag = (2 * (tau < 0 ? -tau : tau) + bin_ticks) / (2 * bin_ticks);
    return tau < 0 ? -mag : mag;
}

void correlate_block(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                     const Binning& bins, std::vector<std::uint64_t>& counts) {
    if (a.empty() || b.empty()) return;
    const auto window = static_cast<std::uint64_t>(bins.window_ticks);
    const std::uint64_t first_lo = a.front() > window ? a.front() - window : 0;
    std::size_t lo = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), first_lo) - b.begin());
    for (const auto ta : a) {
        const std::uint64_t from = ta > window ? ta - window : 0;
        while (lo < b.size() && b[lo] < from) ++lo;
        for (std::size_t j = lo; j < b.size() && b[j] <= ta + window; ++j) {
            const auto tau = static_cast<std::int64_t>(b[j]) - static_cast<std::int64_t>(ta);
            ++counts[static_cast<std::size_t>(bin_index(tau, bins.bin_ticks) + bins.half_bins)];
        }
    }
}

}  // namespace

CorrelationHistogram correlate(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               double bin_ps, double window_ps, unsigned threads) {
    TcspcConfig{TcspcMode::TimeTagged, bin_ps}.validate();
    if (!(window_ps >= 0) || !std::isfinite(window_ps))
        throw ValidationError("window_ps", "must be finite and >= 0");
    Binning bins{};
    bins.bin_ticks = static_cast<std::int64_t>(bin_ps / kTickPs);
    bins.window_ticks = static_cast<std::int64_t>(std::floor(window_ps / kTickPs));
    bins.half_bins = bin_index(bins.window_ticks, bins.bin_ticks);

    CorrelationHistogram h;
    h.bin_ps = bin_ps;
    h.first_center_ps = -static_cast<double>(bins.half_bins) * bin_ps;
    h.counts.assign(static_cast<std::size_t>(2 * bins.half_bins + 1), 0);

    threads = std::max(1u, threads);
    if (threads == 1 || a.size() < 2 * threads) {
        correlate_block(a, b, bins, h.counts);
        return h;
    }
    std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(h.counts.size()));
    {
        std::vector<std::jthread> workers;
        const std::size_t chunk = (a.size() + threads - 1) / threads;
        for (unsigned k = 0; k < threads; ++k) {
            const std::size_t begin = std::min(a.size(), k * chunk);
            const std::size_t end = std::min(a.size(), begin + chunk);
            workers.emplace_back([&, k, begin, end] {
                correlate_block(a.subspan(begin, end - begin), b, bins, partial[k]);
            });
        }
    }
    for (const auto& p : partial)
        for (std::size_t i = 0; i < p.size(); ++i) h.counts[i] += p[i];
    return h;
}

}  // namespace photongate
