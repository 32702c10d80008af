#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "photongate/emitter.hpp"
#include "photongate/histogram.hpp"

namespace photongate {

/// Time-tagger resolution.
inline constexpr double kTickPs = 4.0;

/// FWHM of a Gaussian over its standard deviation.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

struct SpadSpec {
    double efficiency = 1.0;
    double jitter_sigma_ps = 0.0;
    double dead_time_ps = 0.0;

    void validate() const;

    /// Thick Si SPAD: 12.5 % efficiency, ~700 ps FWHM jitter.
    static SpadSpec thick();
    /// Red-enhanced thin Si SPAD: 6 % efficiency, ~100 ps FWHM jitter.
    static SpadSpec red_enhanced();
    /// Looks up a preset by name ("thick", "red_enhanced", "ideal").
    static SpadSpec preset(std::string_view name);
};

struct TimeTag {
    std::uint8_t channel = 0;
    std::uint64_t ticks = 0;  ///< units of kTickPs from run start

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

enum class TcspcMode { Histogram, TimeTagged };

struct TcspcConfig {
    TcspcMode mode = TcspcMode::TimeTagged;
    double bin_ps = 512.0;

    void validate() const;
};

/// Rounds a time to the nearest tick, halves rounding up.
std::uint64_t to_ticks(double t_ps) noexcept;

/// Thinning, Gaussian jitter and quantization of every photon, without dead
/// time. Clicks that land before t = 0 fall outside the run and are
/// dropped. The result is unsorted.
std::vector<std::uint64_t> detect_ticks(std::span<const PhotonRecord> events, const SpadSpec& spad,
                                        std::uint64_t seed, std::uint8_t channel);

/// Drops clicks closer than `dead_time_ps` to the previous kept click.
/// `ticks` must be sorted.
void enforce_dead_time(std::vector<std::uint64_t>& ticks, double dead_time_ps);

/// Complete detector model: detect_ticks, sort, dead time.
std::vector<TimeTag> detect(std::span<const PhotonRecord> events, const SpadSpec& spad,
                            std::uint64_t seed, std::uint8_t channel = 0);

/// Tick values of one channel, in order.
std::vector<std::uint64_t> channel_ticks(std::span<const TimeTag> tags, std::uint8_t channel);

/// Lifetime histogram: for each trigger, the delay of the first tag at or
/// after it (and before the next trigger), binned from 0 to range_ps.
Histogram start_stop_histogram(std::span<const double> trigger_ps,
                               std::span<const std::uint64_t> tag_ticks, double bin_ps,
                               double range_ps);

/// Full cross-correlation: every pair with |t_b - t_a| <= window_ps, binned
/// at bin_ps around tau = 0 (bins centered on multiples of bin_ps, exact
/// half-bin delays rounded away from zero, so the histogram mirrors exactly
/// when a and b are swapped). Both inputs must be sorted. `threads` > 1
/// splits `a` into blocks whose partial histograms are summed; the result
/// does not depend on the split. Throws ValidationError unless bin_ps is a
/// positive multiple of 4 ps.
CorrelationHistogram correlate(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               double bin_ps, double window_ps, unsigned threads = 1);

// Time-tag files: 8-byte magic "SPSLTTAG", little-endian u32 version 1,
// then 9-byte records (u64 ticks LE, u8 channel).
inline constexpr std::string_view kTimeTagMagic = "SPSLTTAG";
inline constexpr std::uint32_t kTimeTagVersion = 1;

void write_timetags(std::ostream& out, std::span<const TimeTag> tags);
/// Throws FormatError naming the byte offset of the first problem.
std::vector<TimeTag> read_timetags(std::istream& in);

void write_timetags_csv(std::ostream& out, std::span<const TimeTag> tags);
std::vector<TimeTag> read_timetags_csv(std::istream& in);

/// Merges per-channel tick lists into one stream ordered by (ticks, channel).
std::vector<TimeTag> merge_channels(std::span<const std::vector<std::uint64_t>> per_channel);

}  // namespace photongate
