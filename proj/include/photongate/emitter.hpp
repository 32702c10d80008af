#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace photongate {

/// Parameters of a pulsed quantum-dot-like emitter. Times in picoseconds.
struct EmitterSpec {
    double t1_ps = 625.0;  ///< radiative lifetime
    double t2star_ps = std::numeric_limits<double>::infinity();  ///< pure dephasing time
    double beta = 0.5;           ///< spontaneous-emission coupling per cavity channel
    double eta = 0.25;           ///< waveguide out-coupling per channel
    double purcell_ratio = 1.0;  ///< T1(off resonance) / T1(on resonance); informational
    double bg_prob_at_sat = 0.0; ///< background photon probability per pulse at saturation
    double bg_tau_ps = 2000.0;   ///< background delay timescale
    double bg_power_exponent = 2.0;
    /// When set, a pulse arriving while the previous signal photon is still
    /// pending cannot excite the emitter again.
    bool exclusive_excitation = false;

    /// Pure dephasing rate 1/T2* (zero when T2* is infinite).
    double alpha_per_ps() const noexcept { return 1.0 / t2star_ps; }

    /// Throws ValidationError on out-of-range fields.
    void validate() const;
};

enum class PulsePattern { Single, Pair };

struct PumpConfig {
    double rep_rate_hz = 80e6;
    double power_rel = 1.0;  ///< pump power in units of P_sat
    PulsePattern pattern = PulsePattern::Single;
    double dt_ps = 0.0;      ///< intra-pair delay for PulsePattern::Pair
    std::uint64_t n_periods = 1000;
    std::uint64_t seed = 1;

    double period_ps() const noexcept { return 1e12 / rep_rate_hz; }
    void validate() const;
};

/// Maps pulse indices to absolute pulse times. With the pair pattern the
/// pulses of period k carry indices 2k and 2k+1.
class PulseClock {
public:
    explicit PulseClock(const PumpConfig& pump);
    PulseClock(double period_ps, PulsePattern pattern, double dt_ps);

    double period_ps() const noexcept { return period_ps_; }
    PulsePattern pattern() const noexcept { return pattern_; }
    double dt_ps() const noexcept { return dt_ps_; }
    unsigned pulses_per_period() const noexcept { return pattern_ == PulsePattern::Pair ? 2u : 1u; }

    double pulse_time(std::uint64_t pulse_index) const noexcept;
    std::uint64_t period_of(std::uint64_t pulse_index) const noexcept {
        return pulse_index / pulses_per_period();
    }
    /// 0 for the first pulse of a period, 1 for the second pulse of a pair.
    unsigned slot_of(std::uint64_t pulse_index) const noexcept {
        return static_cast<unsigned>(pulse_index % pulses_per_period());
    }

private:
    double period_ps_;
    PulsePattern pattern_;
    double dt_ps_;
};

enum class Origin : std::uint8_t { Signal = 0, Background = 1 };

/// Wavepacket parameters: emission-time envelope decay and dephasing rate.
struct Wavepacket {
    double t1_ps = 0.0;
    double alpha_per_ps = 0.0;
};

/// Gaussian (or rectangular) intensity gate that a photon went through.
struct GateWindow {
    double center_ps = 0.0;
    double sigma_ps = 0.0;  ///< Gaussian sigma, or half width for a rectangular gate
    bool rectangular = false;
};

struct PhotonRecord {
    double emit_time_ps = 0.0;
    std::uint64_t pulse_index = 0;
    Origin origin = Origin::Signal;
    Wavepacket wavepacket;
    /// Extra propagation delay accumulated in an interferometer arm.
    double path_delay_ps = 0.0;
    /// Set when the photon passed inside a gate window (not just through the
    /// extinction floor); `gate` then describes that window.
    bool gated = false;
    GateWindow gate;

    double arrival_ps() const noexcept { return emit_time_ps + path_delay_ps; }
    /// Unique per photon within a run; keys the per-photon random streams.
    std::uint64_t id() const noexcept {
        return pulse_index * 2 + static_cast<std::uint64_t>(origin);
    }
};

/// Strict total order used for every photon stream: time, then identity.
bool photon_before(const PhotonRecord& a, const PhotonRecord& b) noexcept;

struct EmissionProbabilities {
    double p_emit = 0.0;
    double p_bg = 0.0;
};

/// p_emit = 1 - exp(-3 P/P_sat); p_bg = bg_prob_at_sat * min(P/P_sat, 1)^exponent.
EmissionProbabilities saturation_model(double power_rel, double bg_prob_at_sat,
                                       double bg_power_exponent = 2.0);

/// Source efficiency into one waveguide channel, xi = beta * eta.
double collection_efficiency(double beta, double eta);

/// Draws the photons of periods [first_period, last_period). The result is
/// in pulse order, not time order; background photons may spill into later
/// periods. Each pulse draws from its own random stream, so concatenating
/// consecutive ranges reproduces a single large range exactly. With
/// exclusive excitation the caller threads `pending_signal_ps` (time of the
/// latest emitted signal photon) between ranges.
std::vector<PhotonRecord> sample_periods(const EmitterSpec& spec, const PumpConfig& pump,
                                         std::uint64_t first_period, std::uint64_t last_period,
                                         double& pending_signal_ps);

/// Full photon stream for `pump.n_periods` periods, sorted by emission time.
std::vector<PhotonRecord> sample_emission(const EmitterSpec& spec, const PumpConfig& pump);

/// Debug CSV: header `emit_time_ps,pulse_index,origin`.
void write_photon_csv(std::ostream& out, const std::vector<PhotonRecord>& photons);

}  // namespace photongate
