#include "photongate/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

#include "photongate/error.hpp"
#include "photongate/rng.hpp"

namespace photongate {

namespace {

void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) throw ValidationError(field, "must be finite");
}

}  // namespace

void EmitterSpec::validate() const {
    require_finite(t1_ps, "emitter.t1_ps");
    if (t1_ps <= 0) throw ValidationError("emitter.t1_ps", "must be positive");
    if (std::isnan(t2star_ps) || t2star_ps <= 0)
        throw ValidationError("emitter.t2star_ps", "must be positive or infinite");
    require_finite(beta, "emitter.beta");
    if (beta < 0 || beta > 0.5) throw ValidationError("emitter.beta", "must lie in [0, 0.5]");
    require_finite(eta, "emitter.eta");
    if (eta < 0 || eta > 1) throw ValidationError("emitter.eta", "must lie in [0, 1]");
    require_finite(purcell_ratio, "emitter.purcell_ratio");
    if (purcell_ratio < 1) throw ValidationError("emitter.purcell_ratio", "must be >= 1");
    require_finite(bg_prob_at_sat, "emitter.bg_prob_at_sat");
    if (bg_prob_at_sat < 0 || bg_prob_at_sat > 1)
        throw ValidationError("emitter.bg_prob_at_sat", "must lie in [0, 1]");
    require_finite(bg_tau_ps, "emitter.bg_tau_ps");
    if (bg_tau_ps <= 0) throw ValidationError("emitter.bg_tau_ps", "must be positive");
    require_finite(bg_power_exponent, "emitter.bg_power_exponent");
    if (bg_power_exponent <= 0)
        throw ValidationError("emitter.bg_power_exponent", "must be positive");
}

void PumpConfig::validate() const {
    require_finite(rep_rate_hz, "pump.rep_rate_hz");
    if (rep_rate_hz <= 0) throw ValidationError("pump.rep_rate_hz", "must be positive");
    require_finite(power_rel, "pump.power_rel");
    if (power_rel < 0) throw ValidationError("pump.power_rel", "must be >= 0");
    if (pattern == PulsePattern::Pair) {
        require_finite(dt_ps, "pump.dt_ps");
        if (dt_ps <= 0) throw ValidationError("pump.dt_ps", "must be positive");
        if (dt_ps >= period_ps())
            throw ValidationError("pump.dt_ps",
                                  fmt::format("must be less than the repetition period ({:g} ps)",
                                              period_ps()));
    }
}

PulseClock::PulseClock(const PumpConfig& pump)
    : PulseClock(pump.period_ps(), pump.pattern, pump.dt_ps) {}

PulseClock::PulseClock(double period_ps, PulsePattern pattern, double dt_ps)
    : period_ps_(period_ps), pattern_(pattern), dt_ps_(pattern == PulsePattern::Pair ? dt_ps : 0.0) {}

double PulseClock::pulse_time(std::uint64_t pulse_index) const noexcept {
    const double base = static_cast<double>(period_of(pulse_index)) * period_ps_;
    return slot_of(pulse_index) == 0 ? base : base + dt_ps_;
}

bool photon_before(const PhotonRecord& a, const PhotonRecord& b) noexcept {
    return std::tuple(a.arrival_ps(), a.pulse_index, a.origin) <
           std::tuple(b.arrival_ps(), b.pulse_index, b.origin);
}

EmissionProbabilities saturation_model(double power_rel, double bg_prob_at_sat,
                                       double bg_power_exponent) {
    if (!(power_rel >= 0)) throw ValidationError("power_rel", "must be >= 0");
    EmissionProbabilities p;
    p.p_emit = -std::expm1(-3.0 * power_rel);
    p.p_bg = bg_prob_at_sat * std::pow(std::min(power_rel, 1.0), bg_power_exponent);
    p.p_emit = std::clamp(p.p_emit, 0.0, 1.0);
    p.p_bg = std::clamp(p.p_bg, 0.0, 1.0);
    return p;
}

double collection_efficiency(double beta, double eta) {
    if (beta < 0 || beta > 0.5) throw ValidationError("beta", "must lie in [0, 0.5]");
    if (eta < 0 || eta > 1) throw ValidationError("eta", "must lie in [0, 1]");
    return beta * eta;
}

std::vector<PhotonRecord> sample_periods(const EmitterSpec& spec, const PumpConfig& pump,
                                         std::uint64_t first_period, std::uint64_t last_period,
                                         double& pending_signal_ps) {
    const PulseClock clock(pump);
    const auto probs = saturation_model(pump.power_rel, spec.bg_prob_at_sat, spec.bg_power_exponent);
    const Wavepacket signal_wp{spec.t1_ps, spec.alpha_per_ps()};
    const Wavepacket bg_wp{spec.bg_tau_ps, spec.alpha_per_ps()};

    std::vector<PhotonRecord> out;
    if (last_period <= first_period) return out;
    const std::uint64_t per = clock.pulses_per_period();
    out.reserve(static_cast<std::size_t>((last_period - first_period) * per *
                                         (probs.p_emit + probs.p_bg) * 1.1) + 16);

    for (std::uint64_t pulse = first_period * per; pulse < last_period * per; ++pulse) {
        EventRng rng(pump.seed, Stream::Emission, pulse);
        const double t0 = clock.pulse_time(pulse);
        // Fixed draw order: emit?, signal delay, background?, background delay.
        const double u_emit = rng.uniform();
        const double signal_delay = rng.exponential(spec.t1_ps);
        const double u_bg = rng.uniform();
        const double bg_delay = rng.exponential(spec.bg_tau_ps);

        const bool blocked = spec.exclusive_excitation && pending_signal_ps > t0;
        if (!blocked && u_emit < probs.p_emit) {
            PhotonRecord p;
            p.emit_time_ps = t0 + signal_delay;
            p.pulse_index = pulse;
            p.origin = Origin::Signal;
            p.wavepacket = signal_wp;
            pending_signal_ps = p.emit_time_ps;
            out.push_back(p);
        }
        if (u_bg < probs.p_bg) {
            PhotonRecord p;
            p.emit_time_ps = t0 + bg_delay;
            p.pulse_index = pulse;
            p.origin = Origin::Background;
            p.wavepacket = bg_wp;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<PhotonRecord> sample_emission(const EmitterSpec& spec, const PumpConfig& pump) {
    spec.validate();
    pump.validate();
    double pending = -std::numeric_limits<double>::infinity();
    auto photons = sample_periods(spec, pump, 0, pump.n_periods, pending);
    std::sort(photons.begin(), photons.end(), photon_before);
    return photons;
}

void write_photon_csv(std::ostream& out, const std::vector<PhotonRecord>& photons) {
    out << "emit_time_ps,pulse_index,origin\n";
    for (const auto& p : photons) {
        out << fmt::format("{:.17g},{},{}\n", p.emit_time_ps, p.pulse_index,
                           p.origin == Origin::Signal ? "signal" : "background");
    }
}

}  // namespace photongate
