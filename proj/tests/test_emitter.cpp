#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "photongate/emitter.hpp"
#include "photongate/error.hpp"

using namespace photongate;

namespace {

std::string serialize(const std::vector<PhotonRecord>& v) {
    std::ostringstream os;
    write_photon_csv(os, v);
    return os.str();
}

}  // namespace

TEST(SaturationModel, Examples) {
    auto zero = saturation_model(0.0, 0.1);
    EXPECT_EQ(zero.p_emit, 0.0);
    EXPECT_EQ(zero.p_bg, 0.0);
    EXPECT_NEAR(saturation_model(1.0, 0.0).p_emit, 1 - std::exp(-3.0), 1e-15);
    EXPECT_NEAR(saturation_model(1.0, 0.0).p_emit, 0.9502, 1e-4);
    EXPECT_NEAR(saturation_model(1e6, 0.0).p_emit, 1.0, 1e-12);
}

TEST(SaturationModel, BackgroundScalesWithPowerAndSaturates) {
    EXPECT_NEAR(saturation_model(0.5, 0.2).p_bg, 0.2 * 0.25, 1e-15);
    EXPECT_NEAR(saturation_model(0.5, 0.2, 1.0).p_bg, 0.1, 1e-15);
    EXPECT_NEAR(saturation_model(3.0, 0.2).p_bg, 0.2, 1e-15);
}

TEST(SaturationModel, EmissionNondecreasingInPower) {
    double last = -1;
    for (double p = 0; p <= 5.0; p += 0.01) {
        const double e = saturation_model(p, 0.0).p_emit;
        ASSERT_GE(e, last);
        last = e;
    }
}

TEST(SaturationModel, RejectsNegativePower) {
    EXPECT_THROW(saturation_model(-0.1, 0.0), ValidationError);
}

TEST(CollectionEfficiency, Examples) {
    EXPECT_DOUBLE_EQ(collection_efficiency(0.5, 0.25), 0.125);
    EXPECT_DOUBLE_EQ(collection_efficiency(0.0, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(collection_efficiency(0.5, 1.0), 0.5);
    // Paper's measured per-channel efficiency is 11.9 +- 0.6 %.
    EXPECT_NEAR(collection_efficiency(0.5, 0.25), 0.119, 0.006 + 1e-12);
}

TEST(PulseClock, PairPatternTimes) {
    PumpConfig pump;
    pump.rep_rate_hz = 80e6;
    pump.pattern = PulsePattern::Pair;
    pump.dt_ps = 2200;
    const PulseClock clock(pump);
    for (std::uint64_t k = 0; k < 1000; ++k) {
        ASSERT_NEAR(clock.pulse_time(2 * k), k * 12500.0, 1e-6);
        ASSERT_NEAR(clock.pulse_time(2 * k + 1), k * 12500.0 + 2200.0, 1e-6);
        ASSERT_EQ(clock.period_of(2 * k + 1), k);
        ASSERT_EQ(clock.slot_of(2 * k + 1), 1u);
    }
}

TEST(Emitter, NoExcitationGivesEmptyStream) {
    EmitterSpec spec;
    PumpConfig pump;
    pump.power_rel = 0.0;
    pump.n_periods = 10000;
    EXPECT_TRUE(sample_emission(spec, pump).empty());
}

TEST(Emitter, SignalDelayMeanMatchesLifetime) {
    EmitterSpec spec;
    spec.t1_ps = 625;
    PumpConfig pump;
    pump.power_rel = 1.0;
    pump.n_periods = 1000000;
    pump.seed = 11;
    const auto photons = sample_emission(spec, pump);
    const PulseClock clock(pump);
    double sum = 0;
    std::size_t n = 0;
    for (const auto& p : photons) {
        if (p.origin != Origin::Signal) continue;
        sum += p.emit_time_ps - clock.pulse_time(p.pulse_index);
        ++n;
    }
    EXPECT_NEAR(sum / n, 625.0, 3 * 625.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Emitter, SignalDelayKolmogorovSmirnov) {
    EmitterSpec spec;
    spec.t1_ps = 625;
    PumpConfig pump;
    pump.power_rel = 10.0;  // p_emit ~ 1
    pump.n_periods = 1000000;
    pump.seed = 12;
    const auto photons = sample_emission(spec, pump);
    const PulseClock clock(pump);
    std::vector<double> d;
    for (const auto& p : photons)
        if (p.origin == Origin::Signal) d.push_back(p.emit_time_ps - clock.pulse_time(p.pulse_index));
    ASSERT_GT(d.size(), 999000u);
    std::sort(d.begin(), d.end());
    double ks = 0;
    const double n = static_cast<double>(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double cdf = 1 - std::exp(-d[i] / 625.0);
        ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    EXPECT_LT(ks, 0.002);
}

TEST(Emitter, AtMostOneSignalPerPulseAndBernoulliBackground) {
    EmitterSpec spec;
    spec.bg_prob_at_sat = 0.3;
    PumpConfig pump;
    pump.power_rel = 1.0;
    pump.n_periods = 500000;
    pump.seed = 5;
    double pending = -INFINITY;
    const auto photons = sample_periods(spec, pump, 0, pump.n_periods, pending);
    std::vector<int> signal(pump.n_periods, 0), bg(pump.n_periods, 0);
    for (const auto& p : photons) (p.origin == Origin::Signal ? signal : bg)[p.pulse_index]++;
    std::size_t n_bg = 0;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        ASSERT_LE(signal[i], 1);
        ASSERT_LE(bg[i], 1);
        n_bg += bg[i];
    }
    const double n = static_cast<double>(pump.n_periods);
    EXPECT_NEAR(n_bg / n, 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
}

TEST(Emitter, DeterministicForEqualInputs) {
    EmitterSpec spec;
    spec.bg_prob_at_sat = 0.1;
    PumpConfig pump;
    pump.n_periods = 20000;
    pump.seed = 99;
    EXPECT_EQ(serialize(sample_emission(spec, pump)), serialize(sample_emission(spec, pump)));
    pump.seed = 100;
    auto other = sample_emission(spec, pump);
    pump.seed = 99;
    EXPECT_NE(serialize(other), serialize(sample_emission(spec, pump)));
}

TEST(Emitter, ChunkingDoesNotChangeTheStream) {
    EmitterSpec spec;
    spec.bg_prob_at_sat = 0.2;
    spec.exclusive_excitation = true;
    PumpConfig pump;
    pump.rep_rate_hz = 1e9;  // period shorter than a few lifetimes: blocking matters
    pump.n_periods = 30000;
    pump.seed = 4;
    double pending = -INFINITY;
    const auto whole = sample_periods(spec, pump, 0, pump.n_periods, pending);
    std::vector<PhotonRecord> pieces;
    pending = -INFINITY;
    for (std::uint64_t first = 0; first < pump.n_periods; first += 777) {
        auto part = sample_periods(spec, pump, first, std::min(pump.n_periods, first + 777), pending);
        pieces.insert(pieces.end(), part.begin(), part.end());
    }
    EXPECT_EQ(serialize(whole), serialize(pieces));
}

TEST(Emitter, ExclusiveExcitationBlocksPendingEmitter) {
    EmitterSpec spec;
    spec.t1_ps = 625;
    PumpConfig pump;
    pump.rep_rate_hz = 2e9;  // 500 ps period
    pump.power_rel = 10;
    pump.n_periods = 100000;
    const auto free_count = sample_emission(spec, pump).size();
    spec.exclusive_excitation = true;
    const auto blocked_count = sample_emission(spec, pump).size();
    EXPECT_LT(blocked_count, free_count * 0.8);
}

TEST(Emitter, OutputSortedByEmissionTime) {
    EmitterSpec spec;
    spec.bg_prob_at_sat = 0.5;
    PumpConfig pump;
    pump.rep_rate_hz = 1e9;
    pump.n_periods = 50000;
    const auto v = sample_emission(spec, pump);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end(), photon_before));
}

TEST(Emitter, ValidationNamesTheField) {
    EmitterSpec spec;
    spec.t1_ps = -1;
    try {
        spec.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "emitter.t1_ps");
    }
    PumpConfig pump;
    pump.pattern = PulsePattern::Pair;
    pump.dt_ps = 20000;  // longer than the 12.5 ns period
    EXPECT_THROW(pump.validate(), ValidationError);
}
