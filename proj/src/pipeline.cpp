#include "photongate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "photongate/error.hpp"
#include "photongate/gate.hpp"
#include "photongate/rng.hpp"
#include "photongate/optics.hpp"

namespace photongate {

namespace {

constexpr int kFarClusters = 4;

unsigned resolve_threads(unsigned threads) {
    if (threads > 0) return threads;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Smallest multiple of the bin that is >= x.
double round_up_to_bin(double x, double bin) { return std::ceil(x / bin) * bin; }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
    return out;
}

const char* kind_name(AnalysisKind k) {
    switch (k) {
        case AnalysisKind::G2: return "g2";
        case AnalysisKind::Hom: return "hom";
        case AnalysisKind::Lifetime: return "lifetime";
    }
    return "";
}

}  // namespace

double AnalysisParams::effective_window_ps() const {
    if (window_ps > 0) return window_ps;
    if (kind == AnalysisKind::Hom)
        return round_up_to_bin(kFarClusters * rep_period_ps + 2.5 * dt_ps + bin_ps, bin_ps);
    return round_up_to_bin((n_side_peaks + 0.5) * rep_period_ps + bin_ps, bin_ps);
}

AnalysisOutput analyze_tags(std::span<const TimeTag> tags, const AnalysisParams& p,
                            unsigned threads) {
    if (!(p.rep_period_ps > 0)) throw ValidationError("rep_period_ps", "must be positive");
    const auto a = channel_ticks(tags, 0);
    const auto b = channel_ticks(tags, 1);

    AnalysisOutput out;
    auto& rep = out.report;
    rep["schema_version"] = kScenarioSchemaVersion;
    rep["analysis"] = kind_name(p.kind);

    nlohmann::ordered_json counts;
    counts["tags_a"] = a.size();
    counts["tags_b"] = b.size();
    if (p.n_periods > 0) {
        const double duration_s = static_cast<double>(p.n_periods) * p.rep_period_ps * 1e-12;
        counts["n_periods"] = p.n_periods;
        counts["duration_s"] = duration_s;
        counts["counts_per_s_a"] = static_cast<double>(a.size()) / duration_s;
        counts["counts_per_s_b"] = static_cast<double>(b.size()) / duration_s;
    }
    rep["counts"] = counts;

    if (p.kind != AnalysisKind::Lifetime) {
        out.correlation = correlate(a, b, p.bin_ps, p.effective_window_ps(), resolve_threads(threads));
        out.correlation.rep_period_ps = p.rep_period_ps;
        out.correlation.n_periods = p.n_periods;
        rep["bin_ps"] = p.bin_ps;
        rep["window_ps"] = p.effective_window_ps();
    }
    if (p.kind == AnalysisKind::G2) {
        out.g2 = g2_zero(out.correlation, p.rep_period_ps, p.n_side_peaks);
        rep["g2"] = to_json(*out.g2);
    } else if (p.kind == AnalysisKind::Hom) {
        HomAreaOptions opt;
        opt.bs1 = p.bs1;
        opt.bs2 = p.bs2;
        opt.correct_leakage = p.correct_leakage;
        opt.far_clusters = kFarClusters;
        out.hom_areas = hom_peak_areas(out.correlation, p.dt_ps, p.rep_period_ps, opt);
        out.hom = make_hom_report(*out.hom_areas, p.g_star, p.g_star_sigma, p.bs2.r, p.bs2.t, p.epsilon);
        auto j = to_json(*out.hom);
        j["raw_areas"] = out.hom_areas->raw;
        j["peak_width_ps"] = out.hom_areas->peak_width_ps;
        rep["hom"] = j;
    }

    if (p.lifetime || p.kind == AnalysisKind::Lifetime) {
        const PulseClock clock(p.rep_period_ps, p.pattern, p.dt_ps);
        std::uint64_t n_periods = p.n_periods;
        if (n_periods == 0 && !a.empty())
            n_periods = static_cast<std::uint64_t>(static_cast<double>(a.back()) * kTickPs / p.rep_period_ps) + 1;
        double range = p.lifetime_range_ps;
        if (range <= 0) range = p.pattern == PulsePattern::Pair ? p.dt_ps : p.rep_period_ps;
        // Triggers run an eighth of the range ahead of the pulses so the
        // rising edge (and clicks jittered early) stay on scale; the time
        // axis is then shifted back to the pulse.
        const double pre = range / 8;
        std::vector<double> triggers;
        triggers.reserve(n_periods * clock.pulses_per_period());
        for (std::uint64_t i = 0; i < n_periods * clock.pulses_per_period(); ++i)
            triggers.push_back(clock.pulse_time(i) - pre);
        out.lifetime_histogram = start_stop_histogram(triggers, a, p.bin_ps, range);
        out.lifetime_histogram->first_center_ps -= pre;
        out.lifetime_histogram->rep_period_ps = p.rep_period_ps;
        out.lifetime_histogram->n_periods = n_periods;
        out.lifetime = fit_lifetime(*out.lifetime_histogram, p.lifetime_jitter_ps);
        rep["lifetime"] = to_json(*out.lifetime);
    }
    return out;
}

AnalysisParams analysis_params(const Scenario& s) {
    AnalysisParams p;
    p.kind = s.interferometer == InterferometerKind::Hom ? AnalysisKind::Hom : AnalysisKind::G2;
    p.rep_period_ps = s.pump.period_ps();
    p.pattern = s.pump.pattern;
    p.dt_ps = s.pump.pattern == PulsePattern::Pair ? s.pump.dt_ps : 0.0;
    p.n_periods = s.pump.n_periods;
    p.bin_ps = s.tcspc.bin_ps;
    p.window_ps = s.analysis.window_ps;
    p.n_side_peaks = s.analysis.n_side_peaks;
    p.bs1 = s.hom.bs1;
    p.bs2 = s.hom.bs2;
    p.epsilon = s.hom.epsilon;
    p.g_star = s.analysis.g_star.value_or(0.0);
    p.g_star_sigma = s.analysis.g_star_sigma;
    p.correct_leakage = s.analysis.correct_leakage;
    p.lifetime = s.analysis.lifetime;
    p.lifetime_range_ps = s.analysis.lifetime_range_ps;
    p.lifetime_jitter_ps = s.analysis.lifetime_jitter_ps;
    return p;
}

Detections simulate(const Scenario& s, std::uint64_t chunk_periods) {
    s.validate();
    if (s.gate_delay_optimal) throw ValidationError("gate.delay_ps", "unresolved optimal delay");
    if (chunk_periods == 0) chunk_periods = 1;

    PumpConfig pump = s.pump;
    pump.seed = s.seed;
    const PulseClock clock(pump);
    Detections d;
    double pending = -std::numeric_limits<double>::infinity();
    for (std::uint64_t first = 0; first < pump.n_periods; first += chunk_periods) {
        const std::uint64_t last = std::min(pump.n_periods, first + chunk_periods);
        auto photons = sample_periods(s.emitter, pump, first, last, pending);
        if (s.gate) photons = apply_gate(*s.gate, photons, clock, s.seed);
        if (s.throughput < 1.0) photons = attenuate(photons, s.throughput, s.seed);
        const PortStreams ports = s.interferometer == InterferometerKind::Hbt
                                      ? hbt_route(photons, s.hbt, s.seed)
                                      : hom_route(photons, s.hom, clock, s.seed);
        const auto ta = detect_ticks(ports.a, s.detector_a, s.seed, 0);
        const auto tb = detect_ticks(ports.b, s.detector_b, s.seed, 1);
        d.a.insert(d.a.end(), ta.begin(), ta.end());
        d.b.insert(d.b.end(), tb.begin(), tb.end());
    }
    std::sort(d.a.begin(), d.a.end());
    std::sort(d.b.begin(), d.b.end());
    enforce_dead_time(d.a, s.detector_a.dead_time_ps);
    enforce_dead_time(d.b, s.detector_b.dead_time_ps);
    return d;
}

RunResult run_scenario(Scenario s, unsigned threads) {
    resolve_gate(s);
    s.validate();
    RunResult r;
    auto params = analysis_params(s);

    if (s.interferometer == InterferometerKind::Hom && !s.analysis.g_star) {
        // g* from an HBT measurement of the same source under single pulses.
        Scenario hbt = s;
        hbt.seed = derive_seed(s.seed, 1);
        hbt.pump.seed = hbt.seed;
        hbt.pump.pattern = PulsePattern::Single;
        hbt.pump.dt_ps = 0.0;
        hbt.interferometer = InterferometerKind::Hbt;
        hbt.hbt = BeamsplitterSpec{};
        const auto det = simulate(hbt);
        const std::vector<std::vector<std::uint64_t>> channels{det.a, det.b};
        auto hp = analysis_params(hbt);
        hp.lifetime = false;
        const auto out = analyze_tags(merge_channels(channels), hp, threads);
        r.companion_g2 = out.g2;
        params.g_star = out.g2->g2_zero;
        params.g_star_sigma = out.g2->sigma;
    }

    auto det = simulate(s);
    {
        const std::vector<std::vector<std::uint64_t>> channels{std::move(det.a), std::move(det.b)};
        r.tags = merge_channels(channels);
    }
    r.analysis = analyze_tags(r.tags, params, threads);
    if (r.companion_g2) r.analysis.report["companion_g2"] = to_json(*r.companion_g2);
    r.scenario = std::move(s);
    return r;
}

std::string report_text(const nlohmann::ordered_json& report) { return report.dump(2) + "\n"; }

void write_outputs(const RunResult& r, std::ostream& report_out) {
    const auto& o = r.scenario.outputs;
    if (o.report.empty()) {
        report_out << report_text(r.analysis.report);
    } else {
        auto f = open_output(o.report);
        f << report_text(r.analysis.report);
    }
    if (!o.histogram.empty() && !r.analysis.correlation.counts.empty()) {
        auto f = open_output(o.histogram);
        write_histogram_csv(f, r.analysis.correlation);
    }
    if (!o.timetags.empty()) {
        auto f = open_output(o.timetags);
        write_timetags(f, r.tags);
    }
    if (!o.lifetime_histogram.empty()) {
        if (!r.analysis.lifetime_histogram)
            throw ValidationError("outputs.lifetime_histogram", "requires analysis.lifetime = true");
        auto f = open_output(o.lifetime_histogram);
        write_histogram_csv(f, *r.analysis.lifetime_histogram);
    }
}

std::vector<SweepRow> sweep(const Scenario& base, SweepKind kind, std::span<const SweepPoint> grid,
                            unsigned threads) {
    if (grid.empty()) throw ValidationError("grid", "must not be empty");
    base.validate();
    std::vector<Scenario> jobs;
    std::vector<SweepRow> rows(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Scenario s = base;
        s.seed = derive_seed(base.seed, i);
        s.pump.seed = s.seed;
        s.outputs = {};
        s.analysis.lifetime = false;
        const auto& pt = grid[i];
        switch (kind) {
            case SweepKind::Power:
                s.pump.power_rel = pt.value;
                break;
            case SweepKind::TMod:
                if (pt.ungated) {
                    s.gate.reset();
                    s.gate_delay_optimal = false;
                } else {
                    GateSpec g = s.gate.value_or(GateSpec{});
                    g.t_mod_ps = pt.value;
                    s.gate = g;
                    s.gate_delay_optimal = true;
                }
                break;
            case SweepKind::RepRate:
                s.pump.rep_rate_hz = pt.value;
                break;
        }
        try {
            resolve_gate(s);
            s.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("grid[{}]", i), e.what());
        }
        rows[i].point = pt;
        rows[i].seed = s.seed;
        if (s.gate) {
            rows[i].gate_transmission = analytic_transmission(s.emitter.t1_ps, s.gate->t_mod_ps, s.gate->delay_ps) *
                                        db_to_transmission(s.gate->insertion_loss_db);
        }
        jobs.push_back(std::move(s));
    }

    std::vector<std::exception_ptr> errors(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                const auto r = run_scenario(jobs[i], 1);
                const auto& c = r.analysis.report.at("counts");
                rows[i].counts_per_s_a = c.at("counts_per_s_a").get<double>();
                rows[i].counts_per_s_b = c.at("counts_per_s_b").get<double>();
                rows[i].g2 = r.analysis.g2;
                rows[i].hom = r.analysis.hom;
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(jobs.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

void write_sweep_csv(std::ostream& out, SweepKind kind, std::span<const SweepRow> rows) {
    const bool hom = !rows.empty() && rows.front().hom.has_value();
    const char* key = kind == SweepKind::Power ? "power_rel" : kind == SweepKind::TMod ? "t_mod_ps" : "rep_rate_hz";
    out << key << (hom ? ",m,m_sigma,v,v_sigma,g_star" : ",g2_zero,sigma")
        << ",counts_per_s_a,counts_per_s_b,gate_transmission\n";
    for (const auto& r : rows) {
        std::string value = r.point.ungated ? std::string("ungated") : fmt::format("{:.6g}", r.point.value);
        out << value;
        if (hom) {
            out << fmt::format(",{:.6g},{:.6g},{:.6g},{:.6g},{:.6g}", r.hom->m, r.hom->m_sigma, r.hom->v,
                               r.hom->v_sigma, r.hom->g_star);
        } else {
            out << fmt::format(",{:.6g},{:.6g}", r.g2->g2_zero, r.g2->sigma);
        }
        out << fmt::format(",{:.6g},{:.6g},{:.6g}\n", r.counts_per_s_a, r.counts_per_s_b, r.gate_transmission);
    }
}

}  // namespace photongate
