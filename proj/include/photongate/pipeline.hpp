#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "photongate/analysis.hpp"
#include "photongate/detector.hpp"
#include "photongate/scenario.hpp"

namespace photongate {

enum class AnalysisKind { G2, Hom, Lifetime };

/// Everything the analysis of a time-tag stream needs to know about the
/// acquisition. Channel 0 is detector A, channel 1 detector B.
struct AnalysisParams {
    AnalysisKind kind = AnalysisKind::G2;
    double rep_period_ps = 12500.0;
    PulsePattern pattern = PulsePattern::Single;
    double dt_ps = 0.0;
    std::uint64_t n_periods = 0;  ///< 0: unknown, count rates are omitted
    double bin_ps = 512.0;
    double window_ps = 0.0;       ///< 0: derived from the period (and pulse delay)
    int n_side_peaks = 6;

    BeamsplitterSpec bs1;
    BeamsplitterSpec bs2;
    double epsilon = 0.0;
    double g_star = 0.0;
    double g_star_sigma = 0.0;
    bool correct_leakage = true;

    bool lifetime = false;  ///< add a lifetime fit of channel A (implied by kind Lifetime)
    double lifetime_range_ps = 0.0;
    std::optional<double> lifetime_jitter_ps;

    /// Correlation half window actually used.
    double effective_window_ps() const;
};

struct AnalysisOutput {
    CorrelationHistogram correlation;  ///< empty for a lifetime-only analysis
    std::optional<Histogram> lifetime_histogram;
    std::optional<G2Report> g2;
    std::optional<HomAreas> hom_areas;
    std::optional<HomReport> hom;
    std::optional<LifetimeFit> lifetime;
    nlohmann::ordered_json report;
};

/// Correlates channels 0 and 1 (and/or fits the lifetime) and builds the
/// report. The same function serves simulated runs and recorded files, so a
/// run's report is reproduced exactly by re-analyzing its tags.
AnalysisOutput analyze_tags(std::span<const TimeTag> tags, const AnalysisParams& params,
                            unsigned threads = 0);

/// Analysis settings implied by a scenario (HOM g* must be filled in by the
/// caller when the scenario does not fix it).
AnalysisParams analysis_params(const Scenario& s);

/// Sorted, dead-time-filtered clicks of detectors A and B.
struct Detections {
    std::vector<std::uint64_t> a;
    std::vector<std::uint64_t> b;
};

/// Monte-Carlo chain emitter -> gate -> throughput -> splitter(s) ->
/// detectors, processed in blocks of `chunk_periods` periods. Every random
/// decision is keyed by pulse/photon identity, so the result does not depend
/// on the block size. The gate delay must already be resolved.
Detections simulate(const Scenario& s, std::uint64_t chunk_periods = 65536);

struct RunResult {
    Scenario scenario;  ///< with the gate delay resolved
    std::vector<TimeTag> tags;
    std::optional<G2Report> companion_g2;  ///< HBT run that supplied g* for HOM
    AnalysisOutput analysis;
};

/// Simulates and analyzes a scenario.
RunResult run_scenario(Scenario s, unsigned threads = 0);

/// Writes the configured output files; the report goes to `report_out` when
/// no report path is set.
void write_outputs(const RunResult& r, std::ostream& report_out);

/// Serialized report text (two-space indent, trailing newline).
std::string report_text(const nlohmann::ordered_json& report);

enum class SweepKind { Power, TMod, RepRate };

struct SweepPoint {
    double value = 0.0;
    bool ungated = false;  ///< t_mod sweep only: gate removed
};

struct SweepRow {
    SweepPoint point;
    std::uint64_t seed = 0;
    double counts_per_s_a = 0.0;
    double counts_per_s_b = 0.0;
    double gate_transmission = 1.0;  ///< expected signal transmission incl. loss
    std::optional<G2Report> g2;
    std::optional<HomReport> hom;
};

/// Runs one scenario per grid point, in parallel, with seed + index. Rows
/// come back in grid order. A t_mod sweep re-optimizes the gate delay at
/// each width.
std::vector<SweepRow> sweep(const Scenario& base, SweepKind kind, std::span<const SweepPoint> grid,
                            unsigned threads = 0);

void write_sweep_csv(std::ostream& out, SweepKind kind, std::span<const SweepRow> rows);

}  // namespace photongate
