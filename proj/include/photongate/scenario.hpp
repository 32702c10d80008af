#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "photongate/detector.hpp"
#include "photongate/emitter.hpp"
#include "photongate/gate.hpp"
#include "photongate/optics.hpp"

namespace photongate {

inline constexpr int kScenarioSchemaVersion = 1;

enum class InterferometerKind { Hbt, Hom };

struct AnalysisConfig {
    double window_ps = 0.0;  ///< correlation half window; 0 picks one from the geometry
    int n_side_peaks = 6;
    /// Two-photon emission probability for HOM analysis. Unset: measured by
    /// a companion single-pulse HBT run with the same source settings.
    std::optional<double> g_star;
    double g_star_sigma = 0.0;
    bool correct_leakage = true;
    bool lifetime = false;  ///< fit the channel-A start-stop histogram
    double lifetime_range_ps = 0.0;  ///< 0: one period (or dt for pairs)
    std::optional<double> lifetime_jitter_ps;
};

struct OutputPaths {
    std::string report;     ///< empty: stdout
    std::string histogram;  ///< correlation histogram CSV
    std::string timetags;   ///< binary time tags
    std::string lifetime_histogram;
};

struct Scenario {
    std::uint64_t seed = 1;
    EmitterSpec emitter;
    PumpConfig pump;
    std::optional<GateSpec> gate;
    bool gate_delay_optimal = false;  ///< delay resolved by resolve_gate()
    double throughput = 1.0;          ///< broadband setup transmission before the splitter
    InterferometerKind interferometer = InterferometerKind::Hbt;
    BeamsplitterSpec hbt;
    HomConfig hom;
    SpadSpec detector_a = SpadSpec::thick();
    SpadSpec detector_b = SpadSpec::thick();
    TcspcConfig tcspc;
    AnalysisConfig analysis;
    OutputPaths outputs;

    /// Throws ValidationError with the dotted path of the offending field.
    void validate() const;
};

/// Parses a scenario document. Unknown keys and type mismatches are
/// validation errors; `seed` and `schema_version` are mandatory.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::ordered_json scenario_to_json(const Scenario& s);

/// Replaces an "optimal" gate delay with the transmission-maximizing one.
void resolve_gate(Scenario& s);

}  // namespace photongate
