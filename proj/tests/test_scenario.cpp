#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "photongate/error.hpp"
#include "photongate/gate.hpp"
#include "photongate/scenario.hpp"

using namespace photongate;
using nlohmann::json;

namespace {

json minimal() { return {{"schema_version", 1}, {"seed", 42}}; }

json hom_doc() {
    return json::parse(R"({
      "schema_version": 1, "seed": 3,
      "emitter": {"t1_ps": 770, "t2_ps": 500, "bg_prob_at_sat": 0.2},
      "pump": {"rep_rate_hz": 8e7, "pattern": "pair", "dt_ps": 2200, "n_periods": 1000},
      "interferometer": {"kind": "hom", "epsilon": 0.05, "bs1_r": 0.45},
      "detectors": {"a": "thick", "b": {"preset": "red_enhanced", "dead_time_ps": 22000}},
      "tcspc": {"bin_ps": 100},
      "analysis": {"g_star": 0.29}
    })");
}

// Field path of the ValidationError raised while parsing and validating.
std::string error_field(const json& doc) {
    try {
        parse_scenario(doc).validate();
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<none>";
}

}  // namespace

TEST(Scenario, Defaults) {
    const auto s = parse_scenario(minimal());
    EXPECT_EQ(s.seed, 42u);
    EXPECT_EQ(s.pump.seed, 42u);
    EXPECT_EQ(s.interferometer, InterferometerKind::Hbt);
    EXPECT_FALSE(s.gate.has_value());
    EXPECT_DOUBLE_EQ(s.detector_a.efficiency, SpadSpec::thick().efficiency);
    EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, FullHomDocument) {
    const auto s = parse_scenario(hom_doc());
    EXPECT_EQ(s.interferometer, InterferometerKind::Hom);
    EXPECT_DOUBLE_EQ(s.hom.delta_t_ps, 2200);  // taken from the pump
    EXPECT_DOUBLE_EQ(s.hom.bs1.r, 0.45);
    EXPECT_DOUBLE_EQ(s.hom.bs1.t, 0.55);
    EXPECT_DOUBLE_EQ(s.hom.epsilon, 0.05);
    // 1/T2 = 1/(2 T1) + 1/T2*
    EXPECT_NEAR(1.0 / 500, 1.0 / (2 * 770) + 1.0 / s.emitter.t2star_ps, 1e-12);
    EXPECT_DOUBLE_EQ(s.detector_b.efficiency, SpadSpec::red_enhanced().efficiency);
    EXPECT_DOUBLE_EQ(s.detector_b.dead_time_ps, 22000);
    ASSERT_TRUE(s.analysis.g_star.has_value());
    EXPECT_DOUBLE_EQ(*s.analysis.g_star, 0.29);
    EXPECT_NO_THROW(s.validate());
}

TEST(Scenario, SerializationRoundTrip) {
    auto doc = hom_doc();
    doc["gate"] = {{"t_mod_ps", 380}, {"delay_ps", 120}};
    const auto s = parse_scenario(doc);
    const auto again = parse_scenario(json::parse(scenario_to_json(s).dump()));
    EXPECT_EQ(scenario_to_json(again).dump(), scenario_to_json(s).dump());
}

TEST(Scenario, GateDelayOptimalResolves) {
    auto doc = minimal();
    doc["emitter"] = {{"t1_ps", 625}};
    doc["gate"] = {{"t_mod_ps", 370}, {"delay_ps", "optimal"}};
    auto s = parse_scenario(doc);
    EXPECT_TRUE(s.gate_delay_optimal);
    resolve_gate(s);
    EXPECT_NEAR(s.gate->delay_ps, optimal_delay(625, 370).delay_ps, 1e-9);
    EXPECT_GT(s.gate->delay_ps, 0);

    doc["gate"].erase("delay_ps");
    EXPECT_TRUE(parse_scenario(doc).gate_delay_optimal);
    doc["gate"]["delay_ps"] = "soon";
    EXPECT_EQ(error_field(doc), "gate.delay_ps");
}

TEST(Scenario, MissingSeedOrVersionRejected) {
    EXPECT_EQ(error_field({{"schema_version", 1}}), "seed");
    EXPECT_EQ(error_field({{"seed", 1}}), "schema_version");
    EXPECT_EQ(error_field({{"seed", 1}, {"schema_version", 2}}), "schema_version");
}

TEST(Scenario, UnknownKeysNamedByPath) {
    auto doc = minimal();
    doc["emitter"] = {{"t1_ps", 625}, {"t1ps", 1}};
    EXPECT_EQ(error_field(doc), "emitter.t1ps");
    auto top = minimal();
    top["colour"] = "blue";
    EXPECT_EQ(error_field(top), "colour");
}

TEST(Scenario, TypeMismatchNamedByPath) {
    auto doc = minimal();
    doc["pump"] = {{"rep_rate_hz", "fast"}};
    EXPECT_EQ(error_field(doc), "pump.rep_rate_hz");
    doc = minimal();
    doc["seed"] = -3;
    EXPECT_EQ(error_field(doc), "seed");
}

TEST(Scenario, OutOfRangeValuesNamedByPath) {
    auto doc = minimal();
    doc["emitter"] = {{"t1_ps", -1}};
    EXPECT_EQ(error_field(doc), "emitter.t1_ps");
    doc = minimal();
    doc["detectors"] = {{"a", {{"efficiency", 1.5}}}, {"b", "thick"}};
    EXPECT_EQ(error_field(doc).rfind("detectors.a", 0), 0u);
    doc = minimal();
    doc["detectors"] = "super";
    EXPECT_EQ(error_field(doc).rfind("detectors", 0), 0u);
    doc = minimal();
    doc["throughput"] = 0;
    EXPECT_EQ(error_field(doc), "throughput");
    doc = minimal();
    doc["tcspc"] = {{"bin_ps", 30}};
    EXPECT_EQ(error_field(doc).rfind("tcspc", 0), 0u);
    doc = minimal();
    doc["interferometer"] = {{"kind", "hbt"}, {"r", 1.0}};
    EXPECT_EQ(error_field(doc).rfind("interferometer", 0), 0u);
}

TEST(Scenario, HomRequiresPairPattern) {
    auto doc = hom_doc();
    doc["pump"]["pattern"] = "single";
    EXPECT_EQ(error_field(doc), "pump.pattern");
}

TEST(Scenario, HomDelayMustMatchPump) {
    auto doc = hom_doc();
    doc["interferometer"]["delta_t_ps"] = 2000;
    EXPECT_EQ(error_field(doc), "interferometer.delta_t_ps");
}

TEST(Scenario, HomClustersMustNotOverlap) {
    auto doc = hom_doc();
    doc["pump"]["rep_rate_hz"] = 1e9;
    doc["pump"]["dt_ps"] = 300;
    EXPECT_EQ(error_field(doc), "pump.rep_rate_hz");
}

TEST(Scenario, GateDelayBeyondOnePeriodRejected) {
    auto doc = minimal();
    doc["gate"] = {{"t_mod_ps", 370}, {"delay_ps", 20000}};
    EXPECT_EQ(error_field(doc), "gate.delay_ps");
}

TEST(Scenario, DetectorJitterEitherSigmaOrFwhm) {
    auto doc = minimal();
    doc["detectors"] = {{"a", {{"jitter_fwhm_ps", 235.48200450309493}}}, {"b", "ideal"}};
    EXPECT_NEAR(parse_scenario(doc).detector_a.jitter_sigma_ps, 100, 1e-9);
    doc["detectors"]["a"]["jitter_sigma_ps"] = 50;
    EXPECT_EQ(error_field(doc), "detectors.a.jitter_fwhm_ps");
}

TEST(Scenario, LoadRejectsMalformedJson) {
    const auto path = std::filesystem::temp_directory_path() / "photongate_bad_scenario.json";
    std::ofstream(path) << "{ \"seed\": ";
    EXPECT_THROW(load_scenario(path), ValidationError);
    std::ofstream(path) << minimal().dump();
    EXPECT_EQ(load_scenario(path).seed, 42u);
    std::filesystem::remove(path);
}
