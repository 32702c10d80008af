#include "photongate/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "photongate/error.hpp"

namespace photongate {

namespace {

using json = nlohmann::json;

// Reads one JSON object, tracking consumed keys so leftovers can be reported.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_.empty() ? "scenario" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ValidationError(at(key), "expected a number");
        return v.get<double>();
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) {
            seen_.insert(key);
            return std::nullopt;
        }
        return number(key, 0.0);
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (v.is_number_unsigned()) return v.get<std::uint64_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
        }
        throw ValidationError(at(key), "expected a non-negative integer");
    }

    bool boolean(const std::string& key, bool fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ValidationError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ValidationError(at(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(at(it.key()), "unknown setting");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Re-labels a component's validation error with its location in the file.
template <class F>
void relabel(const std::string& from, const std::string& to, F&& check) {
    try {
        check();
    } catch (const ValidationError& e) {
        const std::string& field = e.field();
        if (field.rfind(from, 0) != 0) throw;
        const std::string what = e.what();
        const std::string message = what.substr(std::min(what.size(), field.size() + 2));
        throw ValidationError(to + field.substr(from.size()), message);
    }
}

SpadSpec parse_detector(const json& j, const std::string& path) {
    if (j.is_string()) {
        try {
            return SpadSpec::preset(j.get<std::string>());
        } catch (const ValidationError&) {
            throw ValidationError(path, fmt::format("unknown preset '{}'", j.get<std::string>()));
        }
    }
    Reader r(j, path);
    SpadSpec d = r.has("preset") ? parse_detector(r.raw("preset"), r.at("preset")) : SpadSpec{};
    d.efficiency = r.number("efficiency", d.efficiency);
    d.jitter_sigma_ps = r.number("jitter_sigma_ps", d.jitter_sigma_ps);
    if (r.has("jitter_fwhm_ps")) {
        if (j.contains("jitter_sigma_ps"))
            throw ValidationError(r.at("jitter_fwhm_ps"), "give either jitter_sigma_ps or jitter_fwhm_ps");
        d.jitter_sigma_ps = r.number("jitter_fwhm_ps", 0.0) / kFwhmPerSigma;
    }
    d.dead_time_ps = r.number("dead_time_ps", d.dead_time_ps);
    r.finish();
    return d;
}

json detector_json(const SpadSpec& d) {
    return {{"efficiency", d.efficiency},
            {"jitter_sigma_ps", d.jitter_sigma_ps},
            {"dead_time_ps", d.dead_time_ps}};
}

}  // namespace

void Scenario::validate() const {
    emitter.validate();
    pump.validate();
    if (gate) {
        gate->validate();
        if (!gate_delay_optimal && std::abs(gate->delay_ps) > pump.period_ps())
            throw ValidationError("gate.delay_ps", "must not exceed one repetition period");
    }
    if (!(throughput > 0 && throughput <= 1)) throw ValidationError("throughput", "must lie in (0, 1]");
    if (interferometer == InterferometerKind::Hbt) {
        relabel("beamsplitter", "interferometer", [&] { hbt.validate(); });
    } else {
        if (pump.pattern != PulsePattern::Pair)
            throw ValidationError("pump.pattern", "hom interferometer requires the pair pulse pattern");
        if (std::abs(hom.delta_t_ps - pump.dt_ps) > 1e-6)
            throw ValidationError("interferometer.delta_t_ps",
                                  fmt::format("must match pump.dt_ps ({} ps)", pump.dt_ps));
        relabel("beamsplitter", "interferometer.bs1", [&] { hom.bs1.validate(); });
        relabel("beamsplitter", "interferometer.bs2", [&] { hom.bs2.validate(); });
        hom.validate();
        if (!(pump.period_ps() > 5 * hom.delta_t_ps))
            throw ValidationError("pump.rep_rate_hz", "period must exceed five pulse delays for HOM analysis");
        if (analysis.g_star && !(*analysis.g_star >= 0))
            throw ValidationError("analysis.g_star", "must be >= 0");
    }
    relabel("detector", "detectors.a", [&] { detector_a.validate(); });
    relabel("detector", "detectors.b", [&] { detector_b.validate(); });
    tcspc.validate();
    if (!(analysis.window_ps >= 0)) throw ValidationError("analysis.window_ps", "must be >= 0");
    if (analysis.n_side_peaks < 2) throw ValidationError("analysis.n_side_peaks", "must be >= 2");
    if (!(analysis.g_star_sigma >= 0)) throw ValidationError("analysis.g_star_sigma", "must be >= 0");
    if (!(analysis.lifetime_range_ps >= 0))
        throw ValidationError("analysis.lifetime_range_ps", "must be >= 0");
}

Scenario parse_scenario(const json& doc) {
    Reader top(doc, "");
    if (!top.has("schema_version")) throw ValidationError("schema_version", "missing");
    const auto version = top.unsigned_integer("schema_version", 0);
    if (version != kScenarioSchemaVersion)
        throw ValidationError("schema_version",
                              fmt::format("unsupported version {} (expected {})", version, kScenarioSchemaVersion));
    if (!top.has("seed")) throw ValidationError("seed", "missing; every scenario needs a seed");

    Scenario s;
    s.seed = top.unsigned_integer("seed", 0);

    if (top.has("emitter")) {
        Reader r(top.raw("emitter"), "emitter");
        auto& e = s.emitter;
        e.t1_ps = r.number("t1_ps", e.t1_ps);
        e.t2star_ps = r.number("t2star_ps", e.t2star_ps);
        if (r.has("t2_ps")) {
            if (doc.at("emitter").contains("t2star_ps"))
                throw ValidationError("emitter.t2_ps", "give either t2_ps or t2star_ps");
            const double t2 = r.number("t2_ps", 0.0);
            const double alpha = dephasing_rate_for(e.t1_ps, t2);
            if (alpha < 0) throw ValidationError("emitter.t2_ps", "must not exceed 2 t1_ps");
            e.t2star_ps = alpha > 0 ? 1.0 / alpha : std::numeric_limits<double>::infinity();
        }
        e.beta = r.number("beta", e.beta);
        e.eta = r.number("eta", e.eta);
        e.purcell_ratio = r.number("purcell_ratio", e.purcell_ratio);
        e.bg_prob_at_sat = r.number("bg_prob_at_sat", e.bg_prob_at_sat);
        e.bg_tau_ps = r.number("bg_tau_ps", e.bg_tau_ps);
        e.bg_power_exponent = r.number("bg_power_exponent", e.bg_power_exponent);
        e.exclusive_excitation = r.boolean("exclusive_excitation", e.exclusive_excitation);
        r.finish();
    }

    if (top.has("pump")) {
        Reader r(top.raw("pump"), "pump");
        auto& p = s.pump;
        p.rep_rate_hz = r.number("rep_rate_hz", p.rep_rate_hz);
        p.power_rel = r.number("power_rel", p.power_rel);
        const auto pattern = r.string("pattern", "single");
        if (pattern == "single")
            p.pattern = PulsePattern::Single;
        else if (pattern == "pair")
            p.pattern = PulsePattern::Pair;
        else
            throw ValidationError("pump.pattern", "expected \"single\" or \"pair\"");
        p.dt_ps = r.number("dt_ps", p.dt_ps);
        p.n_periods = r.unsigned_integer("n_periods", p.n_periods);
        r.finish();
    }
    s.pump.seed = s.seed;

    if (top.has("gate")) {
        Reader r(top.raw("gate"), "gate");
        GateSpec g;
        g.t_mod_ps = r.number("t_mod_ps", g.t_mod_ps);
        if (r.has("delay_ps") && r.raw("delay_ps").is_string()) {
            if (r.string("delay_ps", "") != "optimal")
                throw ValidationError("gate.delay_ps", "expected a number or \"optimal\"");
            s.gate_delay_optimal = true;
        } else if (r.has("delay_ps")) {
            g.delay_ps = r.number("delay_ps", 0.0);
        } else {
            s.gate_delay_optimal = true;
        }
        g.extinction_db = r.number("extinction_db", g.extinction_db);
        g.insertion_loss_db = r.number("insertion_loss_db", g.insertion_loss_db);
        const auto profile = r.string("profile", "gaussian");
        if (profile == "gaussian")
            g.profile = GateProfile::Gaussian;
        else if (profile == "rectangular")
            g.profile = GateProfile::Rectangular;
        else
            throw ValidationError("gate.profile", "expected \"gaussian\" or \"rectangular\"");
        r.finish();
        s.gate = g;
    }

    s.throughput = top.number("throughput", s.throughput);

    if (top.has("interferometer")) {
        Reader r(top.raw("interferometer"), "interferometer");
        const auto kind = r.string("kind", "hbt");
        if (kind == "hbt") {
            s.interferometer = InterferometerKind::Hbt;
            s.hbt = BeamsplitterSpec::from_reflectance(r.number("r", 0.5));
        } else if (kind == "hom") {
            s.interferometer = InterferometerKind::Hom;
            s.hom.delta_t_ps = r.number("delta_t_ps", s.pump.dt_ps > 0 ? s.pump.dt_ps : s.hom.delta_t_ps);
            s.hom.epsilon = r.number("epsilon", s.hom.epsilon);
            s.hom.bs1 = BeamsplitterSpec::from_reflectance(r.number("bs1_r", 0.5));
            s.hom.bs2 = BeamsplitterSpec::from_reflectance(r.number("bs2_r", 0.5));
            s.hom.overlap_override = r.optional_number("overlap_override");
        } else {
            throw ValidationError("interferometer.kind", "expected \"hbt\" or \"hom\"");
        }
        r.finish();
    }

    if (top.has("detectors")) {
        const auto& d = top.raw("detectors");
        if (d.is_string()) {
            s.detector_a = s.detector_b = parse_detector(d, "detectors");
        } else {
            Reader r(d, "detectors");
            if (r.has("a")) s.detector_a = parse_detector(r.raw("a"), "detectors.a");
            if (r.has("b")) s.detector_b = parse_detector(r.raw("b"), "detectors.b");
            r.finish();
        }
    }

    if (top.has("tcspc")) {
        Reader r(top.raw("tcspc"), "tcspc");
        const auto mode = r.string("mode", "time_tagged");
        if (mode == "time_tagged")
            s.tcspc.mode = TcspcMode::TimeTagged;
        else if (mode == "histogram")
            s.tcspc.mode = TcspcMode::Histogram;
        else
            throw ValidationError("tcspc.mode", "expected \"time_tagged\" or \"histogram\"");
        s.tcspc.bin_ps = r.number("bin_ps", s.tcspc.bin_ps);
        r.finish();
    }

    if (top.has("analysis")) {
        Reader r(top.raw("analysis"), "analysis");
        auto& a = s.analysis;
        a.window_ps = r.number("window_ps", a.window_ps);
        const double n_side = r.number("n_side_peaks", a.n_side_peaks);
        if (n_side != std::floor(n_side) || n_side > 1000)
            throw ValidationError("analysis.n_side_peaks", "expected an integer");
        a.n_side_peaks = static_cast<int>(n_side);
        a.g_star = r.optional_number("g_star");
        a.g_star_sigma = r.number("g_star_sigma", a.g_star_sigma);
        a.correct_leakage = r.boolean("correct_leakage", a.correct_leakage);
        a.lifetime = r.boolean("lifetime", a.lifetime);
        a.lifetime_range_ps = r.number("lifetime_range_ps", a.lifetime_range_ps);
        a.lifetime_jitter_ps = r.optional_number("lifetime_jitter_ps");
        r.finish();
    }

    if (top.has("outputs")) {
        Reader r(top.raw("outputs"), "outputs");
        s.outputs.report = r.string("report", "");
        s.outputs.histogram = r.string("histogram", "");
        s.outputs.timetags = r.string("timetags", "");
        s.outputs.lifetime_histogram = r.string("lifetime_histogram", "");
        r.finish();
    }
    top.finish();
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open scenario file '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario", fmt::format("invalid JSON: {}", e.what()));
    }
    return parse_scenario(doc);
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["seed"] = s.seed;
    const auto& e = s.emitter;
    j["emitter"] = {{"t1_ps", e.t1_ps},
                    {"t2star_ps", std::isfinite(e.t2star_ps) ? json(e.t2star_ps) : json(nullptr)},
                    {"beta", e.beta},
                    {"eta", e.eta},
                    {"purcell_ratio", e.purcell_ratio},
                    {"bg_prob_at_sat", e.bg_prob_at_sat},
                    {"bg_tau_ps", e.bg_tau_ps},
                    {"bg_power_exponent", e.bg_power_exponent},
                    {"exclusive_excitation", e.exclusive_excitation}};
    j["pump"] = {{"rep_rate_hz", s.pump.rep_rate_hz},
                 {"power_rel", s.pump.power_rel},
                 {"pattern", s.pump.pattern == PulsePattern::Pair ? "pair" : "single"},
                 {"dt_ps", s.pump.dt_ps},
                 {"n_periods", s.pump.n_periods}};
    if (s.gate) {
        j["gate"] = {{"t_mod_ps", s.gate->t_mod_ps},
                     {"delay_ps", s.gate_delay_optimal ? json("optimal") : json(s.gate->delay_ps)},
                     {"extinction_db", s.gate->extinction_db},
                     {"insertion_loss_db", s.gate->insertion_loss_db},
                     {"profile", s.gate->profile == GateProfile::Gaussian ? "gaussian" : "rectangular"}};
    }
    j["throughput"] = s.throughput;
    if (s.interferometer == InterferometerKind::Hbt) {
        j["interferometer"] = {{"kind", "hbt"}, {"r", s.hbt.r}};
    } else {
        nlohmann::ordered_json h = {{"kind", "hom"},
                                    {"delta_t_ps", s.hom.delta_t_ps},
                                    {"epsilon", s.hom.epsilon},
                                    {"bs1_r", s.hom.bs1.r},
                                    {"bs2_r", s.hom.bs2.r}};
        if (s.hom.overlap_override) h["overlap_override"] = *s.hom.overlap_override;
        j["interferometer"] = h;
    }
    j["detectors"] = {{"a", detector_json(s.detector_a)}, {"b", detector_json(s.detector_b)}};
    j["tcspc"] = {{"mode", s.tcspc.mode == TcspcMode::TimeTagged ? "time_tagged" : "histogram"},
                  {"bin_ps", s.tcspc.bin_ps}};
    nlohmann::ordered_json a = {{"window_ps", s.analysis.window_ps},
                                {"n_side_peaks", s.analysis.n_side_peaks},
                                {"g_star_sigma", s.analysis.g_star_sigma},
                                {"correct_leakage", s.analysis.correct_leakage},
                                {"lifetime", s.analysis.lifetime},
                                {"lifetime_range_ps", s.analysis.lifetime_range_ps}};
    if (s.analysis.g_star) a["g_star"] = *s.analysis.g_star;
    if (s.analysis.lifetime_jitter_ps) a["lifetime_jitter_ps"] = *s.analysis.lifetime_jitter_ps;
    j["analysis"] = a;
    j["outputs"] = {{"report", s.outputs.report},
                    {"histogram", s.outputs.histogram},
                    {"timetags", s.outputs.timetags},
                    {"lifetime_histogram", s.outputs.lifetime_histogram}};
    return j;
}

void resolve_gate(Scenario& s) {
    if (!s.gate || !s.gate_delay_optimal) return;
    s.gate->delay_ps = optimal_delay(s.emitter.t1_ps, s.gate->t_mod_ps).delay_ps;
    s.gate_delay_optimal = false;
    s.validate();
}

}  // namespace photongate
