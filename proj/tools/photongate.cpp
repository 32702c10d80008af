// photongate: command-line front end for the gated single-photon source
// simulator and its analysis formulas.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "photongate/analysis.hpp"
#include "photongate/error.hpp"
#include "photongate/gate.hpp"
#include "photongate/pipeline.hpp"
#include "photongate/scenario.hpp"

namespace pg = photongate;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> bin_ps;
    std::optional<double> t_mod_ps;
    std::optional<std::uint64_t> n_periods;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Override the scenario seed");
    cmd->add_option("--bin-ps", o.bin_ps, "Override the histogram bin width (multiple of 4 ps)");
    cmd->add_option("--t-mod-ps", o.t_mod_ps, "Override the gate width; adds a gate at the optimal delay if none");
    cmd->add_option("--n-periods", o.n_periods, "Override the number of repetition periods");
}

pg::Scenario load_with_overrides(const std::string& path, const Overrides& o) {
    auto s = pg::load_scenario(path);
    if (o.seed) {
        s.seed = *o.seed;
        s.pump.seed = *o.seed;
    }
    if (o.bin_ps) s.tcspc.bin_ps = *o.bin_ps;
    if (o.n_periods) s.pump.n_periods = *o.n_periods;
    if (o.t_mod_ps) {
        if (!s.gate) {
            s.gate = pg::GateSpec{};
            s.gate_delay_optimal = true;
        }
        s.gate->t_mod_ps = *o.t_mod_ps;
    }
    s.validate();
    return s;
}

// Writes to --out when given, stdout otherwise.
template <class F>
void emit(const std::string& out_path, F&& write) {
    if (out_path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", out_path));
    write(f);
}

std::vector<pg::SweepPoint> parse_grid(const std::string& text, pg::SweepKind kind) {
    std::vector<pg::SweepPoint> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item.empty()) continue;
        if (item == "ungated" || item == "inf") {
            if (kind != pg::SweepKind::TMod)
                throw pg::ValidationError("--grid", "'ungated' is only valid for a t_mod sweep");
            grid.push_back({0.0, true});
            continue;
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            grid.push_back({v, false});
        } catch (const std::exception&) {
            throw pg::ValidationError("--grid", fmt::format("'{}' is not a number", item));
        }
    }
    if (grid.empty()) throw pg::ValidationError("--grid", "must not be empty");
    return grid;
}

std::vector<pg::TimeTag> read_tag_file(const std::string& path) {
    const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return csv ? pg::read_timetags_csv(in) : pg::read_timetags(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gated single-photon source simulator and analysis toolkit"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
    std::string run_scenario_path;
    std::string run_out;
    std::string run_tags;
    std::string run_hist;
    Overrides run_over;
    run->add_option("scenario", run_scenario_path, "Scenario JSON file")->required();
    run->add_option("--out", run_out, "Report path (default: scenario setting or stdout)");
    run->add_option("--timetags", run_tags, "Write binary time tags here");
    run->add_option("--histogram", run_hist, "Write the correlation histogram CSV here");
    add_overrides(run, run_over);

    // sweep
    auto* sw = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
    std::string sw_scenario_path;
    std::string sw_kind;
    std::string sw_grid;
    std::string sw_out;
    unsigned sw_threads = 0;
    Overrides sw_over;
    sw->add_option("scenario", sw_scenario_path, "Scenario JSON file")->required();
    sw->add_option("--kind", sw_kind, "power | t_mod | rep_rate")
        ->required()
        ->check(CLI::IsMember({"power", "t_mod", "rep_rate"}));
    sw->add_option("--grid", sw_grid,
                   "Comma-separated values (power in P_sat, t_mod in ps or 'ungated', rep rate in Hz)")
        ->required();
    sw->add_option("--threads", sw_threads, "Worker threads (0: all cores)");
    sw->add_option("--out", sw_out, "CSV path (default stdout)");
    add_overrides(sw, sw_over);

    // analyze
    auto* an = app.add_subcommand("analyze", "Analyze a recorded time-tag file");
    std::string an_file;
    std::string an_kind = "g2";
    std::string an_scenario;
    std::string an_out;
    std::string an_hist;
    pg::AnalysisParams ap;
    double an_rep_rate = 80e6;
    double an_bs1_r = 0.5;
    double an_bs2_r = 0.5;
    bool an_no_leak = false;
    std::optional<double> an_g_star;
    std::optional<double> an_g_star_sigma;
    std::optional<double> an_bin;
    std::optional<double> an_window;
    std::optional<std::uint64_t> an_n_periods;
    std::optional<double> an_jitter;
    an->add_option("file", an_file, "Time-tag file (binary, or CSV with .csv extension)")->required();
    an->add_option("--kind", an_kind, "g2 | hom | lifetime")->check(CLI::IsMember({"g2", "hom", "lifetime"}));
    an->add_option("--scenario", an_scenario, "Take acquisition settings from this scenario");
    an->add_option("--rep-rate-hz", an_rep_rate, "Repetition rate");
    an->add_option("--dt-ps", ap.dt_ps, "Pulse-pair delay (hom, pair lifetime)");
    an->add_option("--bin-ps", an_bin, "Histogram bin width (multiple of 4 ps)");
    an->add_option("--window-ps", an_window, "Correlation half window");
    an->add_option("--n-side-peaks", ap.n_side_peaks, "Side peaks per side for g2");
    an->add_option("--n-periods", an_n_periods, "Acquisition length in periods (enables count rates)");
    an->add_option("--bs1-r", an_bs1_r, "First HOM beamsplitter reflectance");
    an->add_option("--bs2-r", an_bs2_r, "Second HOM beamsplitter reflectance");
    an->add_option("--epsilon", ap.epsilon, "Interferometer imperfection 1 - visibility");
    an->add_option("--g-star", an_g_star, "Two-photon emission probability for hom");
    an->add_option("--g-star-sigma", an_g_star_sigma, "Uncertainty of g*");
    an->add_flag("--no-leakage-correction", an_no_leak, "Use plain window integrals for hom");
    an->add_option("--lifetime-range-ps", ap.lifetime_range_ps, "Start-stop histogram range");
    an->add_option("--jitter-ps", an_jitter, "Detector jitter sigma for the lifetime fit start");
    an->add_option("--out", an_out, "Report path (default stdout)");
    an->add_option("--histogram", an_hist, "Write the analyzed histogram CSV here");

    // eom-curve
    auto* eom = app.add_subcommand("eom-curve", "Maximum gate transmission versus gate width");
    std::vector<double> eom_t1{625.0};
    double eom_min = 100, eom_max = 3000, eom_step = 10, eom_il = 1.9;
    std::vector<double> eom_list;
    std::string eom_out;
    eom->add_option("--t1-ps", eom_t1, "Lifetimes (repeatable or comma-separated)")->delimiter(',');
    eom->add_option("--t-mod-ps", eom_list, "Explicit gate widths (comma-separated)")->delimiter(',');
    eom->add_option("--t-mod-min", eom_min, "Grid start");
    eom->add_option("--t-mod-max", eom_max, "Grid end (inclusive)");
    eom->add_option("--t-mod-step", eom_step, "Grid step");
    eom->add_option("--il-db", eom_il, "Insertion loss");
    eom->add_option("--out", eom_out, "CSV path (default stdout)");

    // cavity
    auto* cav = app.add_subcommand("cavity", "Coupling parameter and out-coupling from the transmission dip");
    std::optional<double> cav_t;
    std::optional<double> cav_k;
    bool cav_over = false;
    cav->add_option("--t-dip", cav_t, "On-resonance transmission");
    cav->add_option("--k", cav_k, "Coupling parameter (forward direction)");
    cav->add_flag("--overcoupled", cav_over, "Use the overcoupled branch");

    // brightness
    auto* br = app.add_subcommand("brightness", "Source efficiency from the saturated count rate");
    double br_i = 0, br_rep = 80e6, br_sigma = 0;
    std::vector<double> br_zeta;
    br->add_option("--i-sat-cps", br_i, "Count rate at saturation")->required();
    br->add_option("--rep-rate-hz", br_rep, "Repetition rate");
    br->add_option("--zeta", br_zeta, "Setup efficiency, or its stage factors (comma-separated)")
        ->required()
        ->delimiter(',');
    br->add_option("--i-sat-sigma-cps", br_sigma, "Count-rate standard deviation");

    // invert-v
    auto* iv = app.add_subcommand("invert-v", "Two-photon overlap from the HOM peak-area ratio");
    double iv_m = 0, iv_g = 0, iv_r = 0.5, iv_eps = 0, iv_m_sigma = 0, iv_g_sigma = 0;
    iv->add_option("--m", iv_m, "M = A3 / (A2 + A4)")->required();
    iv->add_option("--g-star", iv_g, "Two-photon emission probability")->required();
    iv->add_option("--r", iv_r, "Reflectance of the second beamsplitter");
    iv->add_option("--epsilon", iv_eps, "1 - interferometer visibility");
    iv->add_option("--m-sigma", iv_m_sigma, "Uncertainty of M");
    iv->add_option("--g-star-sigma", iv_g_sigma, "Uncertainty of g*");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*run) {
            auto s = load_with_overrides(run_scenario_path, run_over);
            if (!run_out.empty()) s.outputs.report = run_out;
            if (!run_tags.empty()) s.outputs.timetags = run_tags;
            if (!run_hist.empty()) s.outputs.histogram = run_hist;
            const auto r = pg::run_scenario(s);
            pg::write_outputs(r, std::cout);
        } else if (*sw) {
            const auto s = load_with_overrides(sw_scenario_path, sw_over);
            const auto kind = sw_kind == "power" ? pg::SweepKind::Power
                              : sw_kind == "t_mod" ? pg::SweepKind::TMod
                                                   : pg::SweepKind::RepRate;
            const auto grid = parse_grid(sw_grid, kind);
            const auto rows = pg::sweep(s, kind, grid, sw_threads);
            emit(sw_out, [&](std::ostream& o) { pg::write_sweep_csv(o, kind, rows); });
        } else if (*an) {
            if (!an_scenario.empty()) {
                auto s = pg::load_scenario(an_scenario);
                ap = pg::analysis_params(s);
                an_bs1_r = s.hom.bs1.r;
                an_bs2_r = s.hom.bs2.r;
                an_rep_rate = s.pump.rep_rate_hz;
                an_no_leak = !s.analysis.correct_leakage;
            }
            ap.kind = an_kind == "g2" ? pg::AnalysisKind::G2
                      : an_kind == "hom" ? pg::AnalysisKind::Hom
                                         : pg::AnalysisKind::Lifetime;
            if (!(an_rep_rate > 0)) throw pg::ValidationError("--rep-rate-hz", "must be positive");
            ap.rep_period_ps = 1e12 / an_rep_rate;
            if (an_bin) ap.bin_ps = *an_bin;
            if (an_window) ap.window_ps = *an_window;
            if (an_n_periods) ap.n_periods = *an_n_periods;
            if (an_jitter) ap.lifetime_jitter_ps = *an_jitter;
            if (ap.dt_ps > 0) ap.pattern = pg::PulsePattern::Pair;
            ap.bs1 = pg::BeamsplitterSpec::from_reflectance(an_bs1_r);
            ap.bs2 = pg::BeamsplitterSpec::from_reflectance(an_bs2_r);
            ap.correct_leakage = !an_no_leak;
            if (an_g_star) ap.g_star = *an_g_star;
            if (an_g_star_sigma) ap.g_star_sigma = *an_g_star_sigma;
            if (ap.kind == pg::AnalysisKind::Hom) {
                if (!(ap.dt_ps > 0)) throw pg::ValidationError("--dt-ps", "hom analysis needs the pulse delay");
                if (!an_g_star && an_scenario.empty())
                    throw pg::ValidationError("--g-star", "hom analysis needs g* (from an HBT measurement)");
            }
            pg::TcspcConfig{pg::TcspcMode::TimeTagged, ap.bin_ps}.validate();
            const auto tags = read_tag_file(an_file);
            if (tags.empty()) throw pg::FormatError("file holds no time tags", 0);
            const auto out = pg::analyze_tags(tags, ap);
            emit(an_out, [&](std::ostream& o) { o << pg::report_text(out.report); });
            if (!an_hist.empty()) {
                const auto& h = out.lifetime_histogram && ap.kind == pg::AnalysisKind::Lifetime
                                    ? *out.lifetime_histogram
                                    : out.correlation;
                emit(an_hist, [&](std::ostream& o) { pg::write_histogram_csv(o, h); });
            }
        } else if (*eom) {
            std::vector<double> grid = eom_list;
            if (grid.empty()) {
                if (!(eom_step > 0) || !(eom_max >= eom_min) || !(eom_min > 0))
                    throw pg::ValidationError("--t-mod-step", "need 0 < min <= max and step > 0");
                const auto n = static_cast<std::size_t>(std::floor((eom_max - eom_min) / eom_step + 1e-9)) + 1;
                for (std::size_t i = 0; i < n; ++i) grid.push_back(eom_min + static_cast<double>(i) * eom_step);
            }
            const auto curves = pg::transmission_curve(eom_t1, grid, eom_il);
            emit(eom_out, [&](std::ostream& o) { pg::write_transmission_csv(o, curves); });
        } else if (*cav) {
            const auto branch = cav_over ? pg::CouplingBranch::Overcoupled : pg::CouplingBranch::Undercoupled;
            if (cav_t.has_value() == cav_k.has_value())
                throw pg::ValidationError("--t-dip", "give exactly one of --t-dip and --k");
            const double t_dip = cav_t ? *cav_t : pg::cavity_transmission(*cav_k);
            std::cout << pg::report_text(pg::to_json(pg::cavity_coupling(t_dip, branch)));
        } else if (*br) {
            double zeta = 1.0;
            for (double z : br_zeta) zeta *= pg::setup_efficiency({z});
            std::cout << pg::report_text(pg::to_json(pg::brightness(br_i, br_rep, zeta, br_sigma)));
        } else if (*iv) {
            const auto bs = pg::BeamsplitterSpec::from_reflectance(iv_r);
            const auto inv = pg::invert_v(iv_m, iv_g, bs.r, bs.t, iv_eps);
            nlohmann::ordered_json j = {{"m", iv_m},
                                        {"g_star", iv_g},
                                        {"v", inv.v},
                                        {"v_sigma", pg::v_uncertainty(iv_m, iv_m_sigma, iv_g, iv_g_sigma,
                                                                      bs.r, bs.t, iv_eps)},
                                        {"m_bound", inv.m_bound},
                                        {"v_in_range", inv.in_range}};
            std::cout << pg::report_text(j);
        }
    } catch (const pg::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
