#pragma once

#include <array>
#include <initializer_list>
#include <optional>
#include <vector>

#include <json.hpp>

#include "photongate/histogram.hpp"
#include "photongate/optics.hpp"

namespace photongate {

// --- g2(0) -------------------------------------------------------------

struct G2Report {
    double g2_zero = 0.0;
    double sigma = 0.0;  ///< standard deviation of the normalized side-peak areas
    double central_area = 0.0;
    std::vector<double> peak_areas;  ///< side peaks, ordered -n..-1, +1..+n
    bool overlapping_peaks = false;  ///< inter-peak minimum above 20 % of the peak maximum
};

/// Peak-area g2(0) of a pulsed correlation histogram: the central peak
/// and up to n_side_peaks peaks per side are integrated over +-rep_period/2
/// around their nominal centers. Throws AnalysisError when fewer than three
/// side peaks fit in the histogram or the side peaks are empty.
G2Report g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side_peaks = 6);

/// Coincidence density midway between peaks (zones of +-period/8 around
/// (k + 1/2) period, central gaps excluded) relative to the mean density of
/// the side peaks, area / period. Near 0 for well separated peaks.
double inter_peak_level(const CorrelationHistogram& h, double rep_period_ps);

// --- lifetime ----------------------------------------------------------

struct LifetimeFit {
    double t1_ps = 0.0;
    double sigma_ps = 0.0;
    double fit_start_ps = 0.0;
    double fit_end_ps = 0.0;
    double tail_counts = 0.0;
};

/// Weighted least-squares fit of log counts against time over the decay
/// tail: from the peak plus twice the jitter (estimated from the rising
/// edge unless given) to the last bin holding at least 10 counts.
/// Throws AnalysisError with fewer than 100 counts in the tail.
LifetimeFit fit_lifetime(const Histogram& h, std::optional<double> jitter_sigma_ps = std::nullopt);

/// Full width of the histogram at `fraction` of its (3-bin smoothed)
/// maximum, crossing points linearly interpolated between bin centers.
double width_at_fraction(const Histogram& h, double fraction);

// --- HOM ---------------------------------------------------------------

struct HomAreaOptions {
    BeamsplitterSpec bs1;
    BeamsplitterSpec bs2;
    /// Undo window-to-window leakage using the far clusters, whose peak
    /// ratios are fixed by the beamsplitters alone.
    bool correct_leakage = true;
    int far_clusters = 4;
};

struct HomAreas {
    std::array<double, 5> a{};    ///< peaks 1..5 at -2dt..+2dt
    std::array<double, 5> raw{};  ///< plain window integrals
    bool leakage_corrected = false;
    double peak_width_ps = 0.0;   ///< RMS width of one peak
    bool window_overlap = false;  ///< delta_t < 3 * peak width
};

/// Integrates the five central-cluster peaks over +-delta_t/2 windows
/// centered at -2dt, -dt, 0, dt, 2dt.
///
/// With leakage correction, every peak is assumed to share one shape
/// (Laplace convolved with a Gaussian). The far clusters (tau near
/// k * rep_period, uncorrelated photons) are folded onto one period and fit
/// with that shape, their peak ratios being fixed by the beamsplitters. The
/// central windows minus the far windows are then a known mix of the five
/// area deviations, which is inverted.
HomAreas hom_peak_areas(const CorrelationHistogram& h, double delta_t_ps, double rep_period_ps,
                        const HomAreaOptions& options = {});

/// Relative weights of the five peaks of an uncorrelated (far) cluster.
std::array<double, 5> far_cluster_weights(const BeamsplitterSpec& bs1, const BeamsplitterSpec& bs2);

/// M = A3 / (A2 + A4). Throws AnalysisError when A2 + A4 is not positive.
double m_ratio(double a2, double a3, double a4);

struct VInversion {
    double v = 0.0;
    double m_bound = 0.0;  ///< M expected without two-photon interference
    bool in_range = true;  ///< v within [0, 1]
};

/// Inverts the HOM peak-area relation for the two-photon overlap.
/// Throws ValidationError for epsilon = 1 (no interference possible).
VInversion invert_v(double m, double g_star, double r, double t, double epsilon);

/// M predicted for given (g*, V, r, t, epsilon).
double forward_m(double g_star, double v, double r, double t, double epsilon);

/// Expected peak areas A1..A5 in units of N eta2.
std::array<double, 5> expected_hom_areas(double g_star, double v, double r, double t, double epsilon);

/// One-sigma uncertainty of V from uncertainties of M and g*.
double v_uncertainty(double m, double m_sigma, double g_star, double g_star_sigma, double r,
                     double t, double epsilon);

struct HomReport {
    std::array<double, 5> a{};
    double m = 0.0;
    double m_sigma = 0.0;
    double g_star = 0.0;
    double g_star_sigma = 0.0;
    double v = 0.0;
    double v_sigma = 0.0;
    double m_bound = 0.0;
    bool v_in_range = true;
    bool leakage_corrected = false;
    bool window_overlap = false;
};

HomReport make_hom_report(const HomAreas& areas, double g_star, double g_star_sigma, double r,
                          double t, double epsilon);

// --- cavity and brightness --------------------------------------------

enum class CouplingBranch { Undercoupled, Overcoupled };

struct CavityReport {
    double t_dip = 0.0;
    double k = 0.0;
    double eta = 0.0;
    CouplingBranch branch = CouplingBranch::Undercoupled;
};

/// On-resonance transmission T = (1 - K)^2 / (1 + K)^2.
double cavity_transmission(double k);

/// Coupling parameter and out-coupled fraction eta = 1 / (1 + 1/K) from the
/// transmission dip.
CavityReport cavity_coupling(double t_dip, CouplingBranch branch = CouplingBranch::Undercoupled);

struct BrightnessReport {
    double i_sat_cps = 0.0;
    double rep_rate_hz = 0.0;
    double zeta = 0.0;
    double xi = 0.0;
    double xi_sigma = 0.0;
};

/// Source efficiency xi = I_sat / (R_rep * zeta); the count-rate standard
/// deviation, when known, propagates into xi_sigma.
BrightnessReport brightness(double i_sat_cps, double rep_rate_hz, double zeta,
                            double i_sat_sigma_cps = 0.0);

/// Total setup detection efficiency as a product of stage transmissions.
double setup_efficiency(std::initializer_list<double> stages);

// --- JSON --------------------------------------------------------------

nlohmann::ordered_json to_json(const G2Report& r);
nlohmann::ordered_json to_json(const LifetimeFit& r);
nlohmann::ordered_json to_json(const HomReport& r);
nlohmann::ordered_json to_json(const CavityReport& r);
nlohmann::ordered_json to_json(const BrightnessReport& r);

}  // namespace photongate
