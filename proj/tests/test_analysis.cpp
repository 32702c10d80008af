#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "photongate/analysis.hpp"
#include "photongate/error.hpp"

using namespace photongate;

namespace {

using Cdf = std::function<double(double)>;

Cdf gaussian_cdf(double sigma) {
    return [sigma](double x) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); };
}

Cdf laplace_cdf(double lambda) {
    return [lambda](double x) {
        return x < 0 ? 0.5 * std::exp(x / lambda) : 1.0 - 0.5 * std::exp(-x / lambda);
    };
}

struct Peak {
    double center;
    double area;
};

// Expected counts (rounded) of peaks with a common shape, binned at bin_ps
// around tau = 0 over [-window, window].
CorrelationHistogram peaks_histogram(const std::vector<Peak>& peaks, const Cdf& cdf, double bin_ps,
                                     double window_ps, double flat_per_bin = 0.0) {
    CorrelationHistogram h;
    const auto half = static_cast<long>(std::ceil(window_ps / bin_ps));
    h.bin_ps = bin_ps;
    h.first_center_ps = -static_cast<double>(half) * bin_ps;
    h.counts.resize(2 * half + 1);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double lo = h.center(i) - bin_ps / 2;
        const double hi = h.center(i) + bin_ps / 2;
        double c = flat_per_bin;
        for (const auto& p : peaks) c += p.area * (cdf(hi - p.center) - cdf(lo - p.center));
        h.counts[i] = static_cast<std::uint64_t>(std::llround(c));
    }
    return h;
}

std::vector<Peak> comb(double period, int n, double side_area, double central_area) {
    std::vector<Peak> p;
    for (int k = -n; k <= n; ++k) p.push_back({k * period, k == 0 ? central_area : side_area});
    return p;
}

}  // namespace

TEST(G2Zero, AntibunchedComb) {
    const double period = 12500;
    const auto h = peaks_histogram(comb(period, 8, 1e5, 2e4), gaussian_cdf(400), 100, 6.5 * period);
    const auto r = g2_zero(h, period, 6);
    EXPECT_NEAR(r.g2_zero, 0.2, 1e-4);
    EXPECT_LT(r.sigma, 1e-4);
    EXPECT_EQ(r.peak_areas.size(), 12u);
    EXPECT_FALSE(r.overlapping_peaks);
}

TEST(G2Zero, PoissonLightGivesOne) {
    const double period = 12500;
    const auto h = peaks_histogram(comb(period, 8, 5e4, 5e4), gaussian_cdf(700), 100, 6.5 * period);
    EXPECT_NEAR(g2_zero(h, period).g2_zero, 1.0, 1e-4);
}

TEST(G2Zero, IdealSingleEmitterGivesZero) {
    const double period = 12500;
    const auto h = peaks_histogram(comb(period, 8, 5e4, 0), gaussian_cdf(300), 100, 6.5 * period);
    EXPECT_NEAR(g2_zero(h, period).g2_zero, 0.0, 1e-6);
}

TEST(G2Zero, SigmaIsSpreadOfNormalizedSidePeaks) {
    const double period = 10000;
    std::vector<Peak> p = comb(period, 3, 1e6, 1e5);
    p[0].area = 0.9e6;  // -3
    p[6].area = 1.1e6;  // +3
    const auto h = peaks_histogram(p, gaussian_cdf(200), 100, 3.5 * period);
    const auto r = g2_zero(h, period, 3);
    // Side areas {900,1000,1000,1000,1000,1100}: mean 1000, sample std sqrt(4000)
    EXPECT_NEAR(r.g2_zero, 0.1, 1e-5);
    EXPECT_NEAR(r.sigma, std::sqrt(0.02 / 5), 1e-5);
}

TEST(G2Zero, TooFewSidePeaksThrow) {
    const double period = 12500;
    const auto h = peaks_histogram(comb(period, 1, 1e4, 0), gaussian_cdf(300), 100, 1.5 * period);
    EXPECT_THROW(g2_zero(h, period), AnalysisError);
}

TEST(G2Zero, OverlapFlagForBroadPeaks) {
    const double period = 2000;
    const auto h = peaks_histogram(comb(period, 8, 1e4, 1e3), laplace_cdf(625), 20, 6.5 * period);
    EXPECT_TRUE(g2_zero(h, period).overlapping_peaks);
}

TEST(InterPeakLevel, SeparatedPeaksNearZeroAndBackgroundMeasured) {
    const double period = 12500;
    const auto clean = peaks_histogram(comb(period, 8, 1e5, 1e4), gaussian_cdf(300), 100, 6.5 * period);
    EXPECT_LT(inter_peak_level(clean, period), 1e-3);
    // Flat floor of 1 /ps; side peaks then hold 1e5 + 12500 per period.
    const auto floor =
        peaks_histogram(comb(period, 8, 1e5, 1e4), gaussian_cdf(300), 100, 6.5 * period, 100);
    EXPECT_NEAR(inter_peak_level(floor, period), 12500.0 / 112500.0, 1e-3);
}

TEST(Lifetime, RecoversExponentialUnderJitter) {
    std::mt19937_64 gen(5);
    std::exponential_distribution<double> decay(1.0 / 625);
    std::normal_distribution<double> jitter(0, 100);
    Histogram h;
    h.bin_ps = 32;
    h.first_center_ps = 16;
    h.counts.assign(391, 0);
    for (int i = 0; i < 200000; ++i) {
        const double t = 2000 + decay(gen) + jitter(gen);
        const auto bin = static_cast<long>(t / 32);
        if (bin >= 0 && bin < 391) ++h.counts[bin];
    }
    const auto fit = fit_lifetime(h);
    EXPECT_NEAR(fit.t1_ps, 625, 3 * fit.sigma_ps + 2);
    EXPECT_GT(fit.sigma_ps, 0);
    EXPECT_LT(fit.sigma_ps, 10);
    EXPECT_GT(fit.fit_start_ps, 2000);
    EXPECT_GT(fit.tail_counts, 1e4);
}

TEST(Lifetime, SparseTailThrows) {
    Histogram h;
    h.bin_ps = 32;
    h.first_center_ps = 16;
    h.counts.assign(100, 0);
    h.counts[10] = 40;
    h.counts[11] = 20;
    EXPECT_THROW(fit_lifetime(h), AnalysisError);
}

TEST(WidthAtFraction, GaussianWidths) {
    const auto h = peaks_histogram({{0, 1e7}}, gaussian_cdf(100), 4, 1000);
    EXPECT_NEAR(width_at_fraction(h, 0.5), 2 * std::sqrt(2 * std::log(2.0)) * 100, 1.0);
    EXPECT_NEAR(width_at_fraction(h, std::exp(-1.0)), 2 * std::sqrt(2.0) * 100, 1.0);
}

TEST(FarClusterWeights, BalancedSplittersGiveBinomialPattern) {
    const auto w = far_cluster_weights({}, {});
    const double expected[5] = {1, 4, 6, 4, 1};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], expected[i] / 64.0, 1e-15);
    // Total: P(port A) * P(port B) for one photon each.
    const BeamsplitterSpec bs1{0.3, 0.7}, bs2{0.6, 0.4};
    const auto skew = far_cluster_weights(bs1, bs2);
    double sum = 0;
    for (double x : skew) sum += x;
    EXPECT_NEAR(sum, (bs1.t * bs2.t + bs1.r * bs2.r) * (bs1.t * bs2.r + bs1.r * bs2.t), 1e-15);
}

namespace {

// Central cluster from the expected-area model, far clusters from the
// beamsplitter pattern, all peaks sharing one shape.
struct HomCase {
    double period = 12500;
    double dt = 2200;
    double g = 0.1;
    double v = 0.6;
    double far_total = 4e5;
};

CorrelationHistogram hom_histogram(const HomCase& c, const Cdf& cdf, double bin) {
    const auto central = expected_hom_areas(c.g, c.v, 0.5, 0.5, 0.0);
    const auto far = far_cluster_weights({}, {});
    std::vector<Peak> peaks;
    for (int k = -6; k <= 6; ++k)
        for (int m = -2; m <= 2; ++m) {
            const double area = k == 0 ? c.far_total * central[m + 2] / 0.25 : c.far_total * far[m + 2] / 0.25;
            peaks.push_back({k * c.period + m * c.dt, area});
        }
    return peaks_histogram(peaks, cdf, bin, 4 * c.period + 2.5 * c.dt + bin);
}

}  // namespace

TEST(HomPeakAreas, NarrowPeaksNeedNoCorrection) {
    HomCase c;
    const auto h = hom_histogram(c, gaussian_cdf(150), 100);
    const auto a = hom_peak_areas(h, c.dt, c.period);
    const auto truth = expected_hom_areas(c.g, c.v, 0.5, 0.5, 0.0);
    for (int m = 0; m < 5; ++m) {
        EXPECT_NEAR(a.raw[m], c.far_total * truth[m] / 0.25, 1e-3 * c.far_total);
        EXPECT_NEAR(a.a[m], c.far_total * truth[m] / 0.25, 1e-3 * c.far_total);
    }
    EXPECT_NEAR(a.peak_width_ps, 150, 5);
    EXPECT_FALSE(a.window_overlap);
}

TEST(HomPeakAreas, LeakageCorrectionRecoversBroadGaussianPeaks) {
    HomCase c;
    const auto h = hom_histogram(c, gaussian_cdf(900), 100);
    const auto a = hom_peak_areas(h, c.dt, c.period);
    const auto truth = expected_hom_areas(c.g, c.v, 0.5, 0.5, 0.0);
    const double m_true = truth[2] / (truth[1] + truth[3]);
    EXPECT_TRUE(a.leakage_corrected);
    EXPECT_TRUE(a.window_overlap);
    EXPECT_NEAR(m_ratio(a.a[1], a.a[2], a.a[3]), m_true, 2e-3);
    // The plain windows are visibly biased.
    EXPECT_GT(std::abs(m_ratio(a.raw[1], a.raw[2], a.raw[3]) - m_true), 0.01);
}

TEST(HomPeakAreas, LeakageCorrectionRecoversExponentialPeaks) {
    HomCase c;
    c.v = 0.3;
    c.g = 0.29;
    const auto h = hom_histogram(c, laplace_cdf(770), 100);
    const auto a = hom_peak_areas(h, c.dt, c.period);
    const auto truth = expected_hom_areas(c.g, c.v, 0.5, 0.5, 0.0);
    EXPECT_NEAR(m_ratio(a.a[1], a.a[2], a.a[3]), truth[2] / (truth[1] + truth[3]), 2e-3);
    EXPECT_NEAR(a.peak_width_ps, std::sqrt(2.0) * 770, 20);
}

TEST(HomPeakAreas, WithoutCorrectionReturnsRawWindows) {
    HomCase c;
    const auto h = hom_histogram(c, gaussian_cdf(900), 100);
    HomAreaOptions o;
    o.correct_leakage = false;
    const auto a = hom_peak_areas(h, c.dt, c.period, o);
    EXPECT_FALSE(a.leakage_corrected);
    EXPECT_EQ(a.a, a.raw);
}

TEST(HomPeakAreas, RejectsClusterOverlapAndShortWindow) {
    HomCase c;
    const auto h = hom_histogram(c, gaussian_cdf(150), 100);
    EXPECT_THROW(hom_peak_areas(h, c.dt, 5 * c.dt), ValidationError);
    const auto tiny = peaks_histogram({{0, 100}}, gaussian_cdf(100), 100, 1000);
    EXPECT_THROW(hom_peak_areas(tiny, c.dt, c.period), AnalysisError);
}

TEST(HomModel, ExpectedAreasLimits) {
    // No interference, no multi-photon: 1:2:2:2:1 at 50/50.
    const auto a = expected_hom_areas(0, 0, 0.5, 0.5, 0);
    EXPECT_DOUBLE_EQ(a[1] / a[0], 2.0);
    EXPECT_DOUBLE_EQ(a[2] / a[0], 2.0);
    // Perfect interference empties the center.
    EXPECT_NEAR(expected_hom_areas(0, 1, 0.5, 0.5, 0)[2], 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(m_ratio(1, 1, 1), 0.5);
    EXPECT_THROW(m_ratio(0, 1, 0), AnalysisError);
}

TEST(InvertV, PublishedOperatingPoints) {
    struct Row {
        double m, g, v, bound;
    };
    for (const Row& r : {Row{0.40, 0.16, 0.392, 0.569}, Row{0.49, 0.29, 0.316, 0.612},
                         Row{0.31, 0.20, 0.656, 0.583}}) {
        const auto inv = invert_v(r.m, r.g, 0.5, 0.5, 0.0);
        EXPECT_NEAR(inv.v, r.v, 1e-3);
        EXPECT_NEAR(inv.m_bound, r.bound, 1e-3);
        EXPECT_TRUE(inv.in_range);
    }
}

TEST(InvertV, InvertsForwardModelAndAreaRatio) {
    for (double g : {0.0, 0.05, 0.29})
        for (double v : {0.0, 0.3, 0.9})
            for (double r : {0.3, 0.5, 0.62})
                for (double eps : {0.0, 0.1, 0.4}) {
                    const double m = forward_m(g, v, r, 1 - r, eps);
                    EXPECT_NEAR(invert_v(m, g, r, 1 - r, eps).v, v, 1e-12);
                    const auto a = expected_hom_areas(g, v, r, 1 - r, eps);
                    EXPECT_NEAR(m_ratio(a[1], a[2], a[3]), m, 1e-12);
                }
}

TEST(InvertV, BoundAndOutOfRange) {
    for (double g : {0.0, 0.1, 0.5, 1.0}) {
        const auto inv = invert_v((1 + 2 * g) / (2 * (1 + g)), g, 0.5, 0.5, 0);
        EXPECT_NEAR(inv.v, 0.0, 1e-12);
    }
    EXPECT_FALSE(invert_v(0.7, 0.0, 0.5, 0.5, 0).in_range);
    EXPECT_FALSE(invert_v(-0.1, 0.0, 0.5, 0.5, 0).in_range);
    EXPECT_THROW(invert_v(0.4, 0.1, 0.5, 0.5, 1.0), ValidationError);
    EXPECT_THROW(invert_v(0.4, 0.1, 0.5, 0.6, 0.0), ValidationError);
}

TEST(InvertV, UncertaintyPropagation) {
    const double c = 2.0;  // (r^3 t + r t^3) / (r^2 t^2) at 50/50
    EXPECT_NEAR(v_uncertainty(0.49, 0.01, 0.29, 0.0, 0.5, 0.5, 0), c * 1.29 * 0.01, 1e-12);
    EXPECT_NEAR(v_uncertainty(0.49, 0.0, 0.29, 0.02, 0.5, 0.5, 0), c * 0.51 * 0.02, 1e-12);
    // Finite-difference check.
    const double m = 0.45, g = 0.2, dm = 1e-6, dg = 1e-6;
    const double dv_dm = (invert_v(m + dm, g, 0.4, 0.6, 0.1).v - invert_v(m - dm, g, 0.4, 0.6, 0.1).v) / (2 * dm);
    const double dv_dg = (invert_v(m, g + dg, 0.4, 0.6, 0.1).v - invert_v(m, g - dg, 0.4, 0.6, 0.1).v) / (2 * dg);
    EXPECT_NEAR(v_uncertainty(m, 0.01, g, 0.02, 0.4, 0.6, 0.1), std::hypot(dv_dm * 0.01, dv_dg * 0.02),
                1e-6);
}

TEST(HomReport, PoissonSigmaAndFields) {
    HomAreas areas;
    areas.a = {100, 200, 180, 200, 100};
    areas.raw = areas.a;
    const auto rep = make_hom_report(areas, 0.1, 0.01, 0.5, 0.5, 0);
    EXPECT_DOUBLE_EQ(rep.m, 0.45);
    EXPECT_NEAR(rep.m_sigma, 0.45 * std::sqrt(1.0 / 180 + 1.0 / 400), 1e-12);
    const auto j = to_json(rep);
    for (const char* key : {"m", "m_sigma", "g_star", "g_star_sigma", "v", "v_sigma", "m_bound"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cavity, Limits) {
    auto none = cavity_coupling(1.0);
    EXPECT_DOUBLE_EQ(none.k, 0.0);
    EXPECT_DOUBLE_EQ(none.eta, 0.0);
    auto critical = cavity_coupling(0.0);
    EXPECT_DOUBLE_EQ(critical.k, 1.0);
    EXPECT_DOUBLE_EQ(critical.eta, 0.5);
    EXPECT_THROW(cavity_coupling(1.2), ValidationError);
    EXPECT_THROW(cavity_coupling(1.0, CouplingBranch::Overcoupled), ValidationError);
}

TEST(Cavity, OperatingPointAndRoundTrip) {
    EXPECT_NEAR(cavity_transmission(0.33), 0.254, 5e-4);
    const auto r = cavity_coupling(cavity_transmission(0.33));
    EXPECT_NEAR(r.k, 0.33, 1e-12);
    EXPECT_NEAR(r.eta, 0.248, 2e-3);
    for (double k : {0.01, 0.2, 0.7, 0.999}) {
        EXPECT_NEAR(cavity_coupling(cavity_transmission(k)).k, k, 1e-12);
        const double over = 1 / k;
        const auto o = cavity_coupling(cavity_transmission(over), CouplingBranch::Overcoupled);
        EXPECT_NEAR(o.k, over, 1e-9 * over);
        EXPECT_GE(o.eta, 0.5);
        EXPECT_LT(o.eta, 1.0);
    }
}

TEST(Brightness, RoundTripAndCombinedEfficiency) {
    const double zeta = setup_efficiency({0.5, 0.5, 0.125});
    EXPECT_DOUBLE_EQ(zeta, 0.03125);
    const double i_sat = 0.119 * 8e7 * zeta;
    EXPECT_NEAR(i_sat, 297500, 1e-6);
    EXPECT_NEAR(brightness(i_sat, 8e7, zeta).xi, 0.119, 1e-15);
    const double xi_b = brightness(0.102 * 8e7 * zeta, 8e7, zeta).xi;
    EXPECT_NEAR(0.119 + xi_b, 0.221, 1e-12);
    EXPECT_NEAR(brightness(i_sat, 8e7, zeta, 1000).xi_sigma, 1000 / (8e7 * zeta), 1e-15);
    EXPECT_THROW(brightness(i_sat, 8e7, 0.0), ValidationError);
    EXPECT_THROW(brightness(i_sat, 8e7, 1.5), ValidationError);
    EXPECT_THROW(setup_efficiency({0.5, 0.0}), ValidationError);
}

TEST(Json, ReportFieldNames) {
    G2Report g;
    const auto jg = to_json(g);
    for (const char* key : {"g2_zero", "sigma", "central_area", "peak_areas", "overlapping_peaks"})
        EXPECT_TRUE(jg.contains(key)) << key;
    const auto jl = to_json(LifetimeFit{});
    EXPECT_TRUE(jl.contains("t1_ps"));
    EXPECT_TRUE(jl.contains("sigma_ps"));
    const auto jc = to_json(CavityReport{});
    EXPECT_EQ(jc["branch"], "undercoupled");
    EXPECT_TRUE(to_json(BrightnessReport{}).contains("xi"));
}
