#include "photongate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "photongate/error.hpp"

namespace photongate {

namespace {

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::size_t argmax_smoothed(const Histogram& h, double& smoothed_max) {
    std::size_t best = 0;
    smoothed_max = -1.0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double left = i > 0 ? static_cast<double>(h.counts[i - 1]) : static_cast<double>(h.counts[i]);
        const double right = i + 1 < h.counts.size() ? static_cast<double>(h.counts[i + 1])
                                                     : static_cast<double>(h.counts[i]);
        const double s = (left + static_cast<double>(h.counts[i]) + right) / 3.0;
        if (s > smoothed_max) {
            smoothed_max = s;
            best = i;
        }
    }
    return best;
}

}  // namespace

G2Report g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side_peaks) {
    if (!(rep_period_ps > 0)) throw ValidationError("rep_period_ps", "must be positive");
    const double half = rep_period_ps / 2.0;
    int available = 0;
    while (available < n_side_peaks &&
           (available + 1) * rep_period_ps + half <= h.upper_edge() + 1e-9 &&
           -(available + 1) * rep_period_ps - half >= h.lower_edge() - 1e-9)
        ++available;
    if (2 * available < 3)
        throw AnalysisError(fmt::format(
            "correlation window holds {} side peaks; at least 3 are needed", 2 * available));

    G2Report r;
    r.central_area = h.integrate(-half, half);
    for (int k = -available; k <= available; ++k) {
        if (k == 0) continue;
        const double c = k * rep_period_ps;
        r.peak_areas.push_back(h.integrate(c - half, c + half));
    }
    const double mean = std::accumulate(r.peak_areas.begin(), r.peak_areas.end(), 0.0) /
                        static_cast<double>(r.peak_areas.size());
    if (!(mean > 0)) throw AnalysisError("side peaks hold no coincidences");
    r.g2_zero = r.central_area / mean;
    r.sigma = sample_std(r.peak_areas, mean) / mean;

    // Overlap: the valley between neighbouring peaks vs the tallest bin.
    double peak_max = 0.0;
    for (auto c : h.counts) peak_max = std::max(peak_max, static_cast<double>(c));
    double valley = 0.0;
    for (int k = -available; k < available; ++k) {
        const double mid = (k + 0.5) * rep_period_ps;
        double zone_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            if (std::abs(h.center(i) - mid) <= rep_period_ps / 10.0)
                zone_min = std::min(zone_min, static_cast<double>(h.counts[i]));
        }
        if (std::isfinite(zone_min)) valley = std::max(valley, zone_min);
    }
    r.overlapping_peaks = peak_max > 0 && valley > 0.2 * peak_max;
    return r;
}

double inter_peak_level(const CorrelationHistogram& h, double rep_period_ps) {
    const auto report = g2_zero(h, rep_period_ps, 1000);
    const int n = static_cast<int>(report.peak_areas.size() / 2);
    const double mean_area = std::accumulate(report.peak_areas.begin(), report.peak_areas.end(), 0.0) /
                             static_cast<double>(report.peak_areas.size());
    const double zone = rep_period_ps / 8.0;
    double counts = 0.0;
    double width = 0.0;
    for (int k = -n; k < n; ++k) {
        if (k == -1 || k == 0) continue;  // gaps next to the central peak
        const double mid = (k + 0.5) * rep_period_ps;
        counts += h.integrate(mid - zone, mid + zone);
        width += 2.0 * zone;
    }
    if (width <= 0) throw AnalysisError("no inter-peak zones inside the correlation window");
    return (counts / width) / (mean_area / rep_period_ps);
}

LifetimeFit fit_lifetime(const Histogram& h, std::optional<double> jitter_sigma_ps) {
    if (h.counts.empty()) throw AnalysisError("empty lifetime histogram");
    double smoothed_max = 0.0;
    const std::size_t peak = argmax_smoothed(h, smoothed_max);

    double jitter = 0.0;
    if (jitter_sigma_ps) {
        jitter = *jitter_sigma_ps;
    } else {
        // Rising edge: half maximum sits 1.1774 sigma before the peak.
        for (std::size_t i = peak; i-- > 0;) {
            const double c = static_cast<double>(h.counts[i]);
            if (c < smoothed_max / 2) {
                const double c1 = static_cast<double>(h.counts[i + 1]);
                const double frac = c1 > c ? (smoothed_max / 2 - c) / (c1 - c) : 0.0;
                const double t_half = h.center(i) + frac * h.bin_ps;
                jitter = std::max(0.0, (h.center(peak) - t_half) / std::sqrt(2.0 * std::log(2.0)));
                break;
            }
        }
    }

    LifetimeFit fit;
    fit.fit_start_ps = h.center(peak) + 2.0 * jitter;
    std::size_t last = h.counts.size();
    while (last > 0 && h.counts[last - 1] < 10) --last;
    if (last == 0) throw AnalysisError("no bins with at least 10 counts");
    fit.fit_end_ps = h.center(last - 1);

    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (std::size_t i = peak; i < last; ++i) {
        const double x = h.center(i);
        const double n = static_cast<double>(h.counts[i]);
        if (x < fit.fit_start_ps || n <= 0) continue;
        const double y = std::log(n);
        sw += n;
        sx += n * x;
        sy += n * y;
        sxx += n * x * x;
        sxy += n * x * y;
        ++used;
    }
    fit.tail_counts = sw;
    if (sw < 100 || used < 3)
        throw AnalysisError(fmt::format("insufficient counts in lifetime tail ({:g} < 100)", sw));
    const double det = sw * sxx - sx * sx;
    if (!(det > 0)) throw AnalysisError("degenerate lifetime tail");
    const double slope = (sw * sxy - sx * sy) / det;
    const double intercept = (sy - slope * sx) / sw;
    if (!(slope < 0)) throw AnalysisError("lifetime tail does not decay");

    // Reduced chi-square inflates the slope error when the model misfits.
    double chi2 = 0.0;
    for (std::size_t i = peak; i < last; ++i) {
        const double x = h.center(i);
        const double n = static_cast<double>(h.counts[i]);
        if (x < fit.fit_start_ps || n <= 0) continue;
        const double r = std::log(n) - (intercept + slope * x);
        chi2 += n * r * r;
    }
    const double scale = used > 2 ? std::max(1.0, chi2 / static_cast<double>(used - 2)) : 1.0;
    const double slope_sigma = std::sqrt(sw / det * scale);
    fit.t1_ps = -1.0 / slope;
    fit.sigma_ps = slope_sigma / (slope * slope);
    return fit;
}

double width_at_fraction(const Histogram& h, double fraction) {
    if (!(fraction > 0 && fraction < 1)) throw ValidationError("fraction", "must lie in (0, 1)");
    double smoothed_max = 0.0;
    const std::size_t peak = argmax_smoothed(h, smoothed_max);
    const double level = fraction * smoothed_max;
    auto crossing = [&](std::size_t outside, std::size_t inside) {
        const double co = static_cast<double>(h.counts[outside]);
        const double ci = static_cast<double>(h.counts[inside]);
        const double frac = ci > co ? (level - co) / (ci - co) : 0.0;
        return h.center(outside) + frac * (h.center(inside) - h.center(outside));
    };
    std::optional<double> left;
    for (std::size_t i = peak; i-- > 0;) {
        if (static_cast<double>(h.counts[i]) < level) {
            left = crossing(i, i + 1);
            break;
        }
    }
    std::optional<double> right;
    for (std::size_t i = peak + 1; i < h.counts.size(); ++i) {
        if (static_cast<double>(h.counts[i]) < level) {
            right = crossing(i, i - 1);
            break;
        }
    }
    if (!left || !right) throw AnalysisError("histogram does not fall below the requested level");
    return *right - *left;
}

std::array<double, 5> far_cluster_weights(const BeamsplitterSpec& bs1, const BeamsplitterSpec& bs2) {
    // Offsets (in units of dt) of a detected photon: pulse slot + arm.
    std::array<double, 3> da{};
    std::array<double, 3> db{};
    for (int slot = 0; slot < 2; ++slot) {
        da[slot] += 0.5 * bs1.t * bs2.t;
        db[slot] += 0.5 * bs1.t * bs2.r;
        da[slot + 1] += 0.5 * bs1.r * bs2.r;
        db[slot + 1] += 0.5 * bs1.r * bs2.t;
    }
    std::array<double, 5> w{};
    for (int oa = 0; oa < 3; ++oa)
        for (int ob = 0; ob < 3; ++ob) w[ob - oa + 2] += da[oa] * db[ob];
    return w;
}

namespace {

// log Phi(b), accurate far into the lower tail.
double log_normal_cdf(double b) {
    if (b > -30.0) return std::log(normal_cdf(b));
    return -0.5 * b * b - std::log(-b * std::sqrt(2.0 * M_PI));
}

// Symmetric peak shape: Laplace (scale lambda) convolved with a Gaussian
// (sigma). Covers exponential tails from the emitter and Gaussian detector
// jitter or gating.
struct PeakShape {
    double lambda = 0.0;
    double sigma = 0.0;

    double cdf(double x) const {
        if (lambda <= 1e-6 * sigma) return normal_cdf(x / sigma);
        if (sigma <= 1e-6 * lambda)
            return x < 0 ? 0.5 * std::exp(x / lambda) : 1.0 - 0.5 * std::exp(-x / lambda);
        const double s = sigma * sigma / (2 * lambda * lambda);
        const double right = std::exp(-x / lambda + s + log_normal_cdf(x / sigma - sigma / lambda));
        const double left = std::exp(x / lambda + s + log_normal_cdf(-x / sigma - sigma / lambda));
        return normal_cdf(x / sigma) - 0.5 * right + 0.5 * left;
    }
    double mass(double from, double to) const { return cdf(to) - cdf(from); }
    double rms() const { return std::sqrt(2 * lambda * lambda + sigma * sigma); }
};

struct FarPattern {
    std::vector<double> edges;   // segment edges over one period around tau = 0
    std::vector<double> counts;  // mean counts per segment over the far clusters
    int clusters = 0;
};

// Mean histogram of the far clusters k_min..k_max (both sides), folded onto
// one period around zero.
FarPattern fold_far_clusters(const CorrelationHistogram& h, double period, int k_min, int k_max,
                             double seg_width) {
    FarPattern f;
    const auto n = static_cast<std::size_t>(std::ceil(period / seg_width));
    const double w = period / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) f.edges.push_back(-period / 2 + static_cast<double>(i) * w);
    f.counts.assign(n, 0.0);
    for (int k = k_min; k <= k_max; ++k) {
        for (int sign : {-1, 1}) {
            const double c = sign * k * period;
            for (std::size_t i = 0; i < n; ++i) f.counts[i] += h.integrate(c + f.edges[i], c + f.edges[i + 1]);
            ++f.clusters;
        }
    }
    for (auto& x : f.counts) x /= f.clusters;
    return f;
}

// Fits the shared peak shape to the folded far pattern, whose peaks sit at
// k*period + m*dt with known relative weights.
PeakShape fit_peak_shape(const FarPattern& f, const std::array<double, 5>& weights, double dt,
                         double period) {
    auto model_and_scale = [&](const PeakShape& shape, double& chi2) {
        std::vector<double> model(f.counts.size(), 0.0);
        std::vector<double> cdf(f.edges.size());
        for (int k = -2; k <= 2; ++k)
            for (int m = -2; m <= 2; ++m) {
                const double c = k * period + m * dt;
                for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = shape.cdf(f.edges[i] - c);
                for (std::size_t i = 0; i < model.size(); ++i)
                    model[i] += weights[m + 2] * (cdf[i + 1] - cdf[i]);
            }
        // Scale in closed form; Poisson-like weights.
        double num = 0, den = 0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double wt = 1.0 / std::max(f.counts[i], 1.0);
            num += wt * model[i] * f.counts[i];
            den += wt * model[i] * model[i];
        }
        const double scale = den > 0 ? num / den : 0.0;
        chi2 = 0;
        for (std::size_t i = 0; i < model.size(); ++i) {
            const double r = f.counts[i] - scale * model[i];
            chi2 += r * r / std::max(f.counts[i], 1.0);
        }
    };
    const double lo = std::log(1.0);
    const double hi = std::log(period);
    auto inner_best = [&](double log_sigma, double& best_log_lambda) {
        auto cost = [&](double log_lambda) {
            double chi2 = 0;
            model_and_scale({std::exp(log_lambda), std::exp(log_sigma)}, chi2);
            return chi2;
        };
        std::uintmax_t iters = 60;
        const auto r = boost::math::tools::brent_find_minima(cost, lo, hi, 24, iters);
        best_log_lambda = r.first;
        return r.second;
    };
    std::uintmax_t iters = 60;
    double best_log_lambda = 0.0;
    const auto outer = boost::math::tools::brent_find_minima(
        [&](double log_sigma) {
            double unused = 0;
            return inner_best(log_sigma, unused);
        },
        lo, hi, 24, iters);
    inner_best(outer.first, best_log_lambda);
    return {std::exp(best_log_lambda), std::exp(outer.first)};
}

}  // namespace

HomAreas hom_peak_areas(const CorrelationHistogram& h, double delta_t_ps, double rep_period_ps,
                        const HomAreaOptions& options) {
    if (!(delta_t_ps > 0)) throw ValidationError("delta_t_ps", "must be positive");
    if (!(rep_period_ps > 5 * delta_t_ps))
        throw ValidationError("rep_period_ps", "clusters overlap: period must exceed 5 delta_t");
    const double half = delta_t_ps / 2.0;
    auto windows_at = [&](double center) {
        std::array<double, 5> w{};
        for (int j = -2; j <= 2; ++j) {
            const double c = center + j * delta_t_ps;
            w[j + 2] = h.integrate(c - half, c + half);
        }
        return w;
    };
    if (h.lower_edge() > -2.5 * delta_t_ps || h.upper_edge() < 2.5 * delta_t_ps)
        throw AnalysisError("correlation window does not cover the central five-peak cluster");

    HomAreas out;
    out.raw = windows_at(0.0);
    out.a = out.raw;

    // Far clusters whose full period lies inside the histogram. Cluster 1
    // borders the central cluster and is used only when nothing else fits.
    int k_max = 0;
    while (k_max < options.far_clusters &&
           (k_max + 1.5) * rep_period_ps <= std::min(h.upper_edge(), -h.lower_edge()) + 1e-9)
        ++k_max;
    const int k_min = k_max >= 2 ? 2 : 1;

    const auto weights_raw = far_cluster_weights(options.bs1, options.bs2);
    const double weight_sum = std::accumulate(weights_raw.begin(), weights_raw.end(), 0.0);
    std::array<double, 5> weights{};
    for (int m = 0; m < 5; ++m) weights[m] = weights_raw[m] / weight_sum;

    std::optional<PeakShape> shape;
    FarPattern far;
    if (k_max >= 1) {
        const double seg = std::max(h.bin_ps, delta_t_ps / 64);
        far = fold_far_clusters(h, rep_period_ps, k_min, k_max, seg);
        if (std::accumulate(far.counts.begin(), far.counts.end(), 0.0) > 0)
            shape = fit_peak_shape(far, weights, delta_t_ps, rep_period_ps);
    }

    if (shape) {
        out.peak_width_ps = shape->rms();
    } else {
        // Truncated RMS of the tallest central-cluster peak.
        const auto tallest = std::max_element(out.raw.begin(), out.raw.end()) - out.raw.begin();
        const double c = (static_cast<double>(tallest) - 2) * delta_t_ps;
        double s = 0, s2 = 0;
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            const double x = h.center(i) - c;
            if (std::abs(x) > half) continue;
            s += static_cast<double>(h.counts[i]);
            s2 += static_cast<double>(h.counts[i]) * x * x;
        }
        out.peak_width_ps = s > 0 ? std::sqrt(s2 / s) : 0.0;
    }
    out.window_overlap = delta_t_ps < 3.0 * out.peak_width_ps;

    if (options.correct_leakage && shape) {
        // The central cluster equals the far pattern plus deviations D_m
        // of its five peak areas; every window of the difference is a known
        // mix of the D_m through the peak shape.
        const double far_total = std::accumulate(far.counts.begin(), far.counts.end(), 0.0);
        std::array<double, 5> far_windows{};
        for (int k = k_min; k <= k_max; ++k)
            for (int sign : {-1, 1}) {
                const auto w = windows_at(sign * k * rep_period_ps);
                for (int j = 0; j < 5; ++j) far_windows[j] += w[j] / far.clusters;
            }
        Eigen::Matrix<double, 5, 5> mix;
        Eigen::Matrix<double, 5, 1> residual;
        for (int j = 0; j < 5; ++j) {
            residual(j) = out.raw[j] - far_windows[j];
            for (int m = 0; m < 5; ++m) {
                const double d = (j - m) * delta_t_ps;
                mix(j, m) = shape->mass(d - half, d + half);
            }
        }
        const Eigen::Matrix<double, 5, 1> dev = mix.partialPivLu().solve(residual);
        for (int m = 0; m < 5; ++m) out.a[m] = far_total * weights[m] + dev(m);
        out.leakage_corrected = true;
    }
    return out;
}

double m_ratio(double a2, double a3, double a4) {
    if (!(a2 + a4 > 0)) throw AnalysisError("M undefined: A2 + A4 is not positive");
    return a3 / (a2 + a4);
}

namespace {

void check_splitter(double r, double t, double epsilon) {
    if (!(r > 0 && r < 1 && t > 0 && t < 1) || std::abs(r + t - 1) > 1e-9)
        throw ValidationError("r, t", "must lie in (0, 1) with r + t = 1");
    if (!(epsilon >= 0 && epsilon <= 1)) throw ValidationError("epsilon", "must lie in [0, 1]");
}

double no_interference_bound(double g_star) { return (1 + 2 * g_star) / (2 * (1 + g_star)); }

double interference_scale(double r, double t, double epsilon) {
    const double vis = (1 - epsilon) * (1 - epsilon);
    return (r * r * r * t + r * t * t * t) / (vis * r * r * t * t);
}

}  // namespace

VInversion invert_v(double m, double g_star, double r, double t, double epsilon) {
    check_splitter(r, t, epsilon);
    if (epsilon == 1.0)
        throw ValidationError("epsilon", "epsilon = 1 leaves no two-photon interference to invert");
    if (!(g_star >= 0)) throw ValidationError("g_star", "must be >= 0");
    VInversion out;
    out.m_bound = no_interference_bound(g_star);
    out.v = (out.m_bound - m) * (1 + g_star) * interference_scale(r, t, epsilon);
    out.in_range = out.v >= 0 && out.v <= 1;
    return out;
}

double forward_m(double g_star, double v, double r, double t, double epsilon) {
    check_splitter(r, t, epsilon);
    const double vis = (1 - epsilon) * (1 - epsilon);
    return no_interference_bound(g_star) -
           vis * r * r * t * t * v / ((1 + g_star) * (r * r * r * t + r * t * t * t));
}

std::array<double, 5> expected_hom_areas(double g_star, double v, double r, double t,
                                         double epsilon) {
    check_splitter(r, t, epsilon);
    const double r3t = r * r * r * t;
    const double rt3 = r * t * t * t;
    const double vis = (1 - epsilon) * (1 - epsilon);
    return {r3t, r3t * (1 + 2 * g_star) + rt3,
            (r3t + rt3) * (1 + 2 * g_star) - 2 * vis * r * r * t * t * v,
            r3t + rt3 * (1 + 2 * g_star), r3t};
}

double v_uncertainty(double m, double m_sigma, double g_star, double g_star_sigma, double r,
                     double t, double epsilon) {
    check_splitter(r, t, epsilon);
    const double c = interference_scale(r, t, epsilon);
    return c * std::hypot((1 + g_star) * m_sigma, (1 - m) * g_star_sigma);
}

HomReport make_hom_report(const HomAreas& areas, double g_star, double g_star_sigma, double r,
                          double t, double epsilon) {
    HomReport rep;
    rep.a = areas.a;
    rep.m = m_ratio(areas.a[1], areas.a[2], areas.a[3]);
    // Poisson counting error of the raw windows.
    const double a3 = std::max(areas.raw[2], 1.0);
    const double a24 = std::max(areas.raw[1] + areas.raw[3], 1.0);
    rep.m_sigma = std::abs(rep.m) * std::sqrt(1.0 / a3 + 1.0 / a24);
    rep.g_star = g_star;
    rep.g_star_sigma = g_star_sigma;
    const auto inv = invert_v(rep.m, g_star, r, t, epsilon);
    rep.v = inv.v;
    rep.m_bound = inv.m_bound;
    rep.v_in_range = inv.in_range;
    rep.v_sigma = v_uncertainty(rep.m, rep.m_sigma, g_star, g_star_sigma, r, t, epsilon);
    rep.leakage_corrected = areas.leakage_corrected;
    rep.window_overlap = areas.window_overlap;
    return rep;
}

double cavity_transmission(double k) {
    if (!(k >= 0)) throw ValidationError("k", "must be >= 0");
    const double x = (1 - k) / (1 + k);
    return x * x;
}

CavityReport cavity_coupling(double t_dip, CouplingBranch branch) {
    if (!(t_dip >= 0 && t_dip <= 1)) throw ValidationError("t_dip", "must lie in [0, 1]");
    const double s = std::sqrt(t_dip);
    CavityReport r;
    r.t_dip = t_dip;
    r.branch = branch;
    if (branch == CouplingBranch::Undercoupled) {
        r.k = (1 - s) / (1 + s);
    } else {
        if (t_dip == 1.0) throw ValidationError("t_dip", "overcoupled branch needs t_dip < 1");
        r.k = (1 + s) / (1 - s);
    }
    r.eta = r.k / (1 + r.k);
    return r;
}

BrightnessReport brightness(double i_sat_cps, double rep_rate_hz, double zeta,
                            double i_sat_sigma_cps) {
    if (!(zeta > 0 && zeta <= 1)) throw ValidationError("zeta", "must lie in (0, 1]");
    if (!(rep_rate_hz > 0)) throw ValidationError("rep_rate_hz", "must be positive");
    if (!(i_sat_cps >= 0)) throw ValidationError("i_sat_cps", "must be >= 0");
    BrightnessReport b{i_sat_cps, rep_rate_hz, zeta, 0.0, 0.0};
    b.xi = i_sat_cps / (rep_rate_hz * zeta);
    b.xi_sigma = std::abs(i_sat_sigma_cps) / (rep_rate_hz * zeta);
    return b;
}

double setup_efficiency(std::initializer_list<double> stages) {
    double z = 1.0;
    for (double s : stages) {
        if (!(s > 0 && s <= 1)) throw ValidationError("zeta", "stage efficiencies must lie in (0, 1]");
        z *= s;
    }
    return z;
}

nlohmann::ordered_json to_json(const G2Report& r) {
    return {{"g2_zero", r.g2_zero},
            {"sigma", r.sigma},
            {"central_area", r.central_area},
            {"peak_areas", r.peak_areas},
            {"overlapping_peaks", r.overlapping_peaks}};
}

nlohmann::ordered_json to_json(const LifetimeFit& r) {
    return {{"t1_ps", r.t1_ps},
            {"sigma_ps", r.sigma_ps},
            {"fit_start_ps", r.fit_start_ps},
            {"fit_end_ps", r.fit_end_ps},
            {"tail_counts", r.tail_counts}};
}

nlohmann::ordered_json to_json(const HomReport& r) {
    return {{"a1", r.a[0]},       {"a2", r.a[1]},
            {"a3", r.a[2]},       {"a4", r.a[3]},
            {"a5", r.a[4]},       {"m", r.m},
            {"m_sigma", r.m_sigma}, {"g_star", r.g_star},
            {"g_star_sigma", r.g_star_sigma}, {"v", r.v},
            {"v_sigma", r.v_sigma}, {"m_bound", r.m_bound},
            {"v_in_range", r.v_in_range}, {"leakage_corrected", r.leakage_corrected},
            {"window_overlap", r.window_overlap}};
}

nlohmann::ordered_json to_json(const CavityReport& r) {
    return {{"t_dip", r.t_dip},
            {"k", r.k},
            {"eta", r.eta},
            {"branch", r.branch == CouplingBranch::Undercoupled ? "undercoupled" : "overcoupled"}};
}

nlohmann::ordered_json to_json(const BrightnessReport& r) {
    return {{"i_sat_cps", r.i_sat_cps},
            {"rep_rate_hz", r.rep_rate_hz},
            {"zeta", r.zeta},
            {"xi", r.xi},
            {"xi_sigma", r.xi_sigma}};
}

}  // namespace photongate
