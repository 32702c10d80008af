#include "photongate/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "photongate/error.hpp"
#include "photongate/gate.hpp"
#include "photongate/rng.hpp"

namespace photongate {

void BeamsplitterSpec::validate() const {
    if (!(r > 0 && r < 1) || !(t > 0 && t < 1))
        throw ValidationError("beamsplitter", "r and t must lie in (0, 1)");
    if (std::abs(r + t - 1.0) > 1e-9) throw ValidationError("beamsplitter", "r + t must equal 1");
}

void HomConfig::validate() const {
    if (!(delta_t_ps > 0) || !std::isfinite(delta_t_ps))
        throw ValidationError("interferometer.delta_t_ps", "must be positive");
    if (!(epsilon >= 0 && epsilon <= 1))
        throw ValidationError("interferometer.epsilon", "must lie in [0, 1]");
    bs1.validate();
    bs2.validate();
    if (overlap_override && !(*overlap_override >= 0 && *overlap_override <= 1))
        throw ValidationError("interferometer.overlap_override", "must lie in [0, 1]");
}

namespace {

constexpr double kOverlapTolerance = 1e-6;

/// Log of the normalized gated intensity envelope of one wavepacket.
class Envelope {
public:
    explicit Envelope(const GatedWavepacket& w) : w_(w) {
        if (!(w.t1_ps > 0)) throw ValidationError("wavepacket.t1_ps", "must be positive");
        if (!(w.alpha_per_ps >= 0))
            throw ValidationError("wavepacket.alpha_per_ps", "must be >= 0");
        double norm = 1.0;
        if (w.gate) {
            const auto& g = *w.gate;
            if (g.rectangular) {
                const double lo = std::max(w.start_ps, g.center_ps - g.sigma_ps);
                const double hi = g.center_ps + g.sigma_ps;
                norm = hi > lo ? std::exp(-(lo - w.start_ps) / w.t1_ps) -
                                     std::exp(-(hi - w.start_ps) / w.t1_ps)
                               : 0.0;
            } else {
                norm = analytic_transmission(w.t1_ps, 2.0 * g.sigma_ps, g.center_ps - w.start_ps);
            }
        }
        if (!(norm > 1e-300))
            throw NumericalError("wavepacket envelope cannot be normalized: gate lies outside its support");
        log_norm_ = std::log(norm * w.t1_ps);
    }

    double log_density(double t) const {
        if (t < w_.start_ps) return -std::numeric_limits<double>::infinity();
        double v = -(t - w_.start_ps) / w_.t1_ps - log_norm_;
        if (w_.gate) {
            const auto& g = *w_.gate;
            const double x = t - g.center_ps;
            if (g.rectangular) {
                if (std::abs(x) > g.sigma_ps) return -std::numeric_limits<double>::infinity();
            } else {
                v -= (x * x) / (g.sigma_ps * g.sigma_ps);
            }
        }
        return v;
    }

    /// Time past which the envelope is negligible (density below ~e^-80).
    double horizon() const {
        double h = w_.start_ps + 80.0 * w_.t1_ps;
        if (w_.gate) {
            const auto& g = *w_.gate;
            h = std::min(h, g.center_ps + (g.rectangular ? g.sigma_ps : 10.0 * g.sigma_ps));
        }
        return h;
    }

    void add_breaks(std::vector<double>& breaks) const {
        breaks.push_back(w_.start_ps);
        if (w_.gate) {
            const auto& g = *w_.gate;
            if (g.rectangular) {
                breaks.push_back(g.center_ps - g.sigma_ps);
                breaks.push_back(g.center_ps + g.sigma_ps);
            } else {
                for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0}) breaks.push_back(g.center_ps + k * g.sigma_ps);
            }
        } else {
            for (double k : {1.0, 4.0, 12.0}) breaks.push_back(w_.start_ps + k * w_.t1_ps);
        }
    }

private:
    GatedWavepacket w_;
    double log_norm_ = 0.0;
};

template <class F>
double integrate_segments(F&& f, std::span<const double> breaks, double lo, double hi,
                          double tol, double& error_sum) {
    double total = 0.0;
    double a = lo;
    auto segment = [&](double x0, double x1) {
        if (x1 <= x0) return;
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, x0, x1, 12, tol, &err);
        error_sum += err;
    };
    for (double b : breaks) {
        if (b <= a) continue;
        if (b >= hi) break;
        segment(a, b);
        a = b;
    }
    segment(a, hi);
    return total;
}

}  // namespace

double ungated_overlap(double t1_ps, double alpha_per_ps) {
    return 1.0 / (1.0 + 2.0 * alpha_per_ps * t1_ps);
}

double coherence_relation(double t1_ps, double t2star_ps) {
    if (!(t1_ps > 0)) throw ValidationError("t1_ps", "must be positive");
    if (!(t2star_ps > 0)) throw ValidationError("t2star_ps", "must be positive or infinite");
    return 1.0 / (1.0 / (2.0 * t1_ps) + 1.0 / t2star_ps);
}

double dephasing_rate_for(double t1_ps, double t2_ps) {
    if (!(t1_ps > 0) || !(t2_ps > 0)) throw ValidationError("t2_ps", "times must be positive");
    if (t2_ps > 2.0 * t1_ps) throw ValidationError("t2_ps", "must not exceed 2 T1");
    return std::max(0.0, 1.0 / t2_ps - 1.0 / (2.0 * t1_ps));
}

double mean_overlap(const GatedWavepacket& w1, const GatedWavepacket& w2) {
    const Envelope e1(w1);
    const Envelope e2(w2);
    const double lo = std::max(w1.start_ps, w2.start_ps);
    const double hi = std::min(e1.horizon(), e2.horizon());
    if (!(hi > lo)) return 0.0;

    std::vector<double> breaks;
    e1.add_breaks(breaks);
    e2.add_breaks(breaks);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    // Amplitude product a1 a2.
    auto g = [&](double t) { return std::exp(0.5 * (e1.log_density(t) + e2.log_density(t))); };
    const double kappa = w1.alpha_per_ps + w2.alpha_per_ps;

    double error = 0.0;
    double value = 0.0;
    if (kappa == 0.0) {
        const double amp = integrate_segments(g, breaks, lo, hi, 1e-10, error);
        value = amp * amp;
    } else {
        // Symmetric kernel: V = 2 * int g(t) int_{t' < t} g(t') exp(-kappa (t - t')) dt' dt.
        double inner_error = 0.0;
        auto outer = [&](double t) {
            const double gt = g(t);
            if (gt == 0.0) return 0.0;
            auto inner = [&](double s) { return g(s) * std::exp(-kappa * (t - s)); };
            std::vector<double> local(breaks.begin(), breaks.end());
            // Resolve the kernel's decay length just below t.
            for (double k : {1.0, 4.0, 16.0}) local.push_back(t - k / kappa);
            std::sort(local.begin(), local.end());
            return gt * integrate_segments(inner, local, lo, t, 1e-9, inner_error);
        };
        value = 2.0 * integrate_segments(outer, breaks, lo, hi, 1e-8, error);
        error = 2.0 * error;
    }
    if (error > kOverlapTolerance * std::max(value, 1e-12))
        throw NumericalError(fmt::format("overlap quadrature did not converge (error {:g})", error));
    return std::clamp(value, 0.0, 1.0);
}

double cross_port_probability(const BeamsplitterSpec& bs, double epsilon, double overlap) {
    const double vis = (1.0 - epsilon) * (1.0 - epsilon);
    return bs.r * bs.r + bs.t * bs.t - 2.0 * bs.r * bs.t * vis * overlap;
}

std::pair<Port, Port> route_pair(const BeamsplitterSpec& bs2, double epsilon, double overlap,
                                 std::uint64_t seed, std::uint64_t key) {
    EventRng rng(seed, Stream::HomPair, key);
    const double vis = (1.0 - epsilon) * (1.0 - epsilon);
    const double bunch = 2.0 * bs2.r * bs2.t * vis * overlap / (bs2.r * bs2.r + bs2.t * bs2.t);
    const double u_bunch = rng.uniform();
    const double u_first = rng.uniform();
    const double u_second = rng.uniform();
    if (u_bunch < bunch) {
        const Port common = u_first < 0.5 ? Port::A : Port::B;
        return {common, common};
    }
    // Long-arm photon exits A on reflection, short-arm photon on transmission.
    const Port first = u_first < bs2.r ? Port::A : Port::B;
    const Port second = u_second < bs2.t ? Port::A : Port::B;
    return {first, second};
}

std::vector<PhotonRecord> attenuate(std::span<const PhotonRecord> photons, double transmission,
                                    std::uint64_t seed) {
    if (!(transmission >= 0 && transmission <= 1))
        throw ValidationError("throughput", "must lie in [0, 1]");
    std::vector<PhotonRecord> out;
    out.reserve(static_cast<std::size_t>(photons.size() * transmission) + 16);
    for (const auto& p : photons) {
        if (transmission >= 1.0 || EventRng(seed, Stream::Attenuation, p.id()).uniform() < transmission)
            out.push_back(p);
    }
    return out;
}

PortStreams hbt_route(std::span<const PhotonRecord> photons, const BeamsplitterSpec& bs,
                      std::uint64_t seed) {
    if (!(bs.r >= 0 && bs.r <= 1)) throw ValidationError("beamsplitter.r", "must lie in [0, 1]");
    PortStreams out;
    for (const auto& p : photons) {
        EventRng rng(seed, Stream::HbtRouting, p.id());
        (rng.uniform() < bs.r ? out.a : out.b).push_back(p);
    }
    return out;
}

GatedWavepacket wavepacket_at_output(const PhotonRecord& photon, const PulseClock& clock) {
    GatedWavepacket w;
    w.start_ps = clock.pulse_time(photon.pulse_index) + photon.path_delay_ps;
    w.t1_ps = photon.wavepacket.t1_ps;
    w.alpha_per_ps = photon.wavepacket.alpha_per_ps;
    if (photon.gated) {
        GateWindow g = photon.gate;
        g.center_ps += photon.path_delay_ps;
        w.gate = g;
    }
    return w;
}

PortStreams hom_route(std::span<const PhotonRecord> photons, const HomConfig& cfg,
                      const PulseClock& clock, std::uint64_t seed) {
    cfg.validate();
    std::vector<PhotonRecord> moved(photons.begin(), photons.end());
    std::vector<bool> long_arm(moved.size());
    for (std::size_t i = 0; i < moved.size(); ++i) {
        EventRng rng(seed, Stream::HomArm, moved[i].id());
        long_arm[i] = rng.uniform() < cfg.bs1.r;
        if (long_arm[i]) moved[i].path_delay_ps += cfg.delta_t_ps;
    }

    // Candidates: early pulse via the long arm, late pulse via the short arm.
    std::vector<std::size_t> early;
    std::vector<std::size_t> late;
    if (clock.pattern() == PulsePattern::Pair) {
        for (std::size_t i = 0; i < moved.size(); ++i) {
            const unsigned slot = clock.slot_of(moved[i].pulse_index);
            if (slot == 0 && long_arm[i]) early.push_back(i);
            if (slot == 1 && !long_arm[i]) late.push_back(i);
        }
    }
    auto by_period_id = [&](std::size_t x, std::size_t y) {
        return std::pair(clock.period_of(moved[x].pulse_index), moved[x].id()) <
               std::pair(clock.period_of(moved[y].pulse_index), moved[y].id());
    };
    std::sort(early.begin(), early.end(), by_period_id);
    std::sort(late.begin(), late.end(), by_period_id);

    std::vector<std::optional<Port>> port(moved.size());
    std::map<std::array<double, 9>, double> overlap_cache;
    auto pair_overlap = [&](const PhotonRecord& first, const PhotonRecord& second) {
        if (cfg.overlap_override) return *cfg.overlap_override;
        auto w1 = wavepacket_at_output(first, clock);
        auto w2 = wavepacket_at_output(second, clock);
        const double origin = w2.start_ps;
        constexpr double kNoGate = -1e300;
        auto rel = [&](double x) { return std::round((x - origin) * 1e3) / 1e3; };
        const std::array<double, 9> key{
            rel(w1.start_ps), w1.t1_ps, w2.t1_ps, w1.alpha_per_ps, w2.alpha_per_ps,
            w1.gate ? rel(w1.gate->center_ps) : kNoGate,
            w2.gate ? rel(w2.gate->center_ps) : kNoGate,
            w1.gate ? w1.gate->sigma_ps + (w1.gate->rectangular ? 1e9 : 0) : -1,
            w2.gate ? w2.gate->sigma_ps + (w2.gate->rectangular ? 1e9 : 0) : -1};
        if (auto it = overlap_cache.find(key); it != overlap_cache.end()) return it->second;
        const double v = mean_overlap(w1, w2);
        overlap_cache.emplace(key, v);
        return v;
    };

    // Each period's early-long and late-short photons meet at bs2. Every
    // cross pair (i, j) must interfere with its own overlap V_ij, while
    // photons entering through the same input stay uncorrelated. A random
    // matching that contains pair (i, j) with probability V_ij, matched pairs
    // routed as fully overlapping, achieves exactly that. When a photon's
    // overlaps sum above one (multi-photon pulses at high V) no such matching
    // exists and all probabilities are scaled down together.
    std::size_t j0 = 0;
    for (std::size_t i0 = 0; i0 < early.size();) {
        const auto period = clock.period_of(moved[early[i0]].pulse_index);
        std::size_t i1 = i0;
        while (i1 < early.size() && clock.period_of(moved[early[i1]].pulse_index) == period) ++i1;
        while (j0 < late.size() && clock.period_of(moved[late[j0]].pulse_index) < period) ++j0;
        std::size_t j1 = j0;
        while (j1 < late.size() && clock.period_of(moved[late[j1]].pulse_index) == period) ++j1;
        const std::size_t ne = i1 - i0;
        const std::size_t nl = j1 - j0;
        if (nl == 0) {
            i0 = i1;
            continue;
        }

        std::vector<double> c(ne * nl);
        std::vector<double> row(ne, 0.0);
        std::vector<double> col(nl, 0.0);
        for (std::size_t a = 0; a < ne; ++a)
            for (std::size_t b = 0; b < nl; ++b) {
                c[a * nl + b] = pair_overlap(moved[early[i0 + a]], moved[late[j0 + b]]);
                row[a] += c[a * nl + b];
                col[b] += c[a * nl + b];
            }
        const double scale = std::max({1.0, *std::max_element(row.begin(), row.end()),
                                       *std::max_element(col.begin(), col.end())});

        EventRng rng(seed, Stream::HomMatch, period);
        std::vector<std::pair<std::size_t, std::size_t>> matched;
        if (nl == 1) {
            // The late photon picks at most one partner: exact marginals.
            double u = rng.uniform() * scale;
            for (std::size_t a = 0; a < ne; ++a) {
                if (u < c[a]) {
                    matched.emplace_back(a, 0);
                    break;
                }
                u -= c[a];
            }
        } else {
            // Early photons pick in turn; a taken partner leaves them unmatched.
            // Exact whenever there is a single early photon.
            std::vector<bool> taken(nl, false);
            for (std::size_t a = 0; a < ne; ++a) {
                double u = rng.uniform() * scale;
                for (std::size_t b = 0; b < nl; ++b) {
                    if (u < c[a * nl + b]) {
                        if (!taken[b]) {
                            taken[b] = true;
                            matched.emplace_back(a, b);
                        }
                        break;
                    }
                    u -= c[a * nl + b];
                }
            }
        }
        for (const auto& [a, b] : matched) {
            const auto ei = early[i0 + a];
            const auto li = late[j0 + b];
            const auto [pe, pl] = route_pair(cfg.bs2, cfg.epsilon, 1.0, seed, moved[ei].id());
            port[ei] = pe;
            port[li] = pl;
        }
        i0 = i1;
    }

    PortStreams out;
    for (std::size_t i = 0; i < moved.size(); ++i) {
        Port p;
        if (port[i]) {
            p = *port[i];
        } else {
            EventRng rng(seed, Stream::HomOutput, moved[i].id());
            const double to_a = long_arm[i] ? cfg.bs2.r : cfg.bs2.t;
            p = rng.uniform() < to_a ? Port::A : Port::B;
        }
        (p == Port::A ? out.a : out.b).push_back(moved[i]);
    }
    std::sort(out.a.begin(), out.a.end(), photon_before);
    std::sort(out.b.begin(), out.b.end(), photon_before);
    return out;
}

}  // namespace photongate
