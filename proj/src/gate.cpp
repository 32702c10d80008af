#include "photongate/gate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "photongate/error.hpp"
#include "photongate/rng.hpp"

namespace photongate {

namespace {

// exp(z^2) * erfc(z) for z >= 0.
double erfcx(double z) {
    if (z < 25.0) return std::exp(z * z) * std::erfc(z);
    // Asymptotic series; the first omitted term is below 1e-12 relative here.
    const double inv2 = 1.0 / (2.0 * z * z);
    const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
    return series / (z * std::sqrt(std::numbers::pi));
}

void require_positive(double value, const char* field) {
    if (!(value > 0) || std::isnan(value)) throw ValidationError(field, "must be positive");
}

}  // namespace

void GateSpec::validate() const {
    if (!(t_mod_ps > 0)) throw ValidationError("gate.t_mod_ps", "must be positive");
    if (!std::isfinite(delay_ps)) throw ValidationError("gate.delay_ps", "must be finite");
    if (!(extinction_db > 0)) throw ValidationError("gate.extinction_db", "must be positive");
    if (!(insertion_loss_db >= 0))
        throw ValidationError("gate.insertion_loss_db", "must be >= 0");
}

double db_to_transmission(double db) noexcept {
    if (std::isinf(db)) return db > 0 ? 0.0 : 1.0;
    return std::pow(10.0, -db / 10.0);
}

double gate_value(const GateSpec& gate, double t_ps, double pulse_time_ps) {
    const double x = t_ps - pulse_time_ps - gate.delay_ps;
    double m = 0.0;
    if (gate.profile == GateProfile::Gaussian) {
        if (std::isinf(gate.t_mod_ps)) {
            m = 1.0;
        } else {
            const double s = gate.sigma_ps();
            m = std::exp(-(x * x) / (s * s));
        }
    } else {
        m = std::abs(x) <= gate.t_mod_ps / 2.0 ? 1.0 : 0.0;
    }
    return db_to_transmission(gate.insertion_loss_db) *
           std::max(m, db_to_transmission(gate.extinction_db));
}

GateTrainValue gate_train_value(const GateSpec& gate, const PulseClock& clock, double t_ps) {
    GateTrainValue best;
    const double k = std::floor((t_ps - gate.delay_ps) / clock.period_ps());
    for (double period = k - 1; period <= k + 1; period += 1) {
        if (period < 0) continue;
        for (unsigned slot = 0; slot < clock.pulses_per_period(); ++slot) {
            const auto index = static_cast<std::uint64_t>(period) * clock.pulses_per_period() + slot;
            const double v = gate_value(gate, t_ps, clock.pulse_time(index));
            if (v > best.transmission) best = {v, index};
        }
    }
    return best;
}

std::vector<PhotonRecord> apply_gate(const GateSpec& gate, std::span<const PhotonRecord> photons,
                                     const PulseClock& clock, std::uint64_t seed) {
    gate.validate();
    std::vector<PhotonRecord> out;
    out.reserve(photons.size());
    for (const auto& photon : photons) {
        const auto train = gate_train_value(gate, clock, photon.arrival_ps());
        EventRng rng(seed, Stream::Gate, photon.id());
        if (!(rng.uniform() < train.transmission)) continue;
        PhotonRecord kept = photon;
        // A photon that only got through the extinction floor keeps its
        // ungated envelope (the floor is flat in time).
        const double floor =
            db_to_transmission(gate.insertion_loss_db) * db_to_transmission(gate.extinction_db);
        kept.gated = train.transmission > floor;
        kept.gate.center_ps = clock.pulse_time(train.pulse_index) + gate.delay_ps;
        kept.gate.sigma_ps = gate.sigma_ps();
        kept.gate.rectangular = gate.profile == GateProfile::Rectangular;
        out.push_back(kept);
    }
    return out;
}

double analytic_transmission(double t1_ps, double t_mod_ps, double delay_ps) {
    require_positive(t1_ps, "t1_ps");
    require_positive(t_mod_ps, "t_mod_ps");
    if (std::isinf(t_mod_ps)) return 1.0;
    const double s = t_mod_ps / 2.0;
    const double prefactor = s * std::sqrt(std::numbers::pi) / (2.0 * t1_ps);
    const double z = s / (2.0 * t1_ps) - delay_ps / s;
    if (z >= 0) {
        // exp(s^2/4T1^2 - D/T1) erfc(z) = erfcx(z) exp(-D^2/s^2)
        return prefactor * erfcx(z) * std::exp(-(delay_ps * delay_ps) / (s * s));
    }
    const double exponent = s * s / (4.0 * t1_ps * t1_ps) - delay_ps / t1_ps;
    return prefactor * std::exp(exponent) * std::erfc(z);
}

double quadrature_transmission(double t1_ps, double t_mod_ps, double delay_ps) {
    require_positive(t1_ps, "t1_ps");
    require_positive(t_mod_ps, "t_mod_ps");
    const double s = t_mod_ps / 2.0;
    auto integrand = [&](double t) {
        const double x = t - delay_ps;
        return std::exp(-t / t1_ps - (x * x) / (s * s)) / t1_ps;
    };
    // Break points bracket the gate so the adaptive rule sees its peak.
    std::vector<double> edges{0.0, delay_ps - 8 * s, delay_ps, delay_ps + 8 * s};
    std::erase_if(edges, [](double e) { return e < 0; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.front() != 0.0) edges.insert(edges.begin(), 0.0);
    edges.push_back(std::numeric_limits<double>::infinity());

    constexpr double tol = 1e-8;
    double total = 0.0;
    double total_error = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double error = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, edges[i], edges[i + 1], 20, tol, &error);
        total_error += error;
    }
    if (total_error > tol * std::max(total, 1e-300) && total_error > 1e-15)
        throw NumericalError(fmt::format("transmission quadrature did not converge (error {:g})",
                                         total_error));
    return total;
}

OptimalDelay optimal_delay(double t1_ps, double t_mod_ps) {
    require_positive(t1_ps, "t1_ps");
    require_positive(t_mod_ps, "t_mod_ps");
    auto negative = [&](double d) { return -analytic_transmission(t1_ps, t_mod_ps, d); };
    const double lo = -2.0 * t_mod_ps;
    const double hi = t1_ps + 2.0 * t_mod_ps;
    std::uintmax_t max_iter = 500;
    const auto [x, fx] =
        boost::math::tools::brent_find_minima(negative, lo, hi, 40, max_iter);
    const double f_max = -fx;
    // Local concavity: both neighbours 0.1 ps away must not exceed the peak.
    constexpr double h = 0.1;
    const double slack = 1e-12 * std::max(f_max, 1e-300);
    if (-negative(x - h) > f_max + slack || -negative(x + h) > f_max + slack)
        throw NumericalError("transmission maximum is not locally concave");
    return {x, f_max};
}

std::vector<TransmissionCurve> transmission_curve(std::span<const double> t1_list,
                                                  std::span<const double> t_mod_grid,
                                                  double insertion_loss_db) {
    if (t1_list.empty()) throw ValidationError("t1_list", "must not be empty");
    if (t_mod_grid.empty()) throw ValidationError("t_mod_grid", "must not be empty");
    const double loss = db_to_transmission(insertion_loss_db);
    std::vector<TransmissionCurve> curves;
    for (double t1 : t1_list) {
        TransmissionCurve curve{t1, {}};
        for (double t_mod : t_mod_grid) {
            const auto best = optimal_delay(t1, t_mod);
            curve.points.push_back({t_mod, best.f_max, best.f_max * loss, best.delay_ps});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

void write_transmission_csv(std::ostream& out, std::span<const TransmissionCurve> curves) {
    const bool with_t1 = curves.size() > 1;
    out << (with_t1 ? "t1_ps," : "") << "t_mod_ps,f_max,f_with_loss,delay_ps\n";
    for (const auto& curve : curves) {
        for (const auto& p : curve.points) {
            if (with_t1) out << fmt::format("{:.6g},", curve.t1_ps);
            out << fmt::format("{:.6g},{:.6g},{:.6g},{:.6g}\n", p.t_mod_ps, p.f_max,
                               p.f_max_with_loss, p.optimal_delay_ps);
        }
    }
}

}  // namespace photongate
