#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "photongate/emitter.hpp"

namespace photongate {

enum class GateProfile { Gaussian, Rectangular };

/// Synchronized amplitude-modulator gate. `t_mod_ps` is the full width at
/// the 1/e intensity point (= 2 sigma for the Gaussian profile; the full
/// width for the rectangular profile).
struct GateSpec {
    double t_mod_ps = 370.0;
    double delay_ps = 0.0;  ///< gate center relative to each excitation pulse
    double extinction_db = 20.0;
    double insertion_loss_db = 1.9;
    GateProfile profile = GateProfile::Gaussian;

    double sigma_ps() const noexcept { return t_mod_ps / 2.0; }
    void validate() const;
};

/// 10^(-db/10); infinite loss maps to 0.
double db_to_transmission(double db) noexcept;

/// Intensity transmission at time `t_ps` of the gate opened for a pulse at
/// `pulse_time_ps`: IL * max(M(t - pulse - delay), ER floor).
double gate_value(const GateSpec& gate, double t_ps, double pulse_time_ps);

/// Transmission of the periodic gate train at `t_ps` (the best of the gates
/// opened for nearby pulses), and the index of the pulse whose gate it is.
struct GateTrainValue {
    double transmission = 0.0;
    std::uint64_t pulse_index = 0;
};
GateTrainValue gate_train_value(const GateSpec& gate, const PulseClock& clock, double t_ps);

/// Each photon survives independently with the gate-train transmission at
/// its arrival time. Survivors record the gate window that passed them.
/// Input order is preserved.
std::vector<PhotonRecord> apply_gate(const GateSpec& gate, std::span<const PhotonRecord> photons,
                                     const PulseClock& clock, std::uint64_t seed);

/// Fraction of an exponential emission (lifetime t1) passed by a lossless
/// Gaussian gate of width t_mod centered `delay_ps` after the pulse.
/// Closed form in terms of erfc.
double analytic_transmission(double t1_ps, double t_mod_ps, double delay_ps);

/// Same quantity by adaptive Gauss-Kronrod quadrature of the overlap
/// integral, relative tolerance 1e-8. Throws NumericalError when the
/// quadrature error estimate stays above tolerance.
double quadrature_transmission(double t1_ps, double t_mod_ps, double delay_ps);

struct OptimalDelay {
    double delay_ps = 0.0;
    double f_max = 0.0;
};

/// Maximizes analytic_transmission over the gate delay on
/// [-2 t_mod, t1 + 2 t_mod] to 0.1 ps.
OptimalDelay optimal_delay(double t1_ps, double t_mod_ps);

struct TransmissionPoint {
    double t_mod_ps = 0.0;
    double f_max = 0.0;
    double f_max_with_loss = 0.0;
    double optimal_delay_ps = 0.0;
};

struct TransmissionCurve {
    double t1_ps = 0.0;
    std::vector<TransmissionPoint> points;
};

std::vector<TransmissionCurve> transmission_curve(std::span<const double> t1_list,
                                                  std::span<const double> t_mod_grid,
                                                  double insertion_loss_db);

/// CSV `t_mod_ps,f_max,f_with_loss,delay_ps` with 6 significant digits.
/// Several curves get a leading `t1_ps` column.
void write_transmission_csv(std::ostream& out, std::span<const TransmissionCurve> curves);

}  // namespace photongate
