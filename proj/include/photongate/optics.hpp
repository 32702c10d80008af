#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "photongate/emitter.hpp"

namespace photongate {

/// Lossless beamsplitter: intensity reflectance r and transmittance t = 1 - r.
struct BeamsplitterSpec {
    double r = 0.5;
    double t = 0.5;

    static BeamsplitterSpec from_reflectance(double r) { return {r, 1.0 - r}; }
    void validate() const;
};

/// Mach-Zehnder used for two-photon interference of consecutive photons.
/// The long arm is taken on reflection at bs1. At bs2 a photon from the
/// short arm leaves through port A on transmission, a photon from the long
/// arm leaves through port A on reflection.
struct HomConfig {
    double delta_t_ps = 2200.0;
    double epsilon = 0.0;  ///< 1 - interferometer visibility
    BeamsplitterSpec bs1;
    BeamsplitterSpec bs2;
    /// Replaces the computed pair overlap when set (testing and what-if runs).
    std::optional<double> overlap_override;

    void validate() const;
};

/// A photon's emission-time envelope after an optional intensity gate:
/// p(t) = exp(-(t - start)/t1)/t1 for t >= start, times the gate profile.
struct GatedWavepacket {
    double start_ps = 0.0;
    double t1_ps = 625.0;
    double alpha_per_ps = 0.0;
    std::optional<GateWindow> gate;
};

/// Mean two-photon overlap of two wavepackets,
///   V = integral a1(t) a2(t) a1(t') a2(t') exp(-(alpha1 + alpha2)|t - t'|) dt dt'
/// with a_i the square root of the normalized gated intensity envelope.
/// For identical, aligned envelopes this is the intensity-weighted dephasing
/// average; ungated it equals 1 / (1 + 2 alpha T1). Any mismatch between the
/// two envelopes (offset, gate position) lowers V. Computed by nested adaptive
/// quadrature to relative tolerance 1e-6.
/// Throws NumericalError if an envelope cannot be normalized.
double mean_overlap(const GatedWavepacket& w1, const GatedWavepacket& w2);

/// Ungated closed form 1 / (1 + 2 alpha T1) = T2 / (2 T1).
double ungated_overlap(double t1_ps, double alpha_per_ps);

/// Coherence time from 1/T2 = 1/(2 T1) + 1/T2*.
double coherence_relation(double t1_ps, double t2star_ps);

/// Pure dephasing rate for a target coherence time: 1/T2 - 1/(2 T1).
double dephasing_rate_for(double t1_ps, double t2_ps);

/// Probability that two photons entering bs2 from opposite inputs leave
/// through different ports: r^2 + t^2 - 2 r t (1-eps)^2 V.
double cross_port_probability(const BeamsplitterSpec& bs, double epsilon, double overlap);

enum class Port : std::uint8_t { A = 0, B = 1 };

/// Output ports of an interfering pair (first photon from the long arm,
/// second from the short arm). The pair bunches into a random common port
/// with probability 2rt(1-eps)^2 V / (r^2 + t^2), otherwise each photon is
/// routed on its own; this reproduces cross_port_probability exactly.
std::pair<Port, Port> route_pair(const BeamsplitterSpec& bs2, double epsilon, double overlap,
                                 std::uint64_t seed, std::uint64_t key);

struct PortStreams {
    std::vector<PhotonRecord> a;
    std::vector<PhotonRecord> b;
};

/// Uniform broadband loss: each photon survives with probability `transmission`.
std::vector<PhotonRecord> attenuate(std::span<const PhotonRecord> photons, double transmission,
                                    std::uint64_t seed);

/// HBT splitter: each photon goes to port A with probability r.
PortStreams hbt_route(std::span<const PhotonRecord> photons, const BeamsplitterSpec& bs,
                      std::uint64_t seed);

/// Wavepacket of a photon as seen at the second beamsplitter.
GatedWavepacket wavepacket_at_output(const PhotonRecord& photon, const PulseClock& clock);

/// HOM interferometer for double-pulse excitation. Photons of the early
/// pulse that took the long arm meet photons of the late pulse of the same
/// period that took the short arm. Each such cross pair leaves through
/// different ports with cross_port_probability at the mean overlap of its
/// gated wavepackets (exact unless a photon's overlaps sum above one).
/// Everything else is routed independently. Output streams are sorted by
/// arrival time.
PortStreams hom_route(std::span<const PhotonRecord> photons, const HomConfig& cfg,
                      const PulseClock& clock, std::uint64_t seed);

}  // namespace photongate
