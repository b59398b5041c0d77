#pragma once

// Per-trial evaluators for the six system configurations. Every evaluator is
// a pure function of a ChannelRealization and a Scenario; the transmit power
// enters only through snr_from_gain.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fasris/channel.hpp"
#include "fasris/numerics.hpp"

namespace fasris {

enum class ArchitectureKind { Conventional, BsFas, UeFas, DualFas, Fris, FasEmbeddedRis };

inline constexpr std::array<ArchitectureKind, 6> kAllArchitectures{
    ArchitectureKind::Conventional, ArchitectureKind::BsFas, ArchitectureKind::UeFas,
    ArchitectureKind::DualFas,      ArchitectureKind::Fris,  ArchitectureKind::FasEmbeddedRis};

inline constexpr std::string_view to_string(ArchitectureKind k) {
    switch (k) {
        case ArchitectureKind::Conventional: return "conventional";
        case ArchitectureKind::BsFas: return "bs_fas";
        case ArchitectureKind::UeFas: return "ue_fas";
        case ArchitectureKind::DualFas: return "dual_fas";
        case ArchitectureKind::Fris: return "fris";
        case ArchitectureKind::FasEmbeddedRis: return "fas_embedded_ris";
    }
    return "unknown";
}

inline std::optional<ArchitectureKind> parse_architecture(std::string_view name) {
    for (ArchitectureKind k : kAllArchitectures)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

struct ArchitectureResult {
    double snr_linear = 0.0;
    double throughput_bps_hz = 0.0;
    std::optional<std::size_t> selected_bs_port;
    std::optional<std::size_t> selected_ue_port;
    std::optional<double> selected_spacing_wavelengths;
    std::optional<std::size_t> selected_rx_port;
    std::optional<std::size_t> selected_tx_port;

    bool operator==(const ArchitectureResult&) const = default;
};

namespace detail {
inline double magnitude(const cd& z) { return std::sqrt(z.real() * z.real() + z.imag() * z.imag()); }
}  // namespace detail

inline double throughput_from_snr(double snr_linear) { return std::log2(1.0 + snr_linear); }

/// Cascaded power gain (sum_m |h_in[m]| |h_out[m]|)^2 reached when element m
/// applies phase -(arg h_in[m] + arg h_out[m]) with unit amplitude.
inline double co_phase_gain(std::span<const cd> h_in, std::span<const cd> h_out) {
    if (h_in.size() != h_out.size()) throw std::invalid_argument("co_phase_gain: length mismatch");
    double amplitude = 0.0;
    for (std::size_t m = 0; m < h_in.size(); ++m) amplitude += detail::magnitude(h_in[m]) * detail::magnitude(h_out[m]);
    return amplitude * amplitude;
}

/// Reflection phases that achieve co_phase_gain.
inline std::vector<double> co_phase_angles(std::span<const cd> h_in, std::span<const cd> h_out) {
    if (h_in.size() != h_out.size()) throw std::invalid_argument("co_phase_angles: length mismatch");
    std::vector<double> theta(h_in.size());
    for (std::size_t m = 0; m < h_in.size(); ++m) theta[m] = -(std::arg(h_in[m]) + std::arg(h_out[m]));
    return theta;
}

/// SNR = P * prod(path_gain^2) * cascade_power_gain / noise.
inline double snr_from_gain(double power_dbm, double cascade_power_gain, std::span<const double> path_gains,
                            double noise_dbm) {
    if (cascade_power_gain < 0.0) throw std::invalid_argument("snr_from_gain: negative cascade gain");
    double g = dbm_to_watts(power_dbm) * cascade_power_gain;
    for (double a : path_gains) {
        if (a < 0.0) throw std::invalid_argument("snr_from_gain: negative path gain");
        g *= a * a;
    }
    return g / dbm_to_watts(noise_dbm);
}

/// Decode-and-forward end-to-end rate, log2(1 + min(snr1, snr2)).
inline double decode_and_forward_throughput(double snr_first_hop, double snr_second_hop) {
    return throughput_from_snr(std::min(snr_first_hop, snr_second_hop));
}

namespace detail {

inline void require_ports(const ChannelRealization& r, const Scenario& s) {
    if (r.h_bs_ris.cols() < s.ports || r.h_ris_ue.rows() < s.ports)
        throw std::invalid_argument("realization has fewer ports than the scenario evaluates");
    if (r.h_bs_ris.rows() != s.ris.elements() || r.h_ris_ue.cols() != s.ris.elements())
        throw std::invalid_argument("realization does not match the scenario's surface size");
}

// |h_bs_ris(:, bs)| . |h_ris_ue(ue, :)| for a cached magnitude table.
struct Magnitudes {
    std::size_t elements = 0;
    std::size_t ports = 0;
    std::vector<double> in;   // ports x elements, transposed from h_bs_ris
    std::vector<double> out;  // ports x elements

    Magnitudes(const ChannelRealization& r, std::size_t n) : elements(r.h_bs_ris.rows()), ports(n) {
        in.resize(n * elements);
        out.resize(n * elements);
        for (std::size_t e = 0; e < elements; ++e)
            for (std::size_t p = 0; p < n; ++p) in[p * elements + e] = magnitude(r.h_bs_ris(e, p));
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t e = 0; e < elements; ++e) out[p * elements + e] = magnitude(r.h_ris_ue(p, e));
    }

    [[nodiscard]] double gain(std::size_t bs, std::size_t ue) const {
        const double* a = &in[bs * elements];
        const double* b = &out[ue * elements];
        double amp = 0.0;
        for (std::size_t e = 0; e < elements; ++e) amp += a[e] * b[e];
        return amp * amp;
    }
};

inline ArchitectureResult cascade_result(const ChannelRealization& r, const Scenario& s, double gain) {
    const std::array<double, 2> pg{r.path_gain_bs_ris, r.path_gain_ris_ue};
    ArchitectureResult out;
    out.snr_linear = snr_from_gain(s.budget.tx_dbm, gain, pg, s.budget.noise_dbm);
    out.throughput_bps_hz = throughput_from_snr(out.snr_linear);
    return out;
}

// Lowest index wins ties.
template <class Score>
std::size_t argmax_port(std::size_t n, Score&& score, double* best_out = nullptr) {
    std::size_t best = 0;
    double best_value = score(0);
    for (std::size_t p = 1; p < n; ++p) {
        const double v = score(p);
        if (v > best_value) {
            best_value = v;
            best = p;
        }
    }
    if (best_out) *best_out = best_value;
    return best;
}

inline std::size_t ceil_sqrt(std::size_t n) {
    std::size_t k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (k * k < n) ++k;
    while (k > 0 && (k - 1) * (k - 1) >= n) --k;
    return k;
}

// Top-k by score (ties to lower index) plus the extra indices, ascending.
inline std::vector<std::size_t> candidate_set(const std::vector<double>& scores, std::size_t k,
                                              std::initializer_list<std::size_t> extra) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    order.insert(order.end(), extra.begin(), extra.end());
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    return order;
}

}  // namespace detail

/// Fixed BS and UE (port 0 each), co-phased surface.
inline ArchitectureResult evaluate_conventional(const ChannelRealization& r, const Scenario& s) {
    detail::require_ports(r, s);
    const detail::Magnitudes mag(r, 1);
    auto out = detail::cascade_result(r, s, mag.gain(0, 0));
    out.selected_bs_port = 0;
    out.selected_ue_port = 0;
    return out;
}

/// BS port selection against UE port 0, surface re-co-phased per port.
inline ArchitectureResult evaluate_bs_fas(const ChannelRealization& r, const Scenario& s) {
    detail::require_ports(r, s);
    const detail::Magnitudes mag(r, s.ports);
    double gain = 0.0;
    const std::size_t best = detail::argmax_port(s.ports, [&](std::size_t p) { return mag.gain(p, 0); }, &gain);
    auto out = detail::cascade_result(r, s, gain);
    out.selected_bs_port = best;
    out.selected_ue_port = 0;
    return out;
}

inline ArchitectureResult evaluate_ue_fas(const ChannelRealization& r, const Scenario& s) {
    detail::require_ports(r, s);
    const detail::Magnitudes mag(r, s.ports);
    double gain = 0.0;
    const std::size_t best = detail::argmax_port(s.ports, [&](std::size_t p) { return mag.gain(0, p); }, &gain);
    auto out = detail::cascade_result(r, s, gain);
    out.selected_bs_port = 0;
    out.selected_ue_port = best;
    return out;
}

/// Joint BS/UE selection over a reduced candidate product.
///
/// Each side keeps its ceil(sqrt(N)) best ports when the other side sits at
/// port 0, plus its single-sided winner and port 0 itself. The product
/// therefore contains the conventional, BS-FAS and UE-FAS operating points.
inline ArchitectureResult evaluate_dual_fas(const ChannelRealization& r, const Scenario& s) {
    detail::require_ports(r, s);
    const std::size_t n = s.ports;
    const detail::Magnitudes mag(r, n);
    std::vector<double> bs_scores(n);
    std::vector<double> ue_scores(n);
    for (std::size_t p = 0; p < n; ++p) {
        bs_scores[p] = mag.gain(p, 0);
        ue_scores[p] = mag.gain(0, p);
    }
    const std::size_t k = detail::ceil_sqrt(n);
    const std::size_t bs_winner = detail::argmax_port(n, [&](std::size_t p) { return bs_scores[p]; });
    const std::size_t ue_winner = detail::argmax_port(n, [&](std::size_t p) { return ue_scores[p]; });
    const auto bs_set = detail::candidate_set(bs_scores, k, {bs_winner, std::size_t{0}});
    const auto ue_set = detail::candidate_set(ue_scores, k, {ue_winner, std::size_t{0}});

    std::size_t best_bs = 0;
    std::size_t best_ue = 0;
    double best = -1.0;
    for (std::size_t b : bs_set) {
        for (std::size_t u : ue_set) {
            const double g = mag.gain(b, u);
            if (g > best) {
                best = g;
                best_bs = b;
                best_ue = u;
            }
        }
    }
    auto out = detail::cascade_result(r, s, best);
    out.selected_bs_port = best_bs;
    out.selected_ue_port = best_ue;
    return out;
}

/// floor(N/3) element spacings spread evenly over [0.4, 1.2] wavelengths,
/// both ends included; a single candidate sits at 0.4.
inline std::vector<double> fris_spacing_candidates(std::size_t ports) {
    const std::size_t count = ports / 3;
    if (count == 0) throw std::invalid_argument("fris: needs at least 3 ports for one spacing candidate");
    constexpr double lo = 0.4;
    constexpr double hi = 1.2;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

/// Fluid RIS: picks the element spacing that maximizes the co-phased
/// cascade gain with BS and UE fixed at port 0. The scattered components are
/// reused across candidates; only the LoS steering of the surface changes.
inline ArchitectureResult evaluate_fris(const ChannelRealization& r, const Scenario& s) {
    detail::require_ports(r, s);
    const auto spacings = fris_spacing_candidates(s.ports);
    const LinkDirections dirs(s.geometry);
    const double wl = s.rician.los_weight();
    const double wn = s.rician.nlos_weight();
    const std::size_t m = s.ris.elements();

    ComplexVector h_in(m);
    ComplexVector h_out(m);
    double best_gain = -1.0;
    double best_spacing = spacings.front();
    for (double spacing : spacings) {
        RisConfig layout = s.ris;
        layout.element_spacing_wavelengths = spacing;
        const RisLineOfSight los(layout, dirs);
        for (std::size_t e = 0; e < m; ++e) {
            h_in[e] = wl * los.incident[e] + wn * r.nlos_bs_ris(e, 0);
            h_out[e] = wl * los.reflected[e] + wn * r.nlos_ris_ue(0, e);
        }
        const double g = co_phase_gain(h_in, h_out);
        if (g > best_gain) {
            best_gain = g;
            best_spacing = spacing;
        }
    }
    auto out = detail::cascade_result(r, s, best_gain);
    out.selected_bs_port = 0;
    out.selected_ue_port = 0;
    out.selected_spacing_wavelengths = best_spacing;
    return out;
}

inline ArchitectureResult evaluate_fris(RngStream stream, const Scenario& s) {
    const ChannelSynthesizer synth(s);
    return evaluate_fris(synth.assemble(stream), s);
}

/// Single-hop relay link SNRs for each of the first `ports` entries of a
/// fading vector.
inline std::vector<double> relay_hop_snrs(std::span<const cd> hop, std::size_t ports, double path_gain_amplitude,
                                          const LinkBudget& budget) {
    if (hop.size() < ports) throw std::invalid_argument("relay hop has fewer ports than requested");
    std::vector<double> out(ports);
    const std::array<double, 1> pg{path_gain_amplitude};
    for (std::size_t p = 0; p < ports; ++p) out[p] = snr_from_gain(budget.tx_dbm, std::norm(hop[p]), pg, budget.noise_dbm);
    return out;
}

/// Surface as a full-duplex decode-and-forward relay with floor(N/4) FAS
/// ports on each side. Each hop picks its best port; the relay transmits
/// with the BS power. No reflection gain on either hop.
inline ArchitectureResult evaluate_fas_embedded_ris(std::span<const cd> hop1, std::span<const cd> hop2,
                                                    double path_gain_hop1, double path_gain_hop2, const Scenario& s) {
    const std::size_t ports = s.relay_ports();
    if (ports == 0) throw std::invalid_argument("fas_embedded_ris: floor(N/4) must be >= 1");
    const auto snr1 = relay_hop_snrs(hop1, ports, path_gain_hop1, s.budget);
    const auto snr2 = relay_hop_snrs(hop2, ports, path_gain_hop2, s.budget);
    double best1 = 0.0;
    double best2 = 0.0;
    const std::size_t rx = detail::argmax_port(ports, [&](std::size_t p) { return snr1[p]; }, &best1);
    const std::size_t tx = detail::argmax_port(ports, [&](std::size_t p) { return snr2[p]; }, &best2);
    ArchitectureResult out;
    out.snr_linear = std::min(best1, best2);
    out.throughput_bps_hz = decode_and_forward_throughput(best1, best2);
    out.selected_bs_port = 0;
    out.selected_ue_port = 0;
    out.selected_rx_port = rx;
    out.selected_tx_port = tx;
    return out;
}

inline ArchitectureResult evaluate_fas_embedded_ris(const ChannelRealization& r, const Scenario& s) {
    return evaluate_fas_embedded_ris(r.relay_rx, r.relay_tx, r.path_gain_bs_ris, r.path_gain_ris_ue, s);
}

inline ArchitectureResult evaluate(ArchitectureKind kind, const ChannelRealization& r, const Scenario& s) {
    switch (kind) {
        case ArchitectureKind::Conventional: return evaluate_conventional(r, s);
        case ArchitectureKind::BsFas: return evaluate_bs_fas(r, s);
        case ArchitectureKind::UeFas: return evaluate_ue_fas(r, s);
        case ArchitectureKind::DualFas: return evaluate_dual_fas(r, s);
        case ArchitectureKind::Fris: return evaluate_fris(r, s);
        case ArchitectureKind::FasEmbeddedRis: return evaluate_fas_embedded_ris(r, s);
    }
    throw std::invalid_argument("evaluate: unknown architecture");
}

}  // namespace fasris
