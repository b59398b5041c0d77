#pragma once

// Scenario description and per-trial channel synthesis for the BS -> RIS -> UE
// link. The BS-UE direct path is blocked and never generated.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fasris/numerics.hpp"

namespace fasris {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
    friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    bool operator==(const Vec3&) const = default;

    [[nodiscard]] double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }
    [[nodiscard]] Vec3 normalized() const { return (1.0 / norm()) * (*this); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct Geometry {
    Vec3 bs_position{0.0, 0.0, 5.0};
    Vec3 ris_position{15.0, 15.0, 5.0};
    Vec3 ue_position{50.0, 0.0, 0.0};

    void validate() const {
        if (!(distance(bs_position, ris_position) > 0.0) || !(distance(ris_position, ue_position) > 0.0) ||
            !(distance(bs_position, ue_position) > 0.0))
            throw std::invalid_argument("geometry: node positions must be pairwise distinct");
    }
};

struct LinkBudget {
    double carrier_hz = 28e9;
    double pathloss_exponent = 2.2;
    /// Power gain at 1 m, in dB. Not a physical constant of the model: it is
    /// fitted so the fixed-antenna baseline hits its target throughput. The
    /// default is the free-space value (lambda / 4 pi)^2.
    double reference_gain_db = free_space_reference_db(28e9);
    double noise_dbm = -85.0;
    double tx_dbm = 10.0;

    [[nodiscard]] double wavelength_m() const { return kSpeedOfLight / carrier_hz; }

    static double free_space_reference_db(double carrier_hz) {
        const double lambda = kSpeedOfLight / carrier_hz;
        return 20.0 * std::log10(lambda / (4.0 * std::numbers::pi));
    }

    void validate() const {
        if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz))
            throw std::invalid_argument("link budget: carrier_hz must be positive");
        if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("link budget: pathloss_exponent must be > 0");
        if (!std::isfinite(reference_gain_db) || !std::isfinite(noise_dbm) || !std::isfinite(tx_dbm))
            throw std::invalid_argument("link budget: dB quantities must be finite");
    }
};

/// Placement rule for a FAS: ports on a line, `spacing_wavelengths` apart.
struct ArrayLayout {
    double spacing_wavelengths = 0.25;
    Vec3 axis{1.0, 0.0, 0.0};
};

struct ArrayConfig {
    std::size_t num_ports = 1;
    double spacing_wavelengths = 0.25;
    Vec3 axis{1.0, 0.0, 0.0};

    void validate() const {
        if (num_ports < 1) throw std::invalid_argument("array: num_ports must be >= 1");
        if (!(spacing_wavelengths > 0.0)) throw std::invalid_argument("array: spacing must be > 0");
        if (std::fabs(axis.norm() - 1.0) > 1e-6) throw std::invalid_argument("array: axis must be a unit vector");
    }
};

/// Planar reflecting surface in the x-z plane: column index runs along x,
/// row index along z, element m = row * cols + col.
struct RisConfig {
    std::size_t rows = 5;
    std::size_t cols = 5;
    double element_spacing_wavelengths = 0.5;

    [[nodiscard]] std::size_t elements() const { return rows * cols; }

    void validate() const {
        if (elements() < 1) throw std::invalid_argument("ris: rows * cols must be >= 1");
        if (!(element_spacing_wavelengths > 0.0) || element_spacing_wavelengths > 2.0)
            throw std::invalid_argument("ris: element spacing must lie in (0, 2] wavelengths");
    }
};

struct RicianParams {
    double k_factor = 1.0;

    void validate() const {
        if (!(k_factor >= 0.0) || !std::isfinite(k_factor)) throw std::invalid_argument("rician: k_factor must be >= 0");
    }
    [[nodiscard]] double los_weight() const { return std::sqrt(k_factor / (k_factor + 1.0)); }
    [[nodiscard]] double nlos_weight() const { return std::sqrt(1.0 / (k_factor + 1.0)); }
};

/// Everything needed to simulate one system.
///
/// `ports` is the FAS size N seen by the evaluators. Channels are always
/// drawn for `generated_ports()` ports and evaluators use the leading `ports`
/// of them, so scenarios that differ only in N share their random draws.
struct Scenario {
    Geometry geometry;
    LinkBudget budget;
    ArrayLayout bs_fas;
    ArrayLayout ue_fas;
    ArrayLayout relay_fas;
    RisConfig ris;
    RicianParams rician;
    std::size_t ports = 100;
    std::size_t draw_ports = 0;

    [[nodiscard]] std::size_t generated_ports() const { return std::max(ports, draw_ports); }
    [[nodiscard]] std::size_t relay_ports() const { return ports / 4; }
    [[nodiscard]] std::size_t generated_relay_ports() const { return generated_ports() / 4; }

    [[nodiscard]] ArrayConfig bs_array() const { return {ports, bs_fas.spacing_wavelengths, bs_fas.axis}; }
    [[nodiscard]] ArrayConfig ue_array() const { return {ports, ue_fas.spacing_wavelengths, ue_fas.axis}; }
    [[nodiscard]] ArrayConfig relay_array() const {
        return {relay_ports(), relay_fas.spacing_wavelengths, relay_fas.axis};
    }

    void validate() const {
        geometry.validate();
        budget.validate();
        ris.validate();
        rician.validate();
        bs_array().validate();
        ue_array().validate();
        if (!(relay_fas.spacing_wavelengths > 0.0) || std::fabs(relay_fas.axis.norm() - 1.0) > 1e-6)
            throw std::invalid_argument("relay array: invalid layout");
    }
};

// ---------------------------------------------------------------------------

/// Amplitude gain sqrt(G0 * d^-alpha) of one hop.
inline double path_gain(double distance_m, const LinkBudget& budget) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("path_gain: distance must be > 0");
    return std::sqrt(db_to_linear(budget.reference_gain_db) * std::pow(distance_m, -budget.pathloss_exponent));
}

/// R[i][j] = J0(2 pi |i - j| spacing).
inline ComplexMatrix jakes_correlation(std::size_t n, double spacing_wavelengths) {
    if (n < 1) throw std::invalid_argument("jakes_correlation: n must be >= 1");
    if (!(spacing_wavelengths > 0.0)) throw std::invalid_argument("jakes_correlation: spacing must be > 0");
    std::vector<double> lag(n);
    for (std::size_t k = 0; k < n; ++k)
        lag[k] = k == 0 ? 1.0 : bessel_j0(2.0 * std::numbers::pi * static_cast<double>(k) * spacing_wavelengths);
    ComplexMatrix r(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) r(i, j) = lag[i > j ? i - j : j - i];
    return r;
}

namespace detail {
inline void require_unit(const Vec3& d) {
    if (std::fabs(d.norm() - 1.0) > 1e-6) throw std::invalid_argument("array_response: direction is not unit-norm");
}
}  // namespace detail

/// Far-field steering vector, entry m = exp(j 2 pi <p_m, d> / lambda).
inline ComplexVector array_response(const ArrayConfig& config, const Vec3& unit_direction) {
    detail::require_unit(unit_direction);
    const double step = 2.0 * std::numbers::pi * config.spacing_wavelengths * config.axis.dot(unit_direction);
    ComplexVector out(config.num_ports);
    for (std::size_t m = 0; m < config.num_ports; ++m) out[m] = std::polar(1.0, step * static_cast<double>(m));
    return out;
}

inline ComplexVector array_response(const RisConfig& config, const Vec3& unit_direction) {
    detail::require_unit(unit_direction);
    const double k = 2.0 * std::numbers::pi * config.element_spacing_wavelengths;
    ComplexVector out(config.elements());
    for (std::size_t r = 0; r < config.rows; ++r)
        for (std::size_t c = 0; c < config.cols; ++c)
            out[r * config.cols + c] =
                std::polar(1.0, k * (static_cast<double>(c) * unit_direction.x + static_cast<double>(r) * unit_direction.z));
    return out;
}

/// h = sqrt(K/(K+1)) los + sqrt(1/(K+1)) S g with S S^H = R.
inline ComplexVector rician_vector_with_root(RngStream& stream, const ComplexMatrix& root, const ComplexVector& los,
                                             const RicianParams& k) {
    if (!root.square() || root.rows() != los.size())
        throw std::invalid_argument("rician_vector: dimension mismatch between correlation and LoS vector");
    const std::size_t n = los.size();
    const ComplexVector g = complex_gaussian_vector(stream, n);
    ComplexVector h(n);
    for (std::size_t i = 0; i < n; ++i) {
        cd acc{};
        for (std::size_t j = 0; j < n; ++j) acc += root(i, j) * g[j];
        h[i] = k.los_weight() * los[i] + k.nlos_weight() * acc;
    }
    return h;
}

inline ComplexVector rician_vector(RngStream& stream, const ComplexMatrix& correlation, const ComplexVector& los,
                                   const RicianParams& k) {
    if (!correlation.square() || correlation.rows() != los.size())
        throw std::invalid_argument("rician_vector: dimension mismatch between correlation and LoS vector");
    return rician_vector_with_root(stream, hermitian_sqrt(correlation), los, k);
}

// ---------------------------------------------------------------------------

/// One draw of every channel used by the six architectures.
///
/// Fading matrices are unit-power; the hop amplitudes are kept apart in
/// `path_gain_*`. The correlated scattered parts are kept as well (before
/// Rician weighting) so the RIS geometry can be swapped without new draws.
struct ChannelRealization {
    ComplexMatrix h_bs_ris;     // M x N_bs
    ComplexMatrix h_ris_ue;     // N_ue x M
    ComplexMatrix nlos_bs_ris;  // M x N_bs
    ComplexMatrix nlos_ris_ue;  // N_ue x M
    ComplexVector relay_rx;     // BS port 0 -> relay receive ports
    ComplexVector relay_tx;     // relay transmit ports -> UE port 0
    double path_gain_bs_ris = 0.0;
    double path_gain_ris_ue = 0.0;

    [[nodiscard]] bool all_finite() const {
        auto finite = [](const ComplexVector& v) {
            for (const cd& z : v)
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
            return true;
        };
        return h_bs_ris.all_finite() && h_ris_ue.all_finite() && nlos_bs_ris.all_finite() &&
               nlos_ris_ue.all_finite() && finite(relay_rx) && finite(relay_tx) && std::isfinite(path_gain_bs_ris) &&
               std::isfinite(path_gain_ris_ue);
    }

    bool operator==(const ChannelRealization&) const = default;
};

/// Unit vectors of the two hops.
struct LinkDirections {
    Vec3 bs_to_ris;
    Vec3 ris_to_ue;

    explicit LinkDirections(const Geometry& g)
        : bs_to_ris((g.ris_position - g.bs_position).normalized()),
          ris_to_ue((g.ue_position - g.ris_position).normalized()) {}
};

/// LoS part of the two RIS hops for a given surface layout, with the BS and
/// UE at port 0: incident[m] = a_ris_in[m] a_bs[0], reflected[m] = a_ue[0]
/// a_ris_out[m]. Port 0 sits at the array origin so its steering entry is 1.
struct RisLineOfSight {
    ComplexVector incident;
    ComplexVector reflected;

    RisLineOfSight(const RisConfig& ris, const LinkDirections& dirs)
        : incident(array_response(ris, -dirs.bs_to_ris)), reflected(array_response(ris, dirs.ris_to_ue)) {}
};

namespace detail {

// Correlation root stored column-major with split real/imaginary parts, so
// that root * g runs as contiguous axpy sweeps.
struct SplitRoot {
    std::size_t n = 0;
    std::vector<double> re;
    std::vector<double> im;

    SplitRoot() = default;
    explicit SplitRoot(const ComplexMatrix& root) : n(root.rows()), re(n * n), im(n * n) {
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t k = 0; k < n; ++k) {
                re[k * n + p] = root(p, k).real();
                im[k * n + p] = root(p, k).imag();
            }
    }

    void apply(std::span<const cd> g, std::vector<double>& out_re, std::vector<double>& out_im) const {
        std::fill(out_re.begin(), out_re.begin() + n, 0.0);
        std::fill(out_im.begin(), out_im.begin() + n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double gr = g[k].real();
            const double gi = g[k].imag();
            const double* cr = &re[k * n];
            const double* ci = &im[k * n];
            for (std::size_t p = 0; p < n; ++p) {
                out_re[p] += cr[p] * gr - ci[p] * gi;
                out_im[p] += cr[p] * gi + ci[p] * gr;
            }
        }
    }
};

}  // namespace detail

/// Precomputes the correlation roots and steering vectors of a scenario and
/// draws realizations from per-trial streams. Immutable after construction;
/// `assemble` may be called concurrently.
///
/// Draw order within a stream: BS->RIS scattering (M x N, row-major), RIS->UE
/// scattering (N x M, row-major), relay receive ports, relay transmit ports.
class ChannelSynthesizer {
public:
    explicit ChannelSynthesizer(const Scenario& s) : scenario_(s), dirs_(s.geometry) {
        s.validate();
        const std::size_t n = s.generated_ports();
        const std::size_t nr = s.generated_relay_ports();
        root_bs_ = hermitian_sqrt(jakes_correlation(n, s.bs_fas.spacing_wavelengths));
        root_ue_ = hermitian_sqrt(jakes_correlation(n, s.ue_fas.spacing_wavelengths));
        if (nr > 0) root_relay_ = hermitian_sqrt(jakes_correlation(nr, s.relay_fas.spacing_wavelengths));
        root_bs_split_ = detail::SplitRoot(root_bs_);
        root_ue_split_ = detail::SplitRoot(root_ue_);

        a_bs_ = array_response(ArrayConfig{n, s.bs_fas.spacing_wavelengths, s.bs_fas.axis}, dirs_.bs_to_ris);
        a_ue_ = array_response(ArrayConfig{n, s.ue_fas.spacing_wavelengths, s.ue_fas.axis}, -dirs_.ris_to_ue);
        a_ris_in_ = array_response(s.ris, -dirs_.bs_to_ris);
        a_ris_out_ = array_response(s.ris, dirs_.ris_to_ue);
        if (nr > 0) {
            const ArrayConfig relay{nr, s.relay_fas.spacing_wavelengths, s.relay_fas.axis};
            a_relay_in_ = array_response(relay, -dirs_.bs_to_ris);
            a_relay_out_ = array_response(relay, dirs_.ris_to_ue);
        }
        pg_bs_ris_ = path_gain(distance(s.geometry.bs_position, s.geometry.ris_position), s.budget);
        pg_ris_ue_ = path_gain(distance(s.geometry.ris_position, s.geometry.ue_position), s.budget);
    }

    [[nodiscard]] const Scenario& scenario() const { return scenario_; }
    [[nodiscard]] const LinkDirections& directions() const { return dirs_; }

    [[nodiscard]] ChannelRealization assemble(RngStream& stream) const {
        const std::size_t n = scenario_.generated_ports();
        const std::size_t m = scenario_.ris.elements();
        const std::size_t nr = scenario_.generated_relay_ports();
        const double wl = scenario_.rician.los_weight();
        const double wn = scenario_.rician.nlos_weight();

        ChannelRealization out;
        out.path_gain_bs_ris = pg_bs_ris_;
        out.path_gain_ris_ue = pg_ris_ue_;

        ComplexMatrix g1(m, n);
        fill_complex_gaussian(stream, g1.data());
        ComplexMatrix g2(n, m);
        fill_complex_gaussian(stream, g2.data());

        // Row e of the BS->RIS scattering is root_bs * g1[e, :]; column e of
        // the RIS->UE scattering is root_ue * g2[:, e].
        out.nlos_bs_ris = ComplexMatrix(m, n);
        out.nlos_ris_ue = ComplexMatrix(n, m);
        std::vector<double> re(n);
        std::vector<double> im(n);
        ComplexVector g(n);
        for (std::size_t e = 0; e < m; ++e) {
            const auto g_row = g1.row(e);
            root_bs_split_.apply(g_row, re, im);
            for (std::size_t p = 0; p < n; ++p) out.nlos_bs_ris(e, p) = {re[p], im[p]};
            for (std::size_t k = 0; k < n; ++k) g[k] = g2(k, e);
            root_ue_split_.apply(g, re, im);
            for (std::size_t p = 0; p < n; ++p) out.nlos_ris_ue(p, e) = {re[p], im[p]};
        }

        out.h_bs_ris = ComplexMatrix(m, n);
        for (std::size_t e = 0; e < m; ++e)
            for (std::size_t p = 0; p < n; ++p)
                out.h_bs_ris(e, p) = wl * a_ris_in_[e] * a_bs_[p] + wn * out.nlos_bs_ris(e, p);
        out.h_ris_ue = ComplexMatrix(n, m);
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t e = 0; e < m; ++e)
                out.h_ris_ue(p, e) = wl * a_ue_[p] * a_ris_out_[e] + wn * out.nlos_ris_ue(p, e);

        if (nr > 0) {
            out.relay_rx = rician_vector_with_root(stream, root_relay_, a_relay_in_, scenario_.rician);
            out.relay_tx = rician_vector_with_root(stream, root_relay_, a_relay_out_, scenario_.rician);
        }
        return out;
    }

private:
    Scenario scenario_;
    LinkDirections dirs_;
    ComplexMatrix root_bs_;
    ComplexMatrix root_ue_;
    ComplexMatrix root_relay_;
    detail::SplitRoot root_bs_split_;
    detail::SplitRoot root_ue_split_;
    ComplexVector a_bs_;
    ComplexVector a_ue_;
    ComplexVector a_ris_in_;
    ComplexVector a_ris_out_;
    ComplexVector a_relay_in_;
    ComplexVector a_relay_out_;
    double pg_bs_ris_ = 0.0;
    double pg_ris_ue_ = 0.0;
};

/// Convenience wrapper; prefer a shared ChannelSynthesizer when drawing many
/// trials from one scenario.
inline ChannelRealization assemble_realization(RngStream& stream, const Scenario& scenario) {
    return ChannelSynthesizer(scenario).assemble(stream);
}

}  // namespace fasris
