#pragma once

// Seeded Monte-Carlo sweeps, reference-gain calibration and the brute-force
// oracles used to validate the reduced searches.
//
// Trial i of a run with master seed S draws all of its randomness from
// derive_stream(S, i). Per-trial results are written to slots indexed by i
// and reduced serially in index order, so a run's output does not depend on
// the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fasris/architectures.hpp"
#include "fasris/channel.hpp"
#include "fasris/numerics.hpp"

namespace fasris {

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

inline ArchitectureResult run_trial(std::uint64_t master_seed, std::uint64_t trial_index, const Scenario& scenario,
                                    ArchitectureKind kind) {
    RngStream stream = derive_stream(master_seed, trial_index);
    const ChannelRealization r = ChannelSynthesizer(scenario).assemble(stream);
    return evaluate(kind, r, scenario);
}

struct SweepSpec {
    std::vector<ArchitectureKind> architectures{kAllArchitectures.begin(), kAllArchitectures.end()};
    std::vector<std::size_t> n_values{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::vector<double> p_dbm_values{10.0};
    std::size_t trials = 5000;
    std::uint64_t master_seed = 42;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
        if (architectures.empty() || n_values.empty() || p_dbm_values.empty())
            throw std::invalid_argument("sweep: architecture, N and P lists must be non-empty");
        for (std::size_t n : n_values)
            if (n < 1) throw std::invalid_argument("sweep: N values must be >= 1");
        for (double p : p_dbm_values)
            if (!std::isfinite(p)) throw std::invalid_argument("sweep: P values must be finite");
    }

    [[nodiscard]] std::size_t max_ports() const { return *std::max_element(n_values.begin(), n_values.end()); }
};

inline SweepSpec figure2_spec() { return {}; }

inline SweepSpec figure3_spec() {
    SweepSpec s;
    s.n_values = {50};
    s.p_dbm_values = {8.0, 12.0, 16.0, 20.0};
    return s;
}

struct SummaryStatistics {
    double mean_throughput = 0.0;
    double ci95_halfwidth = 0.0;
    std::size_t trials = 0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Mean and normal-approximation 95% CI halfwidth, accumulated in index order.
inline SummaryStatistics summarize(std::span<const double> samples) {
    SummaryStatistics out;
    out.trials = samples.size();
    if (samples.empty()) return out;
    CompensatedSum sum;
    for (double x : samples) sum.add(x);
    const double mean = sum.value() / static_cast<double>(samples.size());
    out.mean_throughput = mean;
    if (samples.size() > 1) {
        CompensatedSum sq;
        for (double x : samples) sq.add((x - mean) * (x - mean));
        const double var = sq.value() / static_cast<double>(samples.size() - 1);
        out.ci95_halfwidth = kZ95 * std::sqrt(var / static_cast<double>(samples.size()));
    }
    return out;
}

struct SweepCell {
    ArchitectureKind architecture = ArchitectureKind::Conventional;
    std::size_t ports = 0;
    double p_dbm = 0.0;
    SummaryStatistics stats;
};

struct SweepTable {
    std::uint64_t master_seed = 0;
    std::size_t trials = 0;
    std::vector<SweepCell> cells;
    /// per_trial[c][i] is trial i's throughput in cell c (kept on request).
    std::vector<std::vector<double>> per_trial;

    [[nodiscard]] const SweepCell& cell(ArchitectureKind k, std::size_t n, double p) const {
        for (const auto& c : cells)
            if (c.architecture == k && c.ports == n && c.p_dbm == p) return c;
        throw std::out_of_range("sweep table: no such cell");
    }
    [[nodiscard]] std::size_t cell_index(ArchitectureKind k, std::size_t n, double p) const {
        for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i].architecture == k && cells[i].ports == n && cells[i].p_dbm == p) return i;
        throw std::out_of_range("sweep table: no such cell");
    }
};

struct SweepOptions {
    std::size_t workers = 1;
    bool keep_trials = false;
};

/// Scenario used for one (N, P) grid point of a sweep.
inline Scenario sweep_scenario(const Scenario& base, std::size_t ports, double p_dbm) {
    Scenario s = base;
    s.ports = ports;
    s.budget.tx_dbm = p_dbm;
    return s;
}

/// Evaluates every (architecture, N, P) cell on the same realizations. Each
/// trial draws channels once for the largest port count; smaller N use the
/// leading ports, so the N axis is compared with common random numbers.
inline SweepTable run_sweep(const SweepSpec& spec, const Scenario& scenario_template, const SweepOptions& options = {}) {
    spec.validate();
    Scenario base = scenario_template;
    base.draw_ports = std::max(base.generated_ports(), spec.max_ports());
    base.ports = spec.max_ports();
    const ChannelSynthesizer synth(base);

    SweepTable table;
    table.master_seed = spec.master_seed;
    table.trials = spec.trials;
    std::vector<Scenario> cell_scenarios;
    for (ArchitectureKind k : spec.architectures)
        for (std::size_t n : spec.n_values)
            for (double p : spec.p_dbm_values) {
                table.cells.push_back({k, n, p, {}});
                cell_scenarios.push_back(sweep_scenario(base, n, p));
            }
    const std::size_t ncell = table.cells.size();
    std::vector<double> results(ncell * spec.trials);

    parallel_for(spec.trials, options.workers, [&](std::size_t i) {
        RngStream stream = derive_stream(spec.master_seed, i);
        const ChannelRealization r = synth.assemble(stream);
        for (std::size_t c = 0; c < ncell; ++c)
            results[c * spec.trials + i] = evaluate(table.cells[c].architecture, r, cell_scenarios[c]).throughput_bps_hz;
    });

    for (std::size_t c = 0; c < ncell; ++c) {
        const std::span<const double> samples(results.data() + c * spec.trials, spec.trials);
        for (std::size_t i = 0; i < spec.trials; ++i) {
            if (!std::isfinite(samples[i])) {
                std::ostringstream msg;
                msg << "sweep: non-finite throughput in cell (" << to_string(table.cells[c].architecture)
                    << ", N=" << table.cells[c].ports << ", P=" << table.cells[c].p_dbm << " dBm) at trial " << i;
                throw std::runtime_error(msg.str());
            }
        }
        table.cells[c].stats = summarize(samples);
        if (options.keep_trials) table.per_trial.emplace_back(samples.begin(), samples.end());
    }
    return table;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationResult {
    double reference_gain_db = 0.0;
    double achieved_baseline = 0.0;
    double target_baseline = 0.0;
    std::size_t iterations = 0;
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double low_db, double high_db, double low_bps, double high_bps)
        : std::runtime_error(what), low_db(low_db), high_db(high_db), low_bps(low_bps), high_bps(high_bps) {}
    double low_db;
    double high_db;
    double low_bps;
    double high_bps;
};

inline constexpr double kCalibrationTolerance = 0.05;
inline constexpr double kCalibrationPowerDbm = 10.0;
inline constexpr double kCalibrationHalfRangeDb = 60.0;

/// Fits the reference gain G0 so the mean conventional throughput at
/// P = 10 dBm equals `target_bps_hz`.
///
/// The cascade SNR scales with G0^2, so per-trial SNRs are computed once at
/// G0 = 0 dB and rescaled during bisection over free-space +/- 60 dB. The
/// bisection runs until the mean is within 1e-9 of the target; a result is
/// accepted when within kCalibrationTolerance.
inline CalibrationResult calibrate_reference_gain(double target_bps_hz, const Scenario& scenario, std::size_t trials,
                                                  std::uint64_t master_seed, std::size_t workers = 1) {
    if (!(target_bps_hz > 0.0) || !std::isfinite(target_bps_hz))
        throw std::invalid_argument("calibrate: target throughput must be > 0");
    if (trials < 1) throw std::invalid_argument("calibrate: trials must be >= 1");

    Scenario unit = scenario;
    unit.budget.reference_gain_db = 0.0;
    unit.budget.tx_dbm = kCalibrationPowerDbm;
    const ChannelSynthesizer synth(unit);
    std::vector<double> snr0(trials);
    parallel_for(trials, workers, [&](std::size_t i) {
        RngStream stream = derive_stream(master_seed, i);
        snr0[i] = evaluate_conventional(synth.assemble(stream), unit).snr_linear;
    });

    std::vector<double> tp(trials);
    auto mean_at = [&](double g0_db) {
        const double scale = db_to_linear(2.0 * g0_db);
        for (std::size_t i = 0; i < trials; ++i) tp[i] = throughput_from_snr(snr0[i] * scale);
        return summarize(tp).mean_throughput;
    };

    const double centre = LinkBudget::free_space_reference_db(scenario.budget.carrier_hz);
    double lo = centre - kCalibrationHalfRangeDb;
    double hi = centre + kCalibrationHalfRangeDb;
    const double f_lo = mean_at(lo);
    const double f_hi = mean_at(hi);
    if (!(f_lo <= target_bps_hz && target_bps_hz <= f_hi)) {
        std::ostringstream msg;
        msg << "calibrate: target " << target_bps_hz << " bps/Hz outside reachable range [" << f_lo << ", " << f_hi
            << "] for G0 in [" << lo << ", " << hi << "] dB";
        throw CalibrationError(msg.str(), lo, hi, f_lo, f_hi);
    }

    CalibrationResult out;
    out.target_baseline = target_bps_hz;
    out.trials = trials;
    out.master_seed = master_seed;
    double mid = 0.5 * (lo + hi);
    double f_mid = mean_at(mid);
    for (out.iterations = 1; out.iterations < 200; ++out.iterations) {
        if (std::fabs(f_mid - target_bps_hz) <= 1e-9) break;
        if (f_mid < target_bps_hz)
            lo = mid;
        else
            hi = mid;
        mid = 0.5 * (lo + hi);
        f_mid = mean_at(mid);
    }
    out.reference_gain_db = mid;
    out.achieved_baseline = f_mid;
    if (std::fabs(f_mid - target_bps_hz) > kCalibrationTolerance)
        throw CalibrationError("calibrate: bisection did not reach the target", lo, hi, f_lo, f_hi);
    return out;
}

// ---------------------------------------------------------------------------
// Oracles

inline constexpr std::size_t kOraclePairLimit = 4096;

/// Exhaustive joint BS/UE port search with per-pair co-phasing.
inline ArchitectureResult brute_force_dual_oracle(const ChannelRealization& r, const Scenario& s) {
    if (s.ports * s.ports > kOraclePairLimit)
        throw std::invalid_argument("brute_force_dual_oracle: N_bs * N_ue exceeds the 4096-pair limit");
    detail::require_ports(r, s);
    double best = -1.0;
    std::size_t best_bs = 0;
    std::size_t best_ue = 0;
    for (std::size_t b = 0; b < s.ports; ++b) {
        const ComplexVector h_in = r.h_bs_ris.column(b);
        for (std::size_t u = 0; u < s.ports; ++u) {
            const double g = co_phase_gain(h_in, r.h_ris_ue.row(u));
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

// ---------------------------------------------------------------------------
// Empirical channel statistics

struct EmpiricalReport {
    std::size_t trials = 0;
    std::size_t ports = 0;
    /// max |E[n n^H] - R| over the BS-port scattering correlation.
    double correlation_max_deviation = 0.0;
    /// max |E|h|^2 - 1| over entries of the BS -> RIS channel.
    double mean_power_max_deviation = 0.0;
    /// |E h|^2 / E|h|^2 averaged over entries; K/(K+1) in theory.
    double los_power_fraction = 0.0;
    /// max off-diagonal |E[g g^H]| for i.i.d. draws (identity correlation).
    double identity_offdiag_max = 0.0;
};

inline constexpr std::size_t kEmpiricalPorts = 20;

/// Moment checks of the synthesized channels at N = 20 ports.
inline EmpiricalReport empirical_checks(std::size_t trials, std::uint64_t master_seed = 42, const Scenario& base = {},
                                        std::size_t workers = 1) {
    if (trials < 10000) throw std::invalid_argument("empirical_checks: needs at least 1e4 trials");
    Scenario s = base;
    s.ports = kEmpiricalPorts;
    s.draw_ports = 0;
    const std::size_t n = s.ports;
    const std::size_t m = s.ris.elements();
    const ChannelSynthesizer synth(s);

    // Fixed-size blocks are accumulated independently and reduced in block
    // order, so the result does not depend on the worker count.
    constexpr std::size_t kBlock = 512;
    const std::size_t blocks = (trials + kBlock - 1) / kBlock;
    struct BlockSums {
        std::vector<cd> corr;      // n x n, scattering of RIS element 0 across BS ports
        std::vector<cd> iid_corr;  // n x n
        std::vector<cd> mean;      // m x n
        std::vector<double> power; // m x n
    };
    std::vector<BlockSums> sums(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        BlockSums t{std::vector<cd>(n * n), std::vector<cd>(n * n), std::vector<cd>(m * n), std::vector<double>(m * n)};
        const std::size_t end = std::min(trials, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            RngStream stream = derive_stream(master_seed, i);
            const auto r = synth.assemble(stream);
            RngStream iid_stream = derive_stream(~master_seed, i);
            const auto g = complex_gaussian_vector(iid_stream, n);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t c = 0; c < n; ++c) {
                    t.corr[a * n + c] += r.nlos_bs_ris(0, a) * std::conj(r.nlos_bs_ris(0, c));
                    t.iid_corr[a * n + c] += g[a] * std::conj(g[c]);
                }
            const auto h = r.h_bs_ris.data();
            for (std::size_t e = 0; e < m * n; ++e) {
                t.mean[e] += h[e];
                t.power[e] += std::norm(h[e]);
            }
        }
        sums[b] = std::move(t);
    });

    auto reduce = [&](auto member, std::size_t idx) {
        CompensatedSum re, im;
        for (const auto& t : sums) {
            const cd z = (t.*member)[idx];
            re.add(z.real());
            im.add(z.imag());
        }
        return cd{re.value(), im.value()};
    };

    const double inv = 1.0 / static_cast<double>(trials);
    EmpiricalReport out;
    out.trials = trials;
    out.ports = n;
    const ComplexMatrix theory = jakes_correlation(n, s.bs_fas.spacing_wavelengths);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c) {
            const cd est = reduce(&BlockSums::corr, a * n + c) * inv;
            out.correlation_max_deviation = std::max(out.correlation_max_deviation, std::abs(est - theory(a, c)));
            if (a != c)
                out.identity_offdiag_max =
                    std::max(out.identity_offdiag_max, std::abs(reduce(&BlockSums::iid_corr, a * n + c) * inv));
        }
    CompensatedSum fraction;
    for (std::size_t e = 0; e < m * n; ++e) {
        CompensatedSum pw;
        for (const auto& t : sums) pw.add(t.power[e]);
        const double power = pw.value() * inv;
        const double mean_sq = std::norm(reduce(&BlockSums::mean, e) * inv);
        out.mean_power_max_deviation = std::max(out.mean_power_max_deviation, std::fabs(power - 1.0));
        fraction.add(mean_sq / power);
    }
    out.los_power_fraction = fraction.value() / static_cast<double>(m * n);
    return out;
}

}  // namespace fasris
