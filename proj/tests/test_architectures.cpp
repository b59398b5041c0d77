#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fasris/architectures.hpp"

using namespace fasris;

namespace {

Scenario make_scenario(std::size_t ports) {
    Scenario s;
    s.ports = ports;
    s.draw_ports = ports;
    s.budget.reference_gain_db = -26.0;
    return s;
}

// |sum_m h_in[m] h_out[m] exp(j theta_m)|^2 with explicit phases.
double cascade_power(std::span<const cd> a, std::span<const cd> b, const std::vector<double>& theta) {
    cd acc{};
    for (std::size_t m = 0; m < a.size(); ++m) acc += a[m] * b[m] * std::polar(1.0, theta[m]);
    return std::norm(acc);
}

double oracle_snr(const ChannelRealization& r, const Scenario& s, std::size_t bs, std::size_t ue) {
    const auto in = r.h_bs_ris.column(bs);
    const auto out = r.h_ris_ue.row(ue);
    const double g = cascade_power(in, out, co_phase_angles(in, out));
    const double p = std::pow(10.0, (s.budget.tx_dbm - 30) / 10) * std::pow(r.path_gain_bs_ris * r.path_gain_ris_ue, 2);
    return p * g / std::pow(10.0, (s.budget.noise_dbm - 30) / 10);
}

}  // namespace

TEST(Names, RoundTrip) {
    for (auto k : kAllArchitectures) EXPECT_EQ(parse_architecture(to_string(k)), k);
    EXPECT_FALSE(parse_architecture("dual"));
    EXPECT_EQ(to_string(ArchitectureKind::FasEmbeddedRis), "fas_embedded_ris");
}

TEST(CoPhase, ClosedFormMatchesExplicitPhases) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int t = 0; t < 50; ++t) {
        ComplexVector a(25), b(25);
        for (auto& z : a) z = {n(rng), n(rng)};
        for (auto& z : b) z = {n(rng), n(rng)};
        const double closed = co_phase_gain(a, b);
        EXPECT_NEAR(cascade_power(a, b, co_phase_angles(a, b)) / closed, 1.0, 1e-12);
    }
}

TEST(CoPhase, BeatsRandomPhases) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
    ComplexVector a(9), b(9);
    for (auto& z : a) z = {n(rng), n(rng)};
    for (auto& z : b) z = {n(rng), n(rng)};
    const double closed = co_phase_gain(a, b);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> theta(9);
        for (auto& x : theta) x = u(rng);
        ASSERT_LE(cascade_power(a, b, theta), closed * (1 + 1e-12));
    }
}

TEST(CoPhase, GridSearchOracleTwoElements) {
    // With two elements only the relative phase matters: 1-D grid.
    const ComplexVector a{cd(0.3, -1.2), cd(2.0, 0.5)};
    const ComplexVector b{cd(-0.7, 0.1), cd(0.2, 0.9)};
    double best = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double t = 2 * std::numbers::pi * i / 100000;
        best = std::max(best, std::norm(a[0] * b[0] + a[1] * b[1] * std::polar(1.0, t)));
    }
    EXPECT_NEAR(co_phase_gain(a, b), best, 1e-7 * best);
    EXPECT_THROW(co_phase_gain(a, ComplexVector(3)), std::invalid_argument);
}

TEST(Snr, LinkBudgetArithmetic) {
    const std::array<double, 2> pg{1e-3, 1e-2};
    // 10 dBm = 0.01 W; noise -85 dBm
    const double snr = snr_from_gain(10.0, 4.0, pg, -85.0);
    EXPECT_NEAR(snr, 0.01 * 4.0 * 1e-6 * 1e-4 / dbm_to_watts(-85.0), 1e-12 * snr);
    EXPECT_THROW(snr_from_gain(10.0, -1.0, pg, -85.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ(throughput_from_snr(3.0), 2.0);
    EXPECT_DOUBLE_EQ(decode_and_forward_throughput(15.0, 3.0), 2.0);
}

TEST(Evaluators, ConventionalUsesPortZero) {
    const Scenario s = make_scenario(8);
    const ChannelSynthesizer synth(s);
    RngStream st(1, 1);
    const auto r = synth.assemble(st);
    const auto c = evaluate_conventional(r, s);
    EXPECT_NEAR(c.snr_linear, oracle_snr(r, s, 0, 0), 1e-10 * c.snr_linear);
    EXPECT_EQ(c.selected_bs_port, 0u);
    EXPECT_EQ(c.selected_ue_port, 0u);
}

TEST(Evaluators, SingleSidedMatchExhaustiveSearch) {
    const Scenario s = make_scenario(4);
    const ChannelSynthesizer synth(s);
    for (std::uint64_t t = 0; t < 300; ++t) {
        RngStream st(2, t);
        const auto r = synth.assemble(st);
        std::size_t bb = 0, bu = 0;
        for (std::size_t p = 1; p < 4; ++p) {
            if (oracle_snr(r, s, p, 0) > oracle_snr(r, s, bb, 0)) bb = p;
            if (oracle_snr(r, s, 0, p) > oracle_snr(r, s, 0, bu)) bu = p;
        }
        const auto b = evaluate_bs_fas(r, s);
        const auto u = evaluate_ue_fas(r, s);
        ASSERT_EQ(b.selected_bs_port, bb);
        ASSERT_EQ(u.selected_ue_port, bu);
        ASSERT_NEAR(b.snr_linear, oracle_snr(r, s, bb, 0), 1e-10 * b.snr_linear);
    }
}

TEST(Evaluators, DualNeverExceedsOracleAndDominatesSingles) {
    const Scenario s = make_scenario(9);
    const ChannelSynthesizer synth(s);
    for (std::uint64_t t = 0; t < 300; ++t) {
        RngStream st(3, t);
        const auto r = synth.assemble(st);
        double best = 0.0;
        for (std::size_t b = 0; b < 9; ++b)
            for (std::size_t u = 0; u < 9; ++u) best = std::max(best, oracle_snr(r, s, b, u));
        const auto d = evaluate_dual_fas(r, s);
        ASSERT_LE(d.snr_linear, best * (1 + 1e-12));
        ASSERT_GE(d.throughput_bps_hz, evaluate_bs_fas(r, s).throughput_bps_hz);
        ASSERT_GE(d.throughput_bps_hz, evaluate_ue_fas(r, s).throughput_bps_hz);
        ASSERT_GE(evaluate_bs_fas(r, s).throughput_bps_hz, evaluate_conventional(r, s).throughput_bps_hz);
        ASSERT_GE(evaluate_ue_fas(r, s).throughput_bps_hz, evaluate_conventional(r, s).throughput_bps_hz);
    }
}

TEST(Evaluators, SinglePortReducesToConventional) {
    Scenario s = make_scenario(1);
    const ChannelSynthesizer synth(s);
    RngStream st(4, 0);
    const auto r = synth.assemble(st);
    const double c = evaluate_conventional(r, s).throughput_bps_hz;
    EXPECT_EQ(evaluate_bs_fas(r, s).throughput_bps_hz, c);
    EXPECT_EQ(evaluate_ue_fas(r, s).throughput_bps_hz, c);
    EXPECT_EQ(evaluate_dual_fas(r, s).throughput_bps_hz, c);
    EXPECT_THROW(evaluate_fris(r, s), std::invalid_argument);
    EXPECT_THROW(evaluate_fas_embedded_ris(r, s), std::invalid_argument);
}

TEST(Evaluators, RejectsTooFewPorts) {
    Scenario small = make_scenario(4);
    RngStream st(1, 0);
    const auto r = assemble_realization(st, small);
    Scenario big = small;
    big.ports = 8;
    EXPECT_THROW(evaluate_bs_fas(r, big), std::invalid_argument);
}

TEST(Fris, SpacingGrid) {
    EXPECT_THROW(fris_spacing_candidates(2), std::invalid_argument);
    EXPECT_EQ(fris_spacing_candidates(3), std::vector<double>{0.4});
    const auto g = fris_spacing_candidates(100);
    ASSERT_EQ(g.size(), 33u);
    EXPECT_DOUBLE_EQ(g.front(), 0.4);
    EXPECT_DOUBLE_EQ(g.back(), 1.2);
    EXPECT_NEAR(g[1] - g[0], 0.8 / 32, 1e-15);
}

TEST(Fris, PicksBestSpacingByDirectEvaluation) {
    const Scenario s = make_scenario(12);
    const ChannelSynthesizer synth(s);
    RngStream st(5, 9);
    const auto r = synth.assemble(st);
    const auto f = evaluate_fris(r, s);
    const LinkDirections dirs(s.geometry);
    double best = -1.0, best_spacing = 0.0;
    for (double sp : fris_spacing_candidates(12)) {
        RisConfig ris = s.ris;
        ris.element_spacing_wavelengths = sp;
        const auto in = array_response(ris, -dirs.bs_to_ris);
        const auto out = array_response(ris, dirs.ris_to_ue);
        ComplexVector a(25), b(25);
        for (std::size_t e = 0; e < 25; ++e) {
            a[e] = s.rician.los_weight() * in[e] + s.rician.nlos_weight() * r.nlos_bs_ris(e, 0);
            b[e] = s.rician.los_weight() * out[e] + s.rician.nlos_weight() * r.nlos_ris_ue(0, e);
        }
        const double g = cascade_power(a, b, co_phase_angles(a, b));
        if (g > best) best = g, best_spacing = sp;
    }
    EXPECT_EQ(f.selected_spacing_wavelengths, best_spacing);
    RngStream st2(5, 9);
    EXPECT_EQ(evaluate_fris(st2, s), f);
}

TEST(Fris, DominatesConventionalWhenFixedSpacingIsACandidate) {
    // N = 18 gives candidates 0.4, 0.56, 0.72, ...; put the fixed surface at 0.56.
    Scenario s = make_scenario(18);
    s.ris.element_spacing_wavelengths = 0.56;
    const ChannelSynthesizer synth(s);
    for (std::uint64_t t = 0; t < 50; ++t) {
        RngStream st(6, t);
        const auto r = synth.assemble(st);
        ASSERT_GE(evaluate_fris(r, s).snr_linear, evaluate_conventional(r, s).snr_linear * (1 - 1e-12));
    }
}

TEST(Relay, HopSelectionAndDecodeAndForward) {
    Scenario s = make_scenario(8);  // 2 relay ports
    const ComplexVector hop1{cd(0.5, 0), cd(1.0, 0)};
    const ComplexVector hop2{cd(2.0, 0), cd(0.1, 0)};
    const auto res = evaluate_fas_embedded_ris(hop1, hop2, 1e-4, 1e-4, s);
    EXPECT_EQ(res.selected_rx_port, 1u);
    EXPECT_EQ(res.selected_tx_port, 0u);
    const std::array<double, 1> pg{1e-4};
    const double s1 = snr_from_gain(s.budget.tx_dbm, 1.0, pg, s.budget.noise_dbm);
    const double s2 = snr_from_gain(s.budget.tx_dbm, 4.0, pg, s.budget.noise_dbm);
    EXPECT_NEAR(res.throughput_bps_hz, std::log2(1 + std::min(s1, s2)), 1e-12);
}

TEST(Relay, UsesFloorQuarterPorts) {
    Scenario s = make_scenario(11);
    EXPECT_EQ(s.relay_ports(), 2u);
    const ChannelSynthesizer synth(s);
    RngStream st(7, 0);
    const auto r = synth.assemble(st);
    const auto res = evaluate_fas_embedded_ris(r, s);
    EXPECT_LT(*res.selected_rx_port, 2u);
    EXPECT_LT(*res.selected_tx_port, 2u);
}

TEST(Evaluators, DispatchMatchesDirectCalls) {
    const Scenario s = make_scenario(12);
    RngStream st(8, 0);
    const auto r = assemble_realization(st, s);
    EXPECT_EQ(evaluate(ArchitectureKind::Conventional, r, s), evaluate_conventional(r, s));
    EXPECT_EQ(evaluate(ArchitectureKind::BsFas, r, s), evaluate_bs_fas(r, s));
    EXPECT_EQ(evaluate(ArchitectureKind::UeFas, r, s), evaluate_ue_fas(r, s));
    EXPECT_EQ(evaluate(ArchitectureKind::DualFas, r, s), evaluate_dual_fas(r, s));
    EXPECT_EQ(evaluate(ArchitectureKind::Fris, r, s), evaluate_fris(r, s));
    EXPECT_EQ(evaluate(ArchitectureKind::FasEmbeddedRis, r, s), evaluate_fas_embedded_ris(r, s));
}

TEST(Evaluators, PortSetEnlargementIsMonotonePerTrial) {
    Scenario big = make_scenario(40);
    const ChannelSynthesizer synth(big);
    for (std::uint64_t t = 0; t < 100; ++t) {
        RngStream st(9, t);
        const auto r = synth.assemble(st);
        double prev_bs = 0, prev_ue = 0, prev_relay = 0;
        for (std::size_t n = 4; n <= 40; n += 4) {
            Scenario s = big;
            s.ports = n;
            const double bs = evaluate_bs_fas(r, s).throughput_bps_hz;
            const double ue = evaluate_ue_fas(r, s).throughput_bps_hz;
            const double relay = evaluate_fas_embedded_ris(r, s).throughput_bps_hz;
            ASSERT_GE(bs, prev_bs);
            ASSERT_GE(ue, prev_ue);
            ASSERT_GE(relay, prev_relay);
            prev_bs = bs, prev_ue = ue, prev_relay = relay;
        }
    }
}
