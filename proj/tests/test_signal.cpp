#include <map>
#include <numeric>

#include "doctest.h"
#include "jamguard/dft.hpp"
#include "jamguard/signal.hpp"
#include "oracles.hpp"

using namespace jamguard;
using namespace jamguard::signal;

TEST_SUITE("signal") {

TEST_CASE("pss bits: first seven follow the initial state, bit 7 follows the recurrence") {
    const auto s = gen_pss_bits().bits;
    const std::uint8_t head[7] = {0, 1, 1, 0, 1, 1, 1};
    for (int i = 0; i < 7; ++i) CHECK(s[static_cast<std::size_t>(i)] == head[i]);
    CHECK(s[7] == ((s[4] + s[0]) % 2));
    CHECK(s[7] == 1);
}

TEST_CASE("pss bits match the register oracle and have 64 ones") {
    const auto s = gen_pss_bits().bits;
    const auto ref = oracle::lfsr_bits();
    for (std::size_t i = 0; i < 127; ++i) CHECK(s[i] == ref[i]);
    CHECK(std::accumulate(s.begin(), s.end(), 0) == 64);
}

TEST_CASE("pss symbols: sector shift law and BPSK alphabet") {
    const auto p0 = gen_pss_symbols(0), p1 = gen_pss_symbols(1), p2 = gen_pss_symbols(2);
    CHECK(p0.symbols[0] == 1.0);
    for (std::size_t k = 0; k < 127; ++k) {
        CHECK(p1.symbols[k] == p0.symbols[(k + 43) % 127]);
        CHECK(p2.symbols[k] == p0.symbols[(k + 86) % 127]);
        CHECK(std::abs(p0.symbols[k]) == 1.0);
    }
    CHECK_THROWS_AS(gen_pss_symbols(3), DomainError);
    CHECK_THROWS_AS(gen_pss_symbols(-1), DomainError);
}

TEST_CASE("ssb grid mapping") {
    const auto pss = gen_pss_symbols(0);
    const auto g = map_ssb_grid(pss);
    REQUIRE(g.bins.size() == 240);
    CHECK(g.bins[55] == cplx{});
    CHECK(g.bins[183] == cplx{});
    CHECK(g.bins[56] == cplx{pss.symbols[0], 0.0});
    std::size_t nonzero = 0;
    for (const auto& b : g.bins) nonzero += b != cplx{};
    CHECK(nonzero == 127);
}

TEST_CASE("ofdm_modulate") {
    SUBCASE("single unit bin gives a constant-modulus exponential of 1/240") {
        FrequencyGrid g;
        g.bins[100] = 1.0;
        const auto x = ofdm_modulate(g, 1024, 0);
        for (const auto& v : x.samples) CHECK(std::abs(v) == doctest::Approx(1.0 / 240.0).epsilon(1e-12));
    }
    SUBCASE("zero grid, lengths and cyclic prefix") {
        const auto z = ofdm_modulate(FrequencyGrid{}, 1024, 72);
        CHECK(z.size() == 1096);
        for (const auto& v : z.samples) CHECK(v == cplx{});
        const auto x = ofdm_modulate(map_ssb_grid(gen_pss_symbols(1)), 1024, 72);
        for (std::size_t n = 0; n < 72; ++n) CHECK(x.samples[n] == x.samples[n + 1024]);
    }
    SUBCASE("energy law sum|x|^2 = N * sum|X|^2 / 240^2") {
        const auto g = map_ssb_grid(gen_pss_symbols(2));
        const auto x = ofdm_modulate(g, 1024, 0);
        double ex = 0.0, eX = 0.0;
        for (const auto& v : x.samples) ex += std::norm(v);
        for (const auto& v : g.bins) eX += std::norm(v);
        CHECK(ex == doctest::Approx(1024.0 * eX / (240.0 * 240.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ofdm_modulate(FrequencyGrid{}, 128, 0), DomainError);
}

TEST_CASE("apply_channel") {
    const auto x = ofdm_modulate(map_ssb_grid(gen_pss_symbols(0)), 1024, 72);
    SUBCASE("identity profile is the identity") {
        const auto y = apply_channel(x, ChannelProfile{});
        CHECK(y.samples == x.samples);
    }
    SUBCASE("10 dB SNR measured within 0.5 dB") {
        IQBuffer tone;
        tone.samples.resize(20000);
        for (std::size_t n = 0; n < tone.size(); ++n) tone.samples[n] = std::polar(1.0, 0.01 * static_cast<double>(n));
        ChannelProfile ch;
        ch.noise_power = 0.1;
        ch.seed = 99;
        const auto y = apply_channel(tone, ch);
        double pn = 0.0;
        for (std::size_t n = 0; n < y.size(); ++n) pn += std::norm(y.samples[n] - tone.samples[n]);
        pn /= static_cast<double>(y.size());
        CHECK(10.0 * std::log10(1.0 / pn) == doctest::Approx(10.0).epsilon(0.05));
    }
    SUBCASE("same seed, same output") {
        ChannelProfile ch;
        ch.noise_power = 1e-3;
        ch.seed = 5;
        CHECK(apply_channel(x, ch).samples == apply_channel(x, ch).samples);
    }
    SUBCASE("taps convolve and truncate") {
        ChannelProfile ch;
        ch.taps = {cplx{1.0, 0.0}, cplx{0.5, 0.0}};
        const auto y = apply_channel(x, ch);
        CHECK(y.size() == x.size());
        CHECK(std::abs(y.samples[10] - (x.samples[10] + 0.5 * x.samples[9])) < 1e-15);
    }
}

TEST_CASE("inject_jammer") {
    const auto x = ofdm_modulate(map_ssb_grid(gen_pss_symbols(0)), 1024, 72);
    const double rms = std::sqrt(mean_power(x.samples));
    SUBCASE("vanishing gain leaves the signal") {
        JammerSpec j;
        j.kind = JammerKind::gaussian_wideband;
        j.gain_db = -300.0;
        const auto y = inject_jammer(x, j);
        for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(y.samples[n] - x.samples[n]) <= 1e-10 * rms);
    }
    SUBCASE("unit-gain tone at DC has constant modulus equal to the signal RMS") {
        JammerSpec j;
        j.kind = JammerKind::cw_tone;
        j.gain_db = 0.0;
        j.tone_offset_hz = 0.0;
        const auto y = inject_jammer(x, j);
        for (std::size_t n = 0; n < x.size(); ++n)
            CHECK(std::abs(y.samples[n] - x.samples[n]) == doctest::Approx(rms).epsilon(1e-12));
    }
    SUBCASE("additivity: output - input = g * x_j") {
        for (auto kind : {JammerKind::cw_tone, JammerKind::gaussian_wideband, JammerKind::pss_replay}) {
            JammerSpec j;
            j.kind = kind;
            j.gain_db = -7.0;
            j.tone_offset_hz = 123e3;
            j.seed = 3;
            j.replay_delay = 50;
            const auto y = inject_jammer(x, j);
            const auto w = jammer_waveform(j, x.size(), x.sample_rate);
            const double g = std::pow(10.0, -7.0 / 20.0) * rms;
            for (std::size_t n = 0; n < x.size(); ++n)
                CHECK(std::abs((y.samples[n] - x.samples[n]) - g * w[n]) <= 1e-12 * rms);
        }
    }
    SUBCASE("jammer waveforms have unit RMS") {
        for (auto kind : {JammerKind::cw_tone, JammerKind::gaussian_wideband, JammerKind::pss_replay}) {
            JammerSpec j;
            j.kind = kind;
            j.seed = 11;
            CHECK(std::sqrt(mean_power(jammer_waveform(j, 8192, 15.625e6))) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(parse_jammer_kind("sweep"), DomainError);
}

TEST_CASE("gain sweep has 21 levels from -80 to -40") {
    SynthConfig cfg;
    const auto g = gain_sweep(cfg);
    REQUIRE(g.size() == 21);
    CHECK(g.front() == -80.0);
    CHECK(g.back() == -40.0);
}

TEST_CASE("synth_dataset: counts, balance, coverage, determinism") {
    SynthConfig cfg;
    cfg.n_pure = 42;
    cfg.n_jam = 42;
    cfg.seed = 7;
    cfg.capture_len = 6000;
    cfg.ssb_offset_max = 1000;
    const auto a = synth_dataset(cfg);
    REQUIRE(a.size() == 84);
    std::map<double, int> per_level;
    std::size_t jammed = 0;
    for (const auto& r : a) {
        CHECK((r.label == Label::jammed) == r.jammer.has_value());
        if (r.jammer) {
            ++jammed;
            per_level[r.sweep_gain_db]++;
            CHECK(r.jammer->gain_db == r.sweep_gain_db + cfg.jammer_link_offset_db);
        }
        CHECK(r.snr_db >= cfg.snr_db_min);
        CHECK(r.snr_db <= cfg.snr_db_max);
        CHECK(r.iq.size() == cfg.capture_len);
    }
    CHECK(jammed == 42);
    CHECK(per_level.size() == 21);
    for (const auto& [lvl, n] : per_level) CHECK(n == 2);
    const auto b = synth_dataset(cfg);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].iq.samples == b[i].iq.samples);

    cfg.n_pure = 0;
    CHECK_THROWS_AS(synth_dataset(cfg), DomainError);
}

TEST_CASE("synth record does not depend on how many records follow") {
    SynthConfig a;
    a.n_pure = 3;
    a.n_jam = 3;
    SynthConfig b = a;
    b.n_jam = 30;
    CHECK(synth_record(a, 4).iq.samples == synth_record(b, 4).iq.samples);
}

}  // TEST_SUITE
