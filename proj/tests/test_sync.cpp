#include "doctest.h"
#include "jamguard/dft.hpp"
#include "jamguard/signal.hpp"
#include "jamguard/sync.hpp"
#include "oracles.hpp"

using namespace jamguard;
using namespace jamguard::sync;

namespace {

IQBuffer embedded_pss(std::size_t offset, std::size_t len, int sector = 0) {
    const auto sym = signal::ofdm_modulate(signal::map_ssb_grid(signal::gen_pss_symbols(sector)), 1024, 72);
    IQBuffer iq;
    iq.samples.assign(len, cplx{});
    std::copy(sym.samples.begin(), sym.samples.end(), iq.samples.begin() + static_cast<std::ptrdiff_t>(offset));
    return iq;
}

std::vector<double> small_grid() { return default_cfo_grid(1000.0, 100.0); }

}  // namespace

TEST_SUITE("sync") {

TEST_CASE("default CFO grid") {
    const auto g = default_cfo_grid();
    CHECK(g.size() == 151);
    CHECK(g.front() == -7500.0);
    CHECK(g.back() == 7500.0);
    CHECK_THROWS_AS(default_cfo_grid(1000.0, 0.0), DomainError);
}

TEST_CASE("estimate_cfo") {
    const auto ref = pss_reference(0, 1024, 72, 15.625e6);
    const auto clean = embedded_pss(300, 4096);
    SUBCASE("zero offset") {
        const auto e = estimate_cfo(clean, ref, small_grid());
        CHECK(e.freq_hz == 0.0);
        CHECK(e.peak_lag == 300);
        CHECK(e.metric >= 0.0);
    }
    SUBCASE("+500 Hz rotation is reported as +500 Hz") {
        const auto rot = signal::apply_frequency_offset(clean, 500.0);
        const auto e = estimate_cfo(rot, ref, small_grid());
        CHECK(std::abs(e.freq_hz - 500.0) <= 100.0);
        const auto fixed = correct_cfo(rot, e.freq_hz);
        CHECK(std::abs(estimate_cfo(fixed, ref, small_grid()).freq_hz) <= 100.0);
    }
    SUBCASE("argmax is invariant under positive scaling") {
        auto rot = signal::apply_frequency_offset(clean, -300.0);
        const auto e1 = estimate_cfo(rot, ref, small_grid());
        for (auto& v : rot.samples) v *= 3.7;
        CHECK(estimate_cfo(rot, ref, small_grid()).freq_hz == e1.freq_hz);
    }
    CHECK_THROWS_AS(estimate_cfo(clean, ref, {}), DomainError);
}

TEST_CASE("correct_cfo undoes a rotation") {
    const auto x = embedded_pss(10, 2000);
    CHECK(correct_cfo(x, 0.0).samples == x.samples);
    const auto back = correct_cfo(signal::apply_frequency_offset(x, 777.0), 777.0);
    for (std::size_t n = 0; n < x.size(); ++n) CHECK(std::abs(back.samples[n] - x.samples[n]) <= 1e-9 * (std::abs(x.samples[n]) + 1e-3));
}

TEST_CASE("schmidl_cox literal form") {
    SUBCASE("perfect lag-L repetition scores 1 at t0") {
        CounterRng rng(4);
        const std::size_t L = 16, t0 = 40;
        IQBuffer iq;
        iq.samples.assign(200, cplx{});
        for (std::size_t m = 0; m < L; ++m) {
            iq.samples[t0 + m] = rng.complex_gaussian(1.0);
            iq.samples[t0 + m + L] = iq.samples[t0 + m];
        }
        const auto est = schmidl_cox(iq, L);
        CHECK(est.metric_curve[t0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.offset_samples == t0);
    }
    SUBCASE("metric curve is scale invariant") {
        auto iq = embedded_pss(37, 1500);
        CounterRng rng(8);
        for (auto& v : iq.samples) v += rng.complex_gaussian(1e-4);
        const auto a = schmidl_cox(iq, 72);
        for (auto& v : iq.samples) v *= 2.5;
        const auto b = schmidl_cox(iq, 72);
        for (std::size_t t = 0; t < a.metric_curve.size(); ++t)
            CHECK(b.metric_curve[t] == doctest::Approx(a.metric_curve[t]).epsilon(1e-9));
    }
    CHECK_THROWS_AS(schmidl_cox(embedded_pss(0, 1096), 600), DomainError);
}

TEST_CASE("schmidl_cox sliding sums equal the direct-sum oracle") {
    CounterRng rng(21);
    auto iq = embedded_pss(37, 3000);
    for (auto& v : iq.samples) v += rng.complex_gaussian(1e-3);
    for (auto [window, lag, sym] : {std::tuple{72ul, 72ul, false}, std::tuple{72ul, 1024ul, true},
                                    std::tuple{72ul, 1024ul, false}, std::tuple{5ul, 3ul, true}}) {
        const SchmidlCoxParams p{window, lag, sym ? MetricNorm::symmetric : MetricNorm::second_window};
        const auto est = schmidl_cox(iq, p);
        const auto ref = oracle::schmidl_cox_direct(iq.samples, window, lag, sym);
        REQUIRE(est.metric_curve.size() == ref.size());
        double worst = 0.0;
        for (std::size_t t = 0; t < ref.size(); ++t)
            worst = std::max(worst, std::abs(est.metric_curve[t] - ref[t]) / std::max(ref[t], 1e-300));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("CP correlation locates a CP-OFDM symbol embedded at offset 37") {
    const auto iq = embedded_pss(37, 1500);
    const SchmidlCoxParams p{72, 1024, MetricNorm::symmetric};
    const auto est = schmidl_cox(iq, p);
    CHECK(est.offset_samples == 37);
    CHECK(est.metric_curve[37] == doctest::Approx(1.0).epsilon(1e-12));
    const auto ref = oracle::schmidl_cox_direct(iq.samples, 72, 1024, true);
    CHECK(std::max_element(ref.begin(), ref.end()) - ref.begin() == 37);
}

TEST_CASE("symmetric metric stays in [0, 1] on random signals") {
    CounterRng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        IQBuffer iq;
        iq.samples.resize(600);
        for (auto& v : iq.samples) v = rng.complex_gaussian(1.0 + trial);
        const auto est = schmidl_cox(iq, SchmidlCoxParams{17, 40, MetricNorm::symmetric});
        for (double m : est.metric_curve) {
            CHECK(m >= 0.0);
            CHECK(m <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("all-zero windows give M = 0") {
    IQBuffer iq;
    iq.samples.assign(300, cplx{});
    const auto est = schmidl_cox(iq, 10);
    for (double m : est.metric_curve) CHECK(m == 0.0);
    CHECK(est.offset_samples == 0);
}

TEST_CASE("extract_pss") {
    IQBuffer iq;
    iq.samples = {1.0, 2.0, 3.0, 4.0, 5.0};
    const auto s = extract_pss(iq, 0, 4, 0);
    CHECK(s.samples == std::vector<cplx>{1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(extract_pss(iq, 2, 4, 0), DomainError);

    SUBCASE("loopback recovers the grid") {
        const auto g = signal::map_ssb_grid(signal::gen_pss_symbols(1));
        const auto cap = embedded_pss(0, 3000, 1);
        auto x = extract_pss(cap, 0, 1024, 72);
        CHECK(x.size() == 1024);
        dft::forward(x.samples);
        // Inverse of the modulator: bin k of the grid sits at FFT bin (k - 120) mod N, scaled by 240/N.
        for (std::size_t k = 0; k < 240; ++k) {
            const std::size_t b = (k + 1024 - 120) % 1024;
            const cplx got = x.samples[b] * (240.0 / 1024.0);
            CHECK(std::abs(got - g.bins[k]) <= 1e-9);
        }
    }
}

TEST_CASE("synchronizer on a synthetic burst") {
    signal::SynthConfig cfg;
    cfg.n_pure = 4;
    cfg.n_jam = 1;
    SyncConfig sc;
    const Synchronizer s(sc, cfg.sample_rate, cfg.capture_len);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto rec = signal::synth_record(cfg, i);
        const auto r = s.run(rec.iq);
        CHECK(std::abs(r.cfo.freq_hz - rec.cfo_hz) <= 100.0);
        CHECK(r.t_off <= rec.ssb_offset);
        CHECK(r.t_off + sc.cp_len >= rec.ssb_offset);
    }
}

}  // TEST_SUITE
