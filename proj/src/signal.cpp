#include "jamguard/signal.hpp"

#include <cmath>

#include "jamguard/dft.hpp"
#include "jamguard/parallel.hpp"
#include "jamguard/rng.hpp"

namespace jamguard::signal {

const char* jammer_kind_name(JammerKind k) {
    switch (k) {
        case JammerKind::cw_tone: return "cw_tone";
        case JammerKind::gaussian_wideband: return "gaussian_wideband";
        case JammerKind::pss_replay: return "pss_replay";
    }
    throw DomainError("unknown jammer kind");
}

JammerKind parse_jammer_kind(const std::string& s) {
    if (s == "cw_tone") return JammerKind::cw_tone;
    if (s == "gaussian_wideband") return JammerKind::gaussian_wideband;
    if (s == "pss_replay") return JammerKind::pss_replay;
    throw DomainError("unknown jammer kind '" + s + "'");
}

BitSequence gen_pss_bits() {
    BitSequence out;
    auto& s = out.bits;
    // [s(6) .. s(0)] = [1 1 1 0 1 1 0]
    constexpr std::array<std::uint8_t, 7> init{0, 1, 1, 0, 1, 1, 1};
    for (std::size_t i = 0; i < 7; ++i) s[i] = init[i];
    for (std::size_t i = 0; i + 7 < kPssLength; ++i) s[i + 7] = (s[i + 4] + s[i]) % 2;
    return out;
}

PssSequence gen_pss_symbols(int sector_id) {
    if (sector_id < 0 || sector_id > 2)
        throw DomainError("sector_id must be 0, 1 or 2, got " + std::to_string(sector_id));
    const auto s = gen_pss_bits();
    PssSequence out;
    out.sector_id = sector_id;
    for (std::size_t k = 0; k < kPssLength; ++k) {
        const std::size_t m = (k + kSectorShift * static_cast<std::size_t>(sector_id)) % kPssLength;
        out.symbols[k] = 1.0 - 2.0 * static_cast<double>(s.bits[m]);
    }
    return out;
}

FrequencyGrid map_ssb_grid(const PssSequence& pss) {
    FrequencyGrid g;
    g.symbol_index = 0;
    for (std::size_t k = kPssFirstBin; k <= kPssLastBin; ++k)
        g.bins[k] = pss.symbols[k - kPssFirstBin];
    return g;
}

IQBuffer ofdm_modulate(const FrequencyGrid& grid, std::size_t fft_size, std::size_t cp_len,
                       double sample_rate) {
    if (fft_size < kSsbSubcarriers)
        throw DomainError("fft_size " + std::to_string(fft_size) + " is smaller than the SSB width");
    if (grid.bins.size() != kSsbSubcarriers)
        throw DomainError("frequency grid must have 240 bins");
    if (cp_len > fft_size) throw DomainError("cp_len exceeds fft_size");

    std::vector<cplx> spec(fft_size);
    const std::size_t centre = kSsbSubcarriers / 2;
    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) {
        const std::size_t bin = (k + fft_size - centre) % fft_size;
        spec[bin] = grid.bins[k];
    }
    dft::inverse(spec);
    const double scale = 1.0 / static_cast<double>(kSsbSubcarriers);
    for (auto& v : spec) v *= scale;

    IQBuffer out;
    out.sample_rate = sample_rate;
    out.samples.reserve(fft_size + cp_len);
    out.samples.insert(out.samples.end(), spec.end() - static_cast<std::ptrdiff_t>(cp_len), spec.end());
    out.samples.insert(out.samples.end(), spec.begin(), spec.end());
    return out;
}

IQBuffer apply_channel(const IQBuffer& iq, const ChannelProfile& ch) {
    if (ch.taps.empty()) throw DomainError("channel needs at least one tap");
    if (!(ch.noise_power >= 0.0)) throw DomainError("noise_power must be >= 0");
    IQBuffer out = iq;
    const std::size_t n = iq.size();
    const bool identity_taps = ch.taps.size() == 1 && ch.taps[0] == cplx{1.0, 0.0};
    if (!identity_taps) {
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc{};
            const std::size_t dmax = std::min(ch.taps.size(), i + 1);
            for (std::size_t d = 0; d < dmax; ++d) acc += ch.taps[d] * iq.samples[i - d];
            out.samples[i] = acc;
        }
    }
    if (ch.noise_power > 0.0) {
        CounterRng rng(ch.seed);
        for (auto& v : out.samples) v += rng.complex_gaussian(ch.noise_power);
    }
    return out;
}

IQBuffer apply_frequency_offset(const IQBuffer& iq, double freq_hz) {
    IQBuffer out = iq;
    if (freq_hz == 0.0) return out;
    const double w = 2.0 * kPi * freq_hz / iq.sample_rate;
    for (std::size_t n = 0; n < out.size(); ++n) {
        const double ph = w * static_cast<double>(n);
        out.samples[n] *= cplx{std::cos(ph), std::sin(ph)};
    }
    return out;
}

namespace {

void normalize_rms(std::vector<cplx>& x) {
    const double p = mean_power(x);
    if (p <= 0.0) return;
    const double inv = 1.0 / std::sqrt(p);
    for (auto& v : x) v *= inv;
}

}  // namespace

std::vector<cplx> jammer_waveform(const JammerSpec& j, std::size_t length, double sample_rate) {
    std::vector<cplx> w(length);
    switch (j.kind) {
        case JammerKind::cw_tone: {
            const double om = 2.0 * kPi * j.tone_offset_hz / sample_rate;
            for (std::size_t n = 0; n < length; ++n) {
                const double ph = om * static_cast<double>(n);
                w[n] = {std::cos(ph), std::sin(ph)};
            }
            return w;
        }
        case JammerKind::gaussian_wideband: {
            CounterRng rng(j.seed);
            for (auto& v : w) v = rng.complex_gaussian(1.0);
            normalize_rms(w);
            return w;
        }
        case JammerKind::pss_replay: {
            const auto sym = ofdm_modulate(map_ssb_grid(gen_pss_symbols(j.replay_sector)), j.fft_size,
                                           j.cp_len, sample_rate);
            const std::size_t period = sym.size();
            const std::size_t shift = period - j.replay_delay % period;
            for (std::size_t n = 0; n < length; ++n) w[n] = sym.samples[(n + shift) % period];
            normalize_rms(w);
            return w;
        }
    }
    throw DomainError("unknown jammer kind");
}

IQBuffer inject_jammer(const IQBuffer& iq, const JammerSpec& j, std::optional<double> reference_rms) {
    const double ref = reference_rms ? *reference_rms : std::sqrt(mean_power(iq.samples));
    const double g = std::pow(10.0, j.gain_db / 20.0) * ref;
    const auto xj = jammer_waveform(j, iq.size(), iq.sample_rate);
    IQBuffer out = iq;
    for (std::size_t n = 0; n < out.size(); ++n) out.samples[n] += g * xj[n];
    return out;
}

IQBuffer gen_ssb_burst(int sector_id, std::size_t fft_size, std::size_t cp_len, std::uint64_t seed,
                       double sample_rate) {
    CounterRng rng(seed);
    const double a = 1.0 / std::sqrt(2.0);
    auto qpsk = [&] {
        const auto b = rng.next_u64();
        return cplx{(b & 1) ? a : -a, (b & 2) ? a : -a};
    };
    std::array<FrequencyGrid, kSsbSymbols> grids;
    grids[0] = map_ssb_grid(gen_pss_symbols(sector_id));
    for (auto& v : grids[1].bins) v = qpsk();
    for (std::size_t k = 0; k < kSsbSubcarriers; ++k) {
        if (k >= kPssFirstBin && k <= kPssLastBin)
            grids[2].bins[k] = (rng.next_u64() & 1) ? 1.0 : -1.0;
        else if (k < 48 || k >= 192)
            grids[2].bins[k] = qpsk();
    }
    for (auto& v : grids[3].bins) v = qpsk();

    IQBuffer out;
    out.sample_rate = sample_rate;
    for (std::size_t l = 0; l < kSsbSymbols; ++l) {
        grids[l].symbol_index = static_cast<int>(l);
        const auto sym = ofdm_modulate(grids[l], fft_size, cp_len, sample_rate);
        out.samples.insert(out.samples.end(), sym.samples.begin(), sym.samples.end());
    }
    return out;
}

std::vector<double> gain_sweep(const SynthConfig& cfg) {
    if (!(cfg.gain_step_db > 0.0)) throw DomainError("gain_step_db must be > 0");
    if (cfg.gain_max_db < cfg.gain_min_db) throw DomainError("gain_max_db < gain_min_db");
    const auto levels =
        static_cast<std::size_t>(std::floor((cfg.gain_max_db - cfg.gain_min_db) / cfg.gain_step_db + 1e-9)) + 1;
    std::vector<double> out(levels);
    for (std::size_t i = 0; i < levels; ++i)
        out[i] = cfg.gain_min_db + static_cast<double>(i) * cfg.gain_step_db;
    return out;
}

namespace {

void validate(const SynthConfig& cfg) {
    if (cfg.n_pure == 0 || cfg.n_jam == 0)
        throw DomainError("synth: both n_pure and n_jam must be >= 1");
    if (!(cfg.sample_rate > 0.0)) throw DomainError("synth: sample_rate must be > 0");
    if (cfg.snr_db_max < cfg.snr_db_min) throw DomainError("synth: snr_db_max < snr_db_min");
    if (cfg.ssb_offset_max < cfg.ssb_offset_min) throw DomainError("synth: ssb_offset_max < ssb_offset_min");
    if (cfg.jammer_kinds.empty()) throw DomainError("synth: no jammer kinds");
    if (cfg.multipath_taps == 0) throw DomainError("synth: multipath_taps must be >= 1");
    const std::size_t burst = kSsbSymbols * (cfg.fft_size + cfg.cp_len);
    if (cfg.ssb_offset_max + burst > cfg.capture_len)
        throw DomainError("synth: capture_len too short for the SSB burst at ssb_offset_max");
    (void)gain_sweep(cfg);
}

}  // namespace

CaptureRecord synth_record(const SynthConfig& cfg, std::size_t index) {
    CaptureRecord rec;
    rec.seed = derive_seed(cfg.seed, {index});
    rec.sector_id = cfg.sector_id;
    rec.label = index < cfg.n_pure ? Label::pure : Label::jammed;
    CounterRng rng(rec.seed);

    // Equal bounds may be +inf (noiseless); avoid inf - inf.
    const double u_snr = rng.uniform();
    rec.snr_db = cfg.snr_db_max == cfg.snr_db_min ? cfg.snr_db_min
                                                  : cfg.snr_db_min + (cfg.snr_db_max - cfg.snr_db_min) * u_snr;
    rec.cfo_hz = cfg.cfo_max_hz * (2.0 * rng.uniform() - 1.0);
    rec.ssb_offset = cfg.ssb_offset_min + rng.below(cfg.ssb_offset_max - cfg.ssb_offset_min + 1);

    const auto burst = gen_ssb_burst(cfg.sector_id, cfg.fft_size, cfg.cp_len,
                                     derive_seed(rec.seed, {1}), cfg.sample_rate);
    const double p_signal = mean_power(burst.samples);

    IQBuffer cap;
    cap.sample_rate = cfg.sample_rate;
    cap.center_freq = cfg.center_freq;
    cap.samples.assign(cfg.capture_len, cplx{});
    std::copy(burst.samples.begin(), burst.samples.end(),
              cap.samples.begin() + static_cast<std::ptrdiff_t>(rec.ssb_offset));
    cap = apply_frequency_offset(cap, rec.cfo_hz);

    ChannelProfile ch;
    ch.seed = derive_seed(rec.seed, {2});
    ch.noise_power = p_signal / std::pow(10.0, rec.snr_db / 10.0);
    if (cfg.multipath_taps > 1) {
        ch.taps.assign(cfg.multipath_taps, cplx{});
        double energy = 0.0;
        for (std::size_t d = 0; d < cfg.multipath_taps; ++d) {
            const double amp = std::exp(-0.5 * static_cast<double>(d)) * (d == 0 ? 1.0 : rng.uniform());
            const double ph = d == 0 ? 0.0 : 2.0 * kPi * rng.uniform();
            ch.taps[d] = std::polar(amp, ph);
            energy += amp * amp;
        }
        for (auto& t : ch.taps) t /= std::sqrt(energy);
    }
    rec.iq = apply_channel(cap, ch);

    if (rec.label == Label::jammed) {
        const auto levels = gain_sweep(cfg);
        const std::size_t j = index - cfg.n_pure;
        JammerSpec js;
        rec.sweep_gain_db = levels[j % levels.size()];
        js.kind = cfg.jammer_kinds[(j / levels.size()) % cfg.jammer_kinds.size()];
        js.gain_db = rec.sweep_gain_db + cfg.jammer_link_offset_db;
        js.tone_offset_hz = cfg.tone_offset_max_hz * (2.0 * rng.uniform() - 1.0);
        js.replay_delay = static_cast<std::size_t>(rng.below(cfg.capture_len));
        js.replay_sector = cfg.sector_id;
        js.fft_size = cfg.fft_size;
        js.cp_len = cfg.cp_len;
        js.seed = derive_seed(rec.seed, {3});
        rec.iq = inject_jammer(rec.iq, js, std::sqrt(p_signal));
        rec.jammer = js;
    }
    return rec;
}

std::vector<CaptureRecord> synth_dataset(const SynthConfig& cfg) {
    validate(cfg);
    std::vector<CaptureRecord> out(cfg.n_pure + cfg.n_jam);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = synth_record(cfg, i); });
    return out;
}

}  // namespace jamguard::signal
