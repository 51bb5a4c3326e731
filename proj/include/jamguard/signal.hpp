#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jamguard/common.hpp"

namespace jamguard::signal {

inline constexpr std::size_t kPssLength = 127;
inline constexpr std::size_t kSsbSubcarriers = 240;
inline constexpr std::size_t kPssFirstBin = 56;
inline constexpr std::size_t kPssLastBin = 182;
inline constexpr std::size_t kSectorShift = 43;
inline constexpr std::size_t kSsbSymbols = 4;

/// Output of the degree-7 PSS shift register, s(0)..s(126).
struct BitSequence {
    std::array<std::uint8_t, kPssLength> bits{};
};

/// BPSK PSS symbols for one sector (N_ID^(2)).
struct PssSequence {
    std::array<double, kPssLength> symbols{};
    int sector_id = 0;
};

/// Subcarrier values of one SSB OFDM symbol, indexed 0..239.
struct FrequencyGrid {
    std::vector<cplx> bins = std::vector<cplx>(kSsbSubcarriers);
    int symbol_index = 0;
};

struct ChannelProfile {
    std::vector<cplx> taps{cplx{1.0, 0.0}};
    double noise_power = 0.0;
    std::uint64_t seed = 0;
};

enum class JammerKind : std::uint8_t { cw_tone, gaussian_wideband, pss_replay };

const char* jammer_kind_name(JammerKind k);
JammerKind parse_jammer_kind(const std::string& s);

struct JammerSpec {
    JammerKind kind = JammerKind::cw_tone;
    double gain_db = -60.0;       ///< relative to the reference (clean-signal) RMS
    double tone_offset_hz = 0.0;  ///< cw_tone only
    std::uint64_t seed = 0;
    std::size_t replay_delay = 0;  ///< pss_replay only: start offset of the replayed symbol
    int replay_sector = 0;         ///< pss_replay only
    std::size_t fft_size = 1024;   ///< pss_replay only
    std::size_t cp_len = 72;       ///< pss_replay only
};

struct CaptureRecord {
    IQBuffer iq;
    Label label = Label::pure;
    std::optional<JammerSpec> jammer;
    double snr_db = 0.0;
    // Generation metadata (ground truth for sync tests, recorded in the manifest).
    std::uint64_t seed = 0;
    double sweep_gain_db = 0.0;  ///< gain from the transmit-gain sweep, before the link offset
    double cfo_hz = 0.0;
    std::size_t ssb_offset = 0;
    int sector_id = 0;
};

BitSequence gen_pss_bits();

/// Throws DomainError unless sector_id is 0, 1 or 2.
PssSequence gen_pss_symbols(int sector_id);

/// Places the PSS on subcarriers 56..182; every other bin is zero.
FrequencyGrid map_ssb_grid(const PssSequence& pss);

/// Centres the grid in an fft_size spectrum (grid bin 120 on DC), takes the
/// inverse DFT scaled by 1/240 and prepends a cyclic prefix of cp_len samples.
/// Energy law with cp_len = 0: sum|x|^2 = fft_size * sum|X|^2 / 240^2.
IQBuffer ofdm_modulate(const FrequencyGrid& grid, std::size_t fft_size, std::size_t cp_len,
                       double sample_rate = 15.625e6);

/// Linear convolution with the taps (truncated to the input length) plus
/// seeded circular complex Gaussian noise of variance noise_power.
IQBuffer apply_channel(const IQBuffer& iq, const ChannelProfile& ch);

/// Multiplies samples by e^{+j2pi f n / fs}, i.e. shifts the spectrum by +f.
IQBuffer apply_frequency_offset(const IQBuffer& iq, double freq_hz);

/// Unit-RMS interference waveform of the requested length.
std::vector<cplx> jammer_waveform(const JammerSpec& j, std::size_t length, double sample_rate);

/// iq + g * x_j with g = 10^{gain_db/20} * reference_rms. reference_rms
/// defaults to the RMS of iq itself.
IQBuffer inject_jammer(const IQBuffer& iq, const JammerSpec& j,
                       std::optional<double> reference_rms = std::nullopt);

/// Full four-symbol SSB burst: PSS, PBCH, SSS, PBCH. PBCH carries random QPSK
/// on all 240 subcarriers; the SSS symbol carries random BPSK on 56..182 with
/// PBCH QPSK on 0..47 and 192..239.
IQBuffer gen_ssb_burst(int sector_id, std::size_t fft_size, std::size_t cp_len,
                       std::uint64_t seed, double sample_rate = 15.625e6);

struct SynthConfig {
    std::size_t n_pure = 200;
    std::size_t n_jam = 200;
    std::uint64_t seed = 7;

    double sample_rate = 15.625e6;
    double center_freq = 632e6;
    std::size_t fft_size = 1024;
    std::size_t cp_len = 72;
    std::size_t capture_len = 8192;
    int sector_id = 0;

    double snr_db_min = 10.0;
    double snr_db_max = 20.0;
    double cfo_max_hz = 5000.0;
    std::size_t ssb_offset_min = 64;
    std::size_t ssb_offset_max = 1600;
    std::size_t multipath_taps = 1;

    std::vector<JammerKind> jammer_kinds{JammerKind::cw_tone, JammerKind::gaussian_wideband,
                                         JammerKind::pss_replay};
    double gain_min_db = -80.0;
    double gain_max_db = -40.0;
    double gain_step_db = 2.0;
    /// Added to each sweep gain to obtain the jammer-to-signal ratio applied
    /// by inject_jammer. Stands in for the transmitter/combiner/receiver
    /// chain that relates transmit gain to in-band jammer power.
    double jammer_link_offset_db = 70.0;
    double tone_offset_max_hz = 1.8e6;
};

/// Gain levels gain_min_db, gain_min_db + step, ..., gain_max_db.
std::vector<double> gain_sweep(const SynthConfig& cfg);

/// Record i (0-based) uses seed derive_seed(cfg.seed, {i}); pure records come
/// first, then jammed. Jammed record j gets sweep level j mod levels, so the
/// sweep is covered uniformly.
std::vector<CaptureRecord> synth_dataset(const SynthConfig& cfg);

/// Generates a single record; synth_dataset is this over all indices.
CaptureRecord synth_record(const SynthConfig& cfg, std::size_t index);

}  // namespace jamguard::signal
