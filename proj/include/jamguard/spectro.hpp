#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jamguard/common.hpp"

namespace jamguard::spectro {

/// Row-major H x W magnitude image; rows are frequency bins (lowest
/// frequency first, DC in the middle), columns are time frames.
struct Spectrogram {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    Spectrogram() = default;
    Spectrogram(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(h * w, fill) {}

    double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
};

enum class Window : std::uint8_t { rectangular, hann };
enum class NormMode : std::uint8_t { none, minmax, zscore, log_minmax };

Window parse_window(const std::string& s);
NormMode parse_norm(const std::string& s);
const char* window_name(Window w);
const char* norm_name(NormMode m);

/// floor((len - fft_size) / 99), at least 1: yields >= 100 frames when possible.
std::size_t default_hop(std::size_t len, std::size_t fft_size);

/// Column t = |DFT(window * x[t*hop, t*hop + fft_size))|, fftshifted.
Spectrogram stft(const IQBuffer& iq, std::size_t fft_size, std::size_t hop, Window window = Window::hann);

/// Keeps the central round(H * fraction) rows.
Spectrogram crop_center_rows(const Spectrogram& s, double fraction);

/// Block-mean pooling to side x side. Block i covers [floor(i*H/side), floor((i+1)*H/side)).
Spectrogram resize_square(const Spectrogram& s, std::size_t side = 100);

/// Constant images map to all zeros under every mode.
Spectrogram normalize(const Spectrogram& s, NormMode mode);

/// 8-bit binary PGM (P5, maxval 255), min-max scaled.
void write_pgm(const Spectrogram& s, const std::filesystem::path& path);
void write_csv(const Spectrogram& s, const std::filesystem::path& path);

/// Frequency span of one row after the spectrogram of a capture sampled at
/// sample_rate is cropped by crop_fraction and pooled to side rows.
double pixel_bandwidth_hz(double sample_rate, std::size_t side, double crop_fraction = 1.0);

struct SpectroConfig {
    std::size_t fft_size = 1024;
    std::size_t hop = 0;  ///< 0: default_hop(segment_len, fft_size)
    Window window = Window::hann;
    std::size_t segment_len = 6144;  ///< samples taken from the aligned start (zero-padded past the end)
    double crop_fraction = 0.5;      ///< central share of the band kept; 0.5 gives ~78 kHz per pixel at 15.625 MHz
    std::size_t side = 100;
    NormMode norm = NormMode::log_minmax;
};

/// Aligned capture -> normalized side x side image.
Spectrogram capture_image(const IQBuffer& iq, std::size_t t_off, const SpectroConfig& cfg);

}  // namespace jamguard::spectro
