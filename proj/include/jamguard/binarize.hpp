#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jamguard/spectro.hpp"

namespace jamguard::binarize {

/// Bit-packed Boolean image. Rows are padded to a whole number of 64-bit
/// words; padding bits are always zero, so equal images have equal words.
class BoolImage {
public:
    BoolImage() = default;
    BoolImage(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t words_per_row() const noexcept { return wpr_; }

    bool get(std::size_t r, std::size_t c) const noexcept {
        return (words_[r * wpr_ + c / 64] >> (c % 64)) & 1U;
    }
    void set(std::size_t r, std::size_t c, bool v) noexcept {
        auto& w = words_[r * wpr_ + c / 64];
        const std::uint64_t m = std::uint64_t{1} << (c % 64);
        w = v ? (w | m) : (w & ~m);
    }

    std::size_t popcount() const noexcept;
    std::span<const std::uint64_t> words() const noexcept { return words_; }
    std::span<std::uint64_t> words() noexcept { return words_; }

    BoolImage operator|(const BoolImage& o) const;
    /// True when every set bit of `sub` is set here.
    bool contains(const BoolImage& sub) const;

    bool operator==(const BoolImage&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t wpr_ = 0;
    std::vector<std::uint64_t> words_;
};

/// "JGB1 <height> <width>\n" followed by the packed words, little-endian,
/// row-major, rows padded to a word boundary.
std::vector<std::uint8_t> serialize(const BoolImage& img);
BoolImage deserialize(std::span<const std::uint8_t> bytes);
void save(const BoolImage& img, const std::filesystem::path& path);
BoolImage load(const std::filesystem::path& path);

enum class MethodKind : std::uint8_t { enhanced_otsu, paper_original, multi_level, adaptive_gaussian };

MethodKind parse_method(const std::string& s);
const char* method_name(MethodKind k);

struct BinarizeMethod {
    MethodKind kind = MethodKind::enhanced_otsu;
    std::size_t block_size = 11;       ///< adaptive_gaussian, odd and >= 3
    double offset = 0.0;               ///< adaptive_gaussian constant C
    double denoise_sigma_mult = 1.0;   ///< paper_original
    bool enhanced_global = false;      ///< enhanced_otsu: one global threshold per pass instead of per row
};

/// Otsu threshold over a 256-bin histogram of the min-max scaled values.
/// Returns the upper edge of the last bin of the lower class, so that
/// (x > t) selects the upper class. Ties in between-class variance go to the
/// lower threshold. Constant input returns that constant. Empty -> DomainError.
double otsu_threshold(std::span<const double> values);

/// Index of the winning histogram split (0..254), or -1 for constant input.
int otsu_bin(std::span<const double> values);

/// Histogram bin (0..255) of v after scaling [lo, hi] onto [0, 256).
int otsu_histogram_bin(double v, double lo, double hi);

BoolImage threshold_global(const spectro::Spectrogram& s, double t);

/// Per-row Otsu on the image OR per-row Otsu on the image rotated by 90
/// degrees (rotated back). The two passes pick up horizontal and vertical
/// structure respectively.
BoolImage enhanced_otsu(const spectro::Spectrogram& s, bool global = false);
BoolImage enhanced_otsu_horizontal(const spectro::Spectrogram& s);
BoolImage enhanced_otsu_vertical(const spectro::Spectrogram& s);

/// Values within denoise_sigma_mult * sigma of the mean are replaced by the
/// mean; a bit is set where the result exceeds the mean.
BoolImage paper_original(const spectro::Spectrogram& s, double denoise_sigma_mult = 1.0);

/// Global Otsu at full resolution OR global Otsu on the 2x2 mean-pooled image,
/// nearest-neighbour upsampled.
BoolImage multi_level(const spectro::Spectrogram& s);

/// x > gaussian-weighted local mean - offset; replicated borders.
BoolImage adaptive_gaussian(const spectro::Spectrogram& s, std::size_t block = 11, double offset = 0.0);

BoolImage booleanize(const spectro::Spectrogram& s, const BinarizeMethod& m);

}  // namespace jamguard::binarize
