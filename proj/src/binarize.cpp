#include "jamguard/binarize.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace jamguard::binarize {

using spectro::Spectrogram;

BoolImage::BoolImage(std::size_t height, std::size_t width)
    : height_(height), width_(width), wpr_((width + 63) / 64), words_(height * wpr_, 0) {}

std::size_t BoolImage::popcount() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

BoolImage BoolImage::operator|(const BoolImage& o) const {
    if (o.height_ != height_ || o.width_ != width_) throw DomainError("BoolImage OR: dimension mismatch");
    BoolImage out = *this;
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] |= o.words_[i];
    return out;
}

bool BoolImage::contains(const BoolImage& sub) const {
    if (sub.height_ != height_ || sub.width_ != width_) return false;
    for (std::size_t i = 0; i < words_.size(); ++i)
        if ((sub.words_[i] & ~words_[i]) != 0) return false;
    return true;
}

std::vector<std::uint8_t> serialize(const BoolImage& img) {
    const std::string header = "JGB1 " + std::to_string(img.height()) + " " + std::to_string(img.width()) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(header.size() + img.words().size() * 8);
    for (auto w : img.words())
        for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
    return out;
}

BoolImage deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), "JGB1 ", 5) != 0) throw FormatError("bad BoolImage magic", 0);
    std::size_t nl = 5;
    while (nl < bytes.size() && bytes[nl] != '\n') ++nl;
    if (nl >= bytes.size() || nl > 64) throw FormatError("unterminated BoolImage header", nl);
    std::istringstream hs(std::string(bytes.begin() + 5, bytes.begin() + static_cast<std::ptrdiff_t>(nl)));
    long long h = -1, w = -1;
    std::string rest;
    if (!(hs >> h >> w) || h <= 0 || w <= 0 || (hs >> rest)) throw FormatError("bad BoolImage dimensions", 5);
    BoolImage img(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
    const std::size_t body = nl + 1;
    const std::size_t need = img.words().size() * 8;
    if (bytes.size() - body != need)
        throw FormatError("BoolImage payload is " + std::to_string(bytes.size() - body) + " bytes, expected " +
                              std::to_string(need),
                          std::min(bytes.size(), body + need));
    auto words = img.words();
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= std::uint64_t{bytes[body + i * 8 + static_cast<std::size_t>(b)]} << (8 * b);
        words[i] = v;
    }
    // Padding bits must be zero for the canonical form.
    const std::size_t wpr = img.words_per_row();
    const std::size_t tail = img.width() % 64;
    if (tail != 0) {
        const std::uint64_t pad_mask = ~((std::uint64_t{1} << tail) - 1);
        for (std::size_t r = 0; r < img.height(); ++r)
            if (words[r * wpr + wpr - 1] & pad_mask)
                throw FormatError("non-zero padding bits in row " + std::to_string(r), body + (r * wpr + wpr - 1) * 8);
    }
    return img;
}

void save(const BoolImage& img, const std::filesystem::path& path) {
    const auto bytes = serialize(img);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

BoolImage load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

MethodKind parse_method(const std::string& s) {
    if (s == "enhanced_otsu") return MethodKind::enhanced_otsu;
    if (s == "paper_original") return MethodKind::paper_original;
    if (s == "multi_level") return MethodKind::multi_level;
    if (s == "adaptive_gaussian" || s == "adaptive") return MethodKind::adaptive_gaussian;
    throw DomainError("unknown binarization method '" + s + "'");
}

const char* method_name(MethodKind k) {
    switch (k) {
        case MethodKind::enhanced_otsu: return "enhanced_otsu";
        case MethodKind::paper_original: return "paper_original";
        case MethodKind::multi_level: return "multi_level";
        case MethodKind::adaptive_gaussian: return "adaptive_gaussian";
    }
    return "?";
}

int otsu_histogram_bin(double v, double lo, double hi) {
    const double u = (v - lo) / (hi - lo);
    const double b = std::floor(u * 256.0);
    return static_cast<int>(std::clamp(b, 0.0, 255.0));
}

namespace {

using u128 = unsigned __int128;

}  // namespace

int otsu_bin(std::span<const double> values) {
    if (values.empty()) throw DomainError("otsu_threshold: empty input");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return -1;

    std::array<std::uint64_t, 256> hist{};
    for (double v : values) ++hist[static_cast<std::size_t>(otsu_histogram_bin(v, lo, hi))];
    const std::uint64_t n = values.size();
    std::uint64_t s_total = 0;
    for (std::uint64_t i = 0; i < 256; ++i) s_total += i * hist[i];

    // Between-class variance is proportional to (n1*S0 - n0*S1)^2 / (n0*n1);
    // candidates are compared by cross-multiplication so ties are exact.
    const bool exact = n <= 65536;
    int best = 0;
    u128 best_num = 0, best_den = 1;
    long double best_ld = -1.0L;
    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 255; ++t) {
        n0 += hist[static_cast<std::size_t>(t)];
        s0 += static_cast<std::uint64_t>(t) * hist[static_cast<std::size_t>(t)];
        const std::uint64_t n1 = n - n0, s1 = s_total - s0;
        if (n0 == 0 || n1 == 0) continue;
        if (exact) {
            const auto a = static_cast<__int128>(n1) * s0 - static_cast<__int128>(n0) * s1;
            const u128 mag = static_cast<u128>(a < 0 ? -a : a);
            const u128 num = mag * mag;
            const u128 den = static_cast<u128>(n0) * n1;
            if (num * best_den > best_num * den) {
                best_num = num;
                best_den = den;
                best = t;
            }
        } else {
            const long double a = static_cast<long double>(n1) * s0 - static_cast<long double>(n0) * s1;
            const long double v = a * a / (static_cast<long double>(n0) * n1);
            if (v > best_ld) {
                best_ld = v;
                best = t;
            }
        }
    }
    return best;
}

double otsu_threshold(std::span<const double> values) {
    const int t = otsu_bin(values);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    if (t < 0) return *lo_it;
    return *lo_it + (static_cast<double>(t) + 1.0) * (*hi_it - *lo_it) / 256.0;
}

BoolImage threshold_global(const Spectrogram& s, double t) {
    BoolImage out(s.height, s.width);
    for (std::size_t r = 0; r < s.height; ++r)
        for (std::size_t c = 0; c < s.width; ++c)
            if (s.at(r, c) > t) out.set(r, c, true);
    return out;
}

BoolImage enhanced_otsu_horizontal(const Spectrogram& s) {
    BoolImage out(s.height, s.width);
    for (std::size_t r = 0; r < s.height; ++r) {
        const std::span<const double> row(s.values.data() + r * s.width, s.width);
        const double t = otsu_threshold(row);
        for (std::size_t c = 0; c < s.width; ++c)
            if (row[c] > t) out.set(r, c, true);
    }
    return out;
}

BoolImage enhanced_otsu_vertical(const Spectrogram& s) {
    // Rows of the 90-degree rotated image are the columns of the original.
    BoolImage out(s.height, s.width);
    std::vector<double> col(s.height);
    for (std::size_t c = 0; c < s.width; ++c) {
        for (std::size_t r = 0; r < s.height; ++r) col[r] = s.at(r, c);
        const double t = otsu_threshold(col);
        for (std::size_t r = 0; r < s.height; ++r)
            if (col[r] > t) out.set(r, c, true);
    }
    return out;
}

BoolImage enhanced_otsu(const Spectrogram& s, bool global) {
    if (s.values.empty()) throw DomainError("enhanced_otsu: empty image");
    if (global) {
        // A global threshold is the same on the rotated image, so both passes coincide.
        const double t = otsu_threshold(s.values);
        return threshold_global(s, t) | threshold_global(s, t);
    }
    return enhanced_otsu_horizontal(s) | enhanced_otsu_vertical(s);
}

BoolImage paper_original(const Spectrogram& s, double denoise_sigma_mult) {
    if (s.values.empty()) throw DomainError("paper_original: empty image");
    const double n = static_cast<double>(s.values.size());
    double mean = 0.0;
    for (double v : s.values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : s.values) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);
    const double band = denoise_sigma_mult * sigma;
    BoolImage out(s.height, s.width);
    for (std::size_t r = 0; r < s.height; ++r)
        for (std::size_t c = 0; c < s.width; ++c) {
            double v = s.at(r, c);
            if (std::abs(v - mean) < band) v = mean;
            if (v > mean) out.set(r, c, true);
        }
    return out;
}

BoolImage multi_level(const Spectrogram& s) {
    if (s.values.empty()) throw DomainError("multi_level: empty image");
    const BoolImage full = threshold_global(s, otsu_threshold(s.values));

    const std::size_t hh = (s.height + 1) / 2, hw = (s.width + 1) / 2;
    Spectrogram half(hh, hw);
    for (std::size_t i = 0; i < hh; ++i)
        for (std::size_t j = 0; j < hw; ++j) {
            double acc = 0.0;
            int cnt = 0;
            for (std::size_t r = 2 * i; r < std::min(2 * i + 2, s.height); ++r)
                for (std::size_t c = 2 * j; c < std::min(2 * j + 2, s.width); ++c) {
                    acc += s.at(r, c);
                    ++cnt;
                }
            half.at(i, j) = acc / cnt;
        }
    const double th = otsu_threshold(half.values);
    BoolImage up(s.height, s.width);
    for (std::size_t r = 0; r < s.height; ++r)
        for (std::size_t c = 0; c < s.width; ++c)
            if (half.at(r / 2, c / 2) > th) up.set(r, c, true);
    return full | up;
}

BoolImage adaptive_gaussian(const Spectrogram& s, std::size_t block, double offset) {
    if (block < 3 || block % 2 == 0)
        throw DomainError("adaptive_gaussian: block size must be odd and >= 3, got " + std::to_string(block));
    if (s.values.empty()) throw DomainError("adaptive_gaussian: empty image");
    // Same default sigma as OpenCV's getGaussianKernel for this size.
    const double sigma = 0.3 * ((static_cast<double>(block) - 1.0) * 0.5 - 1.0) + 0.8;
    const auto half = static_cast<std::ptrdiff_t>(block / 2);
    std::vector<double> k(block);
    double ksum = 0.0;
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + half)] = v;
        ksum += v;
    }
    for (auto& v : k) v /= ksum;

    const auto H = static_cast<std::ptrdiff_t>(s.height), W = static_cast<std::ptrdiff_t>(s.width);
    auto clampi = [](std::ptrdiff_t v, std::ptrdiff_t n) { return std::clamp<std::ptrdiff_t>(v, 0, n - 1); };
    Spectrogram tmp(s.height, s.width);
    for (std::ptrdiff_t r = 0; r < H; ++r)
        for (std::ptrdiff_t c = 0; c < W; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t i = -half; i <= half; ++i)
                acc += k[static_cast<std::size_t>(i + half)] *
                       s.at(static_cast<std::size_t>(r), static_cast<std::size_t>(clampi(c + i, W)));
            tmp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    BoolImage out(s.height, s.width);
    for (std::ptrdiff_t r = 0; r < H; ++r)
        for (std::ptrdiff_t c = 0; c < W; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t i = -half; i <= half; ++i)
                acc += k[static_cast<std::size_t>(i + half)] *
                       tmp.at(static_cast<std::size_t>(clampi(r + i, H)), static_cast<std::size_t>(c));
            const auto rr = static_cast<std::size_t>(r), cc = static_cast<std::size_t>(c);
            if (s.at(rr, cc) > acc - offset) out.set(rr, cc, true);
        }
    return out;
}

BoolImage booleanize(const Spectrogram& s, const BinarizeMethod& m) {
    switch (m.kind) {
        case MethodKind::enhanced_otsu: return enhanced_otsu(s, m.enhanced_global);
        case MethodKind::paper_original: return paper_original(s, m.denoise_sigma_mult);
        case MethodKind::multi_level: return multi_level(s);
        case MethodKind::adaptive_gaussian: return adaptive_gaussian(s, m.block_size, m.offset);
    }
    throw DomainError("unknown binarization method");
}

}  // namespace jamguard::binarize
