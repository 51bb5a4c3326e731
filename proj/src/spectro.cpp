#include "jamguard/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "jamguard/dft.hpp"

namespace jamguard::spectro {

Window parse_window(const std::string& s) {
    if (s == "hann") return Window::hann;
    if (s == "rectangular" || s == "rect") return Window::rectangular;
    throw DomainError("unknown window '" + s + "'");
}

NormMode parse_norm(const std::string& s) {
    if (s == "none") return NormMode::none;
    if (s == "minmax") return NormMode::minmax;
    if (s == "zscore") return NormMode::zscore;
    if (s == "log_minmax") return NormMode::log_minmax;
    throw DomainError("unknown normalization '" + s + "'");
}

const char* window_name(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

const char* norm_name(NormMode m) {
    switch (m) {
        case NormMode::none: return "none";
        case NormMode::minmax: return "minmax";
        case NormMode::zscore: return "zscore";
        case NormMode::log_minmax: return "log_minmax";
    }
    return "?";
}

std::size_t default_hop(std::size_t len, std::size_t fft_size) {
    if (len <= fft_size) return 1;
    return std::max<std::size_t>(1, (len - fft_size) / 99);
}

Spectrogram stft(const IQBuffer& iq, std::size_t fft_size, std::size_t hop, Window window) {
    if (fft_size == 0) throw DomainError("fft_size must be >= 1");
    if (hop == 0) throw DomainError("hop must be >= 1");
    if (iq.size() < fft_size)
        throw DomainError("capture of " + std::to_string(iq.size()) + " samples is shorter than one frame of " +
                          std::to_string(fft_size));
    const std::size_t frames = (iq.size() - fft_size) / hop + 1;
    std::vector<double> w(fft_size, 1.0);
    if (window == Window::hann)
        for (std::size_t n = 0; n < fft_size; ++n)
            w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) / static_cast<double>(fft_size));

    Spectrogram out(fft_size, frames);
    std::vector<cplx> buf(fft_size);
    const std::size_t half = fft_size / 2;
    for (std::size_t t = 0; t < frames; ++t) {
        const std::size_t start = t * hop;
        for (std::size_t n = 0; n < fft_size; ++n) buf[n] = iq.samples[start + n] * w[n];
        dft::forward(buf);
        for (std::size_t r = 0; r < fft_size; ++r) out.at(r, t) = std::abs(buf[(r + half) % fft_size]);
    }
    return out;
}

Spectrogram crop_center_rows(const Spectrogram& s, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("crop fraction must be in (0, 1]");
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(s.height) * fraction)));
    if (keep >= s.height) return s;
    const std::size_t first = (s.height - keep) / 2;
    Spectrogram out(keep, s.width);
    std::copy(s.values.begin() + static_cast<std::ptrdiff_t>(first * s.width),
              s.values.begin() + static_cast<std::ptrdiff_t>((first + keep) * s.width), out.values.begin());
    return out;
}

Spectrogram resize_square(const Spectrogram& s, std::size_t side) {
    if (side == 0) throw DomainError("side must be >= 1");
    if (s.height < side || s.width < side)
        throw DomainError("resize_square only downsizes: input " + std::to_string(s.height) + "x" +
                          std::to_string(s.width) + " is smaller than " + std::to_string(side));
    if (s.height == side && s.width == side) return s;
    Spectrogram out(side, side);
    for (std::size_t i = 0; i < side; ++i) {
        const std::size_t r0 = i * s.height / side, r1 = (i + 1) * s.height / side;
        for (std::size_t j = 0; j < side; ++j) {
            const std::size_t c0 = j * s.width / side, c1 = (j + 1) * s.width / side;
            double acc = 0.0;
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) acc += s.at(r, c);
            out.at(i, j) = acc / static_cast<double>((r1 - r0) * (c1 - c0));
        }
    }
    return out;
}

namespace {

Spectrogram minmax(Spectrogram s) {
    if (s.values.empty()) return s;
    const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        std::fill(s.values.begin(), s.values.end(), 0.0);
        return s;
    }
    const double inv = 1.0 / (hi - lo);
    for (auto& v : s.values) v = (v - lo) * inv;
    return s;
}

}  // namespace

Spectrogram normalize(const Spectrogram& s, NormMode mode) {
    for (double v : s.values)
        if (!std::isfinite(v)) throw DomainError("normalize: non-finite value");
    switch (mode) {
        case NormMode::none: return s;
        case NormMode::minmax: return minmax(s);
        case NormMode::log_minmax: {
            Spectrogram t = s;
            for (auto& v : t.values) v = std::log1p(std::max(v, 0.0));
            return minmax(std::move(t));
        }
        case NormMode::zscore: {
            Spectrogram t = s;
            if (t.values.empty()) return t;
            const double n = static_cast<double>(t.values.size());
            double mean = 0.0;
            for (double v : t.values) mean += v;
            mean /= n;
            double var = 0.0;
            for (double v : t.values) var += (v - mean) * (v - mean);
            var /= n;
            const auto [lo, hi] = std::minmax_element(t.values.begin(), t.values.end());
            if (!(var > 0.0) || *lo == *hi) {
                std::fill(t.values.begin(), t.values.end(), 0.0);
                return t;
            }
            const double inv = 1.0 / std::sqrt(var);
            for (auto& v : t.values) v = (v - mean) * inv;
            return t;
        }
    }
    throw DomainError("unknown normalization mode");
}

void write_pgm(const Spectrogram& s, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    const auto scaled = minmax(s);
    f << "P5\n" << s.width << ' ' << s.height << "\n255\n";
    for (double v : scaled.values) {
        const auto b = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        f.put(static_cast<char>(b));
    }
    if (!f) throw IoError("write failed: " + path.string());
}

void write_csv(const Spectrogram& s, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    for (std::size_t r = 0; r < s.height; ++r) {
        for (std::size_t c = 0; c < s.width; ++c) f << (c ? "," : "") << s.at(r, c);
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + path.string());
}

double pixel_bandwidth_hz(double sample_rate, std::size_t side, double crop_fraction) {
    return sample_rate * crop_fraction / static_cast<double>(side);
}

Spectrogram capture_image(const IQBuffer& iq, std::size_t t_off, const SpectroConfig& cfg) {
    IQBuffer seg;
    seg.sample_rate = iq.sample_rate;
    seg.center_freq = iq.center_freq;
    seg.samples.assign(cfg.segment_len, cplx{});
    for (std::size_t n = 0; n < cfg.segment_len && t_off + n < iq.size(); ++n) seg.samples[n] = iq.samples[t_off + n];
    const std::size_t hop = cfg.hop ? cfg.hop : default_hop(cfg.segment_len, cfg.fft_size);
    auto spec = stft(seg, cfg.fft_size, hop, cfg.window);
    if (cfg.crop_fraction < 1.0) spec = crop_center_rows(spec, cfg.crop_fraction);
    return normalize(resize_square(spec, cfg.side), cfg.norm);
}

}  // namespace jamguard::spectro
