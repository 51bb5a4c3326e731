#include "jamguard/sync.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "jamguard/dft.hpp"
#include "jamguard/signal.hpp"

namespace jamguard::sync {

std::vector<double> default_cfo_grid(double half_span_hz, double step_hz) {
    if (!(step_hz > 0.0) || half_span_hz < 0.0) throw DomainError("bad CFO grid parameters");
    const auto n = static_cast<long>(std::floor(half_span_hz / step_hz + 1e-9));
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(2 * n + 1));
    for (long i = -n; i <= n; ++i) g.push_back(static_cast<double>(i) * step_hz);
    return g;
}

CfoSearcher::CfoSearcher(std::span<const cplx> reference, std::vector<double> grid, double sample_rate,
                         std::size_t capture_len)
    : grid_(std::move(grid)),
      sample_rate_(sample_rate),
      capture_len_(capture_len),
      ref_len_(reference.size()),
      fft_len_(dft::next_pow2(capture_len)) {
    if (grid_.empty()) throw DomainError("CFO grid is empty");
    if (reference.empty()) throw DomainError("CFO reference is empty");
    if (capture_len < reference.size()) throw DomainError("capture shorter than CFO reference");
    if (!(sample_rate > 0.0)) throw DomainError("sample_rate must be > 0");

    ref_spectra_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        std::vector<cplx> r(fft_len_);
        const double w = 2.0 * kPi * grid_[i] / sample_rate_;
        for (std::size_t n = 0; n < ref_len_; ++n) {
            const double ph = w * static_cast<double>(n);
            r[n] = reference[n] * cplx{std::cos(ph), std::sin(ph)};
        }
        dft::forward(r);
        for (auto& v : r) v = std::conj(v);
        ref_spectra_[i] = std::move(r);
    }
}

CfoEstimate CfoSearcher::estimate(const IQBuffer& iq) const {
    if (iq.size() != capture_len_)
        throw DomainError("capture length " + std::to_string(iq.size()) + " does not match searcher length " +
                          std::to_string(capture_len_));
    std::vector<cplx> y(fft_len_);
    std::copy(iq.samples.begin(), iq.samples.end(), y.begin());
    dft::forward(y);

    const std::size_t max_lag = capture_len_ - ref_len_;
    const double inv = 1.0 / static_cast<double>(fft_len_);
    CfoEstimate best;
    best.grid = grid_;
    best.metric = -1.0;
    std::vector<cplx> prod(fft_len_);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const auto& rs = ref_spectra_[i];
        for (std::size_t k = 0; k < fft_len_; ++k) prod[k] = y[k] * rs[k];
        dft::inverse(prod);
        double peak = -1.0;
        std::size_t peak_lag = 0;
        for (std::size_t t = 0; t <= max_lag; ++t) {
            const double m = std::abs(prod[t]) * inv;
            if (m > peak) {
                peak = m;
                peak_lag = t;
            }
        }
        const bool better = peak > best.metric ||
                            (peak == best.metric && std::abs(grid_[i]) < std::abs(best.freq_hz));
        if (better) {
            best.metric = peak;
            best.freq_hz = grid_[i];
            best.peak_lag = static_cast<std::ptrdiff_t>(peak_lag);
        }
    }
    return best;
}

CfoEstimate estimate_cfo(const IQBuffer& iq, const IQBuffer& reference, const std::vector<double>& grid) {
    CfoSearcher s(reference.samples, grid, iq.sample_rate, iq.size());
    return s.estimate(iq);
}

IQBuffer correct_cfo(const IQBuffer& iq, double freq_hz) {
    return signal::apply_frequency_offset(iq, -freq_hz);
}

namespace {

struct WindowSums {
    cplx p{};
    double e1 = 0.0;
    double e2 = 0.0;
    std::size_t nz1 = 0;
    std::size_t nz2 = 0;
};

WindowSums direct_sums(const std::vector<cplx>& y, std::size_t t, std::size_t L, std::size_t lag) {
    WindowSums s;
    for (std::size_t m = 0; m < L; ++m) {
        const cplx a = y[t + m];
        const cplx b = y[t + m + lag];
        s.p += std::conj(a) * b;
        s.e1 += std::norm(a);
        s.e2 += std::norm(b);
        s.nz1 += a != cplx{};
        s.nz2 += b != cplx{};
    }
    return s;
}

double metric_of(const WindowSums& s, MetricNorm norm) {
    const double p = (s.nz1 == 0 || s.nz2 == 0) ? 0.0 : std::norm(s.p);
    const double e1 = s.nz1 == 0 ? 0.0 : s.e1;
    const double e2 = s.nz2 == 0 ? 0.0 : s.e2;
    const double r = norm == MetricNorm::symmetric ? 0.5 * (e1 + e2) : e2;
    if (r <= 0.0) return 0.0;
    return p / (r * r);
}

constexpr std::size_t kReanchorEvery = 256;

}  // namespace

TimingEstimate schmidl_cox(const IQBuffer& iq, const SchmidlCoxParams& prm) {
    const std::size_t N = iq.size();
    const std::size_t L = prm.window;
    const std::size_t lag = prm.lag;
    if (L < 1 || lag < 1) throw DomainError("Schmidl-Cox window and lag must be >= 1");
    if (N <= L + lag)
        throw DomainError("capture of " + std::to_string(N) + " samples too short for window " +
                          std::to_string(L) + " and lag " + std::to_string(lag));
    const auto& y = iq.samples;
    const std::size_t T = N - L - lag + 1;
    TimingEstimate out;
    out.metric_curve.resize(T);

    WindowSums s;
    for (std::size_t t = 0; t < T; ++t) {
        if (t % kReanchorEvery == 0) {
            s = direct_sums(y, t, L, lag);
        } else {
            // Slide by one: drop m = -1 terms (at t-1), add m = L-1 terms.
            const cplx a0 = y[t - 1], b0 = y[t - 1 + lag];
            const cplx a1 = y[t + L - 1], b1 = y[t + L - 1 + lag];
            s.p += std::conj(a1) * b1 - std::conj(a0) * b0;
            s.e1 += std::norm(a1) - std::norm(a0);
            s.e2 += std::norm(b1) - std::norm(b0);
            s.nz1 += static_cast<std::size_t>(a1 != cplx{}) - static_cast<std::size_t>(a0 != cplx{});
            s.nz2 += static_cast<std::size_t>(b1 != cplx{}) - static_cast<std::size_t>(b0 != cplx{});
        }
        // Sliding energy can dip below zero by rounding; clamp only the copy used.
        WindowSums c = s;
        c.e1 = std::max(c.e1, 0.0);
        c.e2 = std::max(c.e2, 0.0);
        out.metric_curve[t] = metric_of(c, prm.norm);
    }
    const auto it = std::max_element(out.metric_curve.begin(), out.metric_curve.end());
    out.offset_samples = static_cast<std::size_t>(it - out.metric_curve.begin());
    return out;
}

TimingEstimate schmidl_cox(const IQBuffer& iq, std::size_t L) {
    return schmidl_cox(iq, SchmidlCoxParams{L, L, MetricNorm::second_window});
}

TimingEstimate schmidl_cox_in(const IQBuffer& iq, const SchmidlCoxParams& p, std::size_t lo, std::size_t hi) {
    auto est = schmidl_cox(iq, p);
    const std::size_t last = est.metric_curve.size() - 1;
    lo = std::min(lo, last);
    hi = std::min(hi, last);
    if (hi < lo) std::swap(lo, hi);
    const auto b = est.metric_curve.begin();
    const auto it = std::max_element(b + static_cast<std::ptrdiff_t>(lo), b + static_cast<std::ptrdiff_t>(hi) + 1);
    est.offset_samples = static_cast<std::size_t>(it - b);
    return est;
}

IQBuffer extract_pss(const IQBuffer& iq, std::size_t t_off, std::size_t n_fft, std::size_t cp_len) {
    if (t_off + cp_len + n_fft > iq.size())
        throw DomainError("PSS slice [" + std::to_string(t_off + cp_len) + ", " +
                          std::to_string(t_off + cp_len + n_fft) + ") exceeds capture length " +
                          std::to_string(iq.size()));
    IQBuffer out;
    out.sample_rate = iq.sample_rate;
    out.center_freq = iq.center_freq;
    const auto first = iq.samples.begin() + static_cast<std::ptrdiff_t>(t_off + cp_len);
    out.samples.assign(first, first + static_cast<std::ptrdiff_t>(n_fft));
    return out;
}

void write_metric_csv(const TimingEstimate& est, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "t,M\n";
    f.precision(17);
    for (std::size_t t = 0; t < est.metric_curve.size(); ++t) f << t << ',' << est.metric_curve[t] << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

IQBuffer pss_reference(int sector_id, std::size_t fft_size, std::size_t cp_len, double sample_rate) {
    return signal::ofdm_modulate(signal::map_ssb_grid(signal::gen_pss_symbols(sector_id)), fft_size, cp_len,
                                 sample_rate);
}

Synchronizer::Synchronizer(const SyncConfig& cfg, double sample_rate, std::size_t capture_len)
    : cfg_(cfg),
      searcher_(pss_reference(cfg.sector_id, cfg.fft_size, cfg.cp_len, sample_rate).samples,
                default_cfo_grid(cfg.cfo_half_span_hz, cfg.cfo_step_hz), sample_rate, capture_len) {}

SyncResult Synchronizer::run(const IQBuffer& iq) const {
    SyncResult r;
    r.cfo = searcher_.estimate(iq);
    r.corrected = correct_cfo(iq, r.cfo.freq_hz);
    const SchmidlCoxParams p{cfg_.cp_len, cfg_.fft_size, MetricNorm::symmetric};
    if (cfg_.refine_radius == 0) {
        r.t_off = schmidl_cox(r.corrected, p).offset_samples;
    } else {
        const auto c = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, r.cfo.peak_lag));
        const std::size_t lo = c > cfg_.refine_radius ? c - cfg_.refine_radius : 0;
        r.t_off = schmidl_cox_in(r.corrected, p, lo, c + cfg_.refine_radius).offset_samples;
    }
    return r;
}

}  // namespace jamguard::sync
