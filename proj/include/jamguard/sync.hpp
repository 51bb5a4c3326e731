#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jamguard/common.hpp"

namespace jamguard::sync {

struct CfoEstimate {
    double freq_hz = 0.0;       ///< offset present in the capture; pass to correct_cfo
    double metric = 0.0;        ///< peak cross-correlation magnitude at freq_hz
    std::vector<double> grid;   ///< candidates searched
    std::ptrdiff_t peak_lag = 0;  ///< reference start position at the peak
};

struct TimingEstimate {
    std::size_t offset_samples = 0;
    std::vector<double> metric_curve;  ///< M(t) for t = 0 .. size-1
};

/// -7.5 kHz .. +7.5 kHz in 100 Hz steps (151 candidates).
std::vector<double> default_cfo_grid(double half_span_hz = 7500.0, double step_hz = 100.0);

/// Matched-filter CFO search. The reference is correlated against the capture
/// de-rotated by each candidate; the returned frequency maximizes the
/// correlation peak over all reference start positions in the capture. Ties
/// go to the smaller |f|.
///
/// Construct once and reuse across captures of the same length: the
/// frequency-shifted reference spectra are precomputed. Immutable after
/// construction, so one instance may be shared between threads.
class CfoSearcher {
public:
    CfoSearcher(std::span<const cplx> reference, std::vector<double> grid, double sample_rate,
                std::size_t capture_len);

    CfoEstimate estimate(const IQBuffer& iq) const;

    std::size_t capture_len() const noexcept { return capture_len_; }

private:
    std::vector<double> grid_;
    double sample_rate_;
    std::size_t capture_len_;
    std::size_t ref_len_;
    std::size_t fft_len_;
    std::vector<std::vector<cplx>> ref_spectra_;  // conj(FFT(reference * e^{+j2pi f n/fs})) per candidate
};

/// One-shot convenience over CfoSearcher. Empty grid -> DomainError.
CfoEstimate estimate_cfo(const IQBuffer& iq, const IQBuffer& reference, const std::vector<double>& grid);

/// samples[n] * e^{-j2pi f n / fs}.
IQBuffer correct_cfo(const IQBuffer& iq, double freq_hz);

enum class MetricNorm : std::uint8_t {
    second_window,  ///< R(t) = sum |y(t+m+lag)|^2, the classical Schmidl-Cox energy term
    symmetric,      ///< R(t) = (sum |y(t+m)|^2 + sum |y(t+m+lag)|^2) / 2, bounds M(t) to [0,1]
};

struct SchmidlCoxParams {
    std::size_t window = 72;  ///< L: number of products summed
    std::size_t lag = 72;     ///< distance between the correlated samples
    MetricNorm norm = MetricNorm::second_window;
};

/// M(t) = |P(t)|^2 / R(t)^2 with P(t) = sum_{m<L} y*(t+m) y(t+m+lag), for
/// t = 0 .. N - L - lag. Positions with R(t) = 0 get M(t) = 0. The argmax
/// (first maximum on ties) is the timing estimate. Computed with sliding sums.
TimingEstimate schmidl_cox(const IQBuffer& iq, const SchmidlCoxParams& p);

/// Literal form: lag = window = L, classical normalization.
TimingEstimate schmidl_cox(const IQBuffer& iq, std::size_t L);

/// Same as schmidl_cox but restricts the argmax to t in [lo, hi].
TimingEstimate schmidl_cox_in(const IQBuffer& iq, const SchmidlCoxParams& p, std::size_t lo, std::size_t hi);

/// The n_fft samples of the symbol starting at t_off, after its cp_len prefix.
IQBuffer extract_pss(const IQBuffer& iq, std::size_t t_off, std::size_t n_fft, std::size_t cp_len = 0);

/// Two-column CSV "t,M" of the metric curve.
void write_metric_csv(const TimingEstimate& est, const std::filesystem::path& path);

struct SyncConfig {
    int sector_id = 0;
    std::size_t fft_size = 1024;
    std::size_t cp_len = 72;
    double cfo_half_span_hz = 7500.0;
    double cfo_step_hz = 100.0;
    /// Timing refinement: Schmidl-Cox over the CP (lag = fft_size, window =
    /// cp_len, symmetric normalization), searched within +/- refine_radius of
    /// the matched-filter peak. refine_radius = 0 searches the whole capture.
    std::size_t refine_radius = 72;
};

struct SyncResult {
    CfoEstimate cfo;
    std::size_t t_off = 0;
    IQBuffer corrected;
};

/// CFO search, compensation, then CP-based timing.
class Synchronizer {
public:
    Synchronizer(const SyncConfig& cfg, double sample_rate, std::size_t capture_len);
    SyncResult run(const IQBuffer& iq) const;

    const SyncConfig& config() const noexcept { return cfg_; }

private:
    SyncConfig cfg_;
    CfoSearcher searcher_;
};

/// Locally generated PSS waveform (with CP) used as the correlation reference.
IQBuffer pss_reference(int sector_id, std::size_t fft_size, std::size_t cp_len, double sample_rate);

}  // namespace jamguard::sync
