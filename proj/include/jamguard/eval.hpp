#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "jamguard/ctm.hpp"

namespace jamguard::eval {

/// Positive class is "jammed".
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    void add(Label truth, Label predicted) noexcept;
    bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted);

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool operator==(const Metrics&) const = default;
};

/// Zero denominators give 0. Empty matrix -> DomainError.
Metrics metrics(const ConfusionMatrix& cm);

/// Stratified k folds. Each label's indices are shuffled with a seed-derived
/// generator and dealt round-robin, the fold pointer carrying over from one
/// label to the next, so fold sizes differ by at most one. Indices within a
/// fold are ascending.
std::vector<std::vector<std::size_t>> kfold_split(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

struct FoldResult {
    ConfusionMatrix cm;
    Metrics m;
    double train_s = 0.0;
    double infer_s = 0.0;
    std::size_t model_bytes = 0;
};

struct CvReport {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<FoldResult> folds;
    Metrics mean;
    Metrics stddev;  ///< sample standard deviation (n - 1) over folds
    std::vector<Label> predictions;  ///< out-of-fold prediction per sample
    double train_s = 0.0;
    double infer_s = 0.0;
    double samples_per_s = 0.0;
    std::size_t model_bytes = 0;
    std::size_t workspace_bytes = 0;
};

/// Trains on k-1 folds and evaluates on the held-out one, for every fold.
/// Fold f trains with seed derive_seed(cfg.seed, {f}).
CvReport cross_validate(std::span<const ctm::Sample> data, const ctm::CtmConfig& cfg, std::size_t k,
                        std::uint64_t seed);

struct Resources {
    double train_s = 0.0;
    double infer_s = 0.0;
    double samples_per_s = 0.0;
    std::size_t model_bytes = 0;
};

Resources measure_resources(const CvReport& r);

/// Peak resident set size of this process in bytes (0 if unavailable).
std::size_t peak_rss_bytes();

Metrics mean_of(std::span<const Metrics> ms);
/// Sample standard deviation; zero for fewer than two entries.
Metrics stddev_of(std::span<const Metrics> ms);

/// Aligned text table of per-fold metrics and mean +/- stddev, then timings.
std::string format_report(const CvReport& r);
/// Per-fold metrics and aggregates only, so the file is deterministic.
void write_report_csv(const CvReport& r, const std::filesystem::path& path);
void write_timing_csv(const CvReport& r, const std::filesystem::path& path);

/// Accuracy per group key, e.g. jammer gain. Writes "key,accuracy" rows in
/// ascending key order.
std::map<double, double> accuracy_by_key(std::span<const double> keys, std::span<const Label> truth,
                                         std::span<const Label> predicted);
void write_curve_csv(const std::map<double, double>& curve, const std::string& key_name,
                     const std::filesystem::path& path);

}  // namespace jamguard::eval
