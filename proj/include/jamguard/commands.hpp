#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "jamguard/config.hpp"
#include "jamguard/io.hpp"

namespace jamguard::commands {

namespace fs = std::filesystem;

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs fn and turns exceptions into exit codes, printing the message to err:
/// UsageError and ConfigError -> 1; IoError, FormatError, DomainError -> 2;
/// anything else -> 3.
int guarded(const std::function<int()>& fn, std::ostream& err);

/// Dataset directory layout: manifest.txt, iq/<index>.csv, config.resolved.txt.
inline constexpr const char* kManifest = "manifest.txt";
/// Image directory layout: index.txt, <index>.jgb, config.resolved.txt.
inline constexpr const char* kImageIndex = "index.txt";

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

/// Synthesizes the dataset described by cfg.synth into `out`.
int synth(const config::RunConfig& cfg, const fs::path& out, bool force, Streams s);

/// Ingests IQ CSVs listed in a sidecar table (meta: sample_rate, center_freq;
/// records: file, label, optional kind, gain_db, snr_db). Bad files are
/// reported with their line number and skipped; the exit code is then 2.
int import(const config::RunConfig& cfg, const fs::path& csv_dir, const fs::path& meta, const fs::path& out,
           bool force, Streams s);

/// sync -> spectrogram -> binarize for every record of a dataset. Records
/// whose IQ file cannot be read are skipped with a warning (exit code 2).
int preprocess(const config::RunConfig& cfg, const fs::path& data, const fs::path& out, bool force, Streams s);

/// Trains on every image of an image directory and saves the model. The
/// resolved configuration goes to <model>.config.txt.
int train(const config::RunConfig& cfg, const fs::path& images, const fs::path& model, bool force, Streams s);

/// k-fold cross-validation. Writes report.csv, predictions.csv,
/// accuracy_vs_gain.csv and config.resolved.txt, which are deterministic,
/// and timing.csv, which is not.
int cv(const config::RunConfig& cfg, const fs::path& images, const fs::path& out, bool force, Streams s);

/// heatmap.csv, heatmap_pos.pgm, heatmap_neg.pgm and profiles.csv.
int explain(const fs::path& model, const fs::path& out, bool force, Streams s);

/// Prints the projection table; with a non-empty `out`, also writes fpga.csv.
int fpga(const config::RunConfig& cfg, const fs::path& out, bool force, Streams s);

struct ImageSet {
    io::KvTable index;
    std::vector<ctm::Sample> samples;
};

/// Loads every image listed in an image directory's index.
ImageSet load_images(const fs::path& dir);

}  // namespace jamguard::commands
