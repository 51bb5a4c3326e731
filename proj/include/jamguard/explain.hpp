#pragma once

#include <filesystem>
#include <vector>

#include "jamguard/ctm.hpp"

namespace jamguard::explain {

/// Signed per-pixel contribution map. Positive values point toward
/// "jammed", negative toward "pure".
struct Heatmap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    bool operator==(const Heatmap&) const = default;
};

/// Signed weights of the coordinate literals, which have no pixel location.
/// row[i] belongs to the "patch row > i" literal, col[i] likewise.
struct CoordinateProfiles {
    std::vector<double> row;
    std::vector<double> col;
};

/// Integer mention counts before normalization.
struct MentionCounts {
    std::size_t height = 0, width = 0;
    std::vector<long long> pixels;
    std::vector<long long> row;
    std::vector<long long> col;
};

/// Each included patch literal of each clause adds polarity * class_sign
/// (+1 jammed bank, -1 pure bank) at every pixel that its patch offset
/// covers over all placements; negated literals subtract.
MentionCounts mention_counts(const ctm::CtmModel& model);

/// mention_counts scaled into [-1, 1] by the largest magnitude. An all-zero
/// count map stays zero.
Heatmap literal_heatmap(const ctm::CtmModel& model);
CoordinateProfiles coordinate_profiles(const ctm::CtmModel& model);

/// Writes <stem>.csv (signed values), <stem>_pos.pgm and <stem>_neg.pgm
/// (magnitude of the positive and negative parts, 0..255, black = 0).
void export_heatmap(const Heatmap& h, const std::filesystem::path& stem);
Heatmap read_heatmap_csv(const std::filesystem::path& path);
void export_profiles(const CoordinateProfiles& p, const std::filesystem::path& path);

/// Fraction of sum |v| that lies inside rows [r0, r1) x cols [c0, c1).
double mass_fraction(const Heatmap& h, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);

}  // namespace jamguard::explain
