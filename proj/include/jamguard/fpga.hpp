#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>

namespace jamguard::fpga {

enum class ProfileName { power, latency, accuracy };
const char* profile_name(ProfileName p);

/// Cycles spent per patch placement, as a (best, worst) pair. These are fits
/// to published throughput ranges, not derived from a hardware design.
struct CyclesModel {
    double min_cycles = 1.0;
    double max_cycles = 1.0;
};

struct FpgaProfile {
    ProfileName name = ProfileName::power;
    long clauses = 0;
    long lut_low = 0, lut_high = 0;
    double clock_hz = 100e6;
    double efficiency = 0.8;
    double samples_low = 0.0, samples_high = 0.0;
    CyclesModel cycles;
};

struct ProjectionParams {
    double clock_hz = 100e6;
    double efficiency = 0.8;
    long patches_per_sample = 8281;  ///< 100x100 image, 10x10 patch, stride 1
    long lut_per_clause_low = 30;
    long lut_per_clause_high = 60;
};

std::pair<long, long> project_luts(long clauses, long per_clause_low = 30, long per_clause_high = 60);

/// samples/s = clock * efficiency / (patches * cycles), evaluated at the
/// worst then best cycles count. Non-positive parameters -> DomainError.
std::pair<double, double> project_throughput(double clock_hz, double efficiency, long patches_per_sample,
                                             const CyclesModel& cycles);

/// Calibrated cycles-per-patch for each published profile.
CyclesModel calibrated_cycles(ProfileName p);
long profile_clauses(ProfileName p);

std::array<FpgaProfile, 3> emit_profiles(const ProjectionParams& prm = {});

inline constexpr const char* kProjectionNote = "literature-based projection only";

std::string format_profiles(const std::array<FpgaProfile, 3>& rows);
void write_profiles_csv(const std::array<FpgaProfile, 3>& rows, const std::filesystem::path& path);

}  // namespace jamguard::fpga
