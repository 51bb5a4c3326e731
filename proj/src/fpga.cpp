#include "jamguard/fpga.hpp"

#include <cstdio>
#include <fstream>

#include "jamguard/common.hpp"

namespace jamguard::fpga {

const char* profile_name(ProfileName p) {
    switch (p) {
        case ProfileName::power: return "Power";
        case ProfileName::latency: return "Latency";
        case ProfileName::accuracy: return "Accuracy";
    }
    return "?";
}

std::pair<long, long> project_luts(long clauses, long per_clause_low, long per_clause_high) {
    if (clauses < 1) throw DomainError("clauses must be >= 1");
    if (per_clause_low < 1 || per_clause_high < per_clause_low) throw DomainError("bad LUT-per-clause envelope");
    return {clauses * per_clause_low, clauses * per_clause_high};
}

std::pair<double, double> project_throughput(double clock_hz, double efficiency, long patches_per_sample,
                                             const CyclesModel& cycles) {
    if (!(clock_hz > 0.0)) throw DomainError("clock must be > 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw DomainError("efficiency must be in (0, 1]");
    if (patches_per_sample < 1) throw DomainError("patches_per_sample must be >= 1");
    if (!(cycles.min_cycles > 0.0) || cycles.max_cycles < cycles.min_cycles)
        throw DomainError("cycles model must satisfy 0 < min <= max");
    const double rate = clock_hz * efficiency / static_cast<double>(patches_per_sample);
    return {rate / cycles.max_cycles, rate / cycles.min_cycles};
}

CyclesModel calibrated_cycles(ProfileName p) {
    // Solved from 80 MHz effective clock and 8281 patches per sample so that
    // the results round to the published 1.0-2.5k, 2.0-4.6k and 1.1-2.5k.
    switch (p) {
        case ProfileName::power: return {3.86, 9.66};
        case ProfileName::latency: return {2.10, 4.83};
        case ProfileName::accuracy: return {3.86, 8.78};
    }
    throw DomainError("unknown profile");
}

long profile_clauses(ProfileName p) {
    switch (p) {
        case ProfileName::power: return 256;
        case ProfileName::latency: return 512;
        case ProfileName::accuracy: return 800;
    }
    throw DomainError("unknown profile");
}

std::array<FpgaProfile, 3> emit_profiles(const ProjectionParams& prm) {
    std::array<FpgaProfile, 3> rows;
    const ProfileName names[] = {ProfileName::power, ProfileName::latency, ProfileName::accuracy};
    for (std::size_t i = 0; i < 3; ++i) {
        auto& r = rows[i];
        r.name = names[i];
        r.clauses = profile_clauses(r.name);
        std::tie(r.lut_low, r.lut_high) = project_luts(r.clauses, prm.lut_per_clause_low, prm.lut_per_clause_high);
        r.clock_hz = prm.clock_hz;
        r.efficiency = prm.efficiency;
        r.cycles = calibrated_cycles(r.name);
        std::tie(r.samples_low, r.samples_high) =
            project_throughput(prm.clock_hz, prm.efficiency, prm.patches_per_sample, r.cycles);
    }
    return rows;
}

std::string format_profiles(const std::array<FpgaProfile, 3>& rows) {
    std::string out = std::string("Projected CTM inference footprints (") + kProjectionNote + ")\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %8s %14s %14s %14s\n", "profile", "clauses", "LUTs", "samples/s",
                  "cycles/patch");
    out += buf;
    for (const auto& r : rows) {
        char luts[48], rate[48], cyc[48];
        std::snprintf(luts, sizeof luts, "%ld-%ld", r.lut_low, r.lut_high);
        std::snprintf(rate, sizeof rate, "%.1fk-%.1fk", r.samples_low / 1000.0, r.samples_high / 1000.0);
        std::snprintf(cyc, sizeof cyc, "%.2f-%.2f", r.cycles.min_cycles, r.cycles.max_cycles);
        std::snprintf(buf, sizeof buf, "%-10s %8ld %14s %14s %14s\n", profile_name(r.name), r.clauses, luts, rate, cyc);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "clock %.0f MHz, efficiency %.0f%%, stride 1; no measurements\n",
                  rows[0].clock_hz / 1e6, rows[0].efficiency * 100.0);
    out += buf;
    return out;
}

void write_profiles_csv(const std::array<FpgaProfile, 3>& rows, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    f << "profile,clauses,lut_low,lut_high,clock_hz,efficiency,cycles_min,cycles_max,samples_low,samples_high,note\n";
    for (const auto& r : rows)
        f << profile_name(r.name) << ',' << r.clauses << ',' << r.lut_low << ',' << r.lut_high << ',' << r.clock_hz
          << ',' << r.efficiency << ',' << r.cycles.min_cycles << ',' << r.cycles.max_cycles << ',' << r.samples_low
          << ',' << r.samples_high << ',' << kProjectionNote << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace jamguard::fpga
