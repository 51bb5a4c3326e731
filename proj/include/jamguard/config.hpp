#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jamguard/ctm.hpp"
#include "jamguard/fpga.hpp"
#include "jamguard/pipeline.hpp"
#include "jamguard/signal.hpp"

namespace jamguard::config {

/// Unknown key, malformed value or an invariant broken by the combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::uint64_t seed = 7;  ///< master seed; copied into synth.seed and ctm.seed by resolve()
    signal::SynthConfig synth;
    pipeline::PreprocessConfig pre;
    ctm::CtmConfig ctm;
    std::size_t folds = 5;
    fpga::ProjectionParams fpga;
};

/// Every settable key, in file order.
std::vector<std::string> keys();

void set(RunConfig& c, std::string_view key, std::string_view value);
std::string get(const RunConfig& c, std::string_view key);

/// Applies "key=value" lines. '#' starts a comment line. A key may appear
/// once per text. Errors name the source and line.
void apply_text(RunConfig& c, std::string_view text, std::string_view source = "<text>");
void apply_file(RunConfig& c, const std::filesystem::path& path);
/// "key=value" from the command line.
void apply_assignment(RunConfig& c, std::string_view assignment);

/// Propagates the master seed and checks cross-field invariants.
void resolve(RunConfig& c);

/// Every key with its value; apply_text(format(c)) reproduces c.
std::string format(const RunConfig& c);

inline constexpr const char* kResolvedName = "config.resolved.txt";

}  // namespace jamguard::config
