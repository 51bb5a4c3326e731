#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "jamguard/common.hpp"

namespace jamguard::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Two columns I,Q per row. A first line that does not parse as two numbers
/// is taken as a header. Blank lines are skipped. A bad row throws
/// FormatError whose offset is the 1-based line number.
IQBuffer read_iq_csv(const std::filesystem::path& path, double sample_rate, double center_freq);
IQBuffer parse_iq_csv(std::string_view text, double sample_rate, double center_freq);
void write_iq_csv(const IQBuffer& iq, const std::filesystem::path& path);

using KeyValues = std::map<std::string, std::string>;

/// Text table used for dataset manifests and image indexes:
///
///     # comment
///     key=value            (metadata, one per line)
///     [records]
///     key=value key=value  (one record per line, space separated)
///
/// Values must not contain whitespace or '='.
struct KvTable {
    KeyValues meta;
    std::vector<KeyValues> records;

    const std::string& meta_at(const std::string& key) const;
    bool operator==(const KvTable&) const = default;
};

std::string format_kv_table(const KvTable& t, std::string_view title);
/// FormatError offsets are 1-based line numbers.
KvTable parse_kv_table(std::string_view text);
void write_kv_table(const KvTable& t, std::string_view title, const std::filesystem::path& path);
KvTable read_kv_table(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

/// True if the directory exists and has at least one entry.
bool non_empty_dir(const std::filesystem::path& dir);

}  // namespace jamguard::io
