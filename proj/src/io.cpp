#include "jamguard/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace jamguard::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool to_double(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_row(std::string_view line, double& i, double& q) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) return false;
    return to_double(line.substr(0, comma), i) && to_double(line.substr(comma + 1), q);
}

}  // namespace

double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    if (!to_double(s, v)) throw DomainError(std::string(what) + ": not a finite number: '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, std::string_view what) {
    s = trim(s);
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw DomainError(std::string(what) + ": not an integer: '" + std::string(s) + "'");
    return v;
}

IQBuffer parse_iq_csv(std::string_view text, double sample_rate, double center_freq) {
    IQBuffer iq;
    iq.sample_rate = sample_rate;
    iq.center_freq = center_freq;
    std::size_t line_no = 0;
    bool seen_first = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        double i = 0.0, q = 0.0;
        if (parse_row(line, i, q)) {
            iq.samples.emplace_back(i, q);
        } else if (!seen_first) {
            // header
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": expected two numeric columns I,Q, got '" +
                                  std::string(line) + "'",
                              line_no);
        }
        seen_first = true;
    }
    if (iq.samples.empty()) throw FormatError("no samples", line_no);
    return iq;
}

IQBuffer read_iq_csv(const fs::path& path, double sample_rate, double center_freq) {
    const auto text = read_text(path);
    try {
        return parse_iq_csv(text, sample_rate, center_freq);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

void write_iq_csv(const IQBuffer& iq, const fs::path& path) {
    std::string out = "I,Q\n";
    out.reserve(iq.size() * 44 + 4);
    for (const auto& s : iq.samples) {
        out += format_double(s.real());
        out += ',';
        out += format_double(s.imag());
        out += '\n';
    }
    write_text(out, path);
}

const std::string& KvTable::meta_at(const std::string& key) const {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DomainError("missing metadata key '" + key + "'");
    return it->second;
}

std::string format_kv_table(const KvTable& t, std::string_view title) {
    std::ostringstream os;
    if (!title.empty()) os << "# " << title << '\n';
    for (const auto& [k, v] : t.meta) os << k << '=' << v << '\n';
    os << "[records]\n";
    for (const auto& r : t.records) {
        bool first = true;
        for (const auto& [k, v] : r) {
            os << (first ? "" : " ") << k << '=' << v;
            first = false;
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::pair<std::string, std::string> split_kv(std::string_view tok, std::size_t line_no) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw FormatError("line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(tok) + "'",
                          line_no);
    return {std::string(trim(tok.substr(0, eq))), std::string(trim(tok.substr(eq + 1)))};
}

}  // namespace

KvTable parse_kv_table(std::string_view text) {
    KvTable t;
    bool in_records = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (line == "[records]") {
            in_records = true;
            continue;
        }
        if (!in_records) {
            auto [k, v] = split_kv(line, line_no);
            if (!t.meta.emplace(k, v).second)
                throw FormatError("line " + std::to_string(line_no) + ": duplicate key '" + k + "'", line_no);
            continue;
        }
        KeyValues rec;
        std::string_view rest = line;
        while (!rest.empty()) {
            const auto sp = rest.find_first_of(" \t");
            const auto tok = rest.substr(0, sp);
            rest = sp == std::string_view::npos ? std::string_view{} : trim(rest.substr(sp + 1));
            if (tok.empty()) continue;
            auto [k, v] = split_kv(tok, line_no);
            if (!rec.emplace(k, v).second)
                throw FormatError("line " + std::to_string(line_no) + ": duplicate key '" + k + "'", line_no);
        }
        t.records.push_back(std::move(rec));
    }
    return t;
}

void write_kv_table(const KvTable& t, std::string_view title, const fs::path& path) {
    write_text(format_kv_table(t, title), path);
}

KvTable read_kv_table(const fs::path& path) {
    try {
        return parse_kv_table(read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

bool non_empty_dir(const fs::path& dir) {
    std::error_code ec;
    return fs::is_directory(dir, ec) && !fs::is_empty(dir, ec);
}

}  // namespace jamguard::io
