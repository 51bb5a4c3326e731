#include "jamguard/config.hpp"

#include <functional>
#include <set>

#include "jamguard/io.hpp"

namespace jamguard::config {

namespace {

using Getter = std::function<std::string(const RunConfig&)>;
using Setter = std::function<void(RunConfig&, std::string_view)>;

struct Entry {
    std::string key;
    Getter get;
    Setter set;
};

std::string fmt(double v) { return io::format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

void parse(std::string_view s, double& out) { out = io::parse_double(s, "value"); }
void parse(std::string_view s, bool& out) {
    if (s == "true" || s == "1") out = true;
    else if (s == "false" || s == "0") out = false;
    else throw DomainError("expected true or false, got '" + std::string(s) + "'");
}
template <class I>
void parse_integral(std::string_view s, I& out) {
    const long long v = io::parse_int(s, "value");
    if constexpr (std::is_unsigned_v<I>)
        if (v < 0) throw DomainError("expected a non-negative integer, got '" + std::string(s) + "'");
    out = static_cast<I>(v);
}
void parse(std::string_view s, std::size_t& out) { parse_integral(s, out); }
void parse(std::string_view s, int& out) { parse_integral(s, out); }
void parse(std::string_view s, long& out) { parse_integral(s, out); }

template <class T>
Entry field(std::string key, T RunConfig::*outer) {
    return {std::move(key), [outer](const RunConfig& c) { return fmt(c.*outer); },
            [outer](RunConfig& c, std::string_view v) { parse(v, c.*outer); }};
}

template <class S, class T>
Entry field(std::string key, S RunConfig::*outer, T S::*inner) {
    return {std::move(key), [outer, inner](const RunConfig& c) { return fmt(c.*outer.*inner); },
            [outer, inner](RunConfig& c, std::string_view v) { parse(v, c.*outer.*inner); }};
}

template <class S, class T>
Entry pre_field(std::string key, S pipeline::PreprocessConfig::*mid, T S::*inner) {
    return {std::move(key), [mid, inner](const RunConfig& c) { return fmt(c.pre.*mid.*inner); },
            [mid, inner](RunConfig& c, std::string_view v) { parse(v, c.pre.*mid.*inner); }};
}

std::string kinds_to_string(const std::vector<signal::JammerKind>& ks) {
    std::string s;
    for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + std::string(signal::jammer_kind_name(ks[i]));
    return s;
}

std::vector<signal::JammerKind> kinds_from_string(std::string_view s) {
    std::vector<signal::JammerKind> out;
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(signal::parse_jammer_kind(std::string(s.substr(0, comma))));
        s = comma == std::string_view::npos ? std::string_view{} : s.substr(comma + 1);
    }
    if (out.empty()) throw DomainError("at least one jammer kind is required");
    return out;
}

const std::vector<Entry>& registry() {
    using signal::SynthConfig;
    using sync::SyncConfig;
    using spectro::SpectroConfig;
    using binarize::BinarizeMethod;
    using ctm::CtmConfig;
    using fpga::ProjectionParams;
    using PC = pipeline::PreprocessConfig;
    static const std::vector<Entry> r = [] {
        std::vector<Entry> e;
        e.push_back(field("seed", &RunConfig::seed));

        e.push_back(field("synth.n_pure", &RunConfig::synth, &SynthConfig::n_pure));
        e.push_back(field("synth.n_jam", &RunConfig::synth, &SynthConfig::n_jam));
        e.push_back(field("synth.sample_rate", &RunConfig::synth, &SynthConfig::sample_rate));
        e.push_back(field("synth.center_freq", &RunConfig::synth, &SynthConfig::center_freq));
        e.push_back(field("synth.fft_size", &RunConfig::synth, &SynthConfig::fft_size));
        e.push_back(field("synth.cp_len", &RunConfig::synth, &SynthConfig::cp_len));
        e.push_back(field("synth.capture_len", &RunConfig::synth, &SynthConfig::capture_len));
        e.push_back(field("synth.sector_id", &RunConfig::synth, &SynthConfig::sector_id));
        e.push_back(field("synth.snr_db_min", &RunConfig::synth, &SynthConfig::snr_db_min));
        e.push_back(field("synth.snr_db_max", &RunConfig::synth, &SynthConfig::snr_db_max));
        e.push_back(field("synth.cfo_max_hz", &RunConfig::synth, &SynthConfig::cfo_max_hz));
        e.push_back(field("synth.ssb_offset_min", &RunConfig::synth, &SynthConfig::ssb_offset_min));
        e.push_back(field("synth.ssb_offset_max", &RunConfig::synth, &SynthConfig::ssb_offset_max));
        e.push_back(field("synth.multipath_taps", &RunConfig::synth, &SynthConfig::multipath_taps));
        e.push_back({"synth.jammer_kinds", [](const RunConfig& c) { return kinds_to_string(c.synth.jammer_kinds); },
                     [](RunConfig& c, std::string_view v) { c.synth.jammer_kinds = kinds_from_string(v); }});
        e.push_back(field("synth.gain_min_db", &RunConfig::synth, &SynthConfig::gain_min_db));
        e.push_back(field("synth.gain_max_db", &RunConfig::synth, &SynthConfig::gain_max_db));
        e.push_back(field("synth.gain_step_db", &RunConfig::synth, &SynthConfig::gain_step_db));
        e.push_back(field("synth.jammer_link_offset_db", &RunConfig::synth, &SynthConfig::jammer_link_offset_db));
        e.push_back(field("synth.tone_offset_max_hz", &RunConfig::synth, &SynthConfig::tone_offset_max_hz));

        e.push_back(pre_field("sync.sector_id", &PC::sync, &SyncConfig::sector_id));
        e.push_back(pre_field("sync.fft_size", &PC::sync, &SyncConfig::fft_size));
        e.push_back(pre_field("sync.cp_len", &PC::sync, &SyncConfig::cp_len));
        e.push_back(pre_field("sync.cfo_half_span_hz", &PC::sync, &SyncConfig::cfo_half_span_hz));
        e.push_back(pre_field("sync.cfo_step_hz", &PC::sync, &SyncConfig::cfo_step_hz));
        e.push_back(pre_field("sync.refine_radius", &PC::sync, &SyncConfig::refine_radius));

        e.push_back(pre_field("spectro.fft_size", &PC::spectro, &SpectroConfig::fft_size));
        e.push_back(pre_field("spectro.hop", &PC::spectro, &SpectroConfig::hop));
        e.push_back({"spectro.window", [](const RunConfig& c) { return std::string(spectro::window_name(c.pre.spectro.window)); },
                     [](RunConfig& c, std::string_view v) { c.pre.spectro.window = spectro::parse_window(std::string(v)); }});
        e.push_back(pre_field("spectro.segment_len", &PC::spectro, &SpectroConfig::segment_len));
        e.push_back(pre_field("spectro.crop_fraction", &PC::spectro, &SpectroConfig::crop_fraction));
        e.push_back(pre_field("spectro.side", &PC::spectro, &SpectroConfig::side));
        e.push_back({"spectro.norm", [](const RunConfig& c) { return std::string(spectro::norm_name(c.pre.spectro.norm)); },
                     [](RunConfig& c, std::string_view v) { c.pre.spectro.norm = spectro::parse_norm(std::string(v)); }});

        e.push_back({"binarize.method", [](const RunConfig& c) { return std::string(binarize::method_name(c.pre.method.kind)); },
                     [](RunConfig& c, std::string_view v) { c.pre.method.kind = binarize::parse_method(std::string(v)); }});
        e.push_back(pre_field("binarize.block_size", &PC::method, &BinarizeMethod::block_size));
        e.push_back(pre_field("binarize.offset", &PC::method, &BinarizeMethod::offset));
        e.push_back(pre_field("binarize.denoise_sigma_mult", &PC::method, &BinarizeMethod::denoise_sigma_mult));
        e.push_back(pre_field("binarize.enhanced_global", &PC::method, &BinarizeMethod::enhanced_global));

        e.push_back(field("ctm.n_clauses", &RunConfig::ctm, &CtmConfig::n_clauses));
        e.push_back(field("ctm.T", &RunConfig::ctm, &CtmConfig::T));
        e.push_back(field("ctm.s", &RunConfig::ctm, &CtmConfig::s));
        e.push_back(field("ctm.patch_h", &RunConfig::ctm, &CtmConfig::patch_h));
        e.push_back(field("ctm.patch_w", &RunConfig::ctm, &CtmConfig::patch_w));
        e.push_back(field("ctm.max_included_literals", &RunConfig::ctm, &CtmConfig::max_included_literals));
        e.push_back(field("ctm.n_states", &RunConfig::ctm, &CtmConfig::n_states));
        e.push_back(field("ctm.epochs", &RunConfig::ctm, &CtmConfig::epochs));
        e.push_back(field("ctm.boost_true_positive", &RunConfig::ctm, &CtmConfig::boost_true_positive));

        e.push_back(field("eval.folds", &RunConfig::folds));

        e.push_back(field("fpga.clock_hz", &RunConfig::fpga, &ProjectionParams::clock_hz));
        e.push_back(field("fpga.efficiency", &RunConfig::fpga, &ProjectionParams::efficiency));
        e.push_back(field("fpga.patches_per_sample", &RunConfig::fpga, &ProjectionParams::patches_per_sample));
        e.push_back(field("fpga.lut_per_clause_low", &RunConfig::fpga, &ProjectionParams::lut_per_clause_low));
        e.push_back(field("fpga.lut_per_clause_high", &RunConfig::fpga, &ProjectionParams::lut_per_clause_high));
        return e;
    }();
    return r;
}

const Entry& lookup(std::string_view key) {
    for (const auto& e : registry())
        if (e.key == key) return e;
    throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> keys() {
    std::vector<std::string> out;
    for (const auto& e : registry()) out.push_back(e.key);
    return out;
}

void set(RunConfig& c, std::string_view key, std::string_view value) {
    const auto& e = lookup(key);
    try {
        e.set(c, trim(value));
    } catch (const DomainError& ex) {
        throw ConfigError(std::string(key) + ": " + ex.what());
    }
}

std::string get(const RunConfig& c, std::string_view key) { return lookup(key).get(c); }

void apply_assignment(RunConfig& c, std::string_view a) {
    const auto eq = a.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(a) + "'");
    set(c, trim(a.substr(0, eq)), a.substr(eq + 1));
}

void apply_text(RunConfig& c, std::string_view text, std::string_view source) {
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
        const auto key = trim(line.substr(0, eq));
        if (!seen.emplace(key).second) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        try {
            set(c, key, line.substr(eq + 1));
        } catch (const ConfigError& ex) {
            throw ConfigError(where + ex.what());
        }
    }
}

void apply_file(RunConfig& c, const std::filesystem::path& path) {
    apply_text(c, io::read_text(path), path.string());
}

void resolve(RunConfig& c) {
    c.synth.seed = c.seed;
    c.ctm.seed = c.seed;
    try {
        c.ctm.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const auto& m = c.pre.method;
    if (m.block_size < 3 || m.block_size % 2 == 0) throw ConfigError("binarize.block_size must be odd and >= 3");
    if (c.folds < 2) throw ConfigError("eval.folds must be >= 2");
    const auto& sp = c.pre.spectro;
    if (!(sp.crop_fraction > 0.0 && sp.crop_fraction <= 1.0)) throw ConfigError("spectro.crop_fraction must be in (0, 1]");
    if (sp.side == 0 || sp.fft_size == 0 || sp.segment_len < sp.fft_size)
        throw ConfigError("spectro: need side >= 1 and segment_len >= fft_size >= 1");
    if (c.ctm.patch_h > sp.side || c.ctm.patch_w > sp.side) throw ConfigError("ctm patch does not fit the image side");
    const auto& s = c.synth;
    if (!(s.sample_rate > 0.0)) throw ConfigError("synth.sample_rate must be > 0");
    if (s.snr_db_min > s.snr_db_max) throw ConfigError("synth.snr_db_min exceeds synth.snr_db_max");
    if (s.gain_min_db > s.gain_max_db || !(s.gain_step_db > 0.0))
        throw ConfigError("synth gain sweep needs gain_min_db <= gain_max_db and gain_step_db > 0");
    if (c.pre.sync.cfo_step_hz <= 0.0 || c.pre.sync.cfo_half_span_hz < 0.0)
        throw ConfigError("sync CFO grid needs cfo_step_hz > 0 and cfo_half_span_hz >= 0");
}

std::string format(const RunConfig& c) {
    std::string out = "# jamguard resolved configuration\n";
    for (const auto& e : registry()) out += e.key + "=" + e.get(c) + "\n";
    return out;
}

}  // namespace jamguard::config
