#include "jamguard/ctm.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <string>

#include "jamguard/parallel.hpp"
#include "jamguard/rng.hpp"

namespace jamguard::ctm {

void CtmConfig::validate() const {
    if (n_clauses < 2 || n_clauses % 2 != 0)
        throw DomainError("n_clauses must be even and >= 2, got " + std::to_string(n_clauses));
    if (T < 1) throw DomainError("T must be >= 1");
    if (!(s > 1.0)) throw DomainError("s must be > 1");
    if (patch_h < 1 || patch_w < 1) throw DomainError("patch dimensions must be >= 1");
    if (max_included_literals < 1) throw DomainError("max_included_literals must be >= 1");
    if (n_states < 1 || n_states > 32767) throw DomainError("n_states must be in [1, 32767]");
}

LiteralLayout::LiteralLayout(std::size_t ih, std::size_t iw, std::size_t ph, std::size_t pw)
    : image_h(ih), image_w(iw), patch_h(ph), patch_w(pw) {
    if (ph == 0 || pw == 0) throw DomainError("patch dimensions must be >= 1");
    if (ph > ih || pw > iw)
        throw DomainError("patch " + std::to_string(ph) + "x" + std::to_string(pw) + " does not fit image " +
                          std::to_string(ih) + "x" + std::to_string(iw));
}

std::size_t Clause::included_count() const noexcept {
    std::size_t n = 0;
    for (auto st : ta_state) n += st > n_states;
    return n;
}

std::vector<std::uint32_t> Clause::included() const {
    std::vector<std::uint32_t> out;
    for (std::size_t k = 0; k < ta_state.size(); ++k)
        if (ta_state[k] > n_states) out.push_back(static_cast<std::uint32_t>(k));
    return out;
}

CtmModel CtmModel::create(const CtmConfig& cfg, std::size_t image_h, std::size_t image_w) {
    cfg.validate();
    CtmModel m;
    m.config = cfg;
    m.layout = LiteralLayout(image_h, image_w, cfg.patch_h, cfg.patch_w);
    for (auto& bank : m.banks) {
        bank.resize(cfg.n_clauses);
        for (std::size_t j = 0; j < cfg.n_clauses; ++j) {
            bank[j].ta_state.assign(m.layout.literals(), static_cast<std::uint16_t>(cfg.n_states));
            bank[j].polarity = j % 2 == 0 ? 1 : -1;
            bank[j].n_states = cfg.n_states;
        }
    }
    return m;
}

bool CtmModel::operator==(const CtmModel& o) const {
    const auto& a = config;
    const auto& b = o.config;
    const bool cfg_eq = a.n_clauses == b.n_clauses && a.T == b.T && a.s == b.s && a.patch_h == b.patch_h &&
                        a.patch_w == b.patch_w && a.max_included_literals == b.max_included_literals &&
                        a.n_states == b.n_states && a.seed == b.seed && a.epochs == b.epochs &&
                        a.boost_true_positive == b.boost_true_positive;
    return cfg_eq && layout == o.layout && banks == o.banks;
}

std::vector<PatchLiterals> extract_patches(const BoolImage& img, std::size_t patch_h, std::size_t patch_w) {
    const LiteralLayout lay(img.height(), img.width(), patch_h, patch_w);
    std::vector<PatchLiterals> out;
    out.reserve(lay.positions());
    const std::size_t F = lay.features();
    for (std::size_t r = 0; r < lay.pos_rows(); ++r)
        for (std::size_t c = 0; c < lay.pos_cols(); ++c) {
            PatchLiterals p;
            p.row = r;
            p.col = c;
            p.bits.assign(lay.literals(), 0);
            for (std::size_t dy = 0; dy < patch_h; ++dy)
                for (std::size_t dx = 0; dx < patch_w; ++dx) p.bits[dy * patch_w + dx] = img.get(r + dy, c + dx);
            for (std::size_t i = 0; i < lay.row_bits(); ++i) p.bits[lay.patch_bits() + i] = r > i;
            for (std::size_t i = 0; i < lay.col_bits(); ++i) p.bits[lay.patch_bits() + lay.row_bits() + i] = c > i;
            for (std::size_t k = 0; k < F; ++k) p.bits[F + k] = !p.bits[k];
            out.push_back(std::move(p));
        }
    return out;
}

bool clause_eval(const Clause& clause, const PatchLiterals& p, bool inference_mode) {
    if (clause.ta_state.size() != p.bits.size())
        throw DomainError("clause has " + std::to_string(clause.ta_state.size()) + " literals, patch has " +
                          std::to_string(p.bits.size()));
    bool any = false;
    for (std::size_t k = 0; k < p.bits.size(); ++k) {
        if (!clause.includes(k)) continue;
        any = true;
        if (!p.bits[k]) return false;
    }
    return any || !inference_mode;
}

bool clause_output_conv(const Clause& clause, std::span<const PatchLiterals> patches, bool inference_mode) {
    for (const auto& p : patches)
        if (clause_eval(clause, p, inference_mode)) return true;
    return false;
}

namespace {

int clamp_sum(long v, int T) { return static_cast<int>(std::clamp<long>(v, -T, T)); }

}  // namespace

int class_sum(const CtmModel& model, std::size_t class_id, std::span<const PatchLiterals> patches,
              bool inference_mode) {
    if (class_id >= kClasses) throw DomainError("class id out of range");
    long v = 0;
    for (const auto& cl : model.banks[class_id]) v += cl.polarity * (clause_output_conv(cl, patches, inference_mode) ? 1 : 0);
    return clamp_sum(v, model.config.T);
}

LiteralMaps::LiteralMaps(const LiteralLayout& layout, const BoolImage& img) : layout_(layout) {
    if (img.height() != layout.image_h || img.width() != layout.image_w)
        throw DomainError("image is " + std::to_string(img.height()) + "x" + std::to_string(img.width()) +
                          ", model expects " + std::to_string(layout.image_h) + "x" + std::to_string(layout.image_w));
    const std::size_t P = layout.positions();
    words_ = (P + 63) / 64;
    bits_.assign(layout.literals() * words_, 0);
    valid_.assign(words_, ~std::uint64_t{0});
    if (P % 64) valid_.back() = (std::uint64_t{1} << (P % 64)) - 1;

    std::vector<std::uint8_t> px(img.height() * img.width());
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < img.width(); ++c) px[r * img.width() + c] = img.get(r, c);

    const std::size_t pr = layout.pos_rows(), pc = layout.pos_cols();
    auto set = [&](std::size_t k, std::size_t p) { bits_[k * words_ + p / 64] |= std::uint64_t{1} << (p % 64); };
    for (std::size_t dy = 0; dy < layout.patch_h; ++dy)
        for (std::size_t dx = 0; dx < layout.patch_w; ++dx) {
            const std::size_t k = dy * layout.patch_w + dx;
            for (std::size_t r = 0; r < pr; ++r) {
                const std::uint8_t* row = px.data() + (r + dy) * img.width() + dx;
                for (std::size_t c = 0; c < pc; ++c)
                    if (row[c]) set(k, r * pc + c);
            }
        }
    for (std::size_t i = 0; i < layout.row_bits(); ++i)
        for (std::size_t r = i + 1; r < pr; ++r)
            for (std::size_t c = 0; c < pc; ++c) set(layout.patch_bits() + i, r * pc + c);
    for (std::size_t i = 0; i < layout.col_bits(); ++i)
        for (std::size_t r = 0; r < pr; ++r)
            for (std::size_t c = i + 1; c < pc; ++c) set(layout.patch_bits() + layout.row_bits() + i, r * pc + c);
    const std::size_t F = layout.features();
    for (std::size_t k = 0; k < F; ++k)
        for (std::size_t w = 0; w < words_; ++w) bits_[(F + k) * words_ + w] = ~bits_[k * words_ + w] & valid_[w];
}

void LiteralMaps::clause_matches(const Clause& clause, bool inference_mode, std::vector<std::uint64_t>& out) const {
    out.assign(valid_.begin(), valid_.end());
    bool any = false;
    for (std::size_t k = 0; k < clause.ta_state.size(); ++k) {
        if (!clause.includes(k)) continue;
        any = true;
        const std::uint64_t* lit = bits_.data() + k * words_;
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_; ++w) acc |= (out[w] &= lit[w]);
        if (acc == 0) return;
    }
    if (!any && inference_mode) std::fill(out.begin(), out.end(), 0);
}

bool LiteralMaps::clause_fires(const Clause& clause, bool inference_mode) const {
    std::vector<std::uint64_t> m;
    clause_matches(clause, inference_mode, m);
    return std::any_of(m.begin(), m.end(), [](std::uint64_t w) { return w != 0; });
}

int class_sum(const CtmModel& model, std::size_t class_id, const LiteralMaps& maps, bool inference_mode) {
    if (class_id >= kClasses) throw DomainError("class id out of range");
    long v = 0;
    std::vector<std::uint64_t> buf;
    for (const auto& cl : model.banks[class_id]) {
        maps.clause_matches(cl, inference_mode, buf);
        const bool fires = std::any_of(buf.begin(), buf.end(), [](std::uint64_t w) { return w != 0; });
        v += fires ? cl.polarity : 0;
    }
    return clamp_sum(v, model.config.T);
}

std::array<int, kClasses> class_sums(const CtmModel& model, const BoolImage& img) {
    const LiteralMaps maps(model.layout, img);
    std::array<int, kClasses> out{};
    for (std::size_t c = 0; c < kClasses; ++c) out[c] = class_sum(model, c, maps, true);
    return out;
}

Label predict(const CtmModel& model, const BoolImage& img) {
    const auto s = class_sums(model, img);
    return s[1] > s[0] ? Label::jammed : Label::pure;
}

double feedback_probability(int T, int class_sum, bool target) {
    const double v = std::clamp(class_sum, -T, T);
    const double t = T;
    return target ? (t - v) / (2.0 * t) : (t + v) / (2.0 * t);
}

namespace {

/// Applies one round of feedback to a clause. Increments that would include
/// a literal are collected first; when they exceed the free capacity under
/// max_included_literals, a uniformly random subset of them is admitted, so
/// no literal position is favoured.
class ClauseUpdater {
public:
    ClauseUpdater(Clause& cl, const CtmConfig& cfg, CounterRng& rng)
        : cl_(cl), rng_(rng), n_(static_cast<std::uint16_t>(cfg.n_states)), max_(cfg.max_included_literals),
          p_include_(cfg.boost_true_positive ? 1.0 : (cfg.s - 1.0) / cfg.s), p_forget_(1.0 / cfg.s) {}

    /// Type I: reinforce the literals of the matched patch, forget the rest.
    /// maps == nullptr means the clause did not fire: forget only.
    void type_i(const LiteralMaps* maps, std::size_t pos) {
        const std::size_t L = cl_.ta_state.size();
        for (std::size_t k = 0; k < L; ++k) {
            const double u = rng_.uniform();
            if (maps != nullptr && maps->value(k, pos)) {
                if (u <= p_include_) inc(k);
            } else if (u <= p_forget_) {
                dec(k);
            }
        }
        admit();
    }

    /// Type II: push literals that are false in the matched patch toward inclusion.
    /// A full clause first forgets each included literal with probability
    /// 1/s, so a clause that fires on the wrong class can still change.
    void type_ii(const LiteralMaps& maps, std::size_t pos) {
        const std::size_t L = cl_.ta_state.size();
        if (cl_.included_count() >= max_)
            for (std::size_t k = 0; k < L; ++k)
                if (cl_.ta_state[k] > n_ && rng_.uniform() <= p_forget_) dec(k);
        for (std::size_t k = 0; k < L; ++k)
            if (!maps.value(k, pos) && cl_.ta_state[k] <= n_) inc(k);
        admit();
    }

private:
    void inc(std::size_t k) {
        auto& st = cl_.ta_state[k];
        if (st >= 2 * n_) return;
        if (st == n_) {
            pending_.push_back(static_cast<std::uint32_t>(k));
            return;
        }
        ++st;
    }
    void dec(std::size_t k) {
        auto& st = cl_.ta_state[k];
        if (st > 1) --st;
    }
    void admit() {
        const std::size_t count = cl_.included_count();
        const std::size_t room = count >= max_ ? 0 : max_ - count;
        std::size_t take = pending_.size();
        if (take > room) {
            for (std::size_t i = 0; i < room; ++i)
                std::swap(pending_[i], pending_[i + rng_.below(pending_.size() - i)]);
            take = room;
        }
        for (std::size_t i = 0; i < take; ++i) ++cl_.ta_state[pending_[i]];
        pending_.clear();
    }

    Clause& cl_;
    CounterRng& rng_;
    std::uint16_t n_;
    std::size_t max_;
    double p_include_;
    double p_forget_;
    std::vector<std::uint32_t> pending_;
};

std::size_t nth_set_bit(const std::vector<std::uint64_t>& words, std::size_t n) {
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto pc = static_cast<std::size_t>(std::popcount(words[w]));
        if (n < pc) {
            std::uint64_t x = words[w];
            for (std::size_t i = 0; i < n; ++i) x &= x - 1;
            return w * 64 + static_cast<std::size_t>(std::countr_zero(x));
        }
        n -= pc;
    }
    return 0;
}

}  // namespace

void train_epoch(CtmModel& model, std::span<const Sample> data, std::uint64_t epoch) {
    const auto& cfg = model.config;
    for (const auto& s : data) {
        if (static_cast<unsigned>(s.label) > 1) throw DomainError("unknown label in training data");
        if (s.image.height() != model.layout.image_h || s.image.width() != model.layout.image_w)
            throw DomainError("training image dimensions do not match the model");
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle(derive_seed(cfg.seed, {epoch, ~std::uint64_t{0}}));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    const std::size_t nc = cfg.n_clauses;
    std::vector<std::vector<std::uint64_t>> matches(kClasses * nc);
    std::vector<std::uint8_t> fires(kClasses * nc);

    for (std::size_t step = 0; step < order.size(); ++step) {
        const Sample& smp = data[order[step]];
        const LiteralMaps maps(model.layout, smp.image);
        parallel_for(kClasses * nc, [&](std::size_t idx) {
            const auto& cl = model.banks[idx / nc][idx % nc];
            maps.clause_matches(cl, false, matches[idx]);
            fires[idx] = std::any_of(matches[idx].begin(), matches[idx].end(), [](std::uint64_t w) { return w != 0; });
        });
        std::array<int, kClasses> sums{};
        for (std::size_t c = 0; c < kClasses; ++c) {
            long v = 0;
            for (std::size_t j = 0; j < nc; ++j) v += fires[c * nc + j] ? model.banks[c][j].polarity : 0;
            sums[c] = clamp_sum(v, cfg.T);
        }
        const auto y = static_cast<std::size_t>(smp.label);
        parallel_for(kClasses * nc, [&](std::size_t idx) {
            const std::size_t c = idx / nc, j = idx % nc;
            CounterRng rng(derive_seed(cfg.seed, {epoch, step, c, j}));
            const bool target = c == y;
            if (rng.uniform() > feedback_probability(cfg.T, sums[c], target)) return;
            Clause& cl = model.banks[c][j];
            const bool type_i = target == (cl.polarity > 0);
            ClauseUpdater up(cl, cfg, rng);
            const auto& m = matches[idx];
            if (!fires[idx]) {
                if (type_i) up.type_i(nullptr, 0);
                return;
            }
            std::size_t count = 0;
            for (auto w : m) count += static_cast<std::size_t>(std::popcount(w));
            const std::size_t pos = nth_set_bit(m, rng.below(count));
            if (type_i)
                up.type_i(&maps, pos);
            else
                up.type_ii(maps, pos);
        });
    }
}

CtmModel fit(const CtmConfig& cfg, std::span<const Sample> data) {
    if (data.empty()) throw DomainError("cannot train on an empty dataset");
    auto m = CtmModel::create(cfg, data.front().image.height(), data.front().image.width());
    for (std::size_t e = 0; e < cfg.epochs; ++e) train_epoch(m, data, e);
    return m;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::size_t state_bytes(const CtmConfig& c) { return 2 * c.n_states <= 256 ? 1 : 2; }

}  // namespace

std::vector<std::uint8_t> serialize(const CtmModel& m) {
    const auto& c = m.config;
    std::string text;
    text += "n_clauses=" + std::to_string(c.n_clauses) + "\n";
    text += "T=" + std::to_string(c.T) + "\n";
    text += "s=" + fmt_double(c.s) + "\n";
    text += "patch_h=" + std::to_string(c.patch_h) + "\n";
    text += "patch_w=" + std::to_string(c.patch_w) + "\n";
    text += "max_included_literals=" + std::to_string(c.max_included_literals) + "\n";
    text += "n_states=" + std::to_string(c.n_states) + "\n";
    text += "seed=" + std::to_string(c.seed) + "\n";
    text += "epochs=" + std::to_string(c.epochs) + "\n";
    text += "boost_true_positive=" + std::string(c.boost_true_positive ? "1" : "0") + "\n";
    text += "image_h=" + std::to_string(m.layout.image_h) + "\n";
    text += "image_w=" + std::to_string(m.layout.image_w) + "\n";
    text += "state_bytes=" + std::to_string(state_bytes(c)) + "\n\n";

    std::vector<std::uint8_t> out{'J', 'G', 'T', 'M', kModelVersion};
    out.insert(out.end(), text.begin(), text.end());
    const std::size_t sb = state_bytes(c);
    for (const auto& bank : m.banks)
        for (const auto& cl : bank)
            for (auto st : cl.ta_state) {
                const auto v = static_cast<std::uint16_t>(st - 1);
                out.push_back(static_cast<std::uint8_t>(v & 0xFF));
                if (sb == 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
            }
    return out;
}

CtmModel deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5 || std::memcmp(bytes.data(), "JGTM", 4) != 0) throw FormatError("bad model magic", 0);
    if (bytes[4] != kModelVersion)
        throw FormatError("unsupported model version " + std::to_string(bytes[4]), 4);

    std::map<std::string, std::string> kv;
    std::size_t pos = 5;
    for (;;) {
        std::size_t eol = pos;
        while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
        if (eol >= bytes.size()) throw FormatError("unterminated model header", pos);
        if (eol == pos) {
            pos = eol + 1;
            break;
        }
        const std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(eol));
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("malformed header line '" + line + "'", pos);
        if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second)
            throw FormatError("duplicate header key '" + line.substr(0, eq) + "'", pos);
        pos = eol + 1;
    }

    static const char* const kKeys[] = {"n_clauses", "T", "s", "patch_h", "patch_w", "max_included_literals",
                                        "n_states", "seed", "epochs", "boost_true_positive", "image_h",
                                        "image_w", "state_bytes"};
    for (const auto& [k, v] : kv)
        if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* x) { return k == x; }) == std::end(kKeys))
            throw FormatError("unknown header key '" + k + "'", 5);
    auto get_u = [&](const char* k) -> std::uint64_t {
        const auto it = kv.find(k);
        if (it == kv.end()) throw FormatError(std::string("missing header key '") + k + "'", 5);
        std::uint64_t v = 0;
        const auto& s = it->second;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
            throw FormatError(std::string("bad value for '") + k + "'", 5);
        return v;
    };
    CtmConfig c;
    c.n_clauses = get_u("n_clauses");
    c.T = static_cast<int>(get_u("T"));
    {
        const auto& s = kv.count("s") ? kv.at("s") : throw FormatError("missing header key 's'", 5);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), c.s);
        if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw FormatError("bad value for 's'", 5);
    }
    c.patch_h = get_u("patch_h");
    c.patch_w = get_u("patch_w");
    c.max_included_literals = get_u("max_included_literals");
    c.n_states = static_cast<int>(get_u("n_states"));
    c.seed = get_u("seed");
    c.epochs = get_u("epochs");
    c.boost_true_positive = get_u("boost_true_positive") != 0;
    const auto ih = get_u("image_h"), iw = get_u("image_w"), sb = get_u("state_bytes");

    CtmModel m;
    try {
        m = CtmModel::create(c, ih, iw);
    } catch (const DomainError& e) {
        throw FormatError(std::string("invalid model configuration: ") + e.what(), 5);
    }
    if (sb != state_bytes(c)) throw FormatError("state_bytes inconsistent with n_states", 5);
    const std::size_t need = kClasses * c.n_clauses * m.layout.literals() * sb;
    if (bytes.size() - pos != need)
        throw FormatError("model payload is " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                              std::to_string(need),
                          std::min(bytes.size(), pos + need));
    const int max_state = 2 * c.n_states;
    for (auto& bank : m.banks)
        for (auto& cl : bank)
            for (auto& st : cl.ta_state) {
                std::uint32_t v = bytes[pos];
                if (sb == 2) v |= std::uint32_t{bytes[pos + 1]} << 8;
                if (static_cast<int>(v) + 1 > max_state) throw FormatError("TA state out of range", pos);
                st = static_cast<std::uint16_t>(v + 1);
                pos += sb;
            }
    return m;
}

std::size_t save_model(const CtmModel& m, const std::filesystem::path& path) {
    const auto bytes = serialize(m);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
    return bytes.size();
}

CtmModel load_model(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::size_t training_workspace_bytes(const CtmModel& m) {
    const std::size_t words = (m.layout.positions() + 63) / 64;
    const std::size_t maps = (m.layout.literals() + 1) * words * sizeof(std::uint64_t);
    const std::size_t matches = kClasses * m.config.n_clauses * (words * sizeof(std::uint64_t) + 1);
    const std::size_t states = kClasses * m.config.n_clauses * m.layout.literals() * sizeof(std::uint16_t);
    return maps + matches + states;
}

}  // namespace jamguard::ctm
