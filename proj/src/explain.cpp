#include "jamguard/explain.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace jamguard::explain {

namespace {

/// Net signed inclusion count per literal over both banks.
std::vector<long long> literal_weights(const ctm::CtmModel& model) {
    std::vector<long long> w(model.layout.literals(), 0);
    for (std::size_t c = 0; c < ctm::kClasses; ++c) {
        const int sign = c == static_cast<std::size_t>(Label::jammed) ? 1 : -1;
        for (const auto& cl : model.banks[c])
            for (std::size_t k = 0; k < cl.ta_state.size(); ++k)
                if (cl.includes(k)) w[k] += cl.polarity * sign;
    }
    return w;
}

template <typename T>
std::vector<double> scale_by_max(const std::vector<T>& v) {
    T m = 0;
    for (auto x : v) m = std::max<T>(m, x < 0 ? -x : x);
    std::vector<double> out(v.size(), 0.0);
    if (m == 0) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]) / static_cast<double>(m);
    return out;
}

void write_pgm(const std::vector<double>& v, std::size_t h, std::size_t w, double sign,
               const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << "P5\n" << w << ' ' << h << "\n255\n";
    for (double x : v) f.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(sign * x, 0.0, 1.0) * 255.0))));
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

MentionCounts mention_counts(const ctm::CtmModel& model) {
    const auto& lay = model.layout;
    const auto w = literal_weights(model);
    const std::size_t F = lay.features();
    MentionCounts out;
    out.height = lay.image_h;
    out.width = lay.image_w;
    out.pixels.assign(lay.image_h * lay.image_w, 0);

    // Offset (dy, dx) covers rows dy..dy+pos_rows-1 and cols dx..dx+pos_cols-1.
    // Accumulate a 2-D difference array, then integrate.
    std::vector<long long> diff((lay.image_h + 1) * (lay.image_w + 1), 0);
    const std::size_t dw = lay.image_w + 1;
    for (std::size_t dy = 0; dy < lay.patch_h; ++dy)
        for (std::size_t dx = 0; dx < lay.patch_w; ++dx) {
            const std::size_t k = dy * lay.patch_w + dx;
            const long long v = w[k] - w[F + k];
            if (v == 0) continue;
            const std::size_t r1 = dy + lay.pos_rows(), c1 = dx + lay.pos_cols();
            diff[dy * dw + dx] += v;
            diff[dy * dw + c1] -= v;
            diff[r1 * dw + dx] -= v;
            diff[r1 * dw + c1] += v;
        }
    for (std::size_t r = 0; r < lay.image_h; ++r) {
        long long run = 0;
        for (std::size_t c = 0; c < lay.image_w; ++c) {
            run += diff[r * dw + c];
            out.pixels[r * lay.image_w + c] = run + (r ? out.pixels[(r - 1) * lay.image_w + c] : 0);
        }
    }
    const std::size_t rb = lay.patch_bits(), cb = rb + lay.row_bits();
    for (std::size_t i = 0; i < lay.row_bits(); ++i) out.row.push_back(w[rb + i] - w[F + rb + i]);
    for (std::size_t i = 0; i < lay.col_bits(); ++i) out.col.push_back(w[cb + i] - w[F + cb + i]);
    return out;
}

Heatmap literal_heatmap(const ctm::CtmModel& model) {
    const auto mc = mention_counts(model);
    return Heatmap{mc.height, mc.width, scale_by_max(mc.pixels)};
}

CoordinateProfiles coordinate_profiles(const ctm::CtmModel& model) {
    const auto mc = mention_counts(model);
    return CoordinateProfiles{scale_by_max(mc.row), scale_by_max(mc.col)};
}

void export_heatmap(const Heatmap& h, const std::filesystem::path& stem) {
    auto csv = stem;
    csv += ".csv";
    std::ofstream f(csv);
    if (!f) throw IoError("cannot write " + csv.string());
    char buf[32];
    for (std::size_t r = 0; r < h.height; ++r) {
        for (std::size_t c = 0; c < h.width; ++c) {
            if (c) f << ',';
            const auto res = std::to_chars(buf, buf + sizeof buf, h.at(r, c));
            f.write(buf, res.ptr - buf);
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + csv.string());
    auto pos = stem, neg = stem;
    pos += "_pos.pgm";
    neg += "_neg.pgm";
    write_pgm(h.values, h.height, h.width, 1.0, pos);
    write_pgm(h.values, h.height, h.width, -1.0, neg);
}

Heatmap read_heatmap_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path.string());
    Heatmap h;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t cols = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            double v = 0.0;
            const auto r = std::from_chars(p, comma, v);
            if (r.ec != std::errc{} || r.ptr != comma)
                throw FormatError("bad number in " + path.string() + " line " + std::to_string(lineno), lineno);
            h.values.push_back(v);
            ++cols;
            p = comma + 1;
        }
        if (h.height == 0) h.width = cols;
        if (cols != h.width) throw FormatError("ragged row in " + path.string(), lineno);
        ++h.height;
    }
    return h;
}

void export_profiles(const CoordinateProfiles& p, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    f << "axis,index,value\n";
    for (std::size_t i = 0; i < p.row.size(); ++i) f << "row," << i << ',' << p.row[i] << '\n';
    for (std::size_t i = 0; i < p.col.size(); ++i) f << "col," << i << ',' << p.col[i] << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

double mass_fraction(const Heatmap& h, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    double total = 0.0, inside = 0.0;
    for (std::size_t r = 0; r < h.height; ++r)
        for (std::size_t c = 0; c < h.width; ++c) {
            const double a = std::abs(h.at(r, c));
            total += a;
            if (r >= r0 && r < r1 && c >= c0 && c < c1) inside += a;
        }
    return total > 0.0 ? inside / total : 0.0;
}

}  // namespace jamguard::explain
