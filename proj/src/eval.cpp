#include "jamguard/eval.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "jamguard/rng.hpp"

namespace jamguard::eval {

void ConfusionMatrix::add(Label truth, Label predicted) noexcept {
    const bool t = truth == Label::jammed, p = predicted == Label::jammed;
    if (t && p) ++tp;
    else if (!t && p) ++fp;
    else if (!t && !p) ++tn;
    else ++fn;
}

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) throw DomainError("truth and prediction lengths differ");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DomainError("metrics of an empty confusion matrix");
    auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    Metrics m;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    const double s = m.precision + m.recall;
    m.f1 = s > 0.0 ? 2.0 * m.precision * m.recall / s : 0.0;
    return m;
}

std::vector<std::vector<std::size_t>> kfold_split(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw DomainError("k must be >= 2");
    if (k > labels.size())
        throw DomainError("k = " + std::to_string(k) + " exceeds sample count " + std::to_string(labels.size()));
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (const Label l : {Label::pure, Label::jammed}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == l) idx.push_back(i);
        CounterRng rng(derive_seed(seed, {static_cast<std::uint64_t>(l)}));
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
        for (auto i : idx) {
            folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

Metrics mean_of(std::span<const Metrics> ms) {
    Metrics out;
    if (ms.empty()) return out;
    for (const auto& m : ms) {
        out.accuracy += m.accuracy;
        out.precision += m.precision;
        out.recall += m.recall;
        out.f1 += m.f1;
    }
    const double n = static_cast<double>(ms.size());
    out.accuracy /= n;
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
    return out;
}

Metrics stddev_of(std::span<const Metrics> ms) {
    Metrics out;
    if (ms.size() < 2) return out;
    const Metrics mu = mean_of(ms);
    for (const auto& m : ms) {
        out.accuracy += (m.accuracy - mu.accuracy) * (m.accuracy - mu.accuracy);
        out.precision += (m.precision - mu.precision) * (m.precision - mu.precision);
        out.recall += (m.recall - mu.recall) * (m.recall - mu.recall);
        out.f1 += (m.f1 - mu.f1) * (m.f1 - mu.f1);
    }
    const double d = static_cast<double>(ms.size() - 1);
    out.accuracy = std::sqrt(out.accuracy / d);
    out.precision = std::sqrt(out.precision / d);
    out.recall = std::sqrt(out.recall / d);
    out.f1 = std::sqrt(out.f1 / d);
    return out;
}

CvReport cross_validate(std::span<const ctm::Sample> data, const ctm::CtmConfig& cfg, std::size_t k,
                        std::uint64_t seed) {
    std::vector<Label> labels;
    labels.reserve(data.size());
    for (const auto& s : data) labels.push_back(s.label);
    const auto folds = kfold_split(labels, k, seed);

    using clock = std::chrono::steady_clock;
    CvReport rep;
    rep.k = k;
    rep.seed = seed;
    rep.predictions.assign(data.size(), Label::pure);
    std::vector<std::uint8_t> fold_of(data.size());
    for (std::size_t f = 0; f < k; ++f)
        for (auto i : folds[f]) fold_of[i] = static_cast<std::uint8_t>(f);

    std::size_t evaluated = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<ctm::Sample> train;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (fold_of[i] != f) train.push_back(data[i]);
        ctm::CtmConfig fc = cfg;
        fc.seed = derive_seed(cfg.seed, {f});

        FoldResult fr;
        const auto t0 = clock::now();
        const auto model = ctm::fit(fc, train);
        const auto t1 = clock::now();
        for (auto i : folds[f]) {
            rep.predictions[i] = ctm::predict(model, data[i].image);
            fr.cm.add(data[i].label, rep.predictions[i]);
        }
        const auto t2 = clock::now();
        fr.m = metrics(fr.cm);
        fr.train_s = std::chrono::duration<double>(t1 - t0).count();
        fr.infer_s = std::chrono::duration<double>(t2 - t1).count();
        fr.model_bytes = ctm::serialize(model).size();
        rep.workspace_bytes = ctm::training_workspace_bytes(model);
        rep.train_s += fr.train_s;
        rep.infer_s += fr.infer_s;
        rep.model_bytes = std::max(rep.model_bytes, fr.model_bytes);
        evaluated += folds[f].size();
        rep.folds.push_back(fr);
    }
    std::vector<Metrics> ms;
    for (const auto& fr : rep.folds) ms.push_back(fr.m);
    rep.mean = mean_of(ms);
    rep.stddev = stddev_of(ms);
    rep.samples_per_s = rep.infer_s > 0.0 ? static_cast<double>(evaluated) / rep.infer_s : 0.0;
    return rep;
}

Resources measure_resources(const CvReport& r) {
    return Resources{r.train_s, r.infer_s, r.samples_per_s, r.model_bytes};
}

std::size_t peak_rss_bytes() {
    rusage ru{};
    if (getrusage(RUSAGE_SELF, &ru) != 0) return 0;
    return static_cast<std::size_t>(ru.ru_maxrss) * 1024;
}

namespace {

std::string fixed(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

}  // namespace

std::string format_report(const CvReport& r) {
    std::string out;
    out += pad("fold", 6) + pad("accuracy", 12) + pad("precision", 12) + pad("recall", 12) + pad("f1", 12) +
           pad("tp", 6) + pad("fp", 6) + pad("tn", 6) + pad("fn", 6) + "\n";
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const auto& fr = r.folds[f];
        out += pad(std::to_string(f), 6) + pad(fixed(fr.m.accuracy, 4), 12) + pad(fixed(fr.m.precision, 4), 12) +
               pad(fixed(fr.m.recall, 4), 12) + pad(fixed(fr.m.f1, 4), 12) + pad(std::to_string(fr.cm.tp), 6) +
               pad(std::to_string(fr.cm.fp), 6) + pad(std::to_string(fr.cm.tn), 6) +
               pad(std::to_string(fr.cm.fn), 6) + "\n";
    }
    auto pm = [](double m, double s) { return fixed(100.0 * m, 2) + " +/- " + fixed(100.0 * s, 2); };
    out += "\naccuracy  [%]  " + pm(r.mean.accuracy, r.stddev.accuracy) + "\n";
    out += "precision [%]  " + pm(r.mean.precision, r.stddev.precision) + "\n";
    out += "recall    [%]  " + pm(r.mean.recall, r.stddev.recall) + "\n";
    out += "f1        [%]  " + pm(r.mean.f1, r.stddev.f1) + "\n\n";
    out += "train time      " + fixed(r.train_s, 3) + " s\n";
    out += "inference time  " + fixed(r.infer_s, 3) + " s (" + fixed(r.samples_per_s, 1) + " samples/s)\n";
    out += "model size      " + std::to_string(r.model_bytes) + " bytes serialized\n";
    out += "train workspace " + std::to_string(r.workspace_bytes) + " bytes\n";
    out += "peak RSS        " + std::to_string(peak_rss_bytes()) + " bytes (process level, not comparable across hosts)\n";
    return out;
}

void write_report_csv(const CvReport& r, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    f << "fold,accuracy,precision,recall,f1,tp,fp,tn,fn,model_bytes\n";
    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const auto& fr = r.folds[i];
        f << i << ',' << fr.m.accuracy << ',' << fr.m.precision << ',' << fr.m.recall << ',' << fr.m.f1 << ','
          << fr.cm.tp << ',' << fr.cm.fp << ',' << fr.cm.tn << ',' << fr.cm.fn << ',' << fr.model_bytes << '\n';
    }
    f << "mean," << r.mean.accuracy << ',' << r.mean.precision << ',' << r.mean.recall << ',' << r.mean.f1
      << ",,,,," << r.model_bytes << '\n';
    f << "stddev," << r.stddev.accuracy << ',' << r.stddev.precision << ',' << r.stddev.recall << ','
      << r.stddev.f1 << ",,,,,\n";
    if (!f) throw IoError("write failed: " + path.string());
}

void write_timing_csv(const CvReport& r, const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "fold,train_s,infer_s\n";
    for (std::size_t i = 0; i < r.folds.size(); ++i)
        f << i << ',' << r.folds[i].train_s << ',' << r.folds[i].infer_s << '\n';
    f << "total," << r.train_s << ',' << r.infer_s << '\n';
    f << "samples_per_s," << r.samples_per_s << ",\n";
    f << "workspace_bytes," << r.workspace_bytes << ",\n";
    f << "peak_rss_bytes," << peak_rss_bytes() << ",\n";
    if (!f) throw IoError("write failed: " + path.string());
}

std::map<double, double> accuracy_by_key(std::span<const double> keys, std::span<const Label> truth,
                                         std::span<const Label> predicted) {
    if (keys.size() != truth.size() || truth.size() != predicted.size())
        throw DomainError("accuracy_by_key: length mismatch");
    std::map<double, std::pair<std::size_t, std::size_t>> acc;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        auto& [hit, n] = acc[keys[i]];
        hit += truth[i] == predicted[i];
        ++n;
    }
    std::map<double, double> out;
    for (const auto& [k, v] : acc) out[k] = static_cast<double>(v.first) / static_cast<double>(v.second);
    return out;
}

void write_curve_csv(const std::map<double, double>& curve, const std::string& key_name,
                     const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    f << key_name << ",accuracy\n";
    for (const auto& [k, v] : curve) f << k << ',' << v << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace jamguard::eval
