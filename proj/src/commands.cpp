#include "jamguard/commands.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>

#include "jamguard/eval.hpp"
#include "jamguard/explain.hpp"
#include "jamguard/parallel.hpp"

namespace jamguard::commands {

int guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const config::ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kDataError;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kDataError;
    } catch (const DomainError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

namespace {

void prepare_dir(const fs::path& out, bool force) {
    if (out.empty()) throw UsageError("an output directory is required");
    if (io::non_empty_dir(out) && !force)
        throw UsageError(out.string() + " exists and is not empty (use --force to write into it)");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
}

void write_resolved(const config::RunConfig& cfg, const fs::path& path) {
    io::write_text(config::format(cfg), path);
}

std::string record_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu", i);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

io::KeyValues synth_meta(const config::RunConfig& cfg, std::string_view source) {
    io::KeyValues m;
    m["format"] = "jamguard-dataset";
    m["version"] = "1";
    m["source"] = std::string(source);
    m["sample_rate"] = io::format_double(cfg.synth.sample_rate);
    m["center_freq"] = io::format_double(cfg.synth.center_freq);
    return m;
}

}  // namespace

int synth(const config::RunConfig& cfg, const fs::path& out, bool force, Streams s) {
    if (cfg.synth.n_pure == 0 || cfg.synth.n_jam == 0)
        throw UsageError("synth needs at least one pure and one jammed record (n_pure and n_jam >= 1)");
    prepare_dir(out, force);
    fs::create_directories(out / "iq");

    const std::size_t n = cfg.synth.n_pure + cfg.synth.n_jam;
    std::vector<io::KeyValues> rows(n);
    parallel_for(n, [&](std::size_t i) {
        const auto rec = signal::synth_record(cfg.synth, i);
        const std::string file = "iq/" + record_name(i) + ".csv";
        io::write_iq_csv(rec.iq, out / file);
        auto& r = rows[i];
        r["file"] = file;
        r["label"] = label_name(rec.label);
        r["seed"] = std::to_string(rec.seed);
        r["snr_db"] = io::format_double(rec.snr_db);
        r["kind"] = rec.jammer ? signal::jammer_kind_name(rec.jammer->kind) : "none";
        r["gain_db"] = rec.jammer ? io::format_double(rec.jammer->gain_db) : "none";
        r["sweep_gain_db"] = rec.jammer ? io::format_double(rec.sweep_gain_db) : "none";
        r["cfo_hz"] = io::format_double(rec.cfo_hz);
        r["ssb_offset"] = std::to_string(rec.ssb_offset);
        r["sector_id"] = std::to_string(rec.sector_id);
    });

    io::KvTable t;
    t.meta = synth_meta(cfg, "synth");
    for (const auto& key : config::keys())
        if (key == "seed" || key.rfind("synth.", 0) == 0) t.meta[key] = config::get(cfg, key);
    t.meta["records"] = std::to_string(n);
    t.records = std::move(rows);
    io::write_kv_table(t, "jamguard dataset manifest", out / kManifest);
    write_resolved(cfg, out / config::kResolvedName);
    s.out << "wrote " << n << " records (" << cfg.synth.n_pure << " pure, " << cfg.synth.n_jam << " jammed) to "
          << out.string() << '\n';
    return kOk;
}

int import(const config::RunConfig& cfg, const fs::path& csv_dir, const fs::path& meta, const fs::path& out,
           bool force, Streams s) {
    const auto sidecar = io::read_kv_table(meta);
    const double rate = io::parse_double(sidecar.meta_at("sample_rate"), "sample_rate");
    const double fc = io::parse_double(sidecar.meta_at("center_freq"), "center_freq");
    if (!(rate > 0.0)) throw DomainError("sample_rate must be > 0");
    if (sidecar.records.empty()) throw UsageError(meta.string() + " lists no records");
    prepare_dir(out, force);
    fs::create_directories(out / "iq");

    io::KvTable t;
    t.meta = {{"format", "jamguard-dataset"}, {"version", "1"}, {"source", "import"},
              {"sample_rate", io::format_double(rate)}, {"center_freq", io::format_double(fc)}};
    std::size_t failed = 0;
    for (std::size_t i = 0; i < sidecar.records.size(); ++i) {
        const auto& in = sidecar.records[i];
        try {
            const auto it = in.find("file");
            if (it == in.end()) throw DomainError("record " + std::to_string(i) + " has no file=");
            const auto lab = in.find("label");
            if (lab == in.end()) throw DomainError(it->second + ": no label=");
            const Label label = parse_label(lab->second);
            const auto iq = io::read_iq_csv(csv_dir / it->second, rate, fc);
            const std::string file = "iq/" + record_name(t.records.size()) + ".csv";
            io::write_iq_csv(iq, out / file);
            io::KeyValues r = in;
            r["file"] = file;
            r["source_file"] = it->second;
            r["label"] = label_name(label);
            if (!r.count("kind")) r["kind"] = label == Label::jammed ? "unknown" : "none";
            for (const char* k : {"gain_db", "sweep_gain_db", "snr_db"})
                if (!r.count(k)) r[k] = "none";
            t.records.push_back(std::move(r));
        } catch (const FormatError& e) {
            s.err << "error: " << e.what() << '\n';
            ++failed;
        } catch (const IoError& e) {
            s.err << "error: " << e.what() << '\n';
            ++failed;
        } catch (const DomainError& e) {
            s.err << "error: " << e.what() << '\n';
            ++failed;
        }
    }
    t.meta["records"] = std::to_string(t.records.size());
    io::write_kv_table(t, "jamguard dataset manifest", out / kManifest);
    write_resolved(cfg, out / config::kResolvedName);
    s.out << "imported " << t.records.size() << " of " << sidecar.records.size() << " records into " << out.string()
          << '\n';
    return failed ? kDataError : kOk;
}

int preprocess(const config::RunConfig& cfg, const fs::path& data, const fs::path& out, bool force, Streams s) {
    if (!fs::exists(data / kManifest)) throw IoError("no dataset at " + data.string() + " (missing manifest.txt)");
    const auto manifest = io::read_kv_table(data / kManifest);
    const double rate = io::parse_double(manifest.meta_at("sample_rate"), "sample_rate");
    const double fc = io::parse_double(manifest.meta_at("center_freq"), "center_freq");
    prepare_dir(out, force);

    const std::size_t n = manifest.records.size();
    std::vector<IQBuffer> iq(n);
    std::vector<std::string> errors(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& r = manifest.records[i];
        try {
            const auto it = r.find("file");
            if (it == r.end()) throw DomainError("record " + std::to_string(i) + " has no file=");
            iq[i] = io::read_iq_csv(data / it->second, rate, fc);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i].empty()) ok.push_back(i);
        else s.err << "warning: skipping record " << i << ": " << errors[i] << '\n';
    }
    std::vector<IQBuffer> good;
    good.reserve(ok.size());
    for (auto i : ok) good.push_back(std::move(iq[i]));
    const auto pre = pipeline::preprocess_all(good, cfg.pre);

    io::KvTable t;
    t.meta = {{"format", "jamguard-images"}, {"version", "1"}};
    for (const auto& key : config::keys())
        if (key.rfind("sync.", 0) == 0 || key.rfind("spectro.", 0) == 0 || key.rfind("binarize.", 0) == 0)
            t.meta[key] = config::get(cfg, key);
    t.meta["pixel_bandwidth_hz"] = io::format_double(
        spectro::pixel_bandwidth_hz(rate, cfg.pre.spectro.side, cfg.pre.spectro.crop_fraction));
    for (std::size_t j = 0; j < ok.size(); ++j) {
        const std::size_t i = ok[j];
        const std::string file = record_name(i) + ".jgb";
        binarize::save(pre[j].image, out / file);
        io::KeyValues r;
        for (const char* k : {"label", "kind", "gain_db", "sweep_gain_db", "snr_db"}) {
            const auto it = manifest.records[i].find(k);
            r[k] = it == manifest.records[i].end() ? "none" : it->second;
        }
        r["file"] = file;
        r["record"] = std::to_string(i);
        r["t_off"] = std::to_string(pre[j].t_off);
        r["cfo_hz"] = io::format_double(pre[j].cfo_hz);
        t.records.push_back(std::move(r));
    }
    t.meta["images"] = std::to_string(t.records.size());
    io::write_kv_table(t, "jamguard image index", out / kImageIndex);
    write_resolved(cfg, out / config::kResolvedName);
    s.out << "wrote " << t.records.size() << " images (" << binarize::method_name(cfg.pre.method.kind) << ") to "
          << out.string() << '\n';
    return ok.size() == n ? kOk : kDataError;
}

ImageSet load_images(const fs::path& dir) {
    if (!fs::exists(dir / kImageIndex)) throw IoError("no image set at " + dir.string() + " (missing index.txt)");
    ImageSet set;
    set.index = io::read_kv_table(dir / kImageIndex);
    set.samples.resize(set.index.records.size());
    std::vector<std::string> errors(set.samples.size());
    parallel_for(set.samples.size(), [&](std::size_t i) {
        const auto& r = set.index.records[i];
        try {
            const auto f = r.find("file");
            const auto l = r.find("label");
            if (f == r.end() || l == r.end()) throw DomainError("index record " + std::to_string(i) + " lacks file= or label=");
            set.samples[i].image = binarize::load(dir / f->second);
            set.samples[i].label = parse_label(l->second);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (const auto& e : errors)
        if (!e.empty()) throw DomainError(e);
    for (const auto& smp : set.samples)
        if (smp.image.height() != set.samples.front().image.height() ||
            smp.image.width() != set.samples.front().image.width())
            throw DomainError("images in " + dir.string() + " differ in size");
    return set;
}

int train(const config::RunConfig& cfg, const fs::path& images, const fs::path& model, bool force, Streams s) {
    if (model.empty()) throw UsageError("a model path is required");
    const auto set = load_images(images);
    if (set.samples.empty()) throw UsageError("training set " + images.string() + " is empty");
    if (fs::exists(model) && !force) throw UsageError(model.string() + " exists (use --force to overwrite)");
    if (model.has_parent_path()) fs::create_directories(model.parent_path());

    const auto t0 = std::chrono::steady_clock::now();
    const auto m = ctm::fit(cfg.ctm, set.samples);
    const double train_s = seconds_since(t0);
    const std::size_t bytes = ctm::save_model(m, model);
    write_resolved(cfg, fs::path(model.string() + ".config.txt"));

    std::size_t hits = 0;
    std::vector<Label> pred(set.samples.size());
    parallel_for(set.samples.size(), [&](std::size_t i) { pred[i] = ctm::predict(m, set.samples[i].image); });
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == set.samples[i].label;
    s.out << "trained on " << set.samples.size() << " images in " << train_s << " s\n"
          << "training accuracy " << static_cast<double>(hits) / static_cast<double>(pred.size()) << '\n'
          << "model " << model.string() << ": " << bytes << " bytes\n";
    return kOk;
}

int cv(const config::RunConfig& cfg, const fs::path& images, const fs::path& out, bool force, Streams s) {
    const auto set = load_images(images);
    if (set.samples.size() < cfg.folds) throw UsageError("fewer images than folds");
    prepare_dir(out, force);
    const auto report = eval::cross_validate(set.samples, cfg.ctm, cfg.folds, cfg.seed);

    eval::write_report_csv(report, out / "report.csv");
    eval::write_timing_csv(report, out / "timing.csv");

    std::string pred = "index,file,label,predicted\n";
    std::vector<double> gains;
    std::vector<Label> truth, predicted;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
        const auto& r = set.index.records[i];
        pred += std::to_string(i) + "," + r.at("file") + "," + label_name(set.samples[i].label) + "," +
                label_name(report.predictions[i]) + "\n";
        const auto g = r.find("sweep_gain_db");
        if (set.samples[i].label == Label::jammed && g != r.end() && g->second != "none") {
            gains.push_back(io::parse_double(g->second, "sweep_gain_db"));
            truth.push_back(set.samples[i].label);
            predicted.push_back(report.predictions[i]);
        }
    }
    io::write_text(pred, out / "predictions.csv");
    eval::write_curve_csv(eval::accuracy_by_key(gains, truth, predicted), "sweep_gain_db", out / "accuracy_vs_gain.csv");
    write_resolved(cfg, out / config::kResolvedName);
    s.out << eval::format_report(report);
    return kOk;
}

int explain(const fs::path& model, const fs::path& out, bool force, Streams s) {
    const auto m = ctm::load_model(model);
    prepare_dir(out, force);
    const auto h = explain::literal_heatmap(m);
    explain::export_heatmap(h, out / "heatmap");
    explain::export_profiles(explain::coordinate_profiles(m), out / "profiles.csv");
    s.out << "heatmap " << h.height << "x" << h.width << " written to " << out.string() << '\n';
    return kOk;
}

int fpga(const config::RunConfig& cfg, const fs::path& out, bool force, Streams s) {
    const auto rows = fpga::emit_profiles(cfg.fpga);
    s.out << fpga::format_profiles(rows);
    if (!out.empty()) {
        prepare_dir(out, force);
        fpga::write_profiles_csv(rows, out / "fpga.csv");
        write_resolved(cfg, out / config::kResolvedName);
    }
    return kOk;
}

}  // namespace jamguard::commands
