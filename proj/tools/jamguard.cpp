// jamguard: synthesize, preprocess, train, cross-validate, explain and
// project a CTM jamming detector from the command line.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jamguard/commands.hpp"
#include "jamguard/parallel.hpp"

namespace cmd = jamguard::commands;
namespace cfgns = jamguard::config;

namespace {

struct Layering {
    std::vector<std::string> files;
    std::vector<std::string> sets;
    std::size_t threads = 0;
    bool force = false;
};

void add_common(CLI::App* app, Layering& l, bool with_force = true) {
    app->add_option("-c,--config", l.files, "key=value config file; repeatable, later files win");
    app->add_option("--set", l.sets, "override one key, e.g. --set ctm.epochs=5; repeatable");
    app->add_option("-j,--threads", l.threads, "worker threads (capped by JAMGUARD_THREADS)");
    if (with_force) app->add_flag("--force", l.force, "write into a non-empty output location");
}

/// defaults < config files < --set < dedicated flags (applied by the caller).
cfgns::RunConfig layer(const Layering& l) {
    cfgns::RunConfig c;
    for (const auto& f : l.files) cfgns::apply_file(c, f);
    for (const auto& s : l.sets) cfgns::apply_assignment(c, s);
    return c;
}

void apply_threads(std::size_t requested) {
    std::size_t n = requested ? requested : jamguard::worker_count();
    if (const char* env = std::getenv("JAMGUARD_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && n > static_cast<std::size_t>(cap)) n = static_cast<std::size_t>(cap);
    }
    jamguard::set_worker_count(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jamguard: PSS spectrogram jamming detection with a convolutional Tsetlin machine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "jamguard 1.0");

    Layering l;
    std::string out, data, images, model, csv_dir, meta, method;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_pure, n_jam, epochs, folds;
    std::optional<double> clock, efficiency;
    std::optional<long> patches;

    auto* synth = app.add_subcommand("synth", "synthesize a labelled PSS capture dataset");
    add_common(synth, l);
    synth->add_option("-o,--out", out, "output dataset directory")->required();
    synth->add_option("--seed", seed, "master seed");
    synth->add_option("--n-pure", n_pure, "number of jammer-free captures");
    synth->add_option("--n-jam", n_jam, "number of jammed captures");

    auto* imp = app.add_subcommand("import", "ingest externally recorded I,Q CSV captures");
    add_common(imp, l);
    imp->add_option("--csv-dir", csv_dir, "directory holding the CSV files")->required();
    imp->add_option("--meta", meta, "sidecar table: sample_rate=, center_freq=, [records] file= label= ...")
        ->required();
    imp->add_option("-o,--out", out, "output dataset directory")->required();

    auto* pre = app.add_subcommand("preprocess", "synchronize, build spectrograms and booleanize a dataset");
    add_common(pre, l);
    pre->add_option("-d,--data", data, "dataset directory")->required();
    pre->add_option("-o,--out", out, "output image directory")->required();
    pre->add_option("-m,--method", method, "enhanced_otsu | paper_original | multi_level | adaptive_gaussian");

    auto* train = app.add_subcommand("train", "train a CTM on an image directory");
    add_common(train, l);
    train->add_option("-i,--images", images, "image directory")->required();
    train->add_option("--model", model, "model file to write")->required();
    train->add_option("--seed", seed, "master seed");
    train->add_option("--epochs", epochs, "training epochs");

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
    add_common(cv, l);
    cv->add_option("-i,--images", images, "image directory")->required();
    cv->add_option("-o,--out", out, "report directory")->required();
    cv->add_option("--seed", seed, "master seed");
    cv->add_option("--epochs", epochs, "training epochs");
    cv->add_option("-k,--folds", folds, "number of folds");

    auto* expl = app.add_subcommand("explain", "per-pixel literal-mention heatmap of a model");
    add_common(expl, l);
    expl->add_option("--model", model, "model file")->required();
    expl->add_option("-o,--out", out, "output directory")->required();

    auto* fp = app.add_subcommand("fpga", "literature-based FPGA footprint projection");
    add_common(fp, l);
    fp->add_option("-o,--out", out, "also write fpga.csv here");
    fp->add_option("--clock", clock, "clock in Hz");
    fp->add_option("--efficiency", efficiency, "pipeline efficiency in (0, 1]");
    fp->add_option("--patches", patches, "patch placements per sample");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cmd::kOk : cmd::kUsage;
    }

    const cmd::Streams io{std::cout, std::cerr};
    return cmd::guarded(
        [&]() -> int {
            apply_threads(l.threads);
            auto c = layer(l);
            if (seed) c.seed = *seed;
            if (n_pure) c.synth.n_pure = *n_pure;
            if (n_jam) c.synth.n_jam = *n_jam;
            if (epochs) c.ctm.epochs = *epochs;
            if (folds) c.folds = *folds;
            if (!method.empty()) cfgns::set(c, "binarize.method", method);
            if (clock) c.fpga.clock_hz = *clock;
            if (efficiency) c.fpga.efficiency = *efficiency;
            if (patches) c.fpga.patches_per_sample = *patches;
            cfgns::resolve(c);

            if (*synth) return cmd::synth(c, out, l.force, io);
            if (*imp) return cmd::import(c, csv_dir, meta, out, l.force, io);
            if (*pre) return cmd::preprocess(c, data, out, l.force, io);
            if (*train) return cmd::train(c, images, model, l.force, io);
            if (*cv) return cmd::cv(c, images, out, l.force, io);
            if (*expl) return cmd::explain(model, out, l.force, io);
            if (*fp) return cmd::fpga(c, out, l.force, io);
            return cmd::kUsage;
        },
        std::cerr);
}
