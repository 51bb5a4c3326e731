#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "jamguard/commands.hpp"

using namespace jamguard;
namespace cmd = jamguard::commands;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

config::RunConfig small_run() {
    config::RunConfig c;
    config::apply_text(c,
                       "seed=5\n"
                       "synth.n_pure=6\n"
                       "synth.n_jam=6\n"
                       "ctm.n_clauses=20\n"
                       "ctm.T=15\n"
                       "ctm.epochs=2\n"
                       "eval.folds=3\n");
    config::resolve(c);
    return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("guarded maps exceptions to exit codes") {
    std::ostringstream err;
    CHECK(cmd::guarded([] { return 0; }, err) == cmd::kOk);
    CHECK(cmd::guarded([]() -> int { throw cmd::UsageError("u"); }, err) == cmd::kUsage);
    CHECK(cmd::guarded([]() -> int { throw config::ConfigError("c"); }, err) == cmd::kUsage);
    CHECK(cmd::guarded([]() -> int { throw IoError("i"); }, err) == cmd::kDataError);
    CHECK(cmd::guarded([]() -> int { throw FormatError("f", 1); }, err) == cmd::kDataError);
    CHECK(cmd::guarded([]() -> int { throw DomainError("d"); }, err) == cmd::kDataError);
    CHECK(cmd::guarded([]() -> int { throw std::logic_error("x"); }, err) == cmd::kInternal);
    CHECK(err.str().find("f (at offset 1)") != std::string::npos);
}

TEST_CASE("synth -> preprocess -> train -> cv -> explain on a tiny dataset") {
    TempDir tmp("jamguard_test_cli");
    std::ostringstream out, err;
    const cmd::Streams s{out, err};
    auto cfg = small_run();
    const auto data = tmp.path / "data", images = tmp.path / "images", model = tmp.path / "model.jgtm";

    REQUIRE(cmd::guarded([&] { return cmd::synth(cfg, data, false, s); }, err) == 0);
    CHECK(fs::exists(data / cmd::kManifest));
    CHECK(fs::exists(data / config::kResolvedName));
    CHECK(io::read_kv_table(data / cmd::kManifest).records.size() == 12);
    CHECK(cmd::guarded([&] { return cmd::synth(cfg, data, false, s); }, err) == cmd::kUsage);
    CHECK(cmd::guarded([&] { return cmd::synth(cfg, data, true, s); }, err) == 0);

    REQUIRE(cmd::guarded([&] { return cmd::preprocess(cfg, data, images, false, s); }, err) == 0);
    const auto set = cmd::load_images(images);
    CHECK(set.samples.size() == 12);
    CHECK(set.samples[0].image.height() == 100);

    REQUIRE(cmd::guarded([&] { return cmd::train(cfg, images, model, false, s); }, err) == 0);
    CHECK(fs::exists(model));
    CHECK(cmd::guarded([&] { return cmd::train(cfg, images, model, false, s); }, err) == cmd::kUsage);

    REQUIRE(cmd::guarded([&] { return cmd::cv(cfg, images, tmp.path / "cv", false, s); }, err) == 0);
    for (const char* f : {"report.csv", "timing.csv", "predictions.csv", "accuracy_vs_gain.csv"})
        CHECK(fs::exists(tmp.path / "cv" / f));

    REQUIRE(cmd::guarded([&] { return cmd::explain(model, tmp.path / "explain", false, s); }, err) == 0);
    CHECK(fs::exists(tmp.path / "explain" / "heatmap.csv"));

    REQUIRE(cmd::guarded([&] { return cmd::fpga(cfg, tmp.path / "fpga", false, s); }, err) == 0);
    CHECK(out.str().find("literature-based projection only") != std::string::npos);

    SUBCASE("a corrupt IQ file is skipped with exit code 2") {
        std::ofstream(data / "iq" / "00003.csv") << "I,Q\n0.1,0.2\nbroken\n";
        std::ostringstream e2;
        const cmd::Streams s2{out, e2};
        CHECK(cmd::guarded([&] { return cmd::preprocess(cfg, data, tmp.path / "img2", false, s2); }, e2) ==
              cmd::kDataError);
        CHECK(e2.str().find("line 3") != std::string::npos);
        CHECK(cmd::load_images(tmp.path / "img2").samples.size() == 11);
    }
}

TEST_CASE("synth refuses an empty class") {
    TempDir tmp("jamguard_test_cli_empty");
    std::ostringstream out, err;
    auto cfg = small_run();
    cfg.synth.n_jam = 0;
    CHECK(cmd::guarded([&] { return cmd::synth(cfg, tmp.path / "d", false, {out, err}); }, err) == cmd::kUsage);
}

TEST_CASE("import keeps good files and reports bad ones") {
    TempDir tmp("jamguard_test_cli_import");
    const auto csv = tmp.path / "csv";
    fs::create_directories(csv);
    {
        std::ofstream a(csv / "a.csv");
        a << "I,Q\n";
        for (int i = 0; i < 8192; ++i) a << (i % 7) * 0.01 << ',' << (i % 5) * -0.01 << '\n';
    }
    std::ofstream(csv / "b.csv") << "I,Q\n1,2\nx,y\n";
    io::KvTable meta;
    meta.meta = {{"sample_rate", "15625000"}, {"center_freq", "632000000"}};
    meta.records = {{{"file", "a.csv"}, {"label", "jammed"}, {"kind", "cw_tone"}},
                    {{"file", "b.csv"}, {"label", "pure"}}};
    io::write_kv_table(meta, "import", tmp.path / "meta.txt");

    std::ostringstream out, err;
    const auto cfg = small_run();
    const int rc = cmd::guarded(
        [&] { return cmd::import(cfg, csv, tmp.path / "meta.txt", tmp.path / "data", false, {out, err}); }, err);
    CHECK(rc == cmd::kDataError);
    CHECK(err.str().find("b.csv") != std::string::npos);
    const auto man = io::read_kv_table(tmp.path / "data" / cmd::kManifest);
    REQUIRE(man.records.size() == 1);
    CHECK(man.records[0].at("label") == "jammed");
    CHECK(man.records[0].at("kind") == "cw_tone");

    io::KvTable no_rate;
    no_rate.records = meta.records;
    io::write_kv_table(no_rate, "import", tmp.path / "bad_meta.txt");
    CHECK(cmd::guarded(
              [&] { return cmd::import(cfg, csv, tmp.path / "bad_meta.txt", tmp.path / "d2", false, {out, err}); },
              err) != cmd::kOk);
}

}  // TEST_SUITE
