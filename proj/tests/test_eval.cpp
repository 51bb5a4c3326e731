#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "jamguard/eval.hpp"
#include "oracles.hpp"

using namespace jamguard;
using namespace jamguard::eval;

TEST_SUITE("eval") {

TEST_CASE("metrics: worked example") {
    const ConfusionMatrix cm{45, 3, 47, 5};
    const auto m = metrics(cm);
    CHECK(m.accuracy == doctest::Approx(0.92));
    CHECK(m.precision == doctest::Approx(0.9375));
    CHECK(m.recall == doctest::Approx(0.9));
    CHECK(m.f1 == doctest::Approx(2.0 * 0.9 * 0.9375 / 1.8375));
    CHECK(m.f1 == doctest::Approx(0.9184).epsilon(1e-4));
}

TEST_CASE("metrics: zero denominators and empty input") {
    const auto m = metrics(ConfusionMatrix{0, 0, 10, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK_THROWS_AS(metrics(ConfusionMatrix{}), DomainError);
}

TEST_CASE("confusion counts raw pairs") {
    CounterRng rng(6);
    std::vector<Label> t, p;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < 500; ++i) {
        const bool a = rng.below(2), b = rng.below(2);
        t.push_back(a ? Label::jammed : Label::pure);
        p.push_back(b ? Label::jammed : Label::pure);
        tp += a && b;
        fp += !a && b;
        tn += !a && !b;
        fn += a && !b;
    }
    const auto cm = confusion(t, p);
    CHECK(cm == ConfusionMatrix{tp, fp, tn, fn});
    CHECK(cm.total() == 500);
    const std::vector<Label> shorter(3, Label::pure);
    CHECK_THROWS_AS(confusion(t, shorter), DomainError);
}

TEST_CASE("kfold_split") {
    std::vector<Label> labels(100);
    for (std::size_t i = 0; i < 100; ++i) labels[i] = i % 2 ? Label::jammed : Label::pure;
    const auto folds = kfold_split(labels, 5, 42);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> all;
    for (const auto& f : folds) {
        CHECK(f.size() == 20);
        std::size_t jam = 0;
        for (auto i : f) jam += labels[i] == Label::jammed;
        CHECK(jam == 10);
        CHECK(std::is_sorted(f.begin(), f.end()));
        for (auto i : f) CHECK(all.insert(i).second);
    }
    CHECK(all.size() == 100);
    CHECK(kfold_split(labels, 5, 42) == folds);
    CHECK(kfold_split(labels, 5, 43) != folds);
    CHECK_THROWS_AS(kfold_split(labels, 101, 1), DomainError);
    CHECK_THROWS_AS(kfold_split(labels, 1, 1), DomainError);

    SUBCASE("unbalanced sizes differ by at most one") {
        std::vector<Label> odd(23, Label::pure);
        for (std::size_t i = 0; i < 9; ++i) odd[i * 2] = Label::jammed;
        const auto f = kfold_split(odd, 4, 1);
        std::size_t lo = 100, hi = 0, total = 0;
        for (const auto& x : f) {
            lo = std::min(lo, x.size());
            hi = std::max(hi, x.size());
            total += x.size();
        }
        CHECK(hi - lo <= 1);
        CHECK(total == 23);
    }
}

TEST_CASE("mean and sample stddev") {
    const std::vector<Metrics> ms{{0.8, 0.5, 0.5, 0.5}, {0.9, 0.5, 0.5, 0.5}, {1.0, 0.5, 0.5, 0.5}};
    CHECK(mean_of(ms).accuracy == doctest::Approx(0.9));
    CHECK(stddev_of(ms).accuracy == doctest::Approx(0.1));
    CHECK(stddev_of(ms).f1 == 0.0);
    CHECK(stddev_of(std::span(ms.data(), 1)).accuracy == 0.0);
}

TEST_CASE("accuracy_by_key") {
    const std::vector<double> keys{-80, -80, -40, -40};
    const std::vector<Label> t{Label::jammed, Label::jammed, Label::jammed, Label::jammed};
    const std::vector<Label> p{Label::pure, Label::jammed, Label::jammed, Label::jammed};
    const auto c = accuracy_by_key(keys, t, p);
    CHECK(c.at(-80) == 0.5);
    CHECK(c.at(-40) == 1.0);
    CHECK(c.begin()->first == -80);
}

TEST_CASE("cross_validate is deterministic and covers every sample once") {
    const auto data = oracle::corner_squares(20, 8);
    ctm::CtmConfig cfg;
    cfg.n_clauses = 20;
    cfg.T = 15;
    cfg.s = 3.9;
    cfg.epochs = 3;
    const auto a = cross_validate(data, cfg, 5, 9);
    const auto b = cross_validate(data, cfg, 5, 9);
    REQUIRE(a.folds.size() == 5);
    CHECK(a.predictions == b.predictions);
    std::size_t total = 0;
    for (std::size_t f = 0; f < 5; ++f) {
        CHECK(a.folds[f].cm == b.folds[f].cm);
        total += a.folds[f].cm.total();
    }
    CHECK(total == 20);
    CHECK(a.predictions.size() == 20);
    CHECK(a.mean == b.mean);
    CHECK(a.model_bytes > 0);

    const auto dir = std::filesystem::temp_directory_path() / "jamguard_test_eval";
    std::filesystem::create_directories(dir);
    write_report_csv(a, dir / "a.csv");
    write_report_csv(b, dir / "b.csv");
    CHECK(std::filesystem::file_size(dir / "a.csv") == std::filesystem::file_size(dir / "b.csv"));
    std::filesystem::remove_all(dir);
    CHECK(format_report(a).find("accuracy") != std::string::npos);
}

}  // TEST_SUITE
