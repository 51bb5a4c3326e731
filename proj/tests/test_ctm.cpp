#include <filesystem>

#include "doctest.h"
#include "jamguard/ctm.hpp"
#include "jamguard/parallel.hpp"
#include "oracles.hpp"

using namespace jamguard;
using namespace jamguard::ctm;
using binarize::BoolImage;

namespace {

BoolImage random_bool(CounterRng& rng, std::size_t h, std::size_t w, std::uint64_t density_pct = 50) {
    BoolImage b(h, w);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) b.set(r, c, rng.below(100) < density_pct);
    return b;
}

Clause random_clause(CounterRng& rng, std::size_t literals, std::size_t included, int n_states = 128) {
    Clause cl;
    cl.n_states = n_states;
    cl.ta_state.assign(literals, static_cast<std::uint16_t>(n_states));
    for (std::size_t i = 0; i < included; ++i)
        cl.ta_state[rng.below(literals)] = static_cast<std::uint16_t>(n_states + 1 + rng.below(n_states));
    return cl;
}

CtmConfig small_config() {
    CtmConfig c;
    c.n_clauses = 20;
    c.T = 15;
    c.s = 3.9;
    c.patch_h = 4;
    c.patch_w = 4;
    c.max_included_literals = 10;
    c.epochs = 3;
    c.seed = 11;
    return c;
}

}  // namespace

TEST_SUITE("ctm") {

TEST_CASE("config validation") {
    CHECK_NOTHROW(CtmConfig{}.validate());
    auto c = CtmConfig{};
    c.n_clauses = 201;  // odd
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = CtmConfig{};
    c.s = 1.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = CtmConfig{};
    c.T = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = CtmConfig{};
    c.max_included_literals = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("literal layout for the default 100x100 configuration") {
    const LiteralLayout l(100, 100, 10, 10);
    CHECK(l.positions() == 8281);
    CHECK(l.features() == 280);
    CHECK(l.literals() == 560);
    CHECK_THROWS_AS(LiteralLayout(8, 8, 10, 10), DomainError);
}

TEST_CASE("extract_patches") {
    BoolImage all(100, 100);
    for (std::size_t r = 0; r < 100; ++r)
        for (std::size_t c = 0; c < 100; ++c) all.set(r, c, true);
    const auto ps = extract_patches(all, 10, 10);
    REQUIRE(ps.size() == 8281);
    const std::size_t F = 280;
    for (std::size_t k = 0; k < 100; ++k) {
        CHECK(ps[0].bits[k] == 1);
        CHECK(ps[0].bits[k + F] == 0);
    }
    // Thermometer extremes.
    for (std::size_t k = 100; k < F; ++k) {
        CHECK(ps.front().bits[k] == 0);
        CHECK(ps.back().bits[k] == 1);
    }
    CHECK(ps.back().row == 90);
    CHECK(ps.back().col == 90);
    CHECK_THROWS_AS(extract_patches(BoolImage(5, 5), 10, 10), DomainError);

    SUBCASE("negation pairing and monotone coordinates on a random image") {
        CounterRng rng(1);
        const auto img = random_bool(rng, 14, 13);
        const auto p = extract_patches(img, 4, 5);
        const LiteralLayout lay(14, 13, 4, 5);
        for (const auto& q : p) {
            for (std::size_t k = 0; k < lay.features(); ++k) CHECK(q.bits[k + lay.features()] == !q.bits[k]);
            for (std::size_t i = 1; i < lay.row_bits(); ++i) CHECK(q.bits[20 + i] <= q.bits[20 + i - 1]);
            CHECK(q.bits == oracle::patch_literals(img, 4, 5, q.row, q.col));
        }
    }
}

TEST_CASE("clause_eval") {
    const LiteralLayout lay(12, 12, 10, 10);
    PatchLiterals p;
    p.bits.assign(lay.literals(), 0);
    Clause cl;
    cl.ta_state.assign(lay.literals(), 128);
    cl.ta_state[5] = 200;
    p.bits[5] = 1;
    CHECK(clause_eval(cl, p, true));
    p.bits[5] = 0;
    CHECK_FALSE(clause_eval(cl, p, true));
    Clause empty;
    empty.ta_state.assign(lay.literals(), 128);
    CHECK(clause_eval(empty, p, false));
    CHECK_FALSE(clause_eval(empty, p, true));
    PatchLiterals shorter;
    shorter.bits.assign(3, 0);
    CHECK_THROWS_AS(clause_eval(cl, shorter, true), DomainError);
}

TEST_CASE("convolutional output equals the 9-position brute force") {
    CounterRng rng(90);
    const LiteralLayout lay(12, 12, 10, 10);
    for (int trial = 0; trial < 300; ++trial) {
        const auto img = random_bool(rng, 12, 12, 70 + rng.below(30));
        const auto cl = random_clause(rng, lay.literals(), rng.below(6));
        const auto patches = extract_patches(img, 10, 10);
        const LiteralMaps maps(lay, img);
        for (bool inference : {false, true}) {
            const bool ref = oracle::clause_fires(cl, img, 10, 10, inference);
            CHECK(clause_output_conv(cl, patches, inference) == ref);
            CHECK(maps.clause_fires(cl, inference) == ref);
        }
    }
}

TEST_CASE("clause fixture matching only the patch at (3,4)") {
    BoolImage img(20, 20);
    img.set(3, 4, true);
    Clause cl;
    const LiteralLayout lay(20, 20, 10, 10);
    cl.ta_state.assign(lay.literals(), 128);
    cl.ta_state[0] = 255;  // pixel (0,0) of the patch
    const auto patches = extract_patches(img, 10, 10);
    CHECK(clause_output_conv(cl, patches, true));
    std::size_t matching = 0;
    for (const auto& p : patches) matching += clause_eval(cl, p, true);
    CHECK(matching == 1);
    cl.ta_state[1] = 255;  // and pixel (0,1): nothing matches
    CHECK_FALSE(clause_output_conv(cl, patches, true));
}

TEST_CASE("class sums and predictions") {
    auto m = CtmModel::create(CtmConfig{}, 100, 100);
    BoolImage img(100, 100);
    CHECK(class_sums(m, img) == std::array<int, 2>{0, 0});
    CHECK(predict(m, img) == Label::pure);

    SUBCASE("arithmetic: 3 positive and 1 negative firing clause") {
        const std::size_t lit_true = 280;  // NOT pixel (0,0) of the patch: true on an empty image
        for (std::size_t j : {0u, 2u, 4u, 1u}) m.banks[1][j].ta_state[lit_true] = 200;
        CHECK(m.banks[1][1].polarity == -1);
        const auto patches = extract_patches(img, 10, 10);
        CHECK(class_sum(m, 1, patches) == 2);
        CHECK(class_sums(m, img)[1] == 2);
        CHECK(predict(m, img) == Label::jammed);
    }
    SUBCASE("clamping at T") {
        auto c = CtmConfig{};
        c.n_clauses = 1200;
        auto big = CtmModel::create(c, 100, 100);
        for (std::size_t j = 0; j < 1200; j += 2) big.banks[1][j].ta_state[280] = 200;
        CHECK(class_sums(big, img)[1] == 477);
    }
    SUBCASE("motif clause decides the class") {
        BoolImage motif(100, 100);
        for (std::size_t r = 50; r < 53; ++r) motif.set(r, 20, true);
        for (std::size_t k : {0u, 10u, 20u}) m.banks[1][0].ta_state[k] = 200;  // vertical 3-pixel line at patch column 0
        CHECK(predict(m, motif) == Label::jammed);
        CHECK(predict(m, img) == Label::pure);
    }
    CHECK_THROWS_AS(predict(m, BoolImage(50, 50)), DomainError);
}

TEST_CASE("clause monotonicity") {
    CounterRng rng(17);
    const LiteralLayout lay(12, 12, 10, 10);
    for (int trial = 0; trial < 200; ++trial) {
        const auto img = random_bool(rng, 12, 12, 80);
        auto cl = random_clause(rng, lay.literals(), 1 + rng.below(4));
        const auto ps = extract_patches(img, 10, 10);
        for (const auto& p : ps) {
            if (!clause_eval(cl, p, true)) continue;
            auto more = p;
            const std::size_t k = rng.below(lay.literals());
            more.bits[k] = 1;
            CHECK(clause_eval(cl, more, true));
            auto fewer = cl;
            const auto inc = fewer.included();
            fewer.ta_state[inc[rng.below(inc.size())]] = 1;
            if (fewer.included_count() > 0) CHECK(clause_eval(fewer, p, true));
        }
    }
}

TEST_CASE("feedback probability") {
    CHECK(feedback_probability(477, 0, true) == 0.5);
    CHECK(feedback_probability(477, 477, true) == 0.0);
    CHECK(feedback_probability(477, -477, false) == 0.0);
    CHECK(feedback_probability(477, 1000, false) == 1.0);
    CHECK(feedback_probability(10, 4, true) == doctest::Approx(0.3));

    CounterRng rng(1234);
    const double p = feedback_probability(477, 120, true);
    std::size_t hits = 0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) hits += rng.uniform() <= p;
    CHECK(std::abs(static_cast<double>(hits) / n - p) <= 0.01);
}

TEST_CASE("training: toy task, bounds, cap, determinism") {
    const auto data = oracle::corner_squares(20, 5);
    auto cfg = CtmConfig{};
    cfg.epochs = 10;
    auto m = CtmModel::create(cfg, 12, 12);
    for (std::uint64_t e = 0; e < cfg.epochs; ++e) {
        train_epoch(m, data, e);
        for (const auto& bank : m.banks)
            for (const auto& cl : bank) {
                CHECK(cl.included_count() <= 22);
                for (auto s : cl.ta_state) {
                    CHECK(s >= 1);
                    CHECK(s <= 256);
                }
            }
        for (const auto& s : data) {
            const auto sums = class_sums(m, s.image);
            CHECK(std::abs(sums[0]) <= 477);
            CHECK(std::abs(sums[1]) <= 477);
        }
    }
    std::size_t ok = 0;
    for (const auto& s : data) ok += predict(m, s.image) == s.label;
    CHECK(ok == data.size());

    const auto again = fit(cfg, data);
    CHECK(again == m);

    const auto before = worker_count();
    set_worker_count(1);
    const auto serial = fit(cfg, data);
    set_worker_count(8);
    const auto wide = fit(cfg, data);
    set_worker_count(before);
    CHECK(serial == m);
    CHECK(wide == m);
}

TEST_CASE("training rejects mismatched data") {
    auto m = CtmModel::create(small_config(), 12, 12);
    std::vector<Sample> bad{{BoolImage(10, 10), Label::pure}};
    CHECK_THROWS_AS(train_epoch(m, bad, 0), DomainError);
    std::vector<Sample> bad_label{{BoolImage(12, 12), static_cast<Label>(5)}};
    CHECK_THROWS_AS(train_epoch(m, bad_label, 0), DomainError);
}

TEST_CASE("state bounds under random feedback with a small automaton") {
    auto cfg = small_config();
    cfg.n_states = 3;
    cfg.max_included_literals = 4;
    CounterRng rng(3);
    std::vector<Sample> data;
    for (int i = 0; i < 30; ++i) data.push_back({random_bool(rng, 10, 10), rng.below(2) ? Label::jammed : Label::pure});
    auto m = CtmModel::create(cfg, 10, 10);
    for (std::uint64_t e = 0; e < 5; ++e) {
        train_epoch(m, data, e);
        for (const auto& bank : m.banks)
            for (const auto& cl : bank) {
                CHECK(cl.included_count() <= 4);
                for (auto s : cl.ta_state) {
                    CHECK(s >= 1);
                    CHECK(s <= 6);
                }
            }
    }
}

TEST_CASE("model serialization") {
    const auto data = oracle::corner_squares(10, 9);
    auto cfg = small_config();
    const auto m = fit(cfg, data);
    const auto bytes = serialize(m);
    CHECK(deserialize(bytes) == m);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "JGTM");
    CHECK(bytes[4] == kModelVersion);

    auto v = bytes;
    v[4] = 2;
    CHECK_THROWS_AS(deserialize(v), FormatError);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize(magic), FormatError);
    auto trunc = bytes;
    trunc.resize(trunc.size() - 3);
    try {
        deserialize(trunc);
        FAIL("truncated model accepted");
    } catch (const FormatError& e) {
        CHECK(e.offset() > 4);
    }

    const auto path = std::filesystem::temp_directory_path() / "jamguard_test_model.jgtm";
    const std::size_t written = save_model(m, path);
    CHECK(written == bytes.size());
    CHECK(std::filesystem::file_size(path) == written);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("default-configuration model size") {
    const auto m = CtmModel::create(CtmConfig{}, 100, 100);
    const auto bytes = serialize(m);
    // Text header, then one byte per TA: 2 classes * 200 clauses * 560 literals.
    const std::string text(bytes.begin(), bytes.end());
    const auto body = text.find("\n\n");
    REQUIRE(body != std::string::npos);
    CHECK(bytes.size() - (body + 2) == 224000);
    CHECK(bytes.size() == 224172);
    CHECK(bytes.size() <= 2u * 1024 * 1024);
}

}  // TEST_SUITE
