#include <cmath>
#include <sstream>

#include "doctest.h"
#include "repc/langsys.hpp"
#include "repc/prequential.hpp"
#include "repc/rng.hpp"

using namespace repc;
using namespace repc::preq;

namespace {

// Small symbolic dataset with configurable targets.
data::Dataset make_symbolic(int64_t n, int64_t vocab, int64_t slots, int64_t classes,
                            uint64_t seed, bool constant_targets, bool random_targets) {
    data::Dataset ds;
    ds.symbolic = true;
    ds.meta.vocab = vocab;
    ds.meta.dim = slots;
    ds.meta.classes = classes;
    ds.meta.seed = seed;
    ds.meta.generator = "test";
    ds.w = TokenMatrix(n, 2);
    ds.y = TokenMatrix(n, slots);
    Philox g(seed);
    for (auto& t : ds.w.tok) t = static_cast<int32_t>(g.next_below(static_cast<uint64_t>(vocab)));
    for (int64_t i = 0; i < n; ++i) {
        for (int64_t s = 0; s < slots; ++s) {
            if (constant_targets) {
                ds.y.at(i, s) = 3 % classes;
            } else if (random_targets) {
                ds.y.at(i, s) = static_cast<int32_t>(g.next_below(static_cast<uint64_t>(classes)));
            } else {
                ds.y.at(i, s) = static_cast<int32_t>((ds.w.at(i, 0) + s) % classes);
            }
        }
    }
    return ds;
}

PrequentialConfig quick_config() {
    PrequentialConfig cfg;
    cfg.holdout = 50;
    cfg.hidden = {32, 32};
    cfg.emb_dim = 16;
    cfg.train.max_epochs = 100;
    cfg.train.patience = 5;
    return cfg;
}

}  // namespace

TEST_CASE("linear schedule covers the range with a trailing partial chunk") {
    const auto s = ChunkSchedule::linear(50, 230);
    CHECK(s.cuts == std::vector<int64_t>{50, 100, 150, 200, 230});
    s.validate(230);
    CHECK_THROWS_AS((void)ChunkSchedule::linear(0, 100), contract_error);
}

TEST_CASE("log10 schedule is strictly increasing from start to n") {
    const auto s = ChunkSchedule::log10(15, 10, 4000);
    CHECK(s.cuts.front() == 10);
    CHECK(s.cuts.back() == 4000);
    for (size_t i = 1; i < s.cuts.size(); ++i) CHECK(s.cuts[i] > s.cuts[i - 1]);
    s.validate(4000);
    CHECK_THROWS_AS((void)ChunkSchedule::log10(15, 4000, 4000), contract_error);
    CHECK_THROWS_AS((void)ChunkSchedule::log10(1, 10, 100), contract_error);
}

TEST_CASE("schedule validation rejects mismatched ends") {
    ChunkSchedule s;
    s.cuts = {10, 20};
    CHECK_THROWS_AS(s.validate(30), contract_error);
    s.cuts = {10, 10};
    CHECK_THROWS_AS(s.validate(10), contract_error);
    s.cuts = {0, 10};
    CHECK_THROWS_AS(s.validate(10), contract_error);
}

TEST_CASE("raw chunk cost is the uniform code for symbolic targets") {
    const auto ds = make_symbolic(150, 8, 2, 8, 1, false, true);
    auto cfg = quick_config();
    const auto schedule = ChunkSchedule::linear(100, 100);  // single raw chunk
    const auto curve = prequential_code_length(ds, schedule, cfg, 1);
    CHECK(curve.raw_bits == doctest::Approx(100.0 * 2.0 * 3.0).epsilon(1e-12));
    CHECK(curve.chunk_bits.empty());
    CHECK(curve.n_records == 100);
    CHECK(curve.total_bits() == doctest::Approx(curve.raw_bits));
}

TEST_CASE("constant targets are learned from the first chunk") {
    const auto ds = make_symbolic(450, 8, 2, 8, 2, true, false);
    auto cfg = quick_config();
    const auto schedule = ChunkSchedule::linear(50, 400);
    const auto curve = prequential_code_length(ds, schedule, cfg, 2);
    REQUIRE(curve.chunk_bits.size() == 7);
    for (size_t i = 0; i < curve.chunk_bits.size(); ++i) {
        const double per_record =
            curve.chunk_bits[i] / static_cast<double>(curve.chunk_size(i + 1));
        CHECK(per_record < 0.2);
    }
}

TEST_CASE("learnable task beats the uniform rate; decomposition is sane") {
    const auto ds = make_symbolic(450, 8, 2, 8, 3, false, false);
    auto cfg = quick_config();
    const auto schedule = ChunkSchedule::linear(50, 400);
    const auto curve = prequential_code_length(ds, schedule, cfg, 3);
    const double uniform = 6.0;  // 2 slots x log2 8
    CHECK(curve.total_bits() / static_cast<double>(curve.n_records) < uniform);
    const auto d = decompose(curve);
    CHECK(d.k_data_given_model >= 0.0);
    CHECK(d.k_model >= 0.0);
    if (!d.clamped) {
        CHECK(d.k_model ==
              doctest::Approx(curve.total_bits() - d.k_data_given_model).epsilon(1e-12));
    }
}

TEST_CASE("decomposition arithmetic on a hand-built curve") {
    PrequentialCurve c;
    c.cuts = {10, 100};
    c.raw_bits = 100.0;
    c.chunk_bits = {20.0};
    c.val_bits_per_record = {0.5};
    c.n_records = 100;
    const auto d = decompose(c);
    CHECK(c.last_level_bits_per_record() == doctest::Approx(20.0 / 90.0));
    CHECK(d.k_data_given_model == doctest::Approx(100.0 * 20.0 / 90.0));
    CHECK(d.k_model == doctest::Approx(120.0 - 100.0 * 20.0 / 90.0));
    CHECK_FALSE(d.clamped);

    // flat curve: every chunk at the same per-record level -> zero model bits
    PrequentialCurve flat;
    flat.cuts = {10, 20};
    flat.raw_bits = 60.0;
    flat.chunk_bits = {60.0};
    flat.val_bits_per_record = {6.0};
    flat.n_records = 20;
    const auto df = decompose(flat);
    CHECK(df.k_model == doctest::Approx(0.0));

    // rising tail clamps at zero and flags it
    PrequentialCurve rising;
    rising.cuts = {10, 20};
    rising.raw_bits = 10.0;
    rising.chunk_bits = {90.0};
    rising.val_bits_per_record = {9.0};
    rising.n_records = 20;
    const auto dr = decompose(rising);
    CHECK(dr.clamped);
    CHECK(dr.k_model == 0.0);
}

TEST_CASE("identical seeds give bit-identical curves") {
    const auto ds = make_symbolic(260, 6, 1, 6, 7, false, false);
    auto cfg = quick_config();
    const auto schedule = ChunkSchedule::linear(50, 210);
    const auto a = prequential_code_length(ds, schedule, cfg, 7);
    const auto b = prequential_code_length(ds, schedule, cfg, 7);
    CHECK(a.raw_bits == b.raw_bits);
    CHECK(a.chunk_bits == b.chunk_bits);
    CHECK(a.val_bits_per_record == b.val_bits_per_record);
    CHECK(a.final_full_bits == b.final_full_bits);
}

TEST_CASE("gaussian datasets run through the same pipeline") {
    data::Dataset ds;
    ds.symbolic = false;
    ds.meta.vocab = 4;
    ds.meta.dim = 2;
    ds.meta.lambda_z = 0.05;
    ds.meta.generator = "test";
    const int64_t n = 220;
    ds.w = TokenMatrix(n, 1);
    ds.z = QuantizedMatrix(n, 2, {0.05});
    Philox g(9);
    for (int64_t i = 0; i < n; ++i) {
        ds.w.at(i, 0) = static_cast<int32_t>(g.next_below(4));
        // target depends on the token, learnable
        ds.z.at(i, 0) = 10 * ds.w.at(i, 0);
        ds.z.at(i, 1) = -5 * ds.w.at(i, 0);
    }
    auto cfg = quick_config();
    cfg.holdout = 20;
    const auto schedule = ChunkSchedule::linear(50, 200);
    const auto curve = prequential_code_length(ds, schedule, cfg, 9);
    CHECK(curve.chunk_bits.size() == 3);
    // the model should learn the deterministic map and beat the raw code
    const double raw_rate = curve.raw_bits / static_cast<double>(curve.cuts.front());
    CHECK(curve.chunk_bits.back() / static_cast<double>(curve.chunk_size(3)) < raw_rate);
}

TEST_CASE("curve CSV has one row per chunk and embeds the config comment") {
    PrequentialCurve c;
    c.cuts = {10, 60, 100};
    c.raw_bits = 60.0;
    c.chunk_bits = {25.0, 10.0};
    c.val_bits_per_record = {0.5, 0.25};
    c.n_records = 100;
    c.seed = 42;
    std::ostringstream out;
    write_curve_csv(out, c, "cfg=unit-test");
    const std::string text = out.str();
    CHECK(text.find("# cfg=unit-test\n") == 0);
    CHECK(text.find("boundary,n_records_in_chunk,bits_chunk,bits_per_record,val_bits_per_record,seed\n") !=
          std::string::npos);
    int64_t lines = 0;
    for (const char ch : text) lines += ch == '\n';
    CHECK(lines == 5);  // comment + header + 3 chunks
    CHECK(text.find("10,10,60,6,,42") != std::string::npos);
}

TEST_CASE("holdout bounds are validated") {
    const auto ds = make_symbolic(100, 4, 1, 4, 11, false, false);
    auto cfg = quick_config();
    cfg.holdout = 99;
    CHECK_THROWS_AS(
        (void)prequential_code_length(ds, ChunkSchedule::linear(10, 1), cfg, 0),
        contract_error);
    cfg.holdout = 0;
    CHECK_THROWS_AS(
        (void)prequential_code_length(ds, ChunkSchedule::linear(10, 100), cfg, 0),
        contract_error);
}
