#include "repc/prequential.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "repc/codelen.hpp"
#include "repc/errors.hpp"
#include "repc/rng.hpp"

namespace repc::preq {

ChunkSchedule ChunkSchedule::linear(int64_t step, int64_t n) {
    if (step < 1) throw contract_error("ChunkSchedule: step must be >= 1");
    if (n < 1) throw contract_error("ChunkSchedule: n must be >= 1");
    ChunkSchedule s;
    for (int64_t c = step; c < n; c += step) s.cuts.push_back(c);
    s.cuts.push_back(n);
    return s;
}

ChunkSchedule ChunkSchedule::log10(int64_t n_boundaries, int64_t start, int64_t n) {
    if (n_boundaries < 2) throw contract_error("ChunkSchedule: need >= 2 boundaries");
    if (start < 1 || start >= n) throw contract_error("ChunkSchedule: start must be in [1, n)");
    ChunkSchedule s;
    const double lo = std::log10(static_cast<double>(start));
    const double hi = std::log10(static_cast<double>(n));
    int64_t prev = 0;
    for (int64_t i = 0; i < n_boundaries; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(n_boundaries - 1);
        auto c = static_cast<int64_t>(std::llround(std::pow(10.0, lo + f * (hi - lo))));
        c = std::min(std::max(c, int64_t{1}), n);
        if (c > prev) {
            s.cuts.push_back(c);
            prev = c;
        }
    }
    if (s.cuts.back() != n) s.cuts.push_back(n);
    return s;
}

void ChunkSchedule::validate(int64_t n) const {
    if (cuts.empty()) throw contract_error("ChunkSchedule: empty");
    if (cuts.front() < 1) throw contract_error("ChunkSchedule: first boundary must be >= 1");
    for (size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] <= cuts[i - 1]) throw contract_error("ChunkSchedule: must strictly increase");
    }
    if (cuts.back() != n) throw contract_error("ChunkSchedule: last boundary must equal n");
}

double PrequentialCurve::total_bits() const {
    double t = raw_bits;
    for (const double b : chunk_bits) t += b;
    return t;
}

int64_t PrequentialCurve::chunk_size(size_t stage) const {
    if (stage == 0) return cuts.front();
    return cuts[stage] - cuts[stage - 1];
}

double PrequentialCurve::last_level_bits_per_record() const {
    if (chunk_bits.empty()) {
        return raw_bits / static_cast<double>(cuts.front());
    }
    const size_t last = cuts.size() - 1;
    return chunk_bits.back() / static_cast<double>(chunk_size(last));
}

namespace {

nn::NetSpec derive_spec(const data::Dataset& ds, const PrequentialConfig& cfg) {
    nn::NetSpec spec;
    spec.vocab = ds.meta.vocab;
    spec.emb_dim = cfg.emb_dim;
    spec.n_tokens = ds.w.cols;
    spec.hidden = cfg.hidden;
    if (ds.symbolic) {
        spec.head = nn::HeadKind::categorical;
        spec.slots = ds.meta.dim;
        spec.classes = ds.meta.classes;
    } else {
        spec.head = nn::HeadKind::gaussian;
        spec.out_dim = ds.meta.dim;
        spec.lambda_z = ds.meta.lambda_z;
    }
    spec.validate();
    return spec;
}

double raw_chunk_bits(const data::Dataset& ds, const PrequentialConfig& cfg, int64_t lo,
                      int64_t hi) {
    if (ds.symbolic) {
        return static_cast<double>(hi - lo) * static_cast<double>(ds.meta.dim) *
               std::log2(static_cast<double>(ds.meta.classes));
    }
    double bits = 0.0;
    for (int64_t i = lo; i < hi; ++i) {
        for (int64_t c = 0; c < ds.z.cols; ++c) {
            bits += codelen::discretized_gaussian_nll_bits_value(ds.z.value(i, c), 0.0,
                                                                 cfg.raw_sigma, ds.meta.lambda_z);
        }
    }
    return bits;
}

}  // namespace

PrequentialCurve prequential_code_length(const data::Dataset& ds, const ChunkSchedule& schedule,
                                         const PrequentialConfig& cfg, uint64_t seed) {
    ds.validate();
    cfg.train.validate();
    if (cfg.holdout < 1) throw contract_error("prequential: holdout must be >= 1");
    const int64_t n_total = ds.rows();
    const int64_t n_eff = n_total - cfg.holdout;
    if (n_eff < 2) throw contract_error("prequential: not enough records after the holdout");
    schedule.validate(n_eff);
    if (schedule.cuts.front() >= n_eff && schedule.cuts.size() > 1) {
        throw contract_error("prequential: first boundary leaves nothing to train on");
    }
    if (!(cfg.raw_sigma > 0.0)) throw contract_error("prequential: raw_sigma must be > 0");

    const nn::NetSpec spec = derive_spec(ds, cfg);
    const nn::DataView view{&ds.w, ds.symbolic ? &ds.y : nullptr, ds.symbolic ? nullptr : &ds.z};

    std::vector<int64_t> all_rows(static_cast<size_t>(n_total));
    std::iota(all_rows.begin(), all_rows.end(), 0);
    const std::span<const int64_t> encoded(all_rows.data(), static_cast<size_t>(n_eff));
    const std::span<const int64_t> holdout_rows(all_rows.data() + n_eff,
                                                static_cast<size_t>(cfg.holdout));

    PrequentialCurve curve;
    curve.cuts = schedule.cuts;
    curve.n_records = n_eff;
    curve.holdout = cfg.holdout;
    curve.seed = seed;
    curve.raw_bits = raw_chunk_bits(ds, cfg, 0, schedule.cuts.front());

    const auto stage_seed = [&](uint64_t stage) {
        Philox g(seed, make_stream(StreamTag::preq_stage, stage));
        return g.next_u64();
    };

    nn::Model model = nn::init(spec, stage_seed(0));
    const size_t n_stages = schedule.cuts.size() - 1;
    for (size_t stage = 0; stage < n_stages; ++stage) {
        const int64_t train_end = schedule.cuts[stage];
        const int64_t enc_end = schedule.cuts[stage + 1];
        if (!cfg.warm_start) model = nn::init(spec, stage_seed(stage));
        nn::TrainConfig tc = cfg.train;
        tc.seed = stage_seed(stage);
        nn::TrainResult tr;
        try {
            tr = nn::train(std::move(model), view, encoded.subspan(0, static_cast<size_t>(train_end)),
                           holdout_rows, tc);
        } catch (const train_error& e) {
            throw train_error("prequential stage " + std::to_string(stage + 1) + " (boundary " +
                              std::to_string(train_end) + "): " + e.what());
        }
        model = std::move(tr.model);
        curve.val_bits_per_record.push_back(tr.best_val_bits_per_record);
        const auto chunk = encoded.subspan(static_cast<size_t>(train_end),
                                           static_cast<size_t>(enc_end - train_end));
        curve.chunk_bits.push_back(nn::nll_bits(model, view, chunk).total_bits);
    }

    // final model fit on every encoded record, reported for reference
    if (!cfg.warm_start) model = nn::init(spec, stage_seed(n_stages));
    nn::TrainConfig tc = cfg.train;
    tc.seed = stage_seed(n_stages);
    auto final_tr = nn::train(std::move(model), view, encoded, holdout_rows, tc);
    curve.final_full_bits = nn::nll_bits(final_tr.model, view, encoded).total_bits;
    return curve;
}

Decomposition decompose(const PrequentialCurve& curve) {
    Decomposition d;
    const double level = curve.last_level_bits_per_record();
    d.k_data_given_model = static_cast<double>(curve.n_records) * level;
    const double raw_model = curve.total_bits() - d.k_data_given_model;
    d.clamped = raw_model < 0.0;
    d.k_model = d.clamped ? 0.0 : raw_model;
    return d;
}

void write_curve_csv(std::ostream& out, const PrequentialCurve& curve,
                     const std::string& config_comment) {
    if (!config_comment.empty()) out << "# " << config_comment << "\n";
    char buf[64];
    const auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    out << "boundary,n_records_in_chunk,bits_chunk,bits_per_record,val_bits_per_record,seed\n";
    const int64_t n0 = curve.cuts.front();
    out << n0 << "," << n0 << "," << fmt(curve.raw_bits) << ","
        << fmt(curve.raw_bits / static_cast<double>(n0)) << ",," << curve.seed << "\n";
    for (size_t stage = 1; stage < curve.cuts.size(); ++stage) {
        const int64_t sz = curve.chunk_size(stage);
        const double bits = curve.chunk_bits[stage - 1];
        out << curve.cuts[stage] << "," << sz << "," << fmt(bits) << ","
            << fmt(bits / static_cast<double>(sz)) << ","
            << fmt(curve.val_bits_per_record[stage - 1]) << "," << curve.seed << "\n";
    }
}

}  // namespace repc::preq
