#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "repc/dataset.hpp"
#include "repc/nn.hpp"

namespace repc::preq {

// Cut points 0 < c_0 < c_1 < ... < c_last = N over the encoded records. Chunk
// 0 is [0, c_0) at the raw code; chunk i >= 1 is [c_{i-1}, c_i), encoded by a
// model trained on everything before it.
struct ChunkSchedule {
    std::vector<int64_t> cuts;

    static ChunkSchedule linear(int64_t step, int64_t n);
    // Base-10 log-spaced boundaries from `start` to n.
    static ChunkSchedule log10(int64_t n_boundaries, int64_t start, int64_t n);
    void validate(int64_t n) const;
};

struct PrequentialConfig {
    nn::TrainConfig train;
    int64_t holdout = 400;         // validation records taken from the tail
    int64_t emb_dim = 64;
    std::vector<int64_t> hidden{256, 256};
    double raw_sigma = 1.0;        // gaussian raw-chunk code: N(0, raw_sigma) at lambda_z
    bool warm_start = false;       // carry the previous stage's weights (changes the
                                   // coding interpretation; off by default)
};

struct PrequentialCurve {
    std::vector<int64_t> cuts;
    double raw_bits = 0.0;
    std::vector<double> chunk_bits;             // one per trained stage
    std::vector<double> val_bits_per_record;    // early-stopped validation level per stage
    double final_full_bits = 0.0;               // final model evaluated on all encoded records
    int64_t n_records = 0;                      // encoded records (holdout excluded)
    int64_t holdout = 0;
    uint64_t seed = 0;

    double total_bits() const;
    // Bits per record of the last chunk, the curve's final level.
    double last_level_bits_per_record() const;
    int64_t chunk_size(size_t stage) const;  // stage 0 = raw chunk
};

// L_preq over the dataset: the last `holdout` records are reserved for early
// stopping and excluded from the accounting; every stage retrains from
// scratch on all records before its boundary.
PrequentialCurve prequential_code_length(const data::Dataset& ds, const ChunkSchedule& schedule,
                                         const PrequentialConfig& cfg, uint64_t seed);

struct Decomposition {
    double k_data_given_model = 0.0;  // N x final level
    double k_model = 0.0;             // L_preq minus the above, clamped at 0
    bool clamped = false;
};

Decomposition decompose(const PrequentialCurve& curve);

// CSV with one row per chunk: boundary, n_records_in_chunk, bits_chunk,
// bits_per_record, val_bits_per_record, seed. Lines starting with '#' carry
// the resolved configuration.
void write_curve_csv(std::ostream& out, const PrequentialCurve& curve,
                     const std::string& config_comment);

}  // namespace repc::preq
