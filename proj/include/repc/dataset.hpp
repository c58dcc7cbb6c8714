#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repc/matrix.hpp"

namespace repc::data {

// Shared dataset file format: UTF-8 line-delimited JSON with LF endings. The
// first line is {"meta": {"vocab", "dim", "lambda_z", "seed", "generator"}}
// (plus "classes" for symbolic targets); every following line is one record,
// {"w": [...], "z": [...]} for continuous targets or {"w": [...], "y": [...]}
// for symbolic ones.
struct DatasetMeta {
    int64_t vocab = 0;
    int64_t dim = 0;        // z width or y slot count
    double lambda_z = 0.0;  // continuous targets: declared precision
    uint64_t seed = 0;
    std::string generator;
    int64_t classes = 0;    // symbolic targets: values per slot
};

struct Dataset {
    DatasetMeta meta;
    TokenMatrix w;
    bool symbolic = false;
    TokenMatrix y;       // rows x meta.dim when symbolic
    QuantizedMatrix z;   // rows x meta.dim on the lambda_z lattice otherwise

    int64_t rows() const { return w.rows; }
    void validate() const;
};

void write_jsonl(const std::string& path, const Dataset& ds);

// Single-pass read with per-line validation; throws format_error naming the
// offending 1-based line. Continuous targets are quantized to the declared
// lambda_z lattice.
Dataset read_jsonl(const std::string& path);

struct Summary {
    int64_t records = 0;
    int64_t dim = 0;
    int64_t vocab = 0;
    bool symbolic = false;
    std::vector<int64_t> token_histogram;
};

Summary summarize(const Dataset& ds);

}  // namespace repc::data
