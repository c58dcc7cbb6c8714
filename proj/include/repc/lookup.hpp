#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "repc/codelen.hpp"
#include "repc/matrix.hpp"
#include "repc/metrics_types.hpp"
#include "repc/rng.hpp"

namespace repc::lookup {

struct LookupParams {
    int64_t n = 1000;       // samples
    int64_t m = 16;         // sentence length
    int64_t k = 10;         // vocabulary size
    int64_t d = 64;         // representation dimensionality
    int64_t q = 1;          // disentanglement factor (n-gram size)
    double lambda = 0.01;   // quantization precision
    double r = 0.01;        // noise std
    uint64_t seed = 0;

    int64_t chunks_per_sentence() const { return m / q; }
    int64_t embed_cols() const { return d / chunks_per_sentence(); }
    int64_t table_rows() const;   // k^q, overflow-checked
    int64_t table_entries() const { return table_rows() * embed_cols(); }
    void validate() const;
};

// The n-gram -> embedding table. Row i holds the embedding of the n-gram
// whose mixed-radix row-major index is i (first token most significant).
// Rows are drawn from per-row counter streams, so a table too large to
// materialize is sampled lazily, row by row, with identical values either way.
class LookupTable {
  public:
    LookupTable(const LookupParams& params, int64_t materialize_cap_entries);

    const std::vector<int64_t>& row(int64_t r) const;
    bool materialized() const { return materialized_; }
    int64_t rows() const { return params_.table_rows(); }
    int64_t cols() const { return params_.embed_cols(); }
    Lattice lattice() const { return {params_.lambda}; }

    // Exact sum of Skellam code lengths when materialized; the exact per-entry
    // expectation times the entry count otherwise.
    double code_length_bits() const;

    // Dense view; only valid when materialized.
    const QuantizedMatrix& dense() const;

  private:
    std::vector<int64_t> sample_row(int64_t r) const;

    LookupParams params_;
    bool materialized_ = false;
    std::vector<std::vector<int64_t>> dense_rows_;
    QuantizedMatrix dense_;
    mutable std::unordered_map<int64_t, std::vector<int64_t>> cache_;
};

struct LookupProgram {
    LookupParams params;
    LookupTable table;
};

struct GeneratedLookup {
    TokenMatrix w;
    QuantizedMatrix z;
    LookupProgram program;
    QuantizedMatrix noise;  // 0x0 when r = 0
};

inline constexpr int64_t kDefaultMaterializeCap = 4'000'000;

// Algorithm: sample the table, sample W uniformly, concatenate table rows for
// consecutive q-chunks, add Skellam(0, r, lambda) noise when r > 0.
GeneratedLookup generate(const LookupParams& params,
                         int64_t materialize_cap_entries = kDefaultMaterializeCap);

// Noiseless decoding of W under the program.
QuantizedMatrix decode(const LookupProgram& program, const TokenMatrix& w);

// Closed-form complexity terms:
//   K(p_w)     = log2 K + log2 M
//   K(W|p_w)   = N M log2 K
//   K(f)       = Skellam code length of the table at sigma = 1
//   K(Z|W,f)   = Skellam code length of the noise at sigma = r (0 when r = 0)
metrics::ComplexityBreakdown complexity(const LookupProgram& program, const TokenMatrix& w,
                                        const QuantizedMatrix& noise);

}  // namespace repc::lookup
