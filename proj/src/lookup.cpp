#include "repc/lookup.hpp"

#include <cmath>

namespace repc::lookup {

int64_t LookupParams::table_rows() const {
    int64_t rows = 1;
    for (int64_t i = 0; i < q; ++i) {
        if (rows > (int64_t{1} << 62) / k) {
            throw contract_error("LookupParams: k^q does not fit in 63 bits");
        }
        rows *= k;
    }
    return rows;
}

void LookupParams::validate() const {
    if (n < 1) throw contract_error("LookupParams: n must be >= 1");
    if (m < 1) throw contract_error("LookupParams: m must be >= 1");
    if (k < 1) throw contract_error("LookupParams: k must be >= 1");
    if (d < 1) throw contract_error("LookupParams: d must be >= 1");
    if (q < 1 || m % q != 0) throw contract_error("LookupParams: q must divide m");
    if (d % chunks_per_sentence() != 0) {
        throw contract_error("LookupParams: m/q must divide d");
    }
    if (!(lambda > 0.0)) throw contract_error("LookupParams: lambda must be > 0");
    if (r < 0.0) throw contract_error("LookupParams: r must be >= 0");
    (void)table_rows();
}

LookupTable::LookupTable(const LookupParams& params, int64_t materialize_cap_entries)
    : params_(params) {
    params_.validate();
    materialized_ = params_.table_entries() <= materialize_cap_entries;
    if (materialized_) {
        const int64_t rows = params_.table_rows();
        dense_ = QuantizedMatrix(rows, cols(), lattice());
        dense_rows_.resize(static_cast<size_t>(rows));
        for (int64_t r = 0; r < rows; ++r) {
            dense_rows_[static_cast<size_t>(r)] = sample_row(r);
            for (int64_t c = 0; c < cols(); ++c) {
                dense_.at(r, c) = dense_rows_[static_cast<size_t>(r)][static_cast<size_t>(c)];
            }
        }
    }
}

std::vector<int64_t> LookupTable::sample_row(int64_t r) const {
    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = lattice();
    Philox rng(params_.seed, make_stream(StreamTag::lookup_table_row, static_cast<uint64_t>(r)));
    const auto row = codelen::skellam_sample(sp, 1, cols(), rng);
    return row.idx;
}

const std::vector<int64_t>& LookupTable::row(int64_t r) const {
    if (r < 0 || r >= rows()) throw contract_error("LookupTable: row index out of range");
    if (materialized_) return dense_rows_[static_cast<size_t>(r)];
    auto it = cache_.find(r);
    if (it == cache_.end()) it = cache_.emplace(r, sample_row(r)).first;
    return it->second;
}

double LookupTable::code_length_bits() const {
    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = lattice();
    if (materialized_) return codelen::total_code_length(dense_, sp);
    return static_cast<double>(params_.table_entries()) * codelen::skellam_entropy_bits(sp);
}

const QuantizedMatrix& LookupTable::dense() const {
    if (!materialized_) throw contract_error("LookupTable: table not materialized");
    return dense_;
}

namespace {

int64_t ngram_row_index(const int32_t* tokens, int64_t q, int64_t k) {
    int64_t idx = 0;
    for (int64_t j = 0; j < q; ++j) {
        idx = idx * k + tokens[j];
    }
    return idx;
}

}  // namespace

GeneratedLookup generate(const LookupParams& params, int64_t materialize_cap_entries) {
    params.validate();

    LookupProgram program{params, LookupTable(params, materialize_cap_entries)};

    TokenMatrix w(params.n, params.m);
    Philox wrng(params.seed, make_stream(StreamTag::lookup_sentences));
    for (auto& t : w.tok) t = static_cast<int32_t>(wrng.next_below(static_cast<uint64_t>(params.k)));

    QuantizedMatrix z = decode(program, w);

    QuantizedMatrix noise;
    if (params.r > 0.0) {
        codelen::SkellamParams np;
        np.sigma = params.r;
        np.lattice = {params.lambda};
        Philox nrng(params.seed, make_stream(StreamTag::lookup_noise));
        noise = codelen::skellam_sample(np, params.n, params.d, nrng);
        for (size_t i = 0; i < z.idx.size(); ++i) z.idx[i] += noise.idx[i];
    }

    return GeneratedLookup{std::move(w), std::move(z), std::move(program), std::move(noise)};
}

QuantizedMatrix decode(const LookupProgram& program, const TokenMatrix& w) {
    const auto& p = program.params;
    if (w.cols != p.m) throw contract_error("decode: sentence length mismatch");
    for (const int32_t t : w.tok) {
        if (t < 0 || t >= p.k) throw contract_error("decode: token out of range");
    }
    QuantizedMatrix z(w.rows, p.d, {p.lambda});
    const int64_t chunks = p.chunks_per_sentence();
    const int64_t cols = p.embed_cols();
    for (int64_t i = 0; i < w.rows; ++i) {
        for (int64_t pos = 0; pos < chunks; ++pos) {
            const int64_t row = ngram_row_index(w.row(i) + pos * p.q, p.q, p.k);
            const auto& emb = program.table.row(row);
            for (int64_t c = 0; c < cols; ++c) {
                z.at(i, pos * cols + c) = emb[static_cast<size_t>(c)];
            }
        }
    }
    return z;
}

metrics::ComplexityBreakdown complexity(const LookupProgram& program, const TokenMatrix& w,
                                        const QuantizedMatrix& noise) {
    const auto& p = program.params;
    if (w.rows != p.n || w.cols != p.m) throw contract_error("complexity: W shape mismatch");
    metrics::ComplexityBreakdown b;
    b.k_pw = std::log2(static_cast<double>(p.k)) + std::log2(static_cast<double>(p.m));
    b.k_w_given_pw = static_cast<double>(p.n) * static_cast<double>(p.m) *
                     std::log2(static_cast<double>(p.k));
    b.k_f = program.table.code_length_bits();
    if (p.r > 0.0) {
        if (noise.rows != p.n || noise.cols != p.d) {
            throw contract_error("complexity: noise shape mismatch");
        }
        codelen::SkellamParams np;
        np.sigma = p.r;
        np.lattice = {p.lambda};
        b.k_z_given_wf = codelen::total_code_length(noise, np);  // throws on lattice mismatch
    } else {
        if (!noise.empty()) throw contract_error("complexity: unexpected noise for r = 0");
        b.k_z_given_wf = 0.0;
    }
    return b;
}

}  // namespace repc::lookup
