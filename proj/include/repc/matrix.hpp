#pragma once

#include <cstdint>
#include <vector>

#include "repc/errors.hpp"

namespace repc {

// Quantization lattice: representable values are integer multiples of the
// spacing.
struct Lattice {
    double spacing = 1.0;

    void validate() const {
        if (!(spacing > 0.0)) throw contract_error("Lattice: spacing must be > 0");
    }
    friend bool operator==(const Lattice& a, const Lattice& b) {
        return a.spacing == b.spacing;
    }
};

// Dense row-major matrix of lattice indices; decoded value is index * spacing,
// exactly.
struct QuantizedMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int64_t> idx;
    Lattice lattice;

    QuantizedMatrix() = default;
    QuantizedMatrix(int64_t r, int64_t c, Lattice l)
        : rows(r), cols(c), idx(static_cast<size_t>(r * c), 0), lattice(l) {
        if (r < 0 || c < 0) throw contract_error("QuantizedMatrix: negative shape");
        l.validate();
    }

    int64_t& at(int64_t r, int64_t c) { return idx[static_cast<size_t>(r * cols + c)]; }
    int64_t at(int64_t r, int64_t c) const { return idx[static_cast<size_t>(r * cols + c)]; }
    double value(int64_t r, int64_t c) const { return static_cast<double>(at(r, c)) * lattice.spacing; }
    int64_t size() const { return rows * cols; }
    bool empty() const { return idx.empty(); }
};

// Dense row-major matrix of vocabulary tokens.
struct TokenMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int32_t> tok;

    TokenMatrix() = default;
    TokenMatrix(int64_t r, int64_t c) : rows(r), cols(c), tok(static_cast<size_t>(r * c), 0) {
        if (r < 0 || c < 0) throw contract_error("TokenMatrix: negative shape");
    }

    int32_t& at(int64_t r, int64_t c) { return tok[static_cast<size_t>(r * cols + c)]; }
    int32_t at(int64_t r, int64_t c) const { return tok[static_cast<size_t>(r * cols + c)]; }
    const int32_t* row(int64_t r) const { return tok.data() + r * cols; }
    int64_t size() const { return rows * cols; }
};

}  // namespace repc
