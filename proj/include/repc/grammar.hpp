#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "repc/codelen.hpp"
#include "repc/matrix.hpp"
#include "repc/metrics_types.hpp"
#include "repc/rng.hpp"

namespace repc::grammar {

// Symbol levels: 0 = terminal part of speech (indices 0..T-1); rule levels
// 1..depth hold `width` non-terminals each ("r0".."r{depth-1}" in the printed
// form). The top level is `depth`.
struct Sym {
    int32_t level = 0;
    int32_t index = 0;
    friend bool operator==(const Sym&, const Sym&) = default;
};

struct Production {
    Sym parent;
    Sym left;
    Sym right;
    int32_t alt_id = 0;
    bool recursive = false;
};

struct GrammarParams {
    int64_t t = 5;
    int64_t width = 3;
    int64_t depth = 2;
    int64_t k = 100;
    void validate() const;
};

// Binary CFG built level by level. Child pairs are enumerated in a canonical
// left-major order (level 1: part-of-speech t ascending, then transition
// offset delta in {1, 2}; higher levels: left index, then right index) and
// parents are assigned round-robin, parent = enumeration index mod width.
// The top level additionally carries recursive alternatives over all ordered
// pairs of top symbols, assigned the same way, so the right child determines
// the parent. The start symbol expands to every top-level non-terminal and is
// purely structural: it owns no semantics map.
struct GrammarSpec {
    GrammarParams params;
    std::vector<Production> productions;            // ordered by alt_id
    std::vector<std::vector<int32_t>> alts_of;      // flat symbol id -> alt ids

    int32_t pos_of(int64_t word) const { return static_cast<int32_t>(word % params.t); }
    int32_t flat(Sym s) const;
    int64_t symbol_count() const { return params.t + params.depth * params.width; }
    int64_t alternative_count() const { return static_cast<int64_t>(productions.size()); }
    std::string symbol_name(Sym s) const;
};

GrammarSpec build_grammar(const GrammarParams& params);
GrammarSpec build_grammar(int64_t t, int64_t width, int64_t depth, int64_t k);

// The exact textual form of the grammar, one line per non-terminal:
//   start: r1_1 | r1_2
//   r0_1: T_1 " " T_2 | ...
std::string pretty_print(const GrammarSpec& spec);

// Part-of-speech transition process: first POS uniform on {1, 2}, each next
// POS is previous +1 or +2 wrapped into 1..T, word uniform among the K/T words
// of that POS. Requires T | K.
TokenMatrix sample_sentences(const GrammarSpec& spec, int64_t n, int64_t m, uint64_t seed);

struct ParseNode {
    int32_t alt_id = -1;   // internal nodes
    int64_t word = -1;     // leaves
    std::unique_ptr<ParseNode> left;
    std::unique_ptr<ParseNode> right;
    bool is_leaf() const { return word >= 0; }
};

struct ParseTree {
    std::unique_ptr<ParseNode> root;
};

// Earley recognition followed by canonical tree extraction: lowest alternative
// id first, then leftmost split point, recursively. Throws parse_error when
// the sentence has no derivation from the start symbol and contract_error on
// out-of-range tokens.
ParseTree earley_parse(const GrammarSpec& spec, std::span<const int32_t> sentence);

std::vector<int32_t> leaves(const ParseTree& tree);

// Word embeddings (K x D) plus one linear map (2D x D) per production
// alternative, all Skellam(0, 1, lambda) on the lattice.
struct SemanticsProgram {
    QuantizedMatrix embeddings;
    std::vector<QuantizedMatrix> rule_maps;
    Lattice lattice;
};

SemanticsProgram sample_semantics(const GrammarSpec& spec, int64_t d, double lambda,
                                  uint64_t seed);

// Hierarchical evaluation: leaf value is the dequantized word embedding, an
// internal node computes [left, right] * A_alt, the root value is returned.
Eigen::VectorXd decode(const GrammarSpec& spec, const SemanticsProgram& semantics,
                       const ParseTree& tree);

struct GrammarGenParams {
    GrammarParams grammar;
    int64_t n = 1000;
    int64_t m = 16;
    int64_t d = 10;
    double lambda = 0.01;
    double r = 0.01;
    uint64_t seed = 0;
    void validate() const;
};

struct GeneratedGrammar {
    TokenMatrix w;
    QuantizedMatrix z;
    GrammarSpec spec;
    SemanticsProgram semantics;
    QuantizedMatrix noise;  // 0x0 when r = 0
};

// Sample sentences, parse, evaluate the semantics, quantize to the lattice and
// add Skellam(0, r, lambda) noise. Sentence length must be a positive multiple
// of 2^depth or no parse exists.
GeneratedGrammar generate(const GrammarGenParams& params);

// Closed-form complexity terms:
//   K(p_w)    = K log2 T + T (T + 1)
//   K(W|p_w)  = N M log2(2 K / T)
//   K(f)      = Skellam bits of embeddings plus all rule maps at sigma = 1
//   K(Z|W,f)  = Skellam bits of the stored noise at sigma = r
metrics::ComplexityBreakdown complexity(const GrammarSpec& spec,
                                        const SemanticsProgram& semantics, const TokenMatrix& w,
                                        const QuantizedMatrix& noise, double r);

}  // namespace repc::grammar
