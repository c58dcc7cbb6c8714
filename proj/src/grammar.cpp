#include "repc/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace repc::grammar {

void GrammarParams::validate() const {
    if (t < 3) throw contract_error("GrammarParams: need at least 3 parts of speech");
    if (width < 1) throw contract_error("GrammarParams: width must be >= 1");
    if (depth < 1) throw contract_error("GrammarParams: depth must be >= 1");
    if (k < t) throw contract_error("GrammarParams: vocabulary must cover every part of speech");
    if (width > 2 * t) {
        throw contract_error("GrammarParams: width exceeds the level-0 child-pair count (2T)");
    }
}

int32_t GrammarSpec::flat(Sym s) const {
    if (s.level == 0) return s.index;
    return static_cast<int32_t>(params.t + (s.level - 1) * params.width + s.index);
}

std::string GrammarSpec::symbol_name(Sym s) const {
    if (s.level == 0) return "T_" + std::to_string(s.index + 1);
    return "r" + std::to_string(s.level - 1) + "_" + std::to_string(s.index + 1);
}

GrammarSpec build_grammar(const GrammarParams& params) {
    params.validate();
    GrammarSpec spec;
    spec.params = params;
    spec.alts_of.resize(static_cast<size_t>(spec.symbol_count()));

    const auto width = static_cast<int32_t>(params.width);
    const auto t = static_cast<int32_t>(params.t);
    int32_t alt_id = 0;
    const auto add = [&](Sym parent, Sym left, Sym right, bool recursive) {
        spec.productions.push_back({parent, left, right, alt_id, recursive});
        spec.alts_of[static_cast<size_t>(spec.flat(parent))].push_back(alt_id);
        ++alt_id;
    };

    // Level 1: pair every part of speech with its two permissible successors.
    int32_t enum_idx = 0;
    for (int32_t p = 0; p < t; ++p) {
        for (int32_t delta = 1; delta <= 2; ++delta) {
            const Sym left{0, p};
            const Sym right{0, (p + delta) % t};
            add({1, enum_idx % width}, left, right, false);
            ++enum_idx;
        }
    }

    // Higher levels: all ordered pairs of the previous level's symbols.
    for (int32_t level = 2; level <= params.depth; ++level) {
        enum_idx = 0;
        for (int32_t l = 0; l < width; ++l) {
            for (int32_t r = 0; r < width; ++r) {
                add({level, enum_idx % width}, {level - 1, l}, {level - 1, r}, false);
                ++enum_idx;
            }
        }
    }

    // Recursive alternatives over the top level keep long sentences parseable.
    const auto top = static_cast<int32_t>(params.depth);
    enum_idx = 0;
    for (int32_t l = 0; l < width; ++l) {
        for (int32_t r = 0; r < width; ++r) {
            add({top, enum_idx % width}, {top, l}, {top, r}, true);
            ++enum_idx;
        }
    }
    return spec;
}

GrammarSpec build_grammar(int64_t t, int64_t width, int64_t depth, int64_t k) {
    return build_grammar(GrammarParams{t, width, depth, k});
}

std::string pretty_print(const GrammarSpec& spec) {
    std::ostringstream out;
    const auto top = static_cast<int32_t>(spec.params.depth);
    out << "start:";
    for (int32_t i = 0; i < spec.params.width; ++i) {
        out << (i == 0 ? " " : " | ") << spec.symbol_name({top, i});
    }
    out << "\n";
    for (int32_t level = 1; level <= top; ++level) {
        for (int32_t i = 0; i < spec.params.width; ++i) {
            const Sym parent{level, i};
            out << spec.symbol_name(parent) << ":";
            bool first = true;
            for (const int32_t alt : spec.alts_of[static_cast<size_t>(spec.flat(parent))]) {
                const auto& prod = spec.productions[static_cast<size_t>(alt)];
                out << (first ? " " : " | ") << spec.symbol_name(prod.left) << " \" \" "
                    << spec.symbol_name(prod.right);
                first = false;
            }
            out << "\n";
        }
    }
    return out.str();
}

TokenMatrix sample_sentences(const GrammarSpec& spec, int64_t n, int64_t m, uint64_t seed) {
    const auto& p = spec.params;
    if (n < 1 || m < 1) throw contract_error("sample_sentences: shape must be nonempty");
    if (p.k % p.t != 0) {
        throw contract_error("sample_sentences: T must divide K for even POS classes");
    }
    const uint64_t words_per_pos = static_cast<uint64_t>(p.k / p.t);
    TokenMatrix w(n, m);
    Philox rng(seed, make_stream(StreamTag::grammar_sentences));
    for (int64_t i = 0; i < n; ++i) {
        int64_t pos = static_cast<int64_t>(rng.next_below(2));  // start: POS 1 or 2
        for (int64_t j = 0; j < m; ++j) {
            if (j > 0) pos = (pos + 1 + static_cast<int64_t>(rng.next_below(2))) % p.t;
            const int64_t word = pos + p.t * static_cast<int64_t>(rng.next_below(words_per_pos));
            w.at(i, j) = static_cast<int32_t>(word);
        }
    }
    return w;
}

namespace {

// (symbol, i, j) packed for the completed-span set; spans fit in 20 bits each.
uint64_t span_key(int32_t sym, int32_t i, int32_t j) {
    return (static_cast<uint64_t>(sym) << 40) | (static_cast<uint64_t>(i) << 20) |
           static_cast<uint64_t>(j);
}

struct EarleyItem {
    int32_t alt;
    int32_t dot;
    int32_t origin;
};

uint64_t item_key(const EarleyItem& it) {
    return (static_cast<uint64_t>(it.alt) << 24) | (static_cast<uint64_t>(it.dot) << 20) |
           static_cast<uint64_t>(it.origin);
}

class EarleyChart {
  public:
    EarleyChart(const GrammarSpec& spec, std::span<const int32_t> sentence)
        : spec_(spec), sentence_(sentence) {
        const auto m = static_cast<int32_t>(sentence.size());
        charts_.resize(static_cast<size_t>(m) + 1);
        seen_.resize(static_cast<size_t>(m) + 1);

        const auto top = static_cast<int32_t>(spec.params.depth);
        for (int32_t i = 0; i < spec.params.width; ++i) {
            predict({top, static_cast<int32_t>(i)}, 0);
        }
        for (int32_t pos = 0; pos <= m; ++pos) {
            process(pos);
            if (pos < m) scan(pos);
        }
    }

    bool derivable(Sym s, int32_t i, int32_t j) const {
        if (s.level == 0) return j == i + 1 && spec_.pos_of(sentence_[static_cast<size_t>(i)]) == s.index;
        return completed_.count(span_key(spec_.flat(s), i, j)) > 0;
    }

  private:
    void push(int32_t pos, EarleyItem it) {
        if (seen_[static_cast<size_t>(pos)].insert(item_key(it)).second) {
            charts_[static_cast<size_t>(pos)].push_back(it);
        }
    }

    void predict(Sym s, int32_t pos) {
        for (const int32_t alt : spec_.alts_of[static_cast<size_t>(spec_.flat(s))]) {
            push(pos, {alt, 0, pos});
        }
    }

    void process(int32_t pos) {
        auto& items = charts_[static_cast<size_t>(pos)];
        for (size_t n = 0; n < items.size(); ++n) {
            const EarleyItem it = items[n];
            const auto& prod = spec_.productions[static_cast<size_t>(it.alt)];
            if (it.dot < 2) {
                const Sym next = it.dot == 0 ? prod.left : prod.right;
                if (next.level >= 1) predict(next, pos);
                continue;
            }
            // completion: parent spans [origin, pos)
            const uint64_t key = span_key(spec_.flat(prod.parent), it.origin, pos);
            if (!completed_.insert(key).second) continue;
            for (const EarleyItem& waiting : charts_[static_cast<size_t>(it.origin)]) {
                if (waiting.dot >= 2) continue;
                const auto& wp = spec_.productions[static_cast<size_t>(waiting.alt)];
                const Sym expected = waiting.dot == 0 ? wp.left : wp.right;
                if (expected == prod.parent) {
                    push(pos, {waiting.alt, waiting.dot + 1, waiting.origin});
                }
            }
        }
    }

    void scan(int32_t pos) {
        const int32_t tok_pos = spec_.pos_of(sentence_[static_cast<size_t>(pos)]);
        for (const EarleyItem& it : charts_[static_cast<size_t>(pos)]) {
            if (it.dot >= 2) continue;
            const auto& prod = spec_.productions[static_cast<size_t>(it.alt)];
            const Sym expected = it.dot == 0 ? prod.left : prod.right;
            if (expected.level == 0 && expected.index == tok_pos) {
                push(pos + 1, {it.alt, it.dot + 1, it.origin});
            }
        }
    }

    const GrammarSpec& spec_;
    std::span<const int32_t> sentence_;
    std::vector<std::vector<EarleyItem>> charts_;
    std::vector<std::unordered_set<uint64_t>> seen_;
    std::unordered_set<uint64_t> completed_;
};

std::unique_ptr<ParseNode> extract(const GrammarSpec& spec, const EarleyChart& chart,
                                   std::span<const int32_t> sentence, Sym sym, int32_t i,
                                   int32_t j) {
    if (sym.level == 0) {
        auto leaf = std::make_unique<ParseNode>();
        leaf->word = sentence[static_cast<size_t>(i)];
        return leaf;
    }
    for (const int32_t alt : spec.alts_of[static_cast<size_t>(spec.flat(sym))]) {
        const auto& prod = spec.productions[static_cast<size_t>(alt)];
        for (int32_t split = i + 1; split < j; ++split) {
            if (chart.derivable(prod.left, i, split) && chart.derivable(prod.right, split, j)) {
                auto node = std::make_unique<ParseNode>();
                node->alt_id = alt;
                node->left = extract(spec, chart, sentence, prod.left, i, split);
                node->right = extract(spec, chart, sentence, prod.right, split, j);
                return node;
            }
        }
    }
    throw numerical_error("earley_parse: completed span has no decomposition");
}

}  // namespace

ParseTree earley_parse(const GrammarSpec& spec, std::span<const int32_t> sentence) {
    const auto m = static_cast<int64_t>(sentence.size());
    if (m < 1) throw contract_error("earley_parse: empty sentence");
    if (m >= (1 << 20)) throw contract_error("earley_parse: sentence too long");
    for (const int32_t t : sentence) {
        if (t < 0 || t >= spec.params.k) throw contract_error("earley_parse: token out of range");
    }

    const EarleyChart chart(spec, sentence);
    const auto top = static_cast<int32_t>(spec.params.depth);
    for (int32_t i = 0; i < spec.params.width; ++i) {
        const Sym root{top, i};  // start alternatives in index order
        if (chart.derivable(root, 0, static_cast<int32_t>(m))) {
            ParseTree tree;
            tree.root = extract(spec, chart, sentence, root, 0, static_cast<int32_t>(m));
            return tree;
        }
    }
    throw parse_error("earley_parse: sentence has no derivation from start");
}

namespace {

void collect_leaves(const ParseNode* node, std::vector<int32_t>& out) {
    if (node->is_leaf()) {
        out.push_back(static_cast<int32_t>(node->word));
        return;
    }
    collect_leaves(node->left.get(), out);
    collect_leaves(node->right.get(), out);
}

}  // namespace

std::vector<int32_t> leaves(const ParseTree& tree) {
    std::vector<int32_t> out;
    if (tree.root) collect_leaves(tree.root.get(), out);
    return out;
}

SemanticsProgram sample_semantics(const GrammarSpec& spec, int64_t d, double lambda,
                                  uint64_t seed) {
    if (d < 1) throw contract_error("sample_semantics: d must be >= 1");
    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = {lambda};

    SemanticsProgram sem;
    sem.lattice = {lambda};
    Philox erng(seed, make_stream(StreamTag::grammar_embeddings));
    sem.embeddings = codelen::skellam_sample(sp, spec.params.k, d, erng);
    Philox mrng(seed, make_stream(StreamTag::grammar_rule_maps));
    sem.rule_maps.reserve(spec.productions.size());
    for (size_t i = 0; i < spec.productions.size(); ++i) {
        sem.rule_maps.push_back(codelen::skellam_sample(sp, 2 * d, d, mrng));
    }
    return sem;
}

namespace {

struct SemanticsEvaluator {
    Eigen::MatrixXd embeddings;
    std::vector<Eigen::MatrixXd> maps;

    SemanticsEvaluator(const SemanticsProgram& sem) {
        const double s = sem.lattice.spacing;
        embeddings.resize(sem.embeddings.rows, sem.embeddings.cols);
        for (int64_t i = 0; i < sem.embeddings.rows; ++i) {
            for (int64_t j = 0; j < sem.embeddings.cols; ++j) {
                embeddings(i, j) = static_cast<double>(sem.embeddings.at(i, j)) * s;
            }
        }
        maps.reserve(sem.rule_maps.size());
        for (const auto& m : sem.rule_maps) {
            Eigen::MatrixXd a(m.rows, m.cols);
            for (int64_t i = 0; i < m.rows; ++i) {
                for (int64_t j = 0; j < m.cols; ++j) {
                    a(i, j) = static_cast<double>(m.at(i, j)) * s;
                }
            }
            maps.push_back(std::move(a));
        }
    }

    Eigen::RowVectorXd eval(const ParseNode* node) const {
        if (node->is_leaf()) return embeddings.row(node->word);
        const Eigen::RowVectorXd l = eval(node->left.get());
        const Eigen::RowVectorXd r = eval(node->right.get());
        Eigen::RowVectorXd x(l.size() + r.size());
        x << l, r;
        return x * maps[static_cast<size_t>(node->alt_id)];
    }
};

}  // namespace

Eigen::VectorXd decode(const GrammarSpec& spec, const SemanticsProgram& semantics,
                       const ParseTree& tree) {
    if (!tree.root) throw contract_error("decode: empty tree");
    if (semantics.rule_maps.size() != spec.productions.size()) {
        throw contract_error("decode: semantics is missing rule maps");
    }
    const SemanticsEvaluator ev(semantics);
    return ev.eval(tree.root.get()).transpose();
}

void GrammarGenParams::validate() const {
    grammar.validate();
    if (n < 1 || m < 1 || d < 1) throw contract_error("GrammarGenParams: shape must be nonempty");
    if (!(lambda > 0.0)) throw contract_error("GrammarGenParams: lambda must be > 0");
    if (r < 0.0) throw contract_error("GrammarGenParams: r must be >= 0");
    if (grammar.k % grammar.t != 0) {
        throw contract_error("GrammarGenParams: T must divide K");
    }
    const int64_t unit = int64_t{1} << grammar.depth;
    if (m % unit != 0) {
        throw contract_error(
            "GrammarGenParams: sentence length must be a positive multiple of 2^depth "
            "for a parse to exist");
    }
}

GeneratedGrammar generate(const GrammarGenParams& params) {
    params.validate();
    GeneratedGrammar out;
    out.spec = build_grammar(params.grammar);
    out.semantics = sample_semantics(out.spec, params.d, params.lambda, params.seed);
    out.w = sample_sentences(out.spec, params.n, params.m, params.seed);

    const SemanticsEvaluator ev(out.semantics);
    out.z = QuantizedMatrix(params.n, params.d, {params.lambda});
    for (int64_t i = 0; i < params.n; ++i) {
        const ParseTree tree =
            earley_parse(out.spec, std::span<const int32_t>(out.w.row(i), static_cast<size_t>(params.m)));
        const Eigen::RowVectorXd v = ev.eval(tree.root.get());
        for (int64_t c = 0; c < params.d; ++c) {
            out.z.at(i, c) = std::llround(v(c) / params.lambda);
        }
    }

    if (params.r > 0.0) {
        codelen::SkellamParams np;
        np.sigma = params.r;
        np.lattice = {params.lambda};
        Philox nrng(params.seed, make_stream(StreamTag::grammar_noise));
        out.noise = codelen::skellam_sample(np, params.n, params.d, nrng);
        for (size_t i = 0; i < out.z.idx.size(); ++i) out.z.idx[i] += out.noise.idx[i];
    }
    return out;
}

metrics::ComplexityBreakdown complexity(const GrammarSpec& spec,
                                        const SemanticsProgram& semantics, const TokenMatrix& w,
                                        const QuantizedMatrix& noise, double r) {
    const auto& p = spec.params;
    if (semantics.rule_maps.size() != spec.productions.size()) {
        throw contract_error("complexity: semantics is missing rule maps");
    }
    metrics::ComplexityBreakdown b;
    b.k_pw = static_cast<double>(p.k) * std::log2(static_cast<double>(p.t)) +
             static_cast<double>(p.t * (p.t + 1));
    // |t(.)| = 2K/T for every position including the start step.
    b.k_w_given_pw = static_cast<double>(w.rows) * static_cast<double>(w.cols) *
                     std::log2(2.0 * static_cast<double>(p.k) / static_cast<double>(p.t));

    codelen::SkellamParams sp;
    sp.sigma = 1.0;
    sp.lattice = semantics.lattice;
    b.k_f = codelen::total_code_length(semantics.embeddings, sp);
    for (const auto& m : semantics.rule_maps) b.k_f += codelen::total_code_length(m, sp);

    if (r > 0.0) {
        codelen::SkellamParams np;
        np.sigma = r;
        np.lattice = semantics.lattice;
        b.k_z_given_wf = codelen::total_code_length(noise, np);
    } else {
        if (!noise.empty()) throw contract_error("complexity: unexpected noise for r = 0");
        b.k_z_given_wf = 0.0;
    }
    return b;
}

}  // namespace repc::grammar
