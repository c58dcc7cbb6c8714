#include "repc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "repc/errors.hpp"
#include "repc/rng.hpp"

namespace repc::nn {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLn2Pi = 1.83787706640934548356;

}  // namespace

void NetSpec::validate() const {
    if (vocab < 1) throw contract_error("NetSpec: vocab must be >= 1");
    if (emb_dim < 1) throw contract_error("NetSpec: emb_dim must be >= 1");
    if (n_tokens < 1) throw contract_error("NetSpec: n_tokens must be >= 1");
    if (hidden.empty()) throw contract_error("NetSpec: at least one hidden layer required");
    for (const int64_t h : hidden) {
        if (h < 1) throw contract_error("NetSpec: hidden sizes must be >= 1");
    }
    if (head == HeadKind::categorical) {
        if (slots < 1 || classes < 2) {
            throw contract_error("NetSpec: categorical head needs slots >= 1, classes >= 2");
        }
    } else {
        if (out_dim < 1) throw contract_error("NetSpec: gaussian head needs out_dim >= 1");
        if (!(lambda_z > 0.0)) throw contract_error("NetSpec: gaussian head needs lambda_z > 0");
    }
}

int64_t NetSpec::parameter_count() const {
    validate();
    int64_t count = vocab * emb_dim;
    int64_t in = input_dim();
    for (const int64_t h : hidden) {
        count += in * h + h;
        in = h;
    }
    count += in * head_dim() + head_dim();
    if (head == HeadKind::gaussian) count += out_dim;
    return count;
}

Model init(const NetSpec& spec, uint64_t seed) {
    spec.validate();
    Model m;
    m.spec = spec;
    Philox rng(seed, make_stream(StreamTag::nn_init));
    const auto uniform = [&](double bound) { return (2.0 * rng.next_double() - 1.0) * bound; };

    m.embedding.resize(spec.vocab, spec.emb_dim);
    const double emb_bound = 1.0 / std::sqrt(static_cast<double>(spec.emb_dim));
    for (int64_t i = 0; i < spec.vocab; ++i) {
        for (int64_t j = 0; j < spec.emb_dim; ++j) m.embedding(i, j) = uniform(emb_bound);
    }

    int64_t in = spec.input_dim();
    std::vector<int64_t> outs(spec.hidden.begin(), spec.hidden.end());
    outs.push_back(spec.head_dim());
    for (const int64_t out : outs) {
        MatRM w(in, out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int64_t i = 0; i < in; ++i) {
            for (int64_t j = 0; j < out; ++j) w(i, j) = uniform(bound);
        }
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(out));
        in = out;
    }
    if (spec.head == HeadKind::gaussian) m.log_std = Eigen::VectorXd::Zero(spec.out_dim);
    return m;
}

Eigen::VectorXd Model::flatten() const {
    int64_t total = spec.parameter_count();
    Eigen::VectorXd p(total);
    int64_t at = 0;
    const auto put = [&](const double* src, int64_t n) {
        std::memcpy(p.data() + at, src, static_cast<size_t>(n) * sizeof(double));
        at += n;
    };
    put(embedding.data(), embedding.size());
    for (size_t l = 0; l < weights.size(); ++l) {
        put(weights[l].data(), weights[l].size());
        put(biases[l].data(), biases[l].size());
    }
    if (spec.head == HeadKind::gaussian) put(log_std.data(), log_std.size());
    return p;
}

void Model::unflatten(const Eigen::VectorXd& p) {
    if (p.size() != spec.parameter_count()) throw contract_error("unflatten: size mismatch");
    int64_t at = 0;
    const auto take = [&](double* dst, int64_t n) {
        std::memcpy(dst, p.data() + at, static_cast<size_t>(n) * sizeof(double));
        at += n;
    };
    take(embedding.data(), embedding.size());
    for (size_t l = 0; l < weights.size(); ++l) {
        take(weights[l].data(), weights[l].size());
        take(biases[l].data(), biases[l].size());
    }
    if (spec.head == HeadKind::gaussian) take(log_std.data(), log_std.size());
}

namespace {

void check_view(const NetSpec& spec, const DataView& data) {
    if (data.w == nullptr) throw contract_error("nn: DataView missing tokens");
    if (data.w->cols != spec.n_tokens) throw contract_error("nn: token count mismatch");
    if (spec.head == HeadKind::categorical) {
        if (data.y == nullptr || data.y->cols != spec.slots) {
            throw contract_error("nn: categorical targets missing or mis-shaped");
        }
    } else {
        if (data.z == nullptr || data.z->cols != spec.out_dim) {
            throw contract_error("nn: gaussian targets missing or mis-shaped");
        }
    }
}

struct Forward {
    MatRM x;                                 // batch x input_dim
    std::vector<MatRM> acts;                 // post-ReLU activations per hidden layer
    MatRM out;                               // batch x head_dim
};

Forward forward_pass(const Model& m, const DataView& data, std::span<const int64_t> rows) {
    const auto& spec = m.spec;
    const auto b = static_cast<int64_t>(rows.size());
    Forward f;
    f.x.resize(b, spec.input_dim());
    for (int64_t i = 0; i < b; ++i) {
        const int32_t* toks = data.w->row(rows[static_cast<size_t>(i)]);
        for (int64_t t = 0; t < spec.n_tokens; ++t) {
            const int32_t tok = toks[t];
            if (tok < 0 || tok >= spec.vocab) throw contract_error("nn: token out of range");
            f.x.block(i, t * spec.emb_dim, 1, spec.emb_dim) = m.embedding.row(tok);
        }
    }
    const MatRM* prev = &f.x;
    const size_t n_hidden = m.spec.hidden.size();
    f.acts.reserve(n_hidden);
    for (size_t l = 0; l < n_hidden; ++l) {
        MatRM h = (*prev * m.weights[l]).rowwise() + m.biases[l].transpose();
        h = h.cwiseMax(0.0);
        f.acts.push_back(std::move(h));
        prev = &f.acts.back();
    }
    f.out.noalias() = *prev * m.weights[n_hidden];
    f.out.rowwise() += m.biases[n_hidden].transpose();
    return f;
}

// Total nll in nats; when grad_out is non-null it receives d(nll)/d(out), and
// d(nll)/d(log_std) is accumulated for the gaussian head.
double head_nll_nats(const Model& m, const DataView& data, std::span<const int64_t> rows,
                     const MatRM& out, MatRM* grad_out,
                     Eigen::VectorXd* grad_log_std) {
    const auto& spec = m.spec;
    const auto b = static_cast<int64_t>(rows.size());
    double nll = 0.0;
    if (grad_out != nullptr) grad_out->setZero(out.rows(), out.cols());

    if (spec.head == HeadKind::categorical) {
        for (int64_t i = 0; i < b; ++i) {
            for (int64_t s = 0; s < spec.slots; ++s) {
                const auto logits = out.block(i, s * spec.classes, 1, spec.classes);
                const double mx = logits.maxCoeff();
                double sum = 0.0;
                for (int64_t c = 0; c < spec.classes; ++c) sum += std::exp(logits(0, c) - mx);
                const double lse = mx + std::log(sum);
                const int32_t target = data.y->at(rows[static_cast<size_t>(i)], s);
                if (target < 0 || target >= spec.classes) {
                    throw contract_error("nn: class target out of range");
                }
                nll += lse - logits(0, target);
                if (grad_out != nullptr) {
                    for (int64_t c = 0; c < spec.classes; ++c) {
                        const double p = std::exp(logits(0, c) - lse);
                        (*grad_out)(i, s * spec.classes + c) = p - (c == target ? 1.0 : 0.0);
                    }
                }
            }
        }
    } else {
        const Eigen::VectorXd sd = m.log_std.array().exp().matrix();
        if (grad_log_std != nullptr) grad_log_std->setZero(spec.out_dim);
        for (int64_t i = 0; i < b; ++i) {
            for (int64_t d = 0; d < spec.out_dim; ++d) {
                const double z = data.z->value(rows[static_cast<size_t>(i)], d);
                const double mu = out(i, d);
                const double e = (z - mu) / sd(d);
                nll += 0.5 * e * e + m.log_std(d) + 0.5 * kLn2Pi - std::log(spec.lambda_z);
                if (grad_out != nullptr) (*grad_out)(i, d) = -e / sd(d);
                if (grad_log_std != nullptr) (*grad_log_std)(d) += 1.0 - e * e;
            }
        }
    }
    if (!std::isfinite(nll)) {
        throw numerical_error("nn: non-finite loss in forward pass (batch of " +
                              std::to_string(b) + " records)");
    }
    return nll;
}

}  // namespace

NllResult nll_bits(const Model& model, const DataView& data, std::span<const int64_t> rows) {
    model.spec.validate();
    check_view(model.spec, data);
    if (rows.empty()) throw contract_error("nll_bits: empty batch");
    // bounded batches keep the activation memory flat on large datasets
    constexpr int64_t kChunk = 512;
    double nats = 0.0;
    for (size_t at = 0; at < rows.size(); at += kChunk) {
        const auto n = std::min<size_t>(kChunk, rows.size() - at);
        const auto chunk = rows.subspan(at, n);
        const Forward f = forward_pass(model, data, chunk);
        nats += head_nll_nats(model, data, chunk, f.out, nullptr, nullptr);
    }
    NllResult r;
    r.records = static_cast<int64_t>(rows.size());
    r.total_bits = nats / kLn2;
    r.per_record_bits = r.total_bits / static_cast<double>(r.records);
    return r;
}

namespace {

struct GradientBuffers {
    MatRM embedding;
    std::vector<MatRM> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd log_std;

    explicit GradientBuffers(const Model& m) {
        embedding.setZero(m.embedding.rows(), m.embedding.cols());
        for (const auto& w : m.weights) weights.emplace_back(MatRM::Zero(w.rows(), w.cols()));
        for (const auto& b : m.biases) biases.emplace_back(Eigen::VectorXd::Zero(b.size()));
        if (m.spec.head == HeadKind::gaussian) log_std = Eigen::VectorXd::Zero(m.spec.out_dim);
    }

    void set_zero() {
        embedding.setZero();
        for (auto& w : weights) w.setZero();
        for (auto& b : biases) b.setZero();
        if (log_std.size() > 0) log_std.setZero();
    }

    Eigen::VectorXd flatten(const Model& m) const {
        Eigen::VectorXd p(m.spec.parameter_count());
        int64_t at = 0;
        const auto put = [&](const double* src, int64_t n) {
            std::memcpy(p.data() + at, src, static_cast<size_t>(n) * sizeof(double));
            at += n;
        };
        put(embedding.data(), embedding.size());
        for (size_t l = 0; l < weights.size(); ++l) {
            put(weights[l].data(), weights[l].size());
            put(biases[l].data(), biases[l].size());
        }
        if (m.spec.head == HeadKind::gaussian) put(log_std.data(), log_std.size());
        return p;
    }
};

// Accumulates d(total nll in nats)/d(params) for one batch.
double backward_pass(const Model& m, const DataView& data, std::span<const int64_t> rows,
                     GradientBuffers& g) {
    const auto& spec = m.spec;
    const Forward f = forward_pass(m, data, rows);
    MatRM delta;
    Eigen::VectorXd* gls = spec.head == HeadKind::gaussian ? &g.log_std : nullptr;
    Eigen::VectorXd gls_local;
    if (gls != nullptr) {
        gls_local.setZero(spec.out_dim);
        gls = &gls_local;
    }
    const double nats = head_nll_nats(m, data, rows, f.out, &delta, gls);
    if (gls != nullptr) g.log_std += gls_local;

    const size_t n_hidden = spec.hidden.size();
    for (size_t l = n_hidden + 1; l-- > 0;) {
        const MatRM& input = l == 0 ? f.x : f.acts[l - 1];
        g.weights[l].noalias() += input.transpose() * delta;
        g.biases[l] += delta.colwise().sum().transpose();
        if (l == 0) {
            delta = delta * m.weights[0].transpose();  // d nll / d x
            break;
        }
        MatRM prev = delta * m.weights[l].transpose();
        // ReLU gate
        prev = (f.acts[l - 1].array() > 0.0).select(prev, 0.0);
        delta = std::move(prev);
    }
    // scatter into embedding rows
    const auto b = static_cast<int64_t>(rows.size());
    for (int64_t i = 0; i < b; ++i) {
        const int32_t* toks = data.w->row(rows[static_cast<size_t>(i)]);
        for (int64_t t = 0; t < spec.n_tokens; ++t) {
            g.embedding.row(toks[t]) += delta.block(i, t * spec.emb_dim, 1, spec.emb_dim);
        }
    }
    return nats;
}

}  // namespace

Eigen::VectorXd gradients(const Model& model, const DataView& data,
                          std::span<const int64_t> rows) {
    model.spec.validate();
    check_view(model.spec, data);
    if (rows.empty()) throw contract_error("gradients: empty batch");
    GradientBuffers g(model);
    backward_pass(model, data, rows, g);
    return g.flatten(model);
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw contract_error("TrainConfig: lr must be > 0");
    if (patience < 1) throw contract_error("TrainConfig: patience must be >= 1");
    if (min_delta < 0.0) throw contract_error("TrainConfig: min_delta must be >= 0");
    if (max_epochs < 1) throw contract_error("TrainConfig: max_epochs must be >= 1");
    if (batch_size < 1) throw contract_error("TrainConfig: batch_size must be >= 1");
}

TrainResult train(Model model, const DataView& data, std::span<const int64_t> train_rows,
                  std::span<const int64_t> val_rows, const TrainConfig& cfg) {
    cfg.validate();
    model.spec.validate();
    check_view(model.spec, data);
    if (train_rows.empty() || val_rows.empty()) {
        throw contract_error("train: empty train or validation set");
    }

    Eigen::VectorXd params = model.flatten();
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(params.size());
    GradientBuffers grads(model);

    const double initial_val = nll_bits(model, data, val_rows).per_record_bits;
    double best_val = initial_val;
    double patience_level = initial_val;
    Eigen::VectorXd best_params = params;
    int64_t bad_epochs = 0;
    int64_t steps = 0;
    int64_t epoch = 0;

    std::vector<int64_t> order(train_rows.begin(), train_rows.end());
    Philox shuffle_rng(cfg.seed, make_stream(StreamTag::nn_epoch_order));

    for (epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle(shuffle_rng, order);
        for (size_t at = 0; at < order.size(); at += cfg.batch_size) {
            const auto n = std::min<size_t>(cfg.batch_size, order.size() - at);
            grads.set_zero();
            backward_pass(model, data, std::span<const int64_t>(order.data() + at, n), grads);
            const Eigen::VectorXd g = grads.flatten(model);
            ++steps;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(steps));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(steps));
            m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
            m2 = cfg.beta2 * m2.array().matrix() + (1.0 - cfg.beta2) * g.cwiseProduct(g);
            params.array() -=
                cfg.lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.eps);
            model.unflatten(params);
        }
        const double val = nll_bits(model, data, val_rows).per_record_bits;
        if (val > 10.0 * std::max(initial_val, 1e-9)) {
            throw train_error("train: validation diverged at epoch " + std::to_string(epoch));
        }
        if (val < best_val) {
            best_val = val;
            best_params = params;
        }
        if (val < patience_level - cfg.min_delta) {
            patience_level = val;
            bad_epochs = 0;
        } else if (++bad_epochs >= cfg.patience) {
            ++epoch;
            break;
        }
    }

    model.unflatten(best_params);
    return TrainResult{std::move(model), best_val, epoch};
}

namespace {

constexpr char kMagic[4] = {'R', 'P', 'C', 'M'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw format_error("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
    model.spec.validate();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw format_error("checkpoint: cannot open " + path + " for writing");
    f.write(kMagic, 4);
    write_pod(f, kVersion);
    const auto& s = model.spec;
    write_pod(f, static_cast<uint8_t>(s.head));
    write_pod(f, s.vocab);
    write_pod(f, s.emb_dim);
    write_pod(f, s.n_tokens);
    write_pod(f, static_cast<int64_t>(s.hidden.size()));
    for (const int64_t h : s.hidden) write_pod(f, h);
    write_pod(f, s.slots);
    write_pod(f, s.classes);
    write_pod(f, s.out_dim);
    write_pod(f, s.lambda_z);
    const Eigen::VectorXd p = model.flatten();
    f.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!f) throw format_error("checkpoint: write failed for " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw format_error("checkpoint: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0) {
        throw format_error("checkpoint: bad magic in " + path);
    }
    if (read_pod<uint32_t>(f) != kVersion) throw format_error("checkpoint: unsupported version");
    NetSpec s;
    s.head = static_cast<HeadKind>(read_pod<uint8_t>(f));
    s.vocab = read_pod<int64_t>(f);
    s.emb_dim = read_pod<int64_t>(f);
    s.n_tokens = read_pod<int64_t>(f);
    const int64_t n_hidden = read_pod<int64_t>(f);
    if (n_hidden < 1 || n_hidden > 64) throw format_error("checkpoint: bad hidden layer count");
    s.hidden.clear();
    for (int64_t i = 0; i < n_hidden; ++i) s.hidden.push_back(read_pod<int64_t>(f));
    s.slots = read_pod<int64_t>(f);
    s.classes = read_pod<int64_t>(f);
    s.out_dim = read_pod<int64_t>(f);
    s.lambda_z = read_pod<double>(f);
    s.validate();

    Model m = init(s, 0);
    Eigen::VectorXd p(s.parameter_count());
    f.read(reinterpret_cast<char*>(p.data()),
           static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!f) throw format_error("checkpoint: truncated parameter block in " + path);
    m.unflatten(p);
    return m;
}

}  // namespace repc::nn
