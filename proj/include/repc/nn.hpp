#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "repc/matrix.hpp"

namespace repc::nn {

// Parameters are stored row-major so flattened and serialized blocks read in
// row order.
using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class HeadKind { categorical, gaussian };

struct NetSpec {
    int64_t vocab = 0;
    int64_t emb_dim = 64;
    int64_t n_tokens = 0;
    std::vector<int64_t> hidden{256, 256};
    HeadKind head = HeadKind::categorical;
    int64_t slots = 0;    // categorical: output slots
    int64_t classes = 0;  // categorical: classes per slot
    int64_t out_dim = 0;  // gaussian: target dimensionality
    double lambda_z = 0.0;  // gaussian: declared target precision

    int64_t input_dim() const { return n_tokens * emb_dim; }
    int64_t head_dim() const { return head == HeadKind::categorical ? slots * classes : out_dim; }
    int64_t parameter_count() const;
    void validate() const;
};

// Token rows plus one of the two target kinds.
struct DataView {
    const TokenMatrix* w = nullptr;
    const TokenMatrix* y = nullptr;       // categorical targets, rows x slots
    const QuantizedMatrix* z = nullptr;   // gaussian targets on the lambda_z lattice
};

struct Model {
    NetSpec spec;
    MatRM embedding;                         // vocab x emb_dim
    std::vector<MatRM> weights;              // in x out, hidden layers then head
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd log_std;                 // gaussian head: global per-dim log std

    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& p);
};

// Fan-in-scaled uniform weights, zero biases, zero log-std; deterministic for
// a given seed.
Model init(const NetSpec& spec, uint64_t seed);

struct NllResult {
    double total_bits = 0.0;
    double per_record_bits = 0.0;
    int64_t records = 0;
};

// Categorical head: -log2 softmax probability of the true class, summed over
// slots. Gaussian head: discretized-Gaussian bits at the declared precision.
NllResult nll_bits(const Model& model, const DataView& data, std::span<const int64_t> rows);

// Exact reverse-mode gradient of the total nll in nats (bits x ln 2), flattened
// in Model::flatten order.
Eigen::VectorXd gradients(const Model& model, const DataView& data,
                          std::span<const int64_t> rows);

struct TrainConfig {
    double lr = 1e-3;
    int64_t max_epochs = 500;
    int64_t patience = 10;
    // Validation must improve by at least this many bits/record to reset the
    // patience counter; without it a saturating softmax "improves" forever.
    double min_delta = 1e-4;
    int64_t batch_size = 64;
    uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    void validate() const;
};

struct TrainResult {
    Model model;                       // parameters from the best validation epoch
    double best_val_bits_per_record = 0.0;
    int64_t epochs_run = 0;
};

// Adam with early stopping: stops after `patience` epochs without strict
// validation improvement, throws train_error if validation exceeds 10x its
// initial value. Sequential and bit-reproducible for a given seed.
TrainResult train(Model model, const DataView& data, std::span<const int64_t> train_rows,
                  std::span<const int64_t> val_rows, const TrainConfig& cfg);

// Versioned binary checkpoint: magic "RPCM", u32 version, spec fields, then
// row-major f64 parameter blocks in flatten order.
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

}  // namespace repc::nn
