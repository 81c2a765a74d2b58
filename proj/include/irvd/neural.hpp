#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irvd/common.hpp"

namespace irvd::nn {

enum class CellKind { SRNN, GRU, LSTM };

std::string to_string(CellKind kind);
CellKind cell_from_string(const std::string& name);

struct ModelConfig {
    CellKind cell = CellKind::SRNN;
    bool bidirectional = false;
    int rnn_layers = 1;
    int dense_layers = 1;  // counts every FC layer including the K-wide output
    int units = 64;
    int input_dim = 100;
    int seq_len = 1000;
    int num_classes = 2;
};

/// Throws std::invalid_argument on shape violations; rnn_layers and
/// dense_layers scale together by design.
void validate(const ModelConfig& config);

/// Named tensor; biases are stored as 1-row matrices.
struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
};

struct ModelParams {
    ModelConfig config;
    std::vector<Tensor> tensors;  // canonical order: rnn layers (fwd, bwd), then dense

    Eigen::MatrixXd& at(const std::string& name);
    const Eigen::MatrixXd& at(const std::string& name) const;
};

/// Gradients mirror the parameter layout exactly.
using GradSet = ModelParams;

/// Glorot-uniform input/dense kernels, per-gate orthogonal recurrent kernels,
/// zero biases except the LSTM forget gate (1.0). Deterministic in the seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

ModelParams zeros_like(const ModelParams& params);

std::int64_t param_count(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Cells. Packed gate layout along columns: GRU [update z | reset r |
// candidate], LSTM [input i | forget f | candidate g | output o]. The update
// gate carries the previous state: h' = z*h + (1-z)*cand.
// ---------------------------------------------------------------------------

struct CellParams {
    Eigen::MatrixXd wx;     // D x (G*U)
    Eigen::MatrixXd wh;     // U x (G*U)
    Eigen::RowVectorXd b;   // G*U
};

/// Gate blocks per cell kind: SRNN 1, GRU 3, LSTM 4.
int gate_blocks(CellKind kind);

Eigen::VectorXd srnn_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                          const CellParams& p);
Eigen::VectorXd gru_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                         const CellParams& p);
struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};
LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& state, const CellParams& p);

enum class Direction { Forward, Backward, Bidirectional };

/// Runs one recurrent layer over a full sequence from zero initial state.
/// Output is L x U, or L x 2U for bidirectional (forward block first).
Eigen::MatrixXd run_layer(const Eigen::MatrixXd& seq, CellKind cell, Direction direction,
                          const CellParams& fwd, const CellParams* bwd = nullptr);

// ---------------------------------------------------------------------------
// Batched forward / backward.
// ---------------------------------------------------------------------------

/// Batch input abstraction: either token-id rows gathered from an embedding
/// matrix (pre-padded with zero vectors on the left) or explicit per-step
/// dense matrices (for tests and single-sample wrappers).
class BatchInput {
public:
    BatchInput(const Eigen::MatrixXd* embedding, std::vector<const std::vector<int>*> ids,
               int seq_len);
    explicit BatchInput(std::vector<Eigen::MatrixXd> steps);

    int batch_size() const { return batch_; }
    int steps() const { return steps_; }
    int dim() const { return dim_; }
    /// Materializes the B x D input at time step t.
    Eigen::MatrixXd step(int t) const;

private:
    const Eigen::MatrixXd* embedding_ = nullptr;
    std::vector<const std::vector<int>*> ids_;
    std::vector<Eigen::MatrixXd> dense_;
    int batch_ = 0;
    int steps_ = 0;
    int dim_ = 0;
};

struct DirectionCache {
    std::vector<Eigen::MatrixXd> h;      // state per processing position, B x U
    std::vector<Eigen::MatrixXd> gates;  // post-activation gates, B x (G*U)
    std::vector<Eigen::MatrixXd> c;      // LSTM cell state
    std::vector<Eigen::MatrixXd> tc;     // LSTM tanh(c)
    std::vector<Eigen::MatrixXd> rh;     // GRU reset*state product
};

struct LayerCache {
    DirectionCache dirs[2];
    std::vector<Eigen::MatrixXd> output;  // per step, B x width
};

struct ForwardCache {
    std::vector<Eigen::MatrixXd> input_steps;  // materialized X_t
    std::vector<LayerCache> layers;
    Eigen::MatrixXd head_input;                // B x head_width
    std::vector<Eigen::MatrixXd> dense_in;     // input of each dense layer
    Eigen::MatrixXd logits;
    Eigen::MatrixXd probs;
};

/// Row-wise numerically stable softmax.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

/// loss = -w[label] * ln(max(probs[label], 1e-12))
double weighted_cross_entropy(const Eigen::VectorXd& probs, int label,
                              const std::vector<double>& class_weights);

struct ForwardResult {
    Eigen::MatrixXd probs;  // B x K
    double loss = 0.0;      // mean weighted cross-entropy over the batch
};

/// Full forward pass over a batch. `cache` may be null when gradients are not
/// needed. Labels may be empty to skip the loss (probabilities only).
ForwardResult forward_batch(const ModelParams& params, const BatchInput& input,
                            const std::vector<int>& labels,
                            const std::vector<double>& class_weights, ForwardCache* cache);

/// Gradients of the mean weighted cross-entropy via backpropagation through
/// time across every step (padding rows included, as in the forward pass).
GradSet backward_batch(const ModelParams& params, const ForwardCache& cache,
                       const BatchInput& input, const std::vector<int>& labels,
                       const std::vector<double>& class_weights);

/// Single-sample forward: seq is seq_len x input_dim. Returns the K
/// probabilities.
Eigen::VectorXd forward(const ModelParams& params, const Eigen::MatrixXd& seq);

// ---------------------------------------------------------------------------
// Weights container.
// ---------------------------------------------------------------------------

/// Versioned binary container: magic, format version, ModelConfig, config
/// hash, then named tensors with shape prefixes, little-endian 64-bit floats,
/// row-major.
void save_params(const ModelParams& params, const std::string& path,
                 std::uint64_t config_hash = 0);

struct LoadedParams {
    ModelParams params;
    std::uint64_t config_hash = 0;
};
LoadedParams load_params(const std::string& path);

}  // namespace irvd::nn
