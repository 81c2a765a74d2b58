#pragma once

#include <iosfwd>
#include <vector>

#include "irvd/neural.hpp"

namespace irvd::nn {

/// Classifier-ready dataset: per-sample token ids (already truncated to the
/// final seq_len tokens; -1 marks out-of-vocabulary) resolved against a
/// shared embedding matrix at batch time, with pre-padding to seq_len.
struct Dataset {
    const Eigen::MatrixXd* embedding = nullptr;
    std::vector<std::vector<int>> ids;
    std::vector<int> labels;
    int seq_len = 0;

    std::size_t size() const { return ids.size(); }
};

struct TrainingSchedule {
    int batch_size = 64;
    double initial_lr = 1e-4;
    int plateau_patience = 5;
    double plateau_factor = 0.5;
    int early_stop_patience = 15;
    int max_epochs = 0;  // required; the source never states a default
    std::vector<double> class_weights;  // empty = unweighted
    std::uint64_t seed = 1;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;
    double learning_rate = 0.0;
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;  // 0-based index of the lowest test loss
    double best_test_loss = 0.0;
    bool early_stopped = false;
};

struct FitResult {
    ModelParams params;
    TrainingHistory history;
};

/// Trains with shuffled mini-batches, Adam, plateau halving, and early
/// stopping on the test loss; restores the best-test-loss parameters at the
/// end. Deterministic for a fixed schedule seed. Throws DataError on a
/// non-finite loss.
FitResult fit(const ModelParams& initial, const Dataset& train, const Dataset& test,
              const TrainingSchedule& schedule, std::ostream* log = nullptr);

struct Prediction {
    std::vector<int> labels;
    Eigen::MatrixXd probs;  // N x K
};

/// Argmax of the forward probabilities; ties break toward the lower index.
Prediction predict(const ModelParams& params, const Dataset& data, int batch_size = 64);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

EvalResult evaluate(const ModelParams& params, const Dataset& data,
                    const std::vector<double>& class_weights, int batch_size = 64);

}  // namespace irvd::nn
