#pragma once

#include <limits>
#include <vector>

#include "irvd/neural.hpp"

namespace irvd::nn {

/// Bias-corrected Adam. Moment tensors mirror the parameter layout.
struct AdamState {
    std::vector<Eigen::MatrixXd> m;
    std::vector<Eigen::MatrixXd> v;
    std::int64_t timestep = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(const ModelParams& params);
};

void adam_step(ModelParams& params, const GradSet& grads, AdamState& state, double lr);

/// Halves (times `factor`) the learning rate after `patience` consecutive
/// epochs without a strictly lower loss; the counter resets on improvement
/// and after each halving.
class PlateauScheduler {
public:
    PlateauScheduler(double factor, int patience);

    /// Observes one epoch's monitored loss; returns the learning rate to use
    /// from the next epoch on.
    double observe(double loss, double current_lr);

    int bad_epochs() const { return bad_; }

private:
    double factor_;
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
};

/// Signals a stop after `patience` consecutive epochs without a strictly
/// lower loss. The caller snapshots parameters whenever observe() reports an
/// improvement and restores them when the stop fires.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience);

    /// Returns true when this epoch's loss is a strict improvement.
    bool observe(double loss);

    bool should_stop() const { return bad_ >= patience_; }
    int epochs_since_best() const { return bad_; }
    double best_loss() const { return best_; }
    /// 0-based index of the best epoch among those observed, -1 before any.
    int best_index() const { return best_index_; }

private:
    int patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int bad_ = 0;
    int best_index_ = -1;
    int observed_ = 0;
};

}  // namespace irvd::nn
