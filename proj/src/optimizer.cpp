#include "irvd/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace irvd::nn {

AdamState::AdamState(const ModelParams& params) {
    m.reserve(params.tensors.size());
    v.reserve(params.tensors.size());
    for (const Tensor& t : params.tensors) {
        m.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
        v.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
    }
}

void adam_step(ModelParams& params, const GradSet& grads, AdamState& state, double lr) {
    if (grads.tensors.size() != params.tensors.size() ||
        state.m.size() != params.tensors.size())
        throw std::invalid_argument("adam_step: mismatched parameter/gradient/state layout");
    ++state.timestep;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double correct1 = 1.0 - std::pow(b1, static_cast<double>(state.timestep));
    const double correct2 = 1.0 - std::pow(b2, static_cast<double>(state.timestep));
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        const Eigen::MatrixXd& g = grads.tensors[i].value;
        Eigen::MatrixXd& p = params.tensors[i].value;
        if (g.rows() != p.rows() || g.cols() != p.cols())
            throw std::invalid_argument("adam_step: gradient shape mismatch at " +
                                        params.tensors[i].name);
        state.m[i] = (b1 * state.m[i] + (1.0 - b1) * g).eval();
        state.v[i] = (b2 * state.v[i].array() + (1.0 - b2) * g.array().square()).matrix();
        Eigen::ArrayXXd m_hat = state.m[i].array() / correct1;
        Eigen::ArrayXXd v_hat = state.v[i].array() / correct2;
        p.array() -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
}

PlateauScheduler::PlateauScheduler(double factor, int patience)
    : factor_(factor), patience_(patience) {
    if (factor <= 0.0 || factor >= 1.0)
        throw std::invalid_argument("PlateauScheduler: factor must be in (0, 1)");
    if (patience < 1)
        throw std::invalid_argument("PlateauScheduler: patience must be at least 1");
}

double PlateauScheduler::observe(double loss, double current_lr) {
    if (loss < best_) {
        best_ = loss;
        bad_ = 0;
        return current_lr;
    }
    if (++bad_ >= patience_) {
        bad_ = 0;
        return current_lr * factor_;
    }
    return current_lr;
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
    if (patience < 1)
        throw std::invalid_argument("EarlyStopper: patience must be at least 1");
}

bool EarlyStopper::observe(double loss) {
    ++observed_;
    if (loss < best_) {
        best_ = loss;
        bad_ = 0;
        best_index_ = observed_ - 1;
        return true;
    }
    ++bad_;
    return false;
}

}  // namespace irvd::nn
