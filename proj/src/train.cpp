#include "irvd/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "irvd/common.hpp"
#include "irvd/optimizer.hpp"

namespace irvd::nn {

namespace {

int argmax_lowest(const Eigen::RowVectorXd& row) {
    int best = 0;
    for (int j = 1; j < row.size(); ++j)
        if (row(j) > row(best))
            best = j;
    return best;
}

void check_dataset(const Dataset& data, const ModelConfig& config, const char* what) {
    if (data.size() == 0)
        throw std::invalid_argument(std::string(what) + " set is empty");
    if (!data.embedding)
        throw std::invalid_argument(std::string(what) + " set has no embedding");
    if (data.embedding->cols() != config.input_dim)
        throw std::invalid_argument(std::string(what) + " set embedding width mismatch");
    if (data.seq_len != config.seq_len)
        throw std::invalid_argument(std::string(what) + " set seq_len mismatch");
    if (data.labels.size() != data.ids.size())
        throw std::invalid_argument(std::string(what) + " set label count mismatch");
    for (int y : data.labels)
        if (y < 0 || y >= config.num_classes)
            throw std::invalid_argument(std::string(what) + " set label out of range");
}

/// Builds the BatchInput and label slice for samples [begin, end) of `order`.
struct BatchSlice {
    BatchInput input;
    std::vector<int> labels;
};

BatchSlice make_batch(const Dataset& data, const std::vector<std::size_t>& order,
                      std::size_t begin, std::size_t end) {
    std::vector<const std::vector<int>*> ids;
    std::vector<int> labels;
    ids.reserve(end - begin);
    labels.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        ids.push_back(&data.ids[order[i]]);
        labels.push_back(data.labels[order[i]]);
    }
    return {BatchInput(data.embedding, std::move(ids), data.seq_len), std::move(labels)};
}

}  // namespace

EvalResult evaluate(const ModelParams& params, const Dataset& data,
                    const std::vector<double>& class_weights, int batch_size) {
    check_dataset(data, params.config, "evaluation");
    if (batch_size < 1)
        throw std::invalid_argument("evaluate: batch_size must be positive");
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
        std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
        BatchSlice batch = make_batch(data, order, begin, end);
        ForwardResult r = forward_batch(params, batch.input, batch.labels, class_weights, nullptr);
        loss_sum += r.loss * static_cast<double>(end - begin);
        for (std::size_t i = 0; i < batch.labels.size(); ++i)
            if (argmax_lowest(r.probs.row(static_cast<Eigen::Index>(i))) == batch.labels[i])
                ++correct;
    }
    return {loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

Prediction predict(const ModelParams& params, const Dataset& data, int batch_size) {
    if (data.size() == 0)
        throw std::invalid_argument("predict: empty dataset");
    if (!data.embedding)
        throw std::invalid_argument("predict: dataset has no embedding");
    if (batch_size < 1)
        throw std::invalid_argument("predict: batch_size must be positive");
    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Prediction pred;
    pred.labels.reserve(n);
    pred.probs.resize(static_cast<Eigen::Index>(n), params.config.num_classes);
    for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
        std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
        std::vector<const std::vector<int>*> ids;
        ids.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i)
            ids.push_back(&data.ids[i]);
        BatchInput input(data.embedding, std::move(ids), data.seq_len);
        ForwardResult r = forward_batch(params, input, {}, {}, nullptr);
        for (std::size_t i = 0; i < end - begin; ++i) {
            pred.probs.row(static_cast<Eigen::Index>(begin + i)) =
                r.probs.row(static_cast<Eigen::Index>(i));
            pred.labels.push_back(argmax_lowest(r.probs.row(static_cast<Eigen::Index>(i))));
        }
    }
    return pred;
}

FitResult fit(const ModelParams& initial, const Dataset& train, const Dataset& test,
              const TrainingSchedule& schedule, std::ostream* log) {
    const ModelConfig& config = initial.config;
    check_dataset(train, config, "training");
    check_dataset(test, config, "test");
    if (schedule.batch_size < 1)
        throw std::invalid_argument("fit: batch_size must be positive");
    if (schedule.initial_lr <= 0.0)
        throw std::invalid_argument("fit: initial_lr must be positive");
    if (schedule.max_epochs < 1)
        throw std::invalid_argument("fit: max_epochs must be positive");
    if (!schedule.class_weights.empty() &&
        static_cast<int>(schedule.class_weights.size()) != config.num_classes)
        throw std::invalid_argument("fit: class_weights size must equal num_classes");

    FitResult result;
    result.params = initial;
    AdamState adam(result.params);
    PlateauScheduler plateau(schedule.plateau_factor, schedule.plateau_patience);
    EarlyStopper stopper(schedule.early_stop_patience);
    Rng rng(stage_seed(schedule.seed, "fit-shuffle"));

    ModelParams best = result.params;
    double lr = schedule.initial_lr;
    const std::size_t n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(schedule.batch_size)) {
            std::size_t end = std::min(n, begin + static_cast<std::size_t>(schedule.batch_size));
            BatchSlice batch = make_batch(train, order, begin, end);
            ForwardCache cache;
            ForwardResult fwd = forward_batch(result.params, batch.input, batch.labels,
                                              schedule.class_weights, &cache);
            if (!std::isfinite(fwd.loss))
                throw DataError("non-finite training loss at epoch " + std::to_string(epoch) +
                                ", batch starting at sample " + std::to_string(begin));
            loss_sum += fwd.loss * static_cast<double>(end - begin);
            for (std::size_t i = 0; i < batch.labels.size(); ++i)
                if (argmax_lowest(fwd.probs.row(static_cast<Eigen::Index>(i))) == batch.labels[i])
                    ++correct;
            GradSet grads = backward_batch(result.params, cache, batch.input, batch.labels,
                                           schedule.class_weights);
            adam_step(result.params, grads, adam, lr);
        }

        EvalResult held = evaluate(result.params, test, schedule.class_weights,
                                   schedule.batch_size);
        if (!std::isfinite(held.loss))
            throw DataError("non-finite test loss at epoch " + std::to_string(epoch));

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(n);
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
        stats.test_loss = held.loss;
        stats.test_accuracy = held.accuracy;
        stats.learning_rate = lr;
        result.history.epochs.push_back(stats);
        if (log)
            *log << "epoch " << epoch << "/" << schedule.max_epochs << "  train_loss "
                 << stats.train_loss << "  train_acc " << stats.train_accuracy << "  test_loss "
                 << stats.test_loss << "  test_acc " << stats.test_accuracy << "  lr " << lr
                 << "\n";

        if (stopper.observe(held.loss)) {
            best = result.params;
            result.history.best_epoch = epoch - 1;
            result.history.best_test_loss = held.loss;
        }
        lr = plateau.observe(held.loss, lr);
        if (stopper.should_stop()) {
            result.history.early_stopped = true;
            break;
        }
    }

    // The final model is the best one seen, whether or not the stop fired.
    if (result.history.best_epoch >= 0)
        result.params = std::move(best);
    return result;
}

}  // namespace irvd::nn
