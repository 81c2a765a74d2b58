#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace irvd::eval {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

    int num_classes() const { return static_cast<int>(counts.rows()); }
    std::int64_t total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int num_classes);

/// Row-normalized matrix; zero rows stay zero.
Eigen::MatrixXd normalize(const ConfusionMatrix& cm);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    /// True when a zero denominator forced precision or recall to 0.
    bool zero_division = false;
};

struct ClassificationReport {
    std::vector<ClassMetrics> classes;
    double accuracy = 0.0;
    std::int64_t total_support = 0;
    ClassMetrics micro;     // pooled counts; equals accuracy for single-label
    ClassMetrics macro;     // unweighted class mean
    ClassMetrics weighted;  // support-weighted class mean
};

/// Full-precision metrics; rendering rounds, the struct does not.
/// class_names may be empty (classes are then named by index).
ClassificationReport report(const ConfusionMatrix& cm,
                            const std::vector<std::string>& class_names = {});

/// Majority-class rate.
double baseline_accuracy(const std::vector<std::int64_t>& supports);

/// Aligned text table in the classic classification-report layout
/// (two-decimal cells).
std::string render_report(const ClassificationReport& report);

}  // namespace irvd::eval
