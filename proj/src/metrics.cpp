#include "irvd/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace irvd::eval {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int num_classes) {
    if (num_classes < 1)
        throw std::invalid_argument("confusion: num_classes must be positive");
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.counts.setZero(num_classes, num_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        int t = y_true[i];
        int p = y_pred[i];
        if (t < 0 || t >= num_classes || p < 0 || p >= num_classes)
            throw std::invalid_argument("confusion: label outside 0..K-1");
        ++cm.counts(t, p);
    }
    return cm;
}

Eigen::MatrixXd normalize(const ConfusionMatrix& cm) {
    Eigen::MatrixXd out(cm.counts.rows(), cm.counts.cols());
    for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
        double row_sum = static_cast<double>(cm.counts.row(r).sum());
        for (Eigen::Index c = 0; c < cm.counts.cols(); ++c)
            out(r, c) = row_sum == 0.0 ? 0.0 : static_cast<double>(cm.counts(r, c)) / row_sum;
    }
    return out;
}

namespace {

double safe_ratio(std::int64_t num, std::int64_t den, bool* zero_division) {
    if (den == 0) {
        if (zero_division)
            *zero_division = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

double f1_of(double precision, double recall) {
    double s = precision + recall;
    return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

}  // namespace

ClassificationReport report(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
    const int k = cm.num_classes();
    if (k < 2)
        throw std::invalid_argument("report: need at least 2 classes");
    if (!class_names.empty() && static_cast<int>(class_names.size()) != k)
        throw std::invalid_argument("report: class name count mismatch");

    ClassificationReport rep;
    rep.total_support = cm.total();
    std::int64_t diagonal = 0;
    for (int c = 0; c < k; ++c)
        diagonal += cm.counts(c, c);
    rep.accuracy = rep.total_support == 0
                       ? 0.0
                       : static_cast<double>(diagonal) / static_cast<double>(rep.total_support);

    for (int c = 0; c < k; ++c) {
        ClassMetrics m;
        m.name = class_names.empty() ? std::to_string(c) : class_names[static_cast<std::size_t>(c)];
        std::int64_t tp = cm.counts(c, c);
        std::int64_t predicted = cm.counts.col(c).sum();
        std::int64_t actual = cm.counts.row(c).sum();
        m.support = actual;
        m.precision = safe_ratio(tp, predicted, &m.zero_division);
        m.recall = safe_ratio(tp, actual, &m.zero_division);
        m.f1 = f1_of(m.precision, m.recall);
        rep.classes.push_back(std::move(m));
    }

    // Single-label micro averages collapse to accuracy: pooled FP = pooled FN.
    rep.micro.name = "micro avg";
    rep.micro.support = rep.total_support;
    rep.micro.precision = rep.accuracy;
    rep.micro.recall = rep.accuracy;
    rep.micro.f1 = rep.accuracy;

    rep.macro.name = "macro avg";
    rep.macro.support = rep.total_support;
    rep.weighted.name = "weighted avg";
    rep.weighted.support = rep.total_support;
    for (const ClassMetrics& m : rep.classes) {
        rep.macro.precision += m.precision / k;
        rep.macro.recall += m.recall / k;
        rep.macro.f1 += m.f1 / k;
        if (rep.total_support > 0) {
            double w = static_cast<double>(m.support) / static_cast<double>(rep.total_support);
            rep.weighted.precision += w * m.precision;
            rep.weighted.recall += w * m.recall;
            rep.weighted.f1 += w * m.f1;
        }
    }
    return rep;
}

double baseline_accuracy(const std::vector<std::int64_t>& supports) {
    if (supports.empty())
        throw std::invalid_argument("baseline_accuracy: no supports");
    std::int64_t total = 0;
    std::int64_t top = 0;
    for (std::int64_t s : supports) {
        if (s < 0)
            throw std::invalid_argument("baseline_accuracy: negative support");
        total += s;
        top = std::max(top, s);
    }
    if (total == 0)
        throw std::invalid_argument("baseline_accuracy: empty supports");
    return static_cast<double>(top) / static_cast<double>(total);
}

std::string render_report(const ClassificationReport& report) {
    std::size_t name_width = 12;  // fits "weighted avg"
    for (const ClassMetrics& m : report.classes)
        name_width = std::max(name_width, m.name.size());

    auto row = [&](const std::string& name, const std::string& p, const std::string& r,
                   const std::string& f, const std::string& support) {
        char buf[192];
        std::snprintf(buf, sizeof(buf), "%*s %10s %10s %10s %10s\n", static_cast<int>(name_width),
                      name.c_str(), p.c_str(), r.c_str(), f.c_str(), support.c_str());
        return std::string(buf);
    };
    auto cell = [](double v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::string out = row("", "precision", "recall", "f1-score", "support");
    out += "\n";
    for (const ClassMetrics& m : report.classes) {
        out += row(m.name, cell(m.precision), cell(m.recall), cell(m.f1),
                   std::to_string(m.support));
        if (m.zero_division)
            out.insert(out.size() - 1, "  (zero division)");
    }
    out += "\n";
    out += row("accuracy", "", "", cell(report.accuracy), std::to_string(report.total_support));
    for (const ClassMetrics* agg : {&report.micro, &report.macro, &report.weighted})
        out += row(agg->name, cell(agg->precision), cell(agg->recall), cell(agg->f1),
                   std::to_string(agg->support));
    return out;
}

}  // namespace irvd::eval
