#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "irvd/metrics.hpp"

using namespace irvd;

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

eval::ConfusionMatrix matrix_of(std::vector<std::vector<std::int64_t>> rows) {
    eval::ConfusionMatrix cm;
    auto k = static_cast<Eigen::Index>(rows.size());
    cm.counts.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            cm.counts(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    return cm;
}

}  // namespace

TEST_CASE("confusion counts land at (true, predicted)") {
    std::vector<int> y_true{0, 1, 2, 1, 0, 2, 2};
    std::vector<int> y_pred{0, 2, 1, 1, 0, 2, 2};
    auto cm = eval::confusion(y_true, y_pred, 3);

    CHECK(cm.num_classes() == 3);
    CHECK(cm.total() == 7);
    CHECK(cm.counts(0, 0) == 2);
    CHECK(cm.counts(1, 1) == 1);
    CHECK(cm.counts(1, 2) == 1);
    CHECK(cm.counts(2, 1) == 1);
    CHECK(cm.counts(2, 2) == 2);
    CHECK(cm.counts(0, 1) == 0);
    CHECK(cm.counts(0, 2) == 0);
    CHECK(cm.counts(1, 0) == 0);
    CHECK(cm.counts(2, 0) == 0);
}

TEST_CASE("confusion validates its inputs") {
    CHECK_THROWS_AS(eval::confusion({0}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(eval::confusion({0, 2}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(eval::confusion({0, -1}, {0, 1}, 2), std::invalid_argument);
    CHECK_THROWS_AS(eval::confusion({0}, {0}, 0), std::invalid_argument);
    // An empty prediction set is fine; the matrix is just zero.
    auto cm = eval::confusion({}, {}, 2);
    CHECK(cm.total() == 0);
}

TEST_CASE("normalization divides by row sums and leaves zero rows alone") {
    auto cm = matrix_of({{2, 2}, {0, 0}});
    Eigen::MatrixXd n = eval::normalize(cm);
    CHECK(n(0, 0) == 0.5);
    CHECK(n(0, 1) == 0.5);
    CHECK(n(1, 0) == 0.0);
    CHECK(n(1, 1) == 0.0);

    auto cm3 = matrix_of({{8, 1, 1}, {0, 5, 5}, {1, 0, 3}});
    Eigen::MatrixXd n3 = eval::normalize(cm3);
    for (int r = 0; r < 3; ++r)
        CHECK(n3.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n3(0, 0) == 0.8);
    CHECK(n3(2, 2) == 0.75);
}

TEST_CASE("per-class metrics follow the column/row ratios") {
    // A worked binary benchmark: 5004 negative and 2594 positive samples.
    auto cm = matrix_of({{4253, 751}, {156, 2438}});
    auto rep = eval::report(cm, {"good", "flawed"});

    REQUIRE(rep.classes.size() == 2);
    CHECK(rep.classes[0].name == "good");
    CHECK(rep.classes[1].name == "flawed");
    CHECK(rep.classes[0].support == 5004);
    CHECK(rep.classes[1].support == 2594);
    CHECK(rep.total_support == 7598);

    // Identical expressions to the implementation: exact equality holds.
    double p0 = 4253.0 / 4409.0;
    double r0 = 4253.0 / 5004.0;
    double p1 = 2438.0 / 3189.0;
    double r1 = 2438.0 / 2594.0;
    CHECK(rep.classes[0].precision == p0);
    CHECK(rep.classes[0].recall == r0);
    CHECK(rep.classes[1].precision == p1);
    CHECK(rep.classes[1].recall == r1);
    CHECK(rep.classes[0].f1 == doctest::Approx(2 * p0 * r0 / (p0 + r0)).epsilon(1e-15));
    CHECK(rep.classes[1].f1 == doctest::Approx(2 * p1 * r1 / (p1 + r1)).epsilon(1e-15));
    CHECK(rep.accuracy == 6691.0 / 7598.0);

    // Two-decimal views of the same numbers. Published tables for this matrix
    // sometimes show 0.77 / 0.91 here; the arithmetic says otherwise.
    CHECK(round2(rep.classes[1].precision) == 0.76);
    CHECK(round2(rep.classes[0].f1) == 0.90);
    CHECK(round2(rep.classes[0].precision) == 0.96);
    CHECK(round2(rep.classes[0].recall) == 0.85);
    CHECK(round2(rep.classes[1].recall) == 0.94);
    CHECK(round2(rep.classes[1].f1) == 0.84);
    CHECK(round2(rep.accuracy) == 0.88);
}

TEST_CASE("micro averages collapse to accuracy and weighted recall equals accuracy") {
    auto cm = matrix_of({{40, 3, 7}, {2, 25, 3}, {5, 5, 60}});
    auto rep = eval::report(cm);

    CHECK(rep.micro.precision == rep.accuracy);
    CHECK(rep.micro.recall == rep.accuracy);
    CHECK(rep.micro.f1 == rep.accuracy);
    CHECK(rep.micro.support == rep.total_support);
    // Sum over classes of (n_c/N) * (tp_c/n_c) telescopes to diag/N.
    CHECK(rep.weighted.recall == doctest::Approx(rep.accuracy).epsilon(1e-12));
}

TEST_CASE("macro averages are unweighted class means") {
    auto cm = matrix_of({{10, 0}, {5, 5}});
    auto rep = eval::report(cm);
    double p0 = 10.0 / 15.0, r0 = 1.0, f0 = 2 * p0 * r0 / (p0 + r0);
    double p1 = 1.0, r1 = 0.5, f1 = 2 * p1 * r1 / (p1 + r1);
    CHECK(rep.macro.precision == doctest::Approx((p0 + p1) / 2).epsilon(1e-15));
    CHECK(rep.macro.recall == doctest::Approx((r0 + r1) / 2).epsilon(1e-15));
    CHECK(rep.macro.f1 == doctest::Approx((f0 + f1) / 2).epsilon(1e-15));

    double w0 = 10.0 / 20.0, w1 = 10.0 / 20.0;
    CHECK(rep.weighted.precision == doctest::Approx(w0 * p0 + w1 * p1).epsilon(1e-15));
}

TEST_CASE("zero denominators yield zero with a flag instead of NaN") {
    // Nothing was ever predicted as class 1.
    auto cm = matrix_of({{3, 0}, {2, 0}});
    auto rep = eval::report(cm);
    CHECK(rep.classes[1].precision == 0.0);
    CHECK(rep.classes[1].recall == 0.0);
    CHECK(rep.classes[1].f1 == 0.0);
    CHECK(rep.classes[1].zero_division);
    CHECK(!rep.classes[0].zero_division);

    // Class 0 has no true samples at all.
    auto cm2 = matrix_of({{0, 0}, {1, 4}});
    auto rep2 = eval::report(cm2);
    CHECK(rep2.classes[0].support == 0);
    CHECK(rep2.classes[0].recall == 0.0);
    CHECK(rep2.classes[0].zero_division);
    CHECK(std::isfinite(rep2.macro.f1));
}

TEST_CASE("report validates class counts and naming") {
    auto cm = matrix_of({{1}});
    CHECK_THROWS_AS(eval::report(cm), std::invalid_argument);

    auto cm2 = matrix_of({{1, 0}, {0, 1}});
    CHECK_THROWS_AS(eval::report(cm2, {"only-one"}), std::invalid_argument);

    auto rep = eval::report(cm2);
    CHECK(rep.classes[0].name == "0");
    CHECK(rep.classes[1].name == "1");
}

TEST_CASE("baseline accuracy is the majority-class rate") {
    double b = eval::baseline_accuracy({5004, 2594});
    CHECK(b == 5004.0 / 7598.0);
    CHECK(std::round(b * 10000.0) / 10000.0 == 0.6586);

    CHECK(eval::baseline_accuracy({10, 10}) == 0.5);
    CHECK(eval::baseline_accuracy({1, 0, 3}) == 0.75);
    CHECK_THROWS_AS(eval::baseline_accuracy({}), std::invalid_argument);
    CHECK_THROWS_AS(eval::baseline_accuracy({0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(eval::baseline_accuracy({3, -1}), std::invalid_argument);
}

TEST_CASE("the rendered report has the classic layout") {
    auto cm = matrix_of({{4253, 751}, {156, 2438}});
    auto rep = eval::report(cm, {"good", "flawed"});
    std::string text = eval::render_report(rep);

    CHECK(text.find("precision") != std::string::npos);
    CHECK(text.find("recall") != std::string::npos);
    CHECK(text.find("f1-score") != std::string::npos);
    CHECK(text.find("support") != std::string::npos);
    CHECK(text.find("good") != std::string::npos);
    CHECK(text.find("flawed") != std::string::npos);
    CHECK(text.find("accuracy") != std::string::npos);
    CHECK(text.find("macro avg") != std::string::npos);
    CHECK(text.find("weighted avg") != std::string::npos);

    // Two-decimal cells from the worked example.
    CHECK(text.find("0.96") != std::string::npos);   // precision, class 0
    CHECK(text.find("0.76") != std::string::npos);   // precision, class 1
    CHECK(text.find("0.90") != std::string::npos);   // f1, class 0
    CHECK(text.find("0.88") != std::string::npos);   // accuracy
    CHECK(text.find("5004") != std::string::npos);
    CHECK(text.find("2594") != std::string::npos);
    CHECK(text.find("7598") != std::string::npos);
    CHECK(text.find("zero division") == std::string::npos);
}

TEST_CASE("the rendered report flags zero divisions") {
    auto cm = matrix_of({{3, 0}, {2, 0}});
    std::string text = eval::render_report(eval::report(cm));
    CHECK(text.find("(zero division)") != std::string::npos);
}
