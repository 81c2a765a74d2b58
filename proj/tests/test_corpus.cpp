#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "irvd/common.hpp"
#include "irvd/corpus.hpp"

using namespace irvd;

namespace {

corpus::SampleRecord make_record(const std::string& id, const std::string& function_name,
                                 int cwe, tok::FlawLabel flaw, std::size_t token_count) {
    corpus::SampleRecord r;
    r.id = id;
    r.function_name = function_name;
    r.source_path = id + ".ll";
    r.cwe_id = cwe;
    r.flaw_label = flaw;
    r.tokens.assign(token_count, "tok");
    return r;
}

void append_many(std::vector<corpus::SampleRecord>& out, int count, const std::string& prefix,
                 int cwe, tok::FlawLabel flaw, std::size_t token_count) {
    const char* suffix = (flaw == tok::FlawLabel::Bad) ? "_bad" : "_good1";
    for (int i = 0; i < count; ++i) {
        std::string stem = prefix + std::to_string(i);
        out.push_back(make_record(stem, stem + suffix, cwe, flaw, token_count));
    }
}

std::size_t removed_by(const corpus::CorpusManifest& m, const std::string& filter) {
    for (const auto& [name, n] : m.selection_log)
        if (name == filter) return n;
    FAIL("no selection_log entry named ", filter);
    return 0;
}

std::map<int, std::size_t> count_cwes(const corpus::CorpusManifest& m) {
    std::map<int, std::size_t> counts;
    for (const auto& r : m.samples) ++counts[r.cwe_id];
    return counts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Selection filters.
// ---------------------------------------------------------------------------

TEST_CASE("selection removes weakness classes below the sample-count threshold") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 600, "a", 100, tok::FlawLabel::Bad, 400);
    append_many(records, 400, "b", 200, tok::FlawLabel::Bad, 400);

    corpus::SelectionParams params;  // min 500 samples, min 300 tokens
    auto manifest = corpus::select_samples(records, params);

    auto cwes = count_cwes(manifest);
    CHECK(cwes.size() == 1);
    CHECK(cwes[100] == 600);
    CHECK(removed_by(manifest, "class-count") == 400);
    CHECK(removed_by(manifest, "token-length") == 0);
}

TEST_CASE("good and bad samples of one weakness class are counted together") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 300, "bad", 50, tok::FlawLabel::Bad, 400);
    append_many(records, 250, "good", 50, tok::FlawLabel::Good, 400);

    auto manifest = corpus::select_samples(records, corpus::SelectionParams{});
    CHECK(manifest.samples.size() == 550);
    CHECK(manifest.class_counts.at(0) == 250);
    CHECK(manifest.class_counts.at(1) == 300);
}

TEST_CASE("count filter runs before length filter, so a class may end below the threshold") {
    // 600 samples pass the count filter; the length filter then strips the
    // short ones, leaving 328. With the filters reversed the class would
    // have been removed outright (328 < 500), so the surviving count is
    // direct evidence of the order.
    std::vector<corpus::SampleRecord> records;
    append_many(records, 272, "short", 690, tok::FlawLabel::Bad, 120);
    append_many(records, 328, "long", 690, tok::FlawLabel::Bad, 350);
    append_many(records, 600, "ctrl", 789, tok::FlawLabel::Bad, 350);

    auto manifest = corpus::select_samples(records, corpus::SelectionParams{});

    auto cwes = count_cwes(manifest);
    CHECK(cwes[690] == 328);
    CHECK(cwes[789] == 600);
    CHECK(removed_by(manifest, "class-count") == 0);
    CHECK(removed_by(manifest, "token-length") == 272);
    CHECK(328 < corpus::SelectionParams{}.min_class_count);
}

TEST_CASE("excluded weakness classes are dropped before anything else") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 550, "x", 15, tok::FlawLabel::Bad, 400);
    append_many(records, 600, "y", 100, tok::FlawLabel::Bad, 400);

    corpus::SelectionParams params;
    params.excluded_cwes = {15};
    auto manifest = corpus::select_samples(records, params);

    CHECK(removed_by(manifest, "excluded-cwes") == 550);
    CHECK(manifest.samples.size() == 600);
    CHECK(count_cwes(manifest).count(15) == 0);
}

TEST_CASE("name patterns keep only weakness-relevant functions") {
    std::vector<corpus::SampleRecord> records;
    records.push_back(make_record("a", "CWE121_fn_bad", 121, tok::FlawLabel::Bad, 50));
    records.push_back(make_record("b", "CWE121_fn_good1", 121, tok::FlawLabel::Good, 50));
    records.push_back(make_record("c", "CWE121_fn_goodG2B", 121, tok::FlawLabel::Good, 50));
    records.push_back(make_record("d", "helper", 121, tok::FlawLabel::Good, 50));
    records.push_back(make_record("e", "CWE121_fn_badge", 121, tok::FlawLabel::Bad, 50));

    corpus::SelectionParams params;
    params.min_class_count = 1;
    params.min_tokens = 1;

    SUBCASE("default patterns") {
        auto manifest = corpus::select_samples(records, params);
        std::set<std::string> names;
        for (const auto& r : manifest.samples) names.insert(r.function_name);
        CHECK(names == std::set<std::string>{"CWE121_fn_bad", "CWE121_fn_good1",
                                             "CWE121_fn_goodG2B"});
        CHECK(removed_by(manifest, "name-patterns") == 2);
    }

    SUBCASE("an empty pattern list disables the filter") {
        params.name_patterns.clear();
        auto manifest = corpus::select_samples(records, params);
        CHECK(manifest.samples.size() == 5);
        CHECK(removed_by(manifest, "name-patterns") == 0);
    }
}

TEST_CASE("selection with no effective filters preserves order and content") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 5, "p", 121, tok::FlawLabel::Bad, 40);
    append_many(records, 5, "q", 122, tok::FlawLabel::Good, 40);

    corpus::SelectionParams params;
    params.min_class_count = 1;
    params.min_tokens = 1;
    params.name_patterns.clear();
    auto manifest = corpus::select_samples(records, params);

    REQUIRE(manifest.samples.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(manifest.samples[i].id == records[i].id);
    for (const auto& [name, n] : manifest.selection_log) {
        CAPTURE(name);
        CHECK(n == 0);
    }
}

TEST_CASE("selection normalizes binary labels from the flaw label") {
    auto r = make_record("a", "f_bad", 121, tok::FlawLabel::Bad, 50);
    r.binary_label = 0;  // deliberately wrong on input
    auto g = make_record("b", "g_good1", 121, tok::FlawLabel::Good, 50);
    g.binary_label = 1;

    corpus::SelectionParams params;
    params.min_class_count = 1;
    params.min_tokens = 1;
    auto manifest = corpus::select_samples({r, g}, params);

    REQUIRE(manifest.samples.size() == 2);
    CHECK(manifest.samples[0].binary_label == 1);
    CHECK(manifest.samples[1].binary_label == 0);
}

TEST_CASE("selection that removes everything is an error") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 10, "a", 121, tok::FlawLabel::Bad, 400);
    CHECK_THROWS_AS(corpus::select_samples(records, corpus::SelectionParams{}), DataError);
}

TEST_CASE("selection log lists the filters in application order") {
    std::vector<corpus::SampleRecord> records;
    append_many(records, 600, "a", 121, tok::FlawLabel::Bad, 400);
    auto manifest = corpus::select_samples(records, corpus::SelectionParams{});

    REQUIRE(manifest.selection_log.size() == 4);
    CHECK(manifest.selection_log[0].first == "excluded-cwes");
    CHECK(manifest.selection_log[1].first == "name-patterns");
    CHECK(manifest.selection_log[2].first == "class-count");
    CHECK(manifest.selection_log[3].first == "token-length");
}

// ---------------------------------------------------------------------------
// Label assignment.
// ---------------------------------------------------------------------------

namespace {

corpus::CorpusManifest small_manifest() {
    corpus::CorpusManifest m;
    // CWE 190: 3 bad. CWE 121 and 122: 2 bad each (tie). Assorted good.
    for (int i = 0; i < 3; ++i)
        m.samples.push_back(make_record("a" + std::to_string(i), "a_bad", 190,
                                        tok::FlawLabel::Bad, 10));
    for (int i = 0; i < 2; ++i)
        m.samples.push_back(make_record("b" + std::to_string(i), "b_bad", 122,
                                        tok::FlawLabel::Bad, 10));
    for (int i = 0; i < 2; ++i)
        m.samples.push_back(make_record("c" + std::to_string(i), "c_bad", 121,
                                        tok::FlawLabel::Bad, 10));
    m.samples.push_back(make_record("g0", "g_good1", 190, tok::FlawLabel::Good, 10));
    m.samples.push_back(make_record("g1", "g_good1", 121, tok::FlawLabel::Good, 10));
    return m;
}

}  // namespace

TEST_CASE("binary labeling marks flawed samples 1 and the rest 0") {
    auto m = small_manifest();
    auto map = corpus::assign_labels(m, corpus::LabelMode::Binary);

    CHECK(map.empty());
    for (const auto& r : m.samples) {
        CHECK(r.binary_label == (r.flaw_label == tok::FlawLabel::Bad ? 1 : 0));
        CHECK(r.multiclass_label == r.binary_label);
    }
    CHECK(m.class_counts.at(0) == 2);
    CHECK(m.class_counts.at(1) == 7);
}

TEST_CASE("multiclass labels rank flawed classes by count, ties by ascending CWE id") {
    auto m = small_manifest();
    auto map = corpus::assign_labels(m, corpus::LabelMode::Multiclass);

    // 190 has 3 flawed samples; 121 and 122 tie at 2 and resolve by id.
    CHECK(map == std::map<int, int>{{190, 1}, {121, 2}, {122, 3}});
    for (const auto& r : m.samples) {
        if (r.flaw_label == tok::FlawLabel::Good)
            CHECK(r.multiclass_label == 0);
        else
            CHECK(r.multiclass_label == map.at(r.cwe_id));
    }
    CHECK(m.class_counts.at(0) == 2);
    CHECK(m.class_counts.at(1) == 3);
    CHECK(m.class_counts.at(2) == 2);
    CHECK(m.class_counts.at(3) == 2);
}

TEST_CASE("good samples map to class 0 regardless of their weakness class") {
    auto m = small_manifest();
    corpus::assign_labels(m, corpus::LabelMode::Multiclass);
    for (const auto& r : m.samples)
        if (r.flaw_label == tok::FlawLabel::Good) {
            CAPTURE(r.cwe_id);
            CHECK(r.multiclass_label == 0);
        }
}

TEST_CASE("23 flawed classes produce the dense label range 0..23") {
    corpus::CorpusManifest m;
    const auto& palette = corpus::fixture_cwe_palette();
    REQUIRE(palette.size() == 23);
    for (int cwe : palette)
        m.samples.push_back(make_record("b" + std::to_string(cwe), "f_bad", cwe,
                                        tok::FlawLabel::Bad, 10));
    m.samples.push_back(make_record("g", "f_good1", palette[0], tok::FlawLabel::Good, 10));

    auto map = corpus::assign_labels(m, corpus::LabelMode::Multiclass);

    CHECK(map.size() == 23);
    CHECK(m.class_counts.size() == 24);
    // Equal counts everywhere, so the ranking falls back to ascending id.
    std::vector<int> sorted_cwes(palette.begin(), palette.end());
    std::sort(sorted_cwes.begin(), sorted_cwes.end());
    for (std::size_t i = 0; i < sorted_cwes.size(); ++i)
        CHECK(map.at(sorted_cwes[i]) == static_cast<int>(i) + 1);
}

TEST_CASE("a single flawed class degenerates to labels {0, 1}") {
    corpus::CorpusManifest m;
    m.samples.push_back(make_record("a", "f_bad", 121, tok::FlawLabel::Bad, 10));
    m.samples.push_back(make_record("b", "f_good1", 121, tok::FlawLabel::Good, 10));
    auto map = corpus::assign_labels(m, corpus::LabelMode::Multiclass);
    CHECK(map == std::map<int, int>{{121, 1}});
    CHECK(m.class_counts.size() == 2);
}

TEST_CASE("an explicit class map overrides the ranking") {
    auto m = small_manifest();
    std::map<int, int> explicit_map{{121, 1}, {122, 2}, {190, 3}};
    auto map = corpus::assign_labels(m, corpus::LabelMode::Multiclass, &explicit_map);
    CHECK(map == explicit_map);
    for (const auto& r : m.samples)
        if (r.flaw_label == tok::FlawLabel::Bad)
            CHECK(r.multiclass_label == explicit_map.at(r.cwe_id));
}

TEST_CASE("a flawed sample without a class mapping is an error") {
    auto m = small_manifest();
    std::map<int, int> incomplete{{121, 1}, {122, 2}};  // no entry for 190
    CHECK_THROWS_AS(corpus::assign_labels(m, corpus::LabelMode::Multiclass, &incomplete),
                    DataError);
}

TEST_CASE("label assignment is stable across repeated runs") {
    auto m = small_manifest();
    auto first = corpus::assign_labels(m, corpus::LabelMode::Multiclass);
    std::vector<int> labels_first;
    for (const auto& r : m.samples) labels_first.push_back(r.multiclass_label);

    auto second = corpus::assign_labels(m, corpus::LabelMode::Multiclass);
    std::vector<int> labels_second;
    for (const auto& r : m.samples) labels_second.push_back(r.multiclass_label);

    CHECK(first == second);
    CHECK(labels_first == labels_second);
}

TEST_CASE("labeling an empty manifest is an error") {
    corpus::CorpusManifest m;
    CHECK_THROWS_AS(corpus::assign_labels(m, corpus::LabelMode::Binary), DataError);
}

// ---------------------------------------------------------------------------
// Dataset splitting.
// ---------------------------------------------------------------------------

TEST_CASE("100 samples of one class split exactly 70/15/15") {
    std::vector<int> labels(100, 0);
    auto split = corpus::split_dataset(100, labels, {0.70, 0.15, 0.15}, 7);
    CHECK(split.train.size() == 70);
    CHECK(split.test.size() == 15);
    CHECK(split.validation.size() == 15);
}

TEST_CASE("the three parts form a partition of the index range") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(0);
    for (int i = 0; i < 25; ++i) labels.push_back(1);
    for (int i = 0; i < 35; ++i) labels.push_back(2);

    auto split = corpus::split_dataset(labels.size(), labels, {0.70, 0.15, 0.15}, 3);

    std::vector<std::size_t> all;
    all.insert(all.end(), split.train.begin(), split.train.end());
    all.insert(all.end(), split.test.begin(), split.test.end());
    all.insert(all.end(), split.validation.begin(), split.validation.end());
    std::sort(all.begin(), all.end());

    std::vector<std::size_t> expected(labels.size());
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);
    CHECK(std::is_sorted(split.train.begin(), split.train.end()));
    CHECK(std::is_sorted(split.test.begin(), split.test.end()));
    CHECK(std::is_sorted(split.validation.begin(), split.validation.end()));
}

TEST_CASE("every class lands within one sample of its proportional share") {
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) labels.push_back(0);
    for (int i = 0; i < 25; ++i) labels.push_back(1);
    for (int i = 0; i < 35; ++i) labels.push_back(2);
    const std::array<double, 3> ratios{0.70, 0.15, 0.15};

    auto split = corpus::split_dataset(labels.size(), labels, ratios, 11);

    const std::vector<std::size_t>* parts[3] = {&split.train, &split.test, &split.validation};
    std::map<int, std::size_t> class_sizes;
    for (int l : labels) ++class_sizes[l];
    for (int p = 0; p < 3; ++p) {
        std::map<int, std::size_t> in_part;
        for (std::size_t idx : *parts[p]) ++in_part[labels[idx]];
        for (const auto& [cls, total] : class_sizes) {
            double target = static_cast<double>(total) * ratios[p];
            CAPTURE(p);
            CAPTURE(cls);
            CHECK(std::abs(static_cast<double>(in_part[cls]) - target) <= 1.0);
        }
    }
}

TEST_CASE("splitting is deterministic in the seed") {
    std::vector<int> labels(100);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);

    auto a = corpus::split_dataset(100, labels, {0.70, 0.15, 0.15}, 42);
    auto b = corpus::split_dataset(100, labels, {0.70, 0.15, 0.15}, 42);
    auto c = corpus::split_dataset(100, labels, {0.70, 0.15, 0.15}, 43);

    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(a.validation == b.validation);
    CHECK(a.train != c.train);
}

TEST_CASE("split input validation") {
    std::vector<int> labels(10, 0);
    CHECK_THROWS_AS(corpus::split_dataset(9, labels, {0.7, 0.15, 0.15}, 1), DataError);
    CHECK_THROWS_AS(corpus::split_dataset(10, labels, {0.5, 0.3, 0.1}, 1), DataError);
    CHECK_THROWS_AS(corpus::split_dataset(2, {0, 0}, {0.7, 0.15, 0.15}, 1), DataError);
}

TEST_CASE("a class with fewer than three members cannot be split") {
    std::vector<int> labels(7, 0);
    labels[5] = 9;
    labels[6] = 9;
    try {
        corpus::split_dataset(7, labels, {0.70, 0.15, 0.15}, 1);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("9") != std::string::npos);
    }
}

// ---------------------------------------------------------------------------
// Class weights.
// ---------------------------------------------------------------------------

TEST_CASE("class weights follow N / (K * n_c)") {
    auto w = corpus::compute_class_weights({0, 0, 0, 1});
    REQUIRE(w.weights.size() == 2);
    CHECK(w.weights[0] == doctest::Approx(2.0 / 3.0));
    CHECK(w.weights[1] == doctest::Approx(2.0));
}

TEST_CASE("balanced classes get unit weights") {
    auto w = corpus::compute_class_weights({0, 1, 2, 0, 1, 2});
    REQUIRE(w.weights.size() == 3);
    for (double v : w.weights) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("weights for a 5004/2594 class split") {
    std::vector<int> labels(5004, 0);
    labels.insert(labels.end(), 2594, 1);
    auto w = corpus::compute_class_weights(labels);
    CHECK(w.weights[0] == 7598.0 / (2.0 * 5004.0));
    CHECK(w.weights[1] == 7598.0 / (2.0 * 2594.0));
    CHECK(w.weights[0] == doctest::Approx(0.759).epsilon(1e-3));
    CHECK(w.weights[1] == doctest::Approx(1.465).epsilon(1e-3));
}

TEST_CASE("weighted sample counts sum back to the corpus size") {
    std::vector<int> labels;
    const std::size_t counts[4] = {17, 3, 29, 11};
    for (int c = 0; c < 4; ++c) labels.insert(labels.end(), counts[c], c);

    auto w = corpus::compute_class_weights(labels);
    double total = 0.0;
    for (int c = 0; c < 4; ++c) total += w.weights[static_cast<std::size_t>(c)] *
                                         static_cast<double>(counts[c]);
    CHECK(total == doctest::Approx(static_cast<double>(labels.size())));
}

TEST_CASE("class weight input validation") {
    CHECK_THROWS_AS(corpus::compute_class_weights({}), DataError);
    CHECK_THROWS_AS(corpus::compute_class_weights({0, 0, 2}), DataError);  // class 1 empty
    CHECK_THROWS_AS(corpus::compute_class_weights({0, -1}), DataError);
}

// ---------------------------------------------------------------------------
// Fixture generation.
// ---------------------------------------------------------------------------

TEST_CASE("fixture generation is deterministic") {
    corpus::FixtureParams params;
    params.seed = 5;
    params.classes = 3;
    params.per_class = 6;

    auto a = corpus::generate_fixture(params);
    auto b = corpus::generate_fixture(params);

    REQUIRE(a.files.size() == b.files.size());
    CHECK(a.files == b.files);
    REQUIRE(a.manifest.samples.size() == b.manifest.samples.size());
    for (std::size_t i = 0; i < a.manifest.samples.size(); ++i)
        CHECK(a.manifest.samples[i].tokens == b.manifest.samples[i].tokens);
}

TEST_CASE("fixture honors class structure and naming conventions") {
    corpus::FixtureParams params;
    params.classes = 3;
    params.per_class = 10;
    auto fx = corpus::generate_fixture(params);

    CHECK(fx.manifest.samples.size() == 30);
    CHECK(fx.files.size() == 30);
    CHECK(fx.manifest.class_counts ==
          std::map<int, std::size_t>{{0, 10}, {1, 10}, {2, 10}});

    const auto& palette = corpus::fixture_cwe_palette();
    for (const auto& r : fx.manifest.samples) {
        CAPTURE(r.id);
        if (r.multiclass_label == 0) {
            CHECK(r.flaw_label == tok::FlawLabel::Good);
            CHECK(r.binary_label == 0);
            CHECK(r.function_name.ends_with("_good1"));
        } else {
            CHECK(r.flaw_label == tok::FlawLabel::Bad);
            CHECK(r.binary_label == 1);
            CHECK(r.function_name.ends_with("_bad"));
            CHECK(r.cwe_id == palette[static_cast<std::size_t>(r.multiclass_label) - 1]);
        }
        CHECK(r.source_path.starts_with("CWE" + std::to_string(r.cwe_id) + "__"));
        CHECK(r.source_path.ends_with(".ll"));
    }
}

TEST_CASE("fixture token streams satisfy the normalizer invariants") {
    corpus::FixtureParams params;
    params.classes = 2;
    params.per_class = 8;
    params.min_tokens = 40;
    params.max_tokens = 80;
    auto fx = corpus::generate_fixture(params);

    for (const auto& r : fx.manifest.samples) {
        CAPTURE(r.id);
        REQUIRE(!r.tokens.empty());
        CHECK(r.tokens.back() == "EOL");
        CHECK(r.tokens.size() >= 25);
        CHECK(r.tokens.size() <= 140);
        bool has_ret = false;
        for (const auto& t : r.tokens) {
            CHECK(!t.empty());
            CHECK(t.find('%') == std::string::npos);
            CHECK(t.find('@') == std::string::npos);
            if (t == "ret") has_ret = true;
        }
        CHECK(has_ret);
        CHECK(std::count(r.tokens.begin(), r.tokens.end(), "VAR_1") >= 1);
    }
}

TEST_CASE("motifs appear at full strength and vanish at zero") {
    corpus::FixtureParams params;
    params.classes = 3;
    params.per_class = 6;

    auto contains = [](const std::vector<std::string>& tokens, const std::string& t) {
        return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
    };

    SUBCASE("strength 1: every flawed sample carries its class motif") {
        params.motif_strength = 1.0;
        auto fx = corpus::generate_fixture(params);
        for (const auto& r : fx.manifest.samples) {
            CAPTURE(r.id);
            if (r.multiclass_label == 1) CHECK(contains(r.tokens, "strcpy"));
            if (r.multiclass_label == 2) CHECK(contains(r.tokens, "memcpy"));
            if (r.multiclass_label == 0) {
                CHECK(!contains(r.tokens, "strcpy"));
                CHECK(!contains(r.tokens, "memcpy"));
            }
        }
    }

    SUBCASE("strength 0: motif externals never appear") {
        params.motif_strength = 0.0;
        auto fx = corpus::generate_fixture(params);
        for (const auto& r : fx.manifest.samples) {
            CAPTURE(r.id);
            CHECK(!contains(r.tokens, "strcpy"));
            CHECK(!contains(r.tokens, "memcpy"));
        }
    }
}

TEST_CASE("per-class count overrides are respected") {
    corpus::FixtureParams params;
    params.classes = 3;
    params.per_class_counts = {4, 3, 5};
    auto fx = corpus::generate_fixture(params);
    CHECK(fx.manifest.samples.size() == 12);
    CHECK(fx.manifest.class_counts ==
          std::map<int, std::size_t>{{0, 4}, {1, 3}, {2, 5}});
}

TEST_CASE("fixture parameter validation") {
    corpus::FixtureParams params;
    params.classes = 1;
    CHECK_THROWS_AS(corpus::generate_fixture(params), UserError);

    params.classes = 2;
    params.per_class_counts = {5};
    CHECK_THROWS_AS(corpus::generate_fixture(params), UserError);

    params.per_class_counts.clear();
    params.min_tokens = 10;
    CHECK_THROWS_AS(corpus::generate_fixture(params), UserError);

    params.min_tokens = 50;
    params.max_tokens = 40;
    CHECK_THROWS_AS(corpus::generate_fixture(params), UserError);
}

TEST_CASE("the fixture CWE palette is distinct") {
    const auto& palette = corpus::fixture_cwe_palette();
    std::set<int> unique(palette.begin(), palette.end());
    CHECK(unique.size() == palette.size());
}
