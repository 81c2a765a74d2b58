#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "irvd/tokenize.hpp"

namespace irvd::corpus {

/// One labeled token stream. binary_label is 1 iff the flaw label is bad;
/// multiclass_label is 0 for good samples and the dense class index of the
/// CWE otherwise.
struct SampleRecord {
    std::string id;
    std::string function_name;
    std::string source_path;
    std::vector<std::string> tokens;
    int cwe_id = 0;
    tok::FlawLabel flaw_label = tok::FlawLabel::Good;
    int binary_label = 0;
    int multiclass_label = 0;
};

struct SelectionParams {
    int min_class_count = 500;
    int min_tokens = 300;
    std::set<int> excluded_cwes;
    /// Glob patterns selecting the functions that carry the weakness label;
    /// a record survives if any pattern matches its function name.
    std::vector<std::string> name_patterns = {"*_bad", "*_good*"};
};

struct CorpusManifest {
    std::vector<SampleRecord> samples;
    std::map<int, std::size_t> class_counts;
    /// (filter name, removed count) in application order.
    std::vector<std::pair<std::string, std::size_t>> selection_log;
};

enum class LabelMode { Binary, Multiclass };

/// Applies the selection filters in order: excluded CWEs, function-name
/// patterns, minimum per-CWE sample count, minimum token length. Because the
/// length filter runs after the count filter, a class can end up below
/// min_class_count. Throws DataError when nothing survives. Records must
/// already carry provenance (CWE id and flaw label).
CorpusManifest select_samples(std::vector<SampleRecord> records, const SelectionParams& params);

/// Fills binary or multiclass labels and the manifest class counts. In
/// multiclass mode good samples become class 0 and flawed CWEs get dense
/// indices 1..K ordered by descending flawed-sample count (ties by ascending
/// CWE id), unless an explicit cwe->class mapping is supplied. Returns the
/// cwe->class mapping in use (empty in binary mode).
std::map<int, int> assign_labels(CorpusManifest& manifest, LabelMode mode,
                                 const std::map<int, int>* explicit_map = nullptr);

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> validation;
    std::array<double, 3> ratios{0.70, 0.15, 0.15};
    std::uint64_t seed = 0;
};

/// Deterministic stratified split. Per class the three parts receive counts
/// within one sample of class_count * ratio (largest-remainder rounding).
/// Throws DataError when a class has fewer than 3 members, naming it.
DatasetSplit split_dataset(std::size_t n, const std::vector<int>& labels,
                           std::array<double, 3> ratios, std::uint64_t seed);

struct ClassWeights {
    std::vector<double> weights;  // indexed by class label
};

/// Balanced inverse-frequency weights w_c = N / (K * n_c). Requires labels
/// to be dense in 0..K-1 with every class populated.
ClassWeights compute_class_weights(const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Synthetic desk-scale fixtures.
// ---------------------------------------------------------------------------

struct FixtureParams {
    std::uint64_t seed = 1;
    int classes = 2;       // class 0 is non-flawed
    int per_class = 100;   // uniform unless per_class_counts is set
    double motif_strength = 1.0;
    int min_tokens = 40;
    int max_tokens = 80;
    /// Optional explicit per-class sample counts (index 0 = good class);
    /// overrides per_class when non-empty.
    std::vector<std::size_t> per_class_counts;
};

struct FixtureCorpus {
    CorpusManifest manifest;
    /// Synthesized IR modules: (file name following the
    /// `<CWE>__<testcase>__<good|bad>.ll` convention, file content).
    std::vector<std::pair<std::string, std::string>> files;
};

/// Generates a deterministic corpus of IR-shaped functions. Each flawed
/// class plants a distinct motif (a characteristic external call plus a
/// digit pattern) near the end of the function with probability
/// motif_strength; at strength 0 the classes are indistinguishable. The
/// token streams are produced by running the synthesized IR through the real
/// normalizer, so they satisfy every token-stream invariant.
FixtureCorpus generate_fixture(const FixtureParams& params);

/// The CWE ids used by fixture classes 1..23, largest class first.
const std::vector<int>& fixture_cwe_palette();

}  // namespace irvd::corpus
