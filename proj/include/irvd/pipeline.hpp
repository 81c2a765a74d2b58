#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irvd/corpus.hpp"
#include "irvd/embedding.hpp"
#include "irvd/neural.hpp"
#include "irvd/train.hpp"

namespace irvd::pipe {

struct PipelineConfig {
    // locations (never part of the config hash)
    std::string input_dir = "ir";
    std::string workspace = "workspace";

    corpus::LabelMode mode = corpus::LabelMode::Binary;
    std::uint64_t seed = 1;

    corpus::SelectionParams selection;
    std::string class_map;  // optional explicit cwe->class mapping file

    // embedding (cbow seed is derived from `seed` at run time)
    int embed_dim = 100;
    int embed_window = 3;
    double embed_downsample = 1e-3;
    int embed_negatives = 5;
    int embed_epochs = 5;
    double embed_alpha = 0.025;
    double embed_min_alpha = 1e-4;
    int embed_workers = 1;

    int seq_len = 1000;

    nn::CellKind cell = nn::CellKind::SRNN;
    bool bidirectional = false;
    int rnn_layers = 1;  // dense layer count always matches
    int units = 64;

    int batch_size = 64;
    double learning_rate = 1e-4;
    int plateau_patience = 5;
    double plateau_factor = 0.5;
    int early_stop_patience = 15;
    int max_epochs = 150;
    bool class_weighting = true;

    std::array<double, 3> split_ratios{0.70, 0.15, 0.15};
};

/// Parses the flat key=value format ('#' comments, blank lines ignored).
/// Unknown or duplicate keys are UserErrors; `origin` names the source in
/// messages.
PipelineConfig parse_config_text(const std::string& text, const std::string& origin);
PipelineConfig load_config(const std::string& path);
void validate_config(const PipelineConfig& config);

/// Pipeline stages an artifact can belong to; each stage's hash covers the
/// configuration that can change that artifact's bytes (locations excluded),
/// cumulatively over everything upstream.
enum class Stage { Tokens, Manifest, Embedding, Encoded, Model, Report };

std::uint64_t stage_config_hash(const PipelineConfig& config, Stage stage);

/// Workspace file locations.
struct StagePaths {
    std::string tokens;
    std::string errors;
    std::string manifest;
    std::string vocab;
    std::string embedding;
    std::string encoded;
    std::string split;
    std::string weights;
    std::string history;
    std::string report;
    std::string metrics;
    std::string confusion;
    std::string confusion_normalized;
    std::string predictions;
};
StagePaths stage_paths(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Record-file plumbing (exposed for tests).
// ---------------------------------------------------------------------------

/// Token escaping for space-separated record fields: tokens may contain
/// spaces (string constants), so ' ' -> "\s", tab -> "\t", newline -> "\n",
/// carriage return -> "\r", '\' -> "\\".
std::string escape_token(const std::string& token);
std::string unescape_token(const std::string& field);

/// One-line artifact header: `#irvd <kind> <version> config=<hex>`.
std::string artifact_header(const std::string& kind, std::uint64_t config_hash);

/// Parses and checks an artifact header. Throws UserError when the file is
/// missing (naming `produced_by`, the stage to run) and DataError on a kind,
/// version, or config-hash mismatch.
void check_artifact_header(const std::string& line, const std::string& kind,
                           std::uint64_t expected_hash, const std::string& path);

// ---------------------------------------------------------------------------
// Stages. Each reads its upstream artifacts, writes its own, and logs a
// short summary.
// ---------------------------------------------------------------------------

void run_normalize(const PipelineConfig& config, std::ostream& log);
void run_select(const PipelineConfig& config, std::ostream& log);
void run_embed(const PipelineConfig& config, std::ostream& log);
void run_encode(const PipelineConfig& config, std::ostream& log);
void run_train(const PipelineConfig& config, std::ostream& log);
void run_evaluate(const PipelineConfig& config, std::ostream& log);
void run_predict(const PipelineConfig& config, const std::vector<std::string>& ir_files,
                 std::ostream& log);
void run_all(const PipelineConfig& config, std::ostream& log);

/// Writes a synthetic IR corpus into `out_dir` (see corpus::generate_fixture).
void write_fixture(const corpus::FixtureParams& params, const std::string& out_dir,
                   std::ostream& log);

}  // namespace irvd::pipe
