// irvd - vulnerability detection on decompiled LLVM IR.
//
// Subcommands cover the pipeline stages (normalize, select, embed, encode,
// train, evaluate, predict) plus run-all and a synthetic-corpus generator.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irvd/corpus.hpp"
#include "irvd/pipeline.hpp"

namespace {

constexpr const char* kConfigKeys =
    "Config keys (flat `key = value` lines, '#' comments):\n"
    "  paths      input_dir, workspace, class_map\n"
    "  corpus     mode (binary|multiclass), min_class_count, min_tokens,\n"
    "             excluded_cwes (comma list), name_patterns (comma list)\n"
    "  embedding  embed_dim, embed_window, embed_downsample, embed_negatives,\n"
    "             embed_epochs, embed_alpha, embed_min_alpha, embed_workers\n"
    "  encoding   seq_len\n"
    "  model      cell (srnn|gru|lstm), bidirectional, rnn_layers, units\n"
    "  training   batch_size, learning_rate, plateau_patience, plateau_factor,\n"
    "             early_stop_patience, max_epochs, class_weighting,\n"
    "             train_fraction, test_fraction, validation_fraction\n"
    "  misc       seed\n";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vulnerability detection on decompiled LLVM IR"};
    app.require_subcommand(1);
    app.footer(kConfigKeys);

    std::string config_path;
    std::string workspace_override;
    std::string input_override;
    std::uint64_t seed_override = 0;
    CLI::Option* config_opt =
        app.add_option("--config", config_path, "pipeline config file")->check(CLI::ExistingFile);
    CLI::Option* seed_opt = app.add_option("--seed", seed_override, "override the config seed");
    CLI::Option* ws_opt =
        app.add_option("--workspace", workspace_override, "override the workspace directory");
    CLI::Option* input_opt =
        app.add_option("--input", input_override, "override the input IR directory");
    (void)config_opt;

    CLI::App* normalize =
        app.add_subcommand("normalize", "tokenize every IR file under input_dir");
    CLI::App* select = app.add_subcommand("select", "filter and label the token records");
    CLI::App* embed = app.add_subcommand("embed", "train CBOW token embeddings");
    CLI::App* encode = app.add_subcommand("encode", "map samples to padded token-id rows");
    CLI::App* train = app.add_subcommand("train", "split the dataset and train the classifier");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score the held-out validation split");
    CLI::App* predict = app.add_subcommand("predict", "classify functions in raw IR files");
    CLI::App* run_all = app.add_subcommand("run-all", "run every stage in order");
    CLI::App* fixture =
        app.add_subcommand("fixture", "generate a synthetic IR corpus for smoke tests");

    std::vector<std::string> predict_files;
    predict->add_option("files", predict_files, "IR files to classify")
        ->required()
        ->check(CLI::ExistingFile);

    irvd::corpus::FixtureParams fixture_params;
    std::string fixture_out;
    fixture->add_option("--out", fixture_out, "directory for the generated .ll files")
        ->required();
    fixture->add_option("--classes", fixture_params.classes,
                        "number of classes including the non-flawed class");
    fixture->add_option("--per-class", fixture_params.per_class, "samples per class");
    fixture->add_option("--motif-strength", fixture_params.motif_strength,
                        "probability that a flawed sample carries its class motif");
    fixture->add_option("--min-tokens", fixture_params.min_tokens,
                        "shortest generated function body");
    fixture->add_option("--max-tokens", fixture_params.max_tokens,
                        "longest generated function body");

    for (CLI::App* sub : {normalize, select, embed, encode, train, evaluate, predict, run_all,
                          fixture})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        irvd::pipe::PipelineConfig config;
        if (!config_path.empty()) config = irvd::pipe::load_config(config_path);
        if (seed_opt->count()) config.seed = seed_override;
        if (ws_opt->count()) config.workspace = workspace_override;
        if (input_opt->count()) config.input_dir = input_override;
        irvd::pipe::validate_config(config);

        std::ostream& log = std::cout;
        if (app.got_subcommand(normalize)) {
            irvd::pipe::run_normalize(config, log);
        } else if (app.got_subcommand(select)) {
            irvd::pipe::run_select(config, log);
        } else if (app.got_subcommand(embed)) {
            irvd::pipe::run_embed(config, log);
        } else if (app.got_subcommand(encode)) {
            irvd::pipe::run_encode(config, log);
        } else if (app.got_subcommand(train)) {
            irvd::pipe::run_train(config, log);
        } else if (app.got_subcommand(evaluate)) {
            irvd::pipe::run_evaluate(config, log);
        } else if (app.got_subcommand(predict)) {
            irvd::pipe::run_predict(config, predict_files, log);
        } else if (app.got_subcommand(run_all)) {
            irvd::pipe::run_all(config, log);
        } else if (app.got_subcommand(fixture)) {
            fixture_params.seed = config.seed;
            irvd::pipe::write_fixture(fixture_params, fixture_out, log);
        }
        return 0;
    } catch (const irvd::UserError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const irvd::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}
