#include "irvd/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "irvd/ir.hpp"
#include "irvd/metrics.hpp"
#include "irvd/optimizer.hpp"
#include "irvd/tokenize.hpp"

namespace irvd::pipe {

namespace fs = std::filesystem;

namespace {

// -----------------------------------------------------------------------
// Config parsing.
// -----------------------------------------------------------------------

bool parse_bool(const std::string& value, const std::string& key, const std::string& origin) {
    if (value == "true" || value == "yes" || value == "on" || value == "1") return true;
    if (value == "false" || value == "no" || value == "off" || value == "0") return false;
    throw UserError(origin + ": key '" + key + "' expects a boolean, got '" + value + "'");
}

long long parse_int(const std::string& value, const std::string& key, const std::string& origin) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(begin, &end, 10);
    if (errno != 0 || end == begin || *end != '\0')
        throw UserError(origin + ": key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

double parse_real(const std::string& value, const std::string& key, const std::string& origin) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (errno != 0 || end == begin || *end != '\0')
        throw UserError(origin + ": key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

/// Integer field inside an artifact file; failures are data corruption, not
/// user errors.
long long field_int(const std::string& value, const std::string& what, const std::string& path,
                    int line_no) {
    const char* begin = value.c_str();
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(begin, &end, 10);
    if (errno != 0 || end == begin || *end != '\0')
        throw ParseError(path + ": bad " + what + " field '" + value + "'", line_no);
    return v;
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> items;
    for (const std::string& part : split(value, ',')) {
        std::string item = trim(part);
        if (!item.empty()) items.push_back(std::move(item));
    }
    return items;
}

std::string mode_name(corpus::LabelMode mode) {
    return mode == corpus::LabelMode::Binary ? "binary" : "multiclass";
}

// -----------------------------------------------------------------------
// Canonical config serialization (the hash input).
// -----------------------------------------------------------------------

void append_kv(std::string& out, std::string_view key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
}

std::string canonical_config(const PipelineConfig& c, Stage stage) {
    std::string out = "irvd-config-v1\n";
    // Tokens: the tokenizer has no knobs; only the schema salt above.
    if (stage == Stage::Tokens) return out;

    append_kv(out, "mode", mode_name(c.mode));
    append_kv(out, "min_class_count", std::to_string(c.selection.min_class_count));
    append_kv(out, "min_tokens", std::to_string(c.selection.min_tokens));
    std::vector<std::string> cwes;
    for (int cwe : c.selection.excluded_cwes) cwes.push_back(std::to_string(cwe));
    append_kv(out, "excluded_cwes", join(cwes, ","));
    append_kv(out, "name_patterns", join(c.selection.name_patterns, ","));
    append_kv(out, "class_map", c.class_map);
    if (stage == Stage::Manifest) return out;

    append_kv(out, "seed", std::to_string(c.seed));
    append_kv(out, "embed_dim", std::to_string(c.embed_dim));
    append_kv(out, "embed_window", std::to_string(c.embed_window));
    append_kv(out, "embed_downsample", format_double(c.embed_downsample));
    append_kv(out, "embed_negatives", std::to_string(c.embed_negatives));
    append_kv(out, "embed_epochs", std::to_string(c.embed_epochs));
    append_kv(out, "embed_alpha", format_double(c.embed_alpha));
    append_kv(out, "embed_min_alpha", format_double(c.embed_min_alpha));
    // embed_workers is deliberately absent: worker count never changes bytes.
    if (stage == Stage::Embedding) return out;

    append_kv(out, "seq_len", std::to_string(c.seq_len));
    if (stage == Stage::Encoded) return out;

    append_kv(out, "cell", nn::to_string(c.cell));
    append_kv(out, "bidirectional", c.bidirectional ? "1" : "0");
    append_kv(out, "rnn_layers", std::to_string(c.rnn_layers));
    append_kv(out, "units", std::to_string(c.units));
    append_kv(out, "batch_size", std::to_string(c.batch_size));
    append_kv(out, "learning_rate", format_double(c.learning_rate));
    append_kv(out, "plateau_patience", std::to_string(c.plateau_patience));
    append_kv(out, "plateau_factor", format_double(c.plateau_factor));
    append_kv(out, "early_stop_patience", std::to_string(c.early_stop_patience));
    append_kv(out, "max_epochs", std::to_string(c.max_epochs));
    append_kv(out, "class_weighting", c.class_weighting ? "1" : "0");
    append_kv(out, "train_fraction", format_double(c.split_ratios[0]));
    append_kv(out, "test_fraction", format_double(c.split_ratios[1]));
    append_kv(out, "validation_fraction", format_double(c.split_ratios[2]));
    return out;  // Model and Report share the full key set
}

// -----------------------------------------------------------------------
// Artifact plumbing.
// -----------------------------------------------------------------------

constexpr const char* kHeaderTag = "#irvd";
constexpr const char* kFormatVersion = "1";

/// Opens an artifact for reading and validates its header line. A missing
/// file names the stage that produces it.
std::ifstream open_artifact(const std::string& path, const std::string& kind,
                            std::uint64_t expected_hash, const std::string& produced_by) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UserError("missing " + kind + " artifact " + path + "; run the '" + produced_by +
                        "' stage first");
    std::string line;
    if (!std::getline(in, line))
        throw DataError(path + " is empty; re-run the '" + produced_by + "' stage");
    check_artifact_header(line, kind, expected_hash, path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write " + path);
    return out;
}

void ensure_workspace(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.workspace, ec);
    if (ec)
        throw UserError("cannot create workspace directory " + config.workspace + ": " +
                        ec.message());
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Optional-int field: "-" encodes absence.
std::string opt_field(const std::optional<int>& v) {
    return v ? std::to_string(*v) : "-";
}

std::string flaw_field(const std::optional<tok::FlawLabel>& v) {
    return v ? tok::to_string(*v) : "-";
}

// -----------------------------------------------------------------------
// Provenance fallbacks for functions whose file name carries no metadata.
// -----------------------------------------------------------------------

std::optional<tok::FlawLabel> flaw_from_function_name(const std::string& name) {
    if (glob_match("*_bad", name)) return tok::FlawLabel::Bad;
    if (glob_match("*_good*", name)) return tok::FlawLabel::Good;
    return std::nullopt;
}

std::optional<int> cwe_from_function_name(const std::string& name) {
    if (name.size() < 4 || name.compare(0, 3, "CWE") != 0) return std::nullopt;
    std::size_t i = 3;
    long value = 0;
    while (i < name.size() && name[i] >= '0' && name[i] <= '9' && value < 1000000) {
        value = value * 10 + (name[i] - '0');
        ++i;
    }
    if (i == 3) return std::nullopt;
    return static_cast<int>(value);
}

// -----------------------------------------------------------------------
// Token-record file (the normalize artifact).
// -----------------------------------------------------------------------

void write_token_record(std::ostream& out, const tok::TokenStream& stream) {
    out << escape_token(stream.source_path) << '\t' << escape_token(stream.function_name) << '\t'
        << opt_field(stream.cwe_id) << '\t' << flaw_field(stream.flaw_label) << '\t';
    for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
        if (i) out << ' ';
        out << escape_token(stream.tokens[i]);
    }
    out << '\n';
}

tok::TokenStream parse_token_record(const std::string& line, const std::string& path,
                                    int line_no) {
    std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != 5) throw ParseError(path + ": malformed token record", line_no);
    tok::TokenStream stream;
    stream.source_path = unescape_token(fields[0]);
    stream.function_name = unescape_token(fields[1]);
    if (fields[2] != "-")
        stream.cwe_id = static_cast<int>(field_int(fields[2], "cwe", path, line_no));
    if (fields[3] != "-") {
        std::optional<tok::FlawLabel> flaw = tok::flaw_from_string(fields[3]);
        if (!flaw) throw ParseError(path + ": bad flaw label '" + fields[3] + "'", line_no);
        stream.flaw_label = flaw;
    }
    for (const std::string& field : split_ws(fields[4])) stream.tokens.push_back(unescape_token(field));
    return stream;
}

std::vector<tok::TokenStream> read_token_records(const PipelineConfig& config) {
    StagePaths paths = stage_paths(config);
    std::ifstream in = open_artifact(paths.tokens, "tokens",
                                     stage_config_hash(config, Stage::Tokens), "normalize");
    std::vector<tok::TokenStream> streams;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        streams.push_back(parse_token_record(line, paths.tokens, line_no));
    }
    return streams;
}

// -----------------------------------------------------------------------
// Manifest file (the select artifact).
// -----------------------------------------------------------------------

struct ManifestFile {
    corpus::CorpusManifest manifest;
    corpus::LabelMode mode = corpus::LabelMode::Binary;
    std::map<int, int> class_map;  // cwe -> class (multiclass only)
};

void write_manifest(const PipelineConfig& config, const ManifestFile& mf) {
    StagePaths paths = stage_paths(config);
    std::ofstream out = open_output(paths.manifest);
    out << artifact_header("manifest", stage_config_hash(config, Stage::Manifest)) << '\n';
    out << "#mode " << mode_name(mf.mode) << '\n';
    for (const auto& [filter, removed] : mf.manifest.selection_log)
        out << "#filter " << filter << ' ' << removed << '\n';
    for (const auto& [cwe, cls] : mf.class_map) out << "#classmap " << cwe << ' ' << cls << '\n';
    for (const auto& [label, count] : mf.manifest.class_counts)
        out << "#class " << label << ' ' << count << '\n';
    for (const corpus::SampleRecord& s : mf.manifest.samples) {
        out << escape_token(s.id) << '\t' << escape_token(s.function_name) << '\t'
            << escape_token(s.source_path) << '\t' << s.cwe_id << '\t'
            << tok::to_string(s.flaw_label) << '\t' << s.binary_label << '\t'
            << s.multiclass_label << '\t';
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            if (i) out << ' ';
            out << escape_token(s.tokens[i]);
        }
        out << '\n';
    }
    if (!out) throw UserError("failed while writing " + paths.manifest);
}

ManifestFile read_manifest(const PipelineConfig& config) {
    StagePaths paths = stage_paths(config);
    std::ifstream in = open_artifact(paths.manifest, "manifest",
                                     stage_config_hash(config, Stage::Manifest), "select");
    ManifestFile mf;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::vector<std::string> parts = split_ws(line);
            if (parts[0] == "#mode" && parts.size() == 2)
                mf.mode = parts[1] == "multiclass" ? corpus::LabelMode::Multiclass
                                                   : corpus::LabelMode::Binary;
            else if (parts[0] == "#classmap" && parts.size() == 3)
                mf.class_map[static_cast<int>(
                    field_int(parts[1], "classmap", paths.manifest, line_no))] =
                    static_cast<int>(field_int(parts[2], "classmap", paths.manifest, line_no));
            else if (parts[0] == "#class" && parts.size() == 3)
                mf.manifest.class_counts[static_cast<int>(
                    field_int(parts[1], "class", paths.manifest, line_no))] =
                    static_cast<std::size_t>(
                        field_int(parts[2], "class", paths.manifest, line_no));
            else if (parts[0] == "#filter" && parts.size() == 3)
                mf.manifest.selection_log.emplace_back(
                    parts[1], static_cast<std::size_t>(
                                  field_int(parts[2], "filter", paths.manifest, line_no)));
            continue;
        }
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 8) throw ParseError(paths.manifest + ": malformed sample record", line_no);
        corpus::SampleRecord s;
        s.id = unescape_token(fields[0]);
        s.function_name = unescape_token(fields[1]);
        s.source_path = unescape_token(fields[2]);
        s.cwe_id = static_cast<int>(field_int(fields[3], "cwe", paths.manifest, line_no));
        std::optional<tok::FlawLabel> flaw = tok::flaw_from_string(fields[4]);
        if (!flaw) throw ParseError(paths.manifest + ": bad flaw label", line_no);
        s.flaw_label = *flaw;
        s.binary_label = static_cast<int>(field_int(fields[5], "binary", paths.manifest, line_no));
        s.multiclass_label =
            static_cast<int>(field_int(fields[6], "multiclass", paths.manifest, line_no));
        for (const std::string& field : split_ws(fields[7]))
            s.tokens.push_back(unescape_token(field));
        mf.manifest.samples.push_back(std::move(s));
    }
    if (mf.manifest.samples.empty())
        throw DataError(paths.manifest + " holds no samples; re-run the 'select' stage");
    return mf;
}

int active_label(const corpus::SampleRecord& s, corpus::LabelMode mode) {
    return mode == corpus::LabelMode::Binary ? s.binary_label : s.multiclass_label;
}

// -----------------------------------------------------------------------
// Encoded dataset file.
// -----------------------------------------------------------------------

struct EncodedFile {
    std::vector<std::string> ids;
    std::vector<std::vector<int>> token_ids;
    std::vector<int> labels;
    std::uint64_t embedding_hash = 0;
    int seq_len = 0;
};

EncodedFile read_encoded(const PipelineConfig& config) {
    StagePaths paths = stage_paths(config);
    std::ifstream in = open_artifact(paths.encoded, "encoded",
                                     stage_config_hash(config, Stage::Encoded), "encode");
    EncodedFile enc;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::vector<std::string> parts = split_ws(line);
            if (parts[0] == "#embedding" && parts.size() == 2)
                enc.embedding_hash = std::strtoull(parts[1].c_str(), nullptr, 16);
            else if (parts[0] == "#seqlen" && parts.size() == 2)
                enc.seq_len =
                    static_cast<int>(field_int(parts[1], "seqlen", paths.encoded, line_no));
            continue;
        }
        std::vector<std::string> fields = split(line, '\t');
        if (fields.size() != 3) throw ParseError(paths.encoded + ": malformed encoded record", line_no);
        enc.ids.push_back(unescape_token(fields[0]));
        enc.labels.push_back(
            static_cast<int>(field_int(fields[1], "label", paths.encoded, line_no)));
        std::vector<int> ids;
        for (const std::string& field : split_ws(fields[2]))
            ids.push_back(static_cast<int>(field_int(field, "token id", paths.encoded, line_no)));
        enc.token_ids.push_back(std::move(ids));
    }
    if (enc.ids.empty())
        throw DataError(paths.encoded + " holds no samples; re-run the 'encode' stage");
    return enc;
}

// -----------------------------------------------------------------------
// Split file.
// -----------------------------------------------------------------------

void write_split(const PipelineConfig& config, const corpus::DatasetSplit& split,
                 std::size_t n) {
    StagePaths paths = stage_paths(config);
    std::vector<const char*> part(n, "?");
    for (std::size_t i : split.train) part[i] = "train";
    for (std::size_t i : split.test) part[i] = "test";
    for (std::size_t i : split.validation) part[i] = "validation";
    std::ofstream out = open_output(paths.split);
    out << artifact_header("split", stage_config_hash(config, Stage::Model)) << '\n';
    for (std::size_t i = 0; i < n; ++i) out << i << '\t' << part[i] << '\n';
    if (!out) throw UserError("failed while writing " + paths.split);
}

corpus::DatasetSplit read_split(const PipelineConfig& config, std::size_t expected_n) {
    StagePaths paths = stage_paths(config);
    std::ifstream in = open_artifact(paths.split, "split",
                                     stage_config_hash(config, Stage::Model), "train");
    corpus::DatasetSplit split;
    std::string line;
    int line_no = 1;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = split_ws(line);
        if (fields.size() != 2) throw ParseError(paths.split + ": malformed split line", line_no);
        std::size_t index =
            static_cast<std::size_t>(field_int(fields[0], "index", paths.split, line_no));
        if (index != seen) throw ParseError(paths.split + ": split indices out of order", line_no);
        ++seen;
        if (fields[1] == "train")
            split.train.push_back(index);
        else if (fields[1] == "test")
            split.test.push_back(index);
        else if (fields[1] == "validation")
            split.validation.push_back(index);
        else
            throw ParseError(paths.split + ": unknown split part '" + fields[1] + "'", line_no);
    }
    if (seen != expected_n)
        throw DataError(paths.split + " covers " + std::to_string(seen) + " samples but the " +
                        "encoded dataset holds " + std::to_string(expected_n) +
                        "; re-run the 'train' stage");
    return split;
}

// -----------------------------------------------------------------------
// Shared loading for train/evaluate/predict.
// -----------------------------------------------------------------------

struct EmbeddingArtifact {
    embed::EmbeddingMatrix matrix;
    std::uint64_t file_hash = 0;
};

EmbeddingArtifact load_embedding_artifact(const PipelineConfig& config,
                                          std::vector<std::string>* tokens_out = nullptr) {
    StagePaths paths = stage_paths(config);
    std::ifstream probe(paths.embedding, std::ios::binary);
    if (!probe)
        throw UserError("missing embedding artifact " + paths.embedding +
                        "; run the 'embed' stage first");
    probe.close();
    std::string bytes = read_file_bytes(paths.embedding);
    std::size_t eol = bytes.find('\n');
    check_artifact_header(bytes.substr(0, eol == std::string::npos ? bytes.size() : eol),
                          "embedding", stage_config_hash(config, Stage::Embedding),
                          paths.embedding);
    EmbeddingArtifact art;
    art.file_hash = fnv1a(bytes);
    art.matrix = embed::load_embedding(paths.embedding, tokens_out);
    return art;
}

nn::Dataset subset_dataset(const EncodedFile& enc, const Eigen::MatrixXd& embedding,
                           const std::vector<std::size_t>& indices, int seq_len) {
    nn::Dataset ds;
    ds.embedding = &embedding;
    ds.seq_len = seq_len;
    ds.ids.reserve(indices.size());
    ds.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        ds.ids.push_back(enc.token_ids[i]);
        ds.labels.push_back(enc.labels[i]);
    }
    return ds;
}

int infer_num_classes(const std::vector<int>& labels, corpus::LabelMode mode) {
    int max_label = 0;
    for (int y : labels) max_label = std::max(max_label, y);
    int k = std::max(max_label + 1, mode == corpus::LabelMode::Binary ? 2 : 0);
    if (k < 2)
        throw DataError("the encoded dataset holds only one class; a classifier needs two");
    return k;
}

nn::ModelConfig model_config_for(const PipelineConfig& config, int input_dim, int num_classes) {
    nn::ModelConfig mc;
    mc.cell = config.cell;
    mc.bidirectional = config.bidirectional;
    mc.rnn_layers = config.rnn_layers;
    mc.dense_layers = config.rnn_layers;
    mc.units = config.units;
    mc.input_dim = input_dim;
    mc.seq_len = config.seq_len;
    mc.num_classes = num_classes;
    return mc;
}

void check_weights_config(const nn::ModelConfig& stored, const nn::ModelConfig& expected,
                          const std::string& path) {
    if (stored.cell != expected.cell || stored.bidirectional != expected.bidirectional ||
        stored.rnn_layers != expected.rnn_layers || stored.dense_layers != expected.dense_layers ||
        stored.units != expected.units || stored.input_dim != expected.input_dim ||
        stored.seq_len != expected.seq_len || stored.num_classes != expected.num_classes)
        throw DataError(path + " was trained with a different model shape; re-run the 'train' " +
                        "stage");
}

std::vector<std::string> class_names_for(const ManifestFile& mf, int num_classes) {
    std::vector<std::string> names;
    if (mf.mode == corpus::LabelMode::Binary) {
        names = {"non-flawed", "flawed"};
        names.resize(static_cast<std::size_t>(num_classes), "?");
        return names;
    }
    names.assign(static_cast<std::size_t>(num_classes), "?");
    names[0] = "good";
    for (const auto& [cwe, cls] : mf.class_map)
        if (cls >= 0 && cls < num_classes) names[static_cast<std::size_t>(cls)] = "CWE-" + std::to_string(cwe);
    return names;
}

std::map<int, int> load_class_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read class map file: " + path);
    std::map<int, int> map;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        std::vector<std::string> parts = split_ws(body);
        if (parts.size() != 2)
            throw UserError(path + ":" + std::to_string(line_no) +
                            ": expected '<cwe> <class>' pairs");
        int cwe = static_cast<int>(parse_int(parts[0], "cwe", path));
        int cls = static_cast<int>(parse_int(parts[1], "class", path));
        if (!map.emplace(cwe, cls).second)
            throw UserError(path + ":" + std::to_string(line_no) + ": duplicate CWE " +
                            std::to_string(cwe));
    }
    if (map.empty()) throw UserError("class map file is empty: " + path);
    return map;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config.
// ---------------------------------------------------------------------------

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
    PipelineConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw UserError(origin + ":" + std::to_string(line_no) +
                            ": expected 'key = value', got '" + body + "'");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw UserError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second)
            throw UserError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                            "'");

        if (key == "input_dir") {
            config.input_dir = value;
        } else if (key == "workspace") {
            config.workspace = value;
        } else if (key == "mode") {
            if (value == "binary")
                config.mode = corpus::LabelMode::Binary;
            else if (value == "multiclass")
                config.mode = corpus::LabelMode::Multiclass;
            else
                throw UserError(origin + ": mode must be 'binary' or 'multiclass', got '" +
                                value + "'");
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(parse_int(value, key, origin));
        } else if (key == "min_class_count") {
            config.selection.min_class_count = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "min_tokens") {
            config.selection.min_tokens = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "excluded_cwes") {
            config.selection.excluded_cwes.clear();
            for (const std::string& item : parse_list(value))
                config.selection.excluded_cwes.insert(
                    static_cast<int>(parse_int(item, key, origin)));
        } else if (key == "name_patterns") {
            config.selection.name_patterns = parse_list(value);
        } else if (key == "class_map") {
            config.class_map = value;
        } else if (key == "embed_dim") {
            config.embed_dim = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "embed_window") {
            config.embed_window = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "embed_downsample") {
            config.embed_downsample = parse_real(value, key, origin);
        } else if (key == "embed_negatives") {
            config.embed_negatives = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "embed_epochs") {
            config.embed_epochs = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "embed_alpha") {
            config.embed_alpha = parse_real(value, key, origin);
        } else if (key == "embed_min_alpha") {
            config.embed_min_alpha = parse_real(value, key, origin);
        } else if (key == "embed_workers") {
            config.embed_workers = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "seq_len") {
            config.seq_len = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "cell") {
            try {
                config.cell = nn::cell_from_string(value);
            } catch (const std::invalid_argument& e) {
                throw UserError(origin + ": " + e.what());
            }
        } else if (key == "bidirectional") {
            config.bidirectional = parse_bool(value, key, origin);
        } else if (key == "rnn_layers") {
            config.rnn_layers = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "units") {
            config.units = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "batch_size") {
            config.batch_size = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "learning_rate") {
            config.learning_rate = parse_real(value, key, origin);
        } else if (key == "plateau_patience") {
            config.plateau_patience = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "plateau_factor") {
            config.plateau_factor = parse_real(value, key, origin);
        } else if (key == "early_stop_patience") {
            config.early_stop_patience = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "max_epochs") {
            config.max_epochs = static_cast<int>(parse_int(value, key, origin));
        } else if (key == "class_weighting") {
            config.class_weighting = parse_bool(value, key, origin);
        } else if (key == "train_fraction") {
            config.split_ratios[0] = parse_real(value, key, origin);
        } else if (key == "test_fraction") {
            config.split_ratios[1] = parse_real(value, key, origin);
        } else if (key == "validation_fraction") {
            config.split_ratios[2] = parse_real(value, key, origin);
        } else {
            throw UserError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key +
                            "'");
        }
    }
    validate_config(config);
    return config;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void validate_config(const PipelineConfig& c) {
    auto fail = [](const std::string& msg) { throw UserError("config: " + msg); };
    if (c.input_dir.empty()) fail("input_dir must not be empty");
    if (c.workspace.empty()) fail("workspace must not be empty");
    if (c.selection.min_class_count < 0) fail("min_class_count must be >= 0");
    if (c.selection.min_tokens < 0) fail("min_tokens must be >= 0");
    if (c.embed_dim < 1) fail("embed_dim must be >= 1");
    if (c.embed_window < 1) fail("embed_window must be >= 1");
    if (c.embed_downsample < 0) fail("embed_downsample must be >= 0");
    if (c.embed_negatives < 0) fail("embed_negatives must be >= 0");
    if (c.embed_epochs < 0) fail("embed_epochs must be >= 0");
    if (c.embed_alpha <= 0) fail("embed_alpha must be > 0");
    if (c.embed_min_alpha <= 0) fail("embed_min_alpha must be > 0");
    if (c.embed_min_alpha > c.embed_alpha) fail("embed_min_alpha must not exceed embed_alpha");
    if (c.embed_workers < 1) fail("embed_workers must be >= 1");
    if (c.seq_len < 1) fail("seq_len must be >= 1");
    if (c.rnn_layers < 1 || c.rnn_layers > 3) fail("rnn_layers must be 1, 2, or 3");
    if (c.units < 1) fail("units must be >= 1");
    if (c.batch_size < 1) fail("batch_size must be >= 1");
    if (c.learning_rate <= 0) fail("learning_rate must be > 0");
    if (c.plateau_patience < 1) fail("plateau_patience must be >= 1");
    if (c.plateau_factor <= 0 || c.plateau_factor >= 1)
        fail("plateau_factor must be in (0, 1)");
    if (c.early_stop_patience < 1) fail("early_stop_patience must be >= 1");
    if (c.max_epochs < 1) fail("max_epochs must be >= 1");
    double sum = 0;
    for (double r : c.split_ratios) {
        if (r <= 0) fail("split fractions must be > 0");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) fail("split fractions must sum to 1");
}

std::uint64_t stage_config_hash(const PipelineConfig& config, Stage stage) {
    return fnv1a(canonical_config(config, stage));
}

StagePaths stage_paths(const PipelineConfig& config) {
    const std::string base = config.workspace + "/";
    StagePaths p;
    p.tokens = base + "tokens.txt";
    p.errors = base + "normalize_errors.txt";
    p.manifest = base + "manifest.txt";
    p.vocab = base + "vocab.txt";
    p.embedding = base + "embedding.txt";
    p.encoded = base + "encoded.txt";
    p.split = base + "split.txt";
    p.weights = base + "weights.bin";
    p.history = base + "history.txt";
    p.report = base + "report.txt";
    p.metrics = base + "metrics.txt";
    p.confusion = base + "confusion.txt";
    p.confusion_normalized = base + "confusion_normalized.txt";
    p.predictions = base + "predictions.txt";
    return p;
}

// ---------------------------------------------------------------------------
// Record-file plumbing.
// ---------------------------------------------------------------------------

std::string escape_token(const std::string& token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case ' ': out += "\\s"; break;
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

std::string unescape_token(const std::string& field) {
    std::string out;
    out.reserve(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] != '\\') {
            out += field[i];
            continue;
        }
        if (i + 1 == field.size())
            throw std::invalid_argument("unescape_token: dangling backslash in '" + field + "'");
        switch (field[++i]) {
            case '\\': out += '\\'; break;
            case 's': out += ' '; break;
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default:
                throw std::invalid_argument("unescape_token: bad escape '\\" +
                                            std::string(1, field[i]) + "'");
        }
    }
    return out;
}

std::string artifact_header(const std::string& kind, std::uint64_t config_hash) {
    return std::string(kHeaderTag) + " " + kind + " " + kFormatVersion + " config=" +
           hash_hex(config_hash);
}

void check_artifact_header(const std::string& line, const std::string& kind,
                           std::uint64_t expected_hash, const std::string& path) {
    std::vector<std::string> parts = split_ws(line);
    if (parts.size() != 4 || parts[0] != kHeaderTag)
        throw DataError(path + " is not a pipeline artifact (bad header line)");
    if (parts[1] != kind)
        throw DataError(path + " holds a '" + parts[1] + "' artifact, expected '" + kind + "'");
    if (parts[2] != kFormatVersion)
        throw DataError(path + " uses artifact format version " + parts[2] +
                        "; this build reads version " + kFormatVersion);
    if (parts[3].rfind("config=", 0) != 0)
        throw DataError(path + " is missing the config hash in its header");
    std::uint64_t found = std::strtoull(parts[3].c_str() + 7, nullptr, 16);
    if (found != expected_hash)
        throw DataError(path + " was produced with a different configuration (config=" +
                        hash_hex(found) + ", current " + hash_hex(expected_hash) +
                        "); re-run the earlier stages");
}

// ---------------------------------------------------------------------------
// Stages.
// ---------------------------------------------------------------------------

void run_normalize(const PipelineConfig& config, std::ostream& log) {
    std::error_code ec;
    if (!fs::is_directory(config.input_dir, ec))
        throw UserError("input directory not found: " + config.input_dir);
    std::vector<std::string> files;
    for (auto it = fs::recursive_directory_iterator(config.input_dir, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) throw UserError("cannot scan " + config.input_dir + ": " + ec.message());
        if (it->is_regular_file() && it->path().extension() == ".ll")
            files.push_back(it->path().generic_string());
    }
    std::sort(files.begin(), files.end());

    ensure_workspace(config);
    StagePaths paths = stage_paths(config);
    std::vector<std::pair<std::string, std::string>> failures;
    std::size_t records = 0;
    std::size_t token_total = 0;

    std::ofstream out = open_output(paths.tokens);
    out << artifact_header("tokens", stage_config_hash(config, Stage::Tokens)) << '\n';
    for (const std::string& file : files) {
        ir::IrModule module;
        try {
            module = ir::parse_module_file(file);
        } catch (const DataError& e) {
            failures.emplace_back(file, e.what());
            continue;
        } catch (const UserError& e) {
            failures.emplace_back(file, e.what());
            continue;
        }
        tok::FileMeta meta = tok::metadata_from_filename(fs::path(file).filename().string());
        for (const ir::IrFunction& fn : module.functions) {
            if (!fn.is_definition) continue;
            tok::TokenStream stream = tok::standardize_function(fn, module);
            stream.cwe_id = meta.cwe_id ? meta.cwe_id : cwe_from_function_name(fn.name);
            stream.flaw_label = meta.flaw_label ? meta.flaw_label : flaw_from_function_name(fn.name);
            write_token_record(out, stream);
            ++records;
            token_total += stream.tokens.size();
        }
    }
    if (!out) throw UserError("failed while writing " + paths.tokens);
    out.close();

    std::ofstream err = open_output(paths.errors);
    err << artifact_header("normalize-errors", stage_config_hash(config, Stage::Tokens)) << '\n';
    for (const auto& [file, message] : failures)
        err << escape_token(file) << '\t' << escape_token(message) << '\n';
    err.close();

    log << "[normalize] " << files.size() << " IR files, " << records << " functions, "
        << token_total << " tokens, " << failures.size() << " files failed -> " << paths.tokens
        << '\n';
    for (const auto& [file, message] : failures) log << "[normalize]   failed: " << file << ": " << message << '\n';
    if (records == 0) {
        fs::remove(paths.tokens, ec);
        throw DataError("no function definitions extracted from " + config.input_dir + " (" +
                        std::to_string(files.size()) + " IR files scanned)");
    }
}

void run_select(const PipelineConfig& config, std::ostream& log) {
    std::vector<tok::TokenStream> streams = read_token_records(config);
    std::vector<corpus::SampleRecord> records;
    std::size_t skipped = 0;
    for (tok::TokenStream& stream : streams) {
        if (!stream.cwe_id || !stream.flaw_label) {
            ++skipped;
            continue;
        }
        corpus::SampleRecord r;
        r.id = stream.source_path + ":" + stream.function_name;
        r.function_name = stream.function_name;
        r.source_path = stream.source_path;
        r.tokens = std::move(stream.tokens);
        r.cwe_id = *stream.cwe_id;
        r.flaw_label = *stream.flaw_label;
        records.push_back(std::move(r));
    }
    if (records.empty())
        throw DataError("no token records carry CWE and flaw labels; selection needs labeled "
                        "samples");

    ManifestFile mf;
    mf.mode = config.mode;
    mf.manifest = corpus::select_samples(std::move(records), config.selection);
    std::optional<std::map<int, int>> explicit_map;
    if (!config.class_map.empty()) explicit_map = load_class_map_file(config.class_map);
    mf.class_map = corpus::assign_labels(mf.manifest, config.mode,
                                         explicit_map ? &*explicit_map : nullptr);
    ensure_workspace(config);
    write_manifest(config, mf);

    StagePaths paths = stage_paths(config);
    log << "[select] " << mf.manifest.samples.size() << " samples kept (" << skipped
        << " unlabeled records skipped) -> " << paths.manifest << '\n';
    for (const auto& [filter, removed] : mf.manifest.selection_log)
        log << "[select]   filter " << filter << " removed " << removed << '\n';
    for (const auto& [label, count] : mf.manifest.class_counts)
        log << "[select]   class " << label << ": " << count << " samples\n";
}

void run_embed(const PipelineConfig& config, std::ostream& log) {
    ManifestFile mf = read_manifest(config);
    std::vector<const std::vector<std::string>*> streams;
    streams.reserve(mf.manifest.samples.size());
    for (const corpus::SampleRecord& s : mf.manifest.samples) streams.push_back(&s.tokens);

    embed::Vocabulary vocab = embed::build_vocabulary(streams);
    embed::CbowParams params;
    params.dim = config.embed_dim;
    params.window = config.embed_window;
    params.downsample = config.embed_downsample;
    params.negatives = config.embed_negatives;
    params.epochs = config.embed_epochs;
    params.alpha = config.embed_alpha;
    params.min_alpha = config.embed_min_alpha;
    params.workers = config.embed_workers;
    params.seed = stage_seed(config.seed, "embed");
    embed::EmbeddingMatrix emb = embed::train_cbow(streams, vocab, params);

    ensure_workspace(config);
    StagePaths paths = stage_paths(config);
    std::uint64_t hash = stage_config_hash(config, Stage::Embedding);
    embed::save_vocabulary(vocab, paths.vocab, {artifact_header("vocab", hash).substr(1)});
    embed::save_embedding(emb, vocab, paths.embedding,
                          {artifact_header("embedding", hash).substr(1)});

    log << "[embed] vocabulary " << vocab.size() << " tokens (" << vocab.total_tokens
        << " occurrences), " << config.embed_dim << "-dim CBOW, " << config.embed_epochs
        << " epochs -> " << paths.embedding << '\n';
}

void run_encode(const PipelineConfig& config, std::ostream& log) {
    ManifestFile mf = read_manifest(config);
    StagePaths paths = stage_paths(config);
    std::ifstream vprobe = open_artifact(paths.vocab, "vocab",
                                         stage_config_hash(config, Stage::Embedding), "embed");
    vprobe.close();
    embed::Vocabulary vocab = embed::load_vocabulary(paths.vocab);
    EmbeddingArtifact art = load_embedding_artifact(config);
    if (art.matrix.vectors.rows() != vocab.size())
        throw DataError(paths.embedding + " and " + paths.vocab +
                        " disagree on vocabulary size; re-run the 'embed' stage");

    std::ofstream out = open_output(paths.encoded);
    out << artifact_header("encoded", stage_config_hash(config, Stage::Encoded)) << '\n';
    out << "#embedding " << hash_hex(art.file_hash) << '\n';
    out << "#seqlen " << config.seq_len << '\n';
    std::size_t oov = 0;
    std::size_t truncated = 0;
    std::size_t token_total = 0;
    for (const corpus::SampleRecord& s : mf.manifest.samples) {
        std::vector<int> ids = embed::encode_token_ids(s.tokens, vocab, config.seq_len);
        if (s.tokens.size() > static_cast<std::size_t>(config.seq_len)) ++truncated;
        token_total += ids.size();
        out << escape_token(s.id) << '\t' << active_label(s, mf.mode) << '\t';
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out << ' ';
            if (ids[i] < 0) ++oov;
            out << ids[i];
        }
        out << '\n';
    }
    if (!out) throw UserError("failed while writing " + paths.encoded);

    log << "[encode] " << mf.manifest.samples.size() << " samples at seq_len " << config.seq_len
        << ", " << truncated << " truncated, " << oov << '/' << token_total
        << " tokens out of vocabulary -> " << paths.encoded << '\n';
}

void run_train(const PipelineConfig& config, std::ostream& log) {
    EmbeddingArtifact art = load_embedding_artifact(config);
    EncodedFile enc = read_encoded(config);
    if (enc.embedding_hash != art.file_hash)
        throw DataError("the encoded dataset was built against a different embedding; re-run "
                        "the 'encode' stage");
    if (enc.seq_len != config.seq_len)
        throw DataError("the encoded dataset uses seq_len " + std::to_string(enc.seq_len) +
                        " but the config says " + std::to_string(config.seq_len) +
                        "; re-run the 'encode' stage");

    int num_classes = infer_num_classes(enc.labels, config.mode);
    corpus::DatasetSplit split = corpus::split_dataset(enc.labels.size(), enc.labels,
                                                       config.split_ratios,
                                                       stage_seed(config.seed, "split"));
    ensure_workspace(config);
    write_split(config, split, enc.labels.size());

    nn::Dataset train = subset_dataset(enc, art.matrix.vectors, split.train, config.seq_len);
    nn::Dataset test = subset_dataset(enc, art.matrix.vectors, split.test, config.seq_len);

    nn::TrainingSchedule schedule;
    schedule.batch_size = config.batch_size;
    schedule.initial_lr = config.learning_rate;
    schedule.plateau_patience = config.plateau_patience;
    schedule.plateau_factor = config.plateau_factor;
    schedule.early_stop_patience = config.early_stop_patience;
    schedule.max_epochs = config.max_epochs;
    schedule.seed = stage_seed(config.seed, "train");
    if (config.class_weighting)
        schedule.class_weights = corpus::compute_class_weights(train.labels).weights;

    nn::ModelConfig mc = model_config_for(config, art.matrix.dim, num_classes);
    nn::validate(mc);
    nn::ModelParams initial = nn::init_params(mc, stage_seed(config.seed, "model"));

    StagePaths paths = stage_paths(config);
    log << "[train] " << nn::to_string(mc.cell) << (mc.bidirectional ? " bidirectional" : "")
        << ", " << mc.rnn_layers << " layer(s) of " << mc.units << " units, "
        << nn::param_count(mc) << " parameters, " << num_classes << " classes; "
        << train.size() << " train / " << test.size() << " test / " << split.validation.size()
        << " validation samples\n";
    nn::FitResult result = nn::fit(initial, train, test, schedule, &log);

    std::uint64_t model_hash = stage_config_hash(config, Stage::Model);
    nn::save_params(result.params, paths.weights, model_hash);

    std::ofstream hist = open_output(paths.history);
    hist << artifact_header("history", model_hash) << '\n';
    hist << "#classes " << num_classes << '\n';
    hist << "#best-epoch " << result.history.best_epoch << '\n';
    hist << "#best-test-loss " << format_double(result.history.best_test_loss) << '\n';
    hist << "#early-stopped " << (result.history.early_stopped ? 1 : 0) << '\n';
    hist << "#columns epoch train_loss train_accuracy test_loss test_accuracy learning_rate\n";
    for (std::size_t i = 0; i < result.history.epochs.size(); ++i) {
        const nn::EpochStats& e = result.history.epochs[i];
        hist << i + 1 << ' ' << format_double(e.train_loss) << ' '
             << format_double(e.train_accuracy) << ' ' << format_double(e.test_loss) << ' '
             << format_double(e.test_accuracy) << ' ' << format_double(e.learning_rate) << '\n';
    }
    if (!hist) throw UserError("failed while writing " + paths.history);

    log << "[train] " << result.history.epochs.size() << " epochs"
        << (result.history.early_stopped ? " (early stop)" : "") << ", best epoch "
        << result.history.best_epoch + 1 << " with test loss "
        << format_double(result.history.best_test_loss) << " -> " << paths.weights << '\n';
}

void run_evaluate(const PipelineConfig& config, std::ostream& log) {
    ManifestFile mf = read_manifest(config);
    EmbeddingArtifact art = load_embedding_artifact(config);
    EncodedFile enc = read_encoded(config);
    if (enc.embedding_hash != art.file_hash)
        throw DataError("the encoded dataset was built against a different embedding; re-run "
                        "the 'encode' stage");
    corpus::DatasetSplit split = read_split(config, enc.labels.size());

    StagePaths paths = stage_paths(config);
    std::ifstream wprobe(paths.weights, std::ios::binary);
    if (!wprobe)
        throw UserError("missing weights artifact " + paths.weights +
                        "; run the 'train' stage first");
    wprobe.close();
    nn::LoadedParams loaded = nn::load_params(paths.weights);
    std::uint64_t model_hash = stage_config_hash(config, Stage::Model);
    if (loaded.config_hash != model_hash)
        throw DataError(paths.weights + " was produced with a different configuration (config=" +
                        hash_hex(loaded.config_hash) + ", current " + hash_hex(model_hash) +
                        "); re-run the 'train' stage");
    int num_classes = infer_num_classes(enc.labels, config.mode);
    check_weights_config(loaded.params.config, model_config_for(config, art.matrix.dim, num_classes),
                         paths.weights);

    nn::Dataset validation = subset_dataset(enc, art.matrix.vectors, split.validation,
                                            config.seq_len);
    nn::Prediction pred = nn::predict(loaded.params, validation, config.batch_size);

    eval::ConfusionMatrix cm = eval::confusion(validation.labels, pred.labels, num_classes);
    std::vector<std::string> names = class_names_for(mf, num_classes);
    eval::ClassificationReport rep = eval::report(cm, names);
    std::vector<std::int64_t> supports;
    for (const eval::ClassMetrics& c : rep.classes) supports.push_back(c.support);
    double baseline = eval::baseline_accuracy(supports);

    std::uint64_t report_hash = stage_config_hash(config, Stage::Report);
    std::ofstream rout = open_output(paths.report);
    rout << artifact_header("report", report_hash) << '\n';
    rout << "validation samples: " << validation.size() << " of " << enc.labels.size() << '\n';
    rout << '\n' << eval::render_report(rep) << '\n';
    char line[64];
    std::snprintf(line, sizeof line, "majority-class baseline accuracy: %.4f\n", baseline);
    rout << line;
    if (!rout) throw UserError("failed while writing " + paths.report);
    rout.close();

    std::ofstream mout = open_output(paths.metrics);
    mout << artifact_header("metrics", report_hash) << '\n';
    mout << "accuracy=" << format_double(rep.accuracy) << '\n';
    mout << "baseline_accuracy=" << format_double(baseline) << '\n';
    mout << "validation_samples=" << rep.total_support << '\n';
    auto emit_avg = [&mout](const char* prefix, const eval::ClassMetrics& m) {
        mout << prefix << "_precision=" << format_double(m.precision) << '\n';
        mout << prefix << "_recall=" << format_double(m.recall) << '\n';
        mout << prefix << "_f1=" << format_double(m.f1) << '\n';
    };
    emit_avg("micro", rep.micro);
    emit_avg("macro", rep.macro);
    emit_avg("weighted", rep.weighted);
    for (std::size_t k = 0; k < rep.classes.size(); ++k) {
        const eval::ClassMetrics& m = rep.classes[k];
        mout << "class_" << k << "_name=" << m.name << '\n';
        mout << "class_" << k << "_precision=" << format_double(m.precision) << '\n';
        mout << "class_" << k << "_recall=" << format_double(m.recall) << '\n';
        mout << "class_" << k << "_f1=" << format_double(m.f1) << '\n';
        mout << "class_" << k << "_support=" << m.support << '\n';
    }
    if (!mout) throw UserError("failed while writing " + paths.metrics);
    mout.close();

    std::ofstream cm_out = open_output(paths.confusion);
    cm_out << artifact_header("confusion", report_hash) << '\n';
    for (int r = 0; r < cm.num_classes(); ++r) {
        for (int c = 0; c < cm.num_classes(); ++c) {
            if (c) cm_out << ' ';
            cm_out << cm.counts(r, c);
        }
        cm_out << '\n';
    }
    cm_out.close();

    Eigen::MatrixXd norm = eval::normalize(cm);
    std::ofstream nout = open_output(paths.confusion_normalized);
    nout << artifact_header("confusion-normalized", report_hash) << '\n';
    for (Eigen::Index r = 0; r < norm.rows(); ++r) {
        for (Eigen::Index c = 0; c < norm.cols(); ++c) {
            if (c) nout << ' ';
            nout << format_double(norm(r, c));
        }
        nout << '\n';
    }
    nout.close();

    char acc[64];
    std::snprintf(acc, sizeof acc, "%.4f (baseline %.4f)", rep.accuracy, baseline);
    log << "[evaluate] validation accuracy " << acc << " over " << validation.size()
        << " samples -> " << paths.report << '\n';
    log << '\n' << eval::render_report(rep);
}

void run_predict(const PipelineConfig& config, const std::vector<std::string>& ir_files,
                 std::ostream& log) {
    if (ir_files.empty()) throw UserError("predict needs at least one IR file argument");
    StagePaths paths = stage_paths(config);
    std::ifstream vprobe = open_artifact(paths.vocab, "vocab",
                                         stage_config_hash(config, Stage::Embedding), "embed");
    vprobe.close();
    embed::Vocabulary vocab = embed::load_vocabulary(paths.vocab);
    EmbeddingArtifact art = load_embedding_artifact(config);
    std::ifstream wprobe(paths.weights, std::ios::binary);
    if (!wprobe)
        throw UserError("missing weights artifact " + paths.weights +
                        "; run the 'train' stage first");
    wprobe.close();
    nn::LoadedParams loaded = nn::load_params(paths.weights);
    std::uint64_t model_hash = stage_config_hash(config, Stage::Model);
    if (loaded.config_hash != model_hash)
        throw DataError(paths.weights + " was produced with a different configuration (config=" +
                        hash_hex(loaded.config_hash) + ", current " + hash_hex(model_hash) +
                        "); re-run the 'train' stage");
    if (loaded.params.config.input_dim != art.matrix.dim)
        throw DataError(paths.weights + " expects " +
                        std::to_string(loaded.params.config.input_dim) +
                        "-dim inputs but the embedding is " + std::to_string(art.matrix.dim) +
                        "-dim; re-run the 'train' stage");

    // Fail fast on the explicitly named inputs: a bad argument is the
    // user's signal, unlike the bulk normalize scan.
    nn::Dataset batch;
    batch.embedding = &art.matrix.vectors;
    batch.seq_len = loaded.params.config.seq_len;
    std::vector<std::pair<std::string, std::string>> names;
    for (const std::string& file : ir_files) {
        ir::IrModule module = ir::parse_module_file(file);
        for (const ir::IrFunction& fn : module.functions) {
            if (!fn.is_definition) continue;
            tok::TokenStream stream = tok::standardize_function(fn, module);
            batch.ids.push_back(embed::encode_token_ids(stream.tokens, vocab, batch.seq_len));
            batch.labels.push_back(0);  // unused by predict
            names.emplace_back(file, fn.name);
        }
    }
    if (batch.ids.empty())
        throw DataError("no function definitions found in the given IR files");

    nn::Prediction pred = nn::predict(loaded.params, batch, config.batch_size);

    ensure_workspace(config);
    std::ofstream out = open_output(paths.predictions);
    out << artifact_header("predictions", model_hash) << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << escape_token(names[i].first) << '\t' << escape_token(names[i].second) << '\t'
            << pred.labels[i] << '\t';
        for (Eigen::Index k = 0; k < pred.probs.cols(); ++k) {
            if (k) out << ' ';
            out << format_double(pred.probs(static_cast<Eigen::Index>(i), k));
        }
        out << '\n';
    }
    if (!out) throw UserError("failed while writing " + paths.predictions);

    log << "[predict] " << names.size() << " functions from " << ir_files.size()
        << " files -> " << paths.predictions << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        char p[32];
        std::snprintf(p, sizeof p, "%.4f",
                      pred.probs(static_cast<Eigen::Index>(i), pred.labels[i]));
        log << "[predict]   " << names[i].second << " -> class " << pred.labels[i] << " (p=" << p
            << ")\n";
    }
}

void run_all(const PipelineConfig& config, std::ostream& log) {
    run_normalize(config, log);
    run_select(config, log);
    run_embed(config, log);
    run_encode(config, log);
    run_train(config, log);
    run_evaluate(config, log);
}

void write_fixture(const corpus::FixtureParams& params, const std::string& out_dir,
                   std::ostream& log) {
    corpus::FixtureCorpus fixture = corpus::generate_fixture(params);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw UserError("cannot create " + out_dir + ": " + ec.message());
    for (const auto& [name, content] : fixture.files) {
        std::ofstream out = open_output(out_dir + "/" + name);
        out << content;
        if (!out) throw UserError("failed while writing " + out_dir + "/" + name);
    }
    log << "[fixture] " << fixture.files.size() << " IR files ("
        << fixture.manifest.samples.size() << " functions, " << params.classes
        << " classes) -> " << out_dir << '\n';
}

}  // namespace irvd::pipe
