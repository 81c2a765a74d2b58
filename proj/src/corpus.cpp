#include "irvd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "irvd/common.hpp"
#include "irvd/ir.hpp"

namespace irvd::corpus {

namespace {

std::map<int, std::size_t> count_by_cwe(const std::vector<SampleRecord>& records) {
    std::map<int, std::size_t> counts;
    for (const auto& r : records) ++counts[r.cwe_id];
    return counts;
}

}  // namespace

CorpusManifest select_samples(std::vector<SampleRecord> records, const SelectionParams& params) {
    CorpusManifest manifest;

    for (auto& r : records)
        r.binary_label = (r.flaw_label == tok::FlawLabel::Bad) ? 1 : 0;

    // Step 1: excluded weakness classes.
    std::size_t before = records.size();
    std::erase_if(records, [&](const SampleRecord& r) {
        return params.excluded_cwes.count(r.cwe_id) > 0;
    });
    manifest.selection_log.emplace_back("excluded-cwes", before - records.size());

    // Step 2: only functions whose names mark them as weakness-relevant.
    // An empty pattern list disables the filter.
    before = records.size();
    if (!params.name_patterns.empty()) {
        std::erase_if(records, [&](const SampleRecord& r) {
            return std::none_of(params.name_patterns.begin(), params.name_patterns.end(), [&](const std::string& p) {
                return glob_match(p, r.function_name);
            });
        });
    }
    manifest.selection_log.emplace_back("name-patterns", before - records.size());

    // Step 3: weakness classes with too few test cases.
    before = records.size();
    {
        auto counts = count_by_cwe(records);
        std::erase_if(records, [&](const SampleRecord& r) {
            return counts[r.cwe_id] < static_cast<std::size_t>(params.min_class_count);
        });
    }
    manifest.selection_log.emplace_back("class-count", before - records.size());

    // Step 4: short samples. Runs after the class-count filter, so a class
    // may end below min_class_count here and still survive.
    before = records.size();
    std::erase_if(records, [&](const SampleRecord& r) {
        return r.tokens.size() < static_cast<std::size_t>(params.min_tokens);
    });
    manifest.selection_log.emplace_back("token-length", before - records.size());

    if (records.empty()) throw DataError("selection produced an empty corpus");

    manifest.samples = std::move(records);
    for (const auto& r : manifest.samples) ++manifest.class_counts[r.binary_label];
    return manifest;
}

std::map<int, int> assign_labels(CorpusManifest& manifest, LabelMode mode,
                                 const std::map<int, int>* explicit_map) {
    if (manifest.samples.empty()) throw DataError("assign_labels: empty manifest");

    for (auto& r : manifest.samples)
        r.binary_label = (r.flaw_label == tok::FlawLabel::Bad) ? 1 : 0;

    std::map<int, int> class_of_cwe;
    if (mode == LabelMode::Multiclass) {
        if (explicit_map != nullptr) {
            class_of_cwe = *explicit_map;
        } else {
            // Flawed CWEs ranked by descending flawed-sample count, then by
            // ascending CWE id, get the dense indices 1..K.
            std::map<int, std::size_t> flawed_counts;
            for (const auto& r : manifest.samples)
                if (r.flaw_label == tok::FlawLabel::Bad) ++flawed_counts[r.cwe_id];
            std::vector<std::pair<int, std::size_t>> ranked(flawed_counts.begin(),
                                                            flawed_counts.end());
            std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            int next = 1;
            for (const auto& [cwe, n] : ranked) class_of_cwe[cwe] = next++;
        }
        for (auto& r : manifest.samples) {
            if (r.flaw_label == tok::FlawLabel::Good) {
                r.multiclass_label = 0;
            } else {
                auto it = class_of_cwe.find(r.cwe_id);
                if (it == class_of_cwe.end())
                    throw DataError("assign_labels: no class for CWE " +
                                    std::to_string(r.cwe_id));
                r.multiclass_label = it->second;
            }
        }
    } else {
        for (auto& r : manifest.samples) r.multiclass_label = r.binary_label;
    }

    manifest.class_counts.clear();
    for (const auto& r : manifest.samples) {
        int label = (mode == LabelMode::Binary) ? r.binary_label : r.multiclass_label;
        ++manifest.class_counts[label];
    }
    return class_of_cwe;
}

DatasetSplit split_dataset(std::size_t n, const std::vector<int>& labels,
                           std::array<double, 3> ratios, std::uint64_t seed) {
    if (labels.size() != n) throw DataError("split_dataset: labels length mismatch");
    if (n < 3) throw DataError("split_dataset: need at least 3 samples");
    double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(ratio_sum - 1.0) > 1e-9)
        throw DataError("split_dataset: ratios must sum to 1");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

    DatasetSplit split;
    split.ratios = ratios;
    split.seed = seed;
    Rng rng(seed);

    for (auto& [label, indices] : by_class) {
        if (indices.size() < 3)
            throw DataError("split_dataset: class " + std::to_string(label) +
                            " has fewer than 3 samples");
        deterministic_shuffle(indices, rng);

        // Largest-remainder allocation keeps every part within one sample
        // of class_count * ratio.
        const double nc = static_cast<double>(indices.size());
        std::array<std::size_t, 3> take{};
        std::array<double, 3> frac{};
        std::size_t assigned = 0;
        for (int p = 0; p < 3; ++p) {
            double target = nc * ratios[p];
            take[p] = static_cast<std::size_t>(std::floor(target));
            frac[p] = target - std::floor(target);
            assigned += take[p];
        }
        std::array<int, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (std::size_t left = indices.size() - assigned, k = 0; k < left; ++k)
            ++take[order[k % 3]];

        std::size_t pos = 0;
        for (std::size_t k = 0; k < take[0]; ++k) split.train.push_back(indices[pos++]);
        for (std::size_t k = 0; k < take[1]; ++k) split.test.push_back(indices[pos++]);
        for (std::size_t k = 0; k < take[2]; ++k) split.validation.push_back(indices[pos++]);
    }

    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

ClassWeights compute_class_weights(const std::vector<int>& labels) {
    if (labels.empty()) throw DataError("compute_class_weights: no labels");
    int max_label = *std::max_element(labels.begin(), labels.end());
    int min_label = *std::min_element(labels.begin(), labels.end());
    if (min_label < 0) throw DataError("compute_class_weights: negative label");

    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label) + 1, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw DataError("compute_class_weights: class " + std::to_string(c) +
                            " has no samples");

    const double total = static_cast<double>(labels.size());
    const double k = static_cast<double>(counts.size());
    ClassWeights out;
    out.weights.resize(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c)
        out.weights[c] = total / (k * static_cast<double>(counts[c]));
    return out;
}

// ---------------------------------------------------------------------------
// Fixture generation.
// ---------------------------------------------------------------------------

namespace {

// One distinct external per flawed class; index 0 holds the neutral calls
// every class may make.
const std::vector<std::string>& motif_externals() {
    static const std::vector<std::string> names = {
        "strcpy",  "memcpy",  "strncpy", "memset",  "sprintf", "fgets",
        "strcat",  "strncat", "memmove", "calloc",  "realloc", "strtol",
        "fread",   "fwrite",  "system",  "getenv",  "atoi",    "fopen",
        "snprintf", "strcmp", "strlen",  "malloc",  "free"};
    return names;
}

const std::vector<std::string>& neutral_externals() {
    static const std::vector<std::string> names = {"puts", "abs", "labs"};
    return names;
}

struct IrBuilder {
    std::ostringstream body;
    int next_var = 1;
    int next_label = 1;
    std::size_t token_estimate = 0;
    std::set<std::string> called_externals;

    std::string fresh_var() { return "%v" + std::to_string(next_var++); }
    std::string live_var(Rng& rng) const {
        // next_var is always >= 2 once the prologue ran.
        int id = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(next_var - 1)));
        return "%v" + std::to_string(id);
    }
    void line(const std::string& text, std::size_t tokens) {
        body << "  " << text << "\n";
        token_estimate += tokens + 1;  // + EOL
    }
};

const char* arith_op(Rng& rng) {
    static const char* ops[] = {"add", "sub", "mul", "and", "or", "xor"};
    return ops[uniform_index(rng, 6)];
}

void emit_filler_line(IrBuilder& b, Rng& rng) {
    switch (uniform_index(rng, 5)) {
        case 0: {  // arithmetic with a constant
            std::string src = b.live_var(rng);
            std::string dst = b.fresh_var();
            int c = static_cast<int>(uniform_index(rng, 900)) + 10;
            std::string cs = std::to_string(c);
            b.line(dst + " = " + arith_op(rng) + " i32 " + src + ", " + cs, 6 + cs.size());
            break;
        }
        case 1: {  // arithmetic with a variable
            std::string a = b.live_var(rng), c = b.live_var(rng);
            std::string dst = b.fresh_var();
            b.line(dst + " = " + arith_op(rng) + " i32 " + a + ", " + c, 7);
            break;
        }
        case 2: {  // load through a pointer
            std::string p = b.live_var(rng);
            std::string dst = b.fresh_var();
            b.line(dst + " = load i32, i32* " + p + ", align 4", 11);
            break;
        }
        case 3: {  // store a constant
            std::string p = b.live_var(rng);
            int c = static_cast<int>(uniform_index(rng, 90)) + 10;
            b.line("store i32 " + std::to_string(c) + ", i32* " + p + ", align 4", 12);
            break;
        }
        case 4: {  // basic-block break
            std::string lbl = "lbl_" + std::to_string(b.next_label++);
            b.line("br label %" + lbl, 3);
            b.body << lbl << ":\n";
            b.token_estimate += 3;
            break;
        }
    }
}

void emit_neutral_call(IrBuilder& b, Rng& rng) {
    const auto& pool = neutral_externals();
    const std::string& callee = pool[uniform_index(rng, pool.size())];
    std::string arg = b.live_var(rng);
    std::string dst = b.fresh_var();
    b.line(dst + " = call i32 @" + callee + "(i32 " + arg + ")", 9);
    b.called_externals.insert(callee);
}

// The class signature: a characteristic external call followed by a stored
// digit pattern, planted near the end of the function.
void emit_motif(IrBuilder& b, int cls) {
    const auto& pool = motif_externals();
    const std::string callee = pool[static_cast<std::size_t>(cls - 1) % pool.size()];
    const int pattern = 1000 + 37 * cls;
    std::string p = b.fresh_var();
    std::string q = b.fresh_var();
    b.line(p + " = call i8* @" + callee + "(i8* %buf, i64 8)", 12);
    b.line(q + " = add i32 %v1, " + std::to_string(pattern), 6 + std::to_string(pattern).size());
    b.line("store i32 " + std::to_string(pattern) + ", i32* %slot, align 4",
           11 + std::to_string(pattern).size());
    b.called_externals.insert(callee);
}

std::string build_function(Rng& rng, const std::string& name, int cls, double motif_strength,
                           std::size_t target_tokens, std::set<std::string>& externals_out) {
    IrBuilder b;
    b.body << "define i32 @" << name << "() {\n";
    b.body << "entry:\n";
    b.token_estimate += 3;
    b.line(b.fresh_var() + " = alloca i32, align 4", 8);  // %v1, the seed of live_var's pool
    b.line("%buf = alloca i8, align 1", 8);
    b.line("%slot = alloca i32, align 4", 8);

    const bool plant = cls > 0 && uniform_unit(rng) < motif_strength;
    // Leave room for the motif and the epilogue.
    const std::size_t reserve = plant ? 45 : 10;
    while (b.token_estimate + reserve < target_tokens) {
        if (uniform_index(rng, 8) == 0)
            emit_neutral_call(b, rng);
        else
            emit_filler_line(b, rng);
    }
    if (plant) emit_motif(b, cls);
    b.line("ret i32 %v1", 4);
    b.body << "}\n";

    externals_out = b.called_externals;
    return b.body.str();
}

std::string declaration_for(const std::string& name) {
    if (name == "puts" || name == "atoi" || name == "system" || name == "strcmp")
        return "declare i32 @" + name + "(i8*)\n";
    if (name == "abs" || name == "labs") return "declare i32 @" + name + "(i32)\n";
    if (name == "strlen") return "declare i64 @" + name + "(i8*)\n";
    if (name == "free") return "declare void @" + name + "(i8*)\n";
    if (name == "malloc" || name == "getenv") return "declare i8* @" + name + "(i64)\n";
    return "declare i8* @" + name + "(i8*, i64)\n";
}

}  // namespace

const std::vector<int>& fixture_cwe_palette() {
    static const std::vector<int> palette = {122, 190, 121, 191, 457, 134, 590, 762,
                                             78,  23,  124, 36,  194, 195, 127, 401,
                                             400, 369, 126, 680, 415, 197, 690};
    return palette;
}

FixtureCorpus generate_fixture(const FixtureParams& params) {
    if (params.classes < 2) throw UserError("generate_fixture: need at least 2 classes");
    if (params.per_class_counts.empty() && params.per_class < 1)
        throw UserError("generate_fixture: per_class must be positive");
    if (!params.per_class_counts.empty() &&
        params.per_class_counts.size() != static_cast<std::size_t>(params.classes))
        throw UserError("generate_fixture: per_class_counts size mismatch");
    if (params.min_tokens < 30 || params.max_tokens < params.min_tokens)
        throw UserError("generate_fixture: invalid token length range");

    FixtureCorpus out;
    Rng rng(params.seed);
    const auto& palette = fixture_cwe_palette();
    int case_index = 0;

    for (int cls = 0; cls < params.classes; ++cls) {
        std::size_t count = params.per_class_counts.empty()
                                ? static_cast<std::size_t>(params.per_class)
                                : params.per_class_counts[static_cast<std::size_t>(cls)];
        for (std::size_t s = 0; s < count; ++s, ++case_index) {
            // Good samples still belong to some weakness's test case.
            int cwe;
            if (cls == 0) {
                std::size_t origin = uniform_index(rng, static_cast<std::uint64_t>(
                                                            std::max(1, params.classes - 1)));
                cwe = palette[origin % palette.size()];
            } else {
                cwe = static_cast<std::size_t>(cls - 1) < palette.size()
                          ? palette[static_cast<std::size_t>(cls - 1)]
                          : 800 + cls;
            }
            const bool good = cls == 0;
            char case_name[32];
            std::snprintf(case_name, sizeof(case_name), "fn_%05d", case_index);
            std::string fn_name =
                std::string(case_name) + (good ? "_good1" : "_bad");
            std::string file_name = "CWE" + std::to_string(cwe) + "__" + case_name + "__" +
                                    (good ? "good" : "bad") + ".ll";

            std::size_t target = params.min_tokens +
                                 uniform_index(rng, static_cast<std::uint64_t>(
                                                        params.max_tokens - params.min_tokens + 1));
            std::set<std::string> externals;
            std::string fn_text =
                build_function(rng, fn_name, cls, params.motif_strength, target, externals);

            std::string file_text;
            for (const auto& e : externals) file_text += declaration_for(e);
            file_text += fn_text;

            ir::IrModule module = ir::parse_module(file_text, file_name);
            const ir::IrFunction* fn = nullptr;
            for (const auto& f : module.functions)
                if (f.is_definition && f.name == fn_name) fn = &f;
            tok::TokenStream stream = tok::standardize_function(*fn, module);

            SampleRecord record;
            record.id = file_name + ":" + fn_name;
            record.function_name = fn_name;
            record.source_path = file_name;
            record.tokens = std::move(stream.tokens);
            record.cwe_id = cwe;
            record.flaw_label = good ? tok::FlawLabel::Good : tok::FlawLabel::Bad;
            record.binary_label = good ? 0 : 1;
            record.multiclass_label = cls;
            out.manifest.samples.push_back(std::move(record));
            ++out.manifest.class_counts[cls];

            out.files.emplace_back(std::move(file_name), std::move(file_text));
        }
    }
    return out;
}

}  // namespace irvd::corpus
