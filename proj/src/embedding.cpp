#include "irvd/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "irvd/common.hpp"

namespace irvd::embed {

Vocabulary build_vocabulary(const std::vector<const TokenSeq*>& corpus) {
    Vocabulary vocab;
    for (const TokenSeq* seq : corpus) {
        for (const std::string& token : *seq) {
            auto [it, inserted] = vocab.token_to_index.try_emplace(token, vocab.size());
            if (inserted) {
                vocab.index_to_token.push_back(token);
                vocab.frequencies.push_back(0);
            }
            ++vocab.frequencies[static_cast<std::size_t>(it->second)];
            ++vocab.total_tokens;
        }
    }
    if (vocab.total_tokens == 0)
        throw DataError("cannot build a vocabulary from an empty corpus");
    return vocab;
}

double subsample_keep_probability(std::int64_t token_freq, std::int64_t total, double rate) {
    if (token_freq <= 0 || total <= 0 || token_freq > total)
        throw std::invalid_argument("subsample_keep_probability: invalid frequency");
    if (rate <= 0.0)
        return 1.0;  // subsampling disabled
    double f = static_cast<double>(token_freq) / static_cast<double>(total);
    return std::min(1.0, std::sqrt(rate / f));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Cumulative unigram^power table for negative sampling: cell i of the table
// holds a token index, tokens occupy cells in proportion to freq^power.
std::vector<int> build_unigram_table(const Vocabulary& vocab, double power, int table_size) {
    const int v = vocab.size();
    std::vector<double> weights(static_cast<std::size_t>(v));
    double z = 0.0;
    for (int i = 0; i < v; ++i) {
        weights[static_cast<std::size_t>(i)] =
            std::pow(static_cast<double>(vocab.frequencies[static_cast<std::size_t>(i)]), power);
        z += weights[static_cast<std::size_t>(i)];
    }
    std::vector<int> table(static_cast<std::size_t>(table_size));
    int token = 0;
    double cumulative = weights[0] / z;
    for (int cell = 0; cell < table_size; ++cell) {
        table[static_cast<std::size_t>(cell)] = token;
        double progress = static_cast<double>(cell + 1) / static_cast<double>(table_size);
        while (progress > cumulative && token < v - 1) {
            ++token;
            cumulative += weights[static_cast<std::size_t>(token)] / z;
        }
    }
    return table;
}

struct TrainContext {
    const Vocabulary* vocab;
    const CbowParams* params;
    const std::vector<int>* table;
    std::int64_t total_positions = 0;  // raw tokens x epochs, drives lr decay
};

void train_streams(Eigen::MatrixXd& w_in, Eigen::MatrixXd& w_out,
                   const std::vector<const TokenSeq*>& corpus, const TrainContext& ctx,
                   std::uint64_t seed) {
    const CbowParams& p = *ctx.params;
    Rng rng(seed);
    std::vector<int> kept_ids;       // vocabulary indices surviving subsampling
    std::vector<int> kept_raw;       // their raw positions, for lr bookkeeping
    std::vector<int> context_ids;
    std::vector<int> negative_ids;
    std::int64_t processed_base = 0;
    double lr = p.alpha;
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
        for (const TokenSeq* seq : corpus) {
            kept_ids.clear();
            kept_raw.clear();
            for (std::size_t raw = 0; raw < seq->size(); ++raw) {
                int id = ctx.vocab->index_of((*seq)[raw]);
                if (id < 0)
                    continue;
                double keep = subsample_keep_probability(
                    ctx.vocab->frequencies[static_cast<std::size_t>(id)],
                    ctx.vocab->total_tokens, p.downsample);
                if (keep < 1.0 && uniform_unit(rng) >= keep)
                    continue;
                kept_ids.push_back(id);
                kept_raw.push_back(static_cast<int>(raw));
            }
            const int n = static_cast<int>(kept_ids.size());
            for (int k = 0; k < n; ++k) {
                std::int64_t done = processed_base + kept_raw[static_cast<std::size_t>(k)];
                lr = std::max(p.min_alpha,
                              p.alpha * (1.0 - static_cast<double>(done) /
                                                   static_cast<double>(ctx.total_positions)));
                int shrink = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(p.window)));
                int span = p.window - shrink;
                context_ids.clear();
                for (int j = std::max(0, k - span); j <= std::min(n - 1, k + span); ++j)
                    if (j != k)
                        context_ids.push_back(kept_ids[static_cast<std::size_t>(j)]);
                if (context_ids.empty())
                    continue;
                int center = kept_ids[static_cast<std::size_t>(k)];
                negative_ids.clear();
                for (int s = 0; s < p.negatives; ++s) {
                    int idx = (*ctx.table)[static_cast<std::size_t>(
                        uniform_index(rng, static_cast<std::uint64_t>(ctx.table->size())))];
                    if (idx != center)
                        negative_ids.push_back(idx);
                }
                cbow_train_pair(w_in, w_out, context_ids, center, negative_ids, lr);
            }
            processed_base += static_cast<std::int64_t>(seq->size());
        }
    }
}

}  // namespace

EmbeddingMatrix train_cbow(const std::vector<const TokenSeq*>& corpus, const Vocabulary& vocab,
                           const CbowParams& params) {
    if (params.dim <= 0 || params.window <= 0 || params.epochs < 0 || params.negatives < 0 ||
        params.table_size <= 0)
        throw std::invalid_argument("train_cbow: non-positive dimension, window, or table size");
    if (vocab.size() == 0)
        throw DataError("train_cbow: empty vocabulary");
    bool any_reaches_window = false;
    std::int64_t raw_total = 0;
    for (const TokenSeq* seq : corpus) {
        raw_total += static_cast<std::int64_t>(seq->size());
        if (static_cast<int>(seq->size()) >= params.window)
            any_reaches_window = true;
    }
    if (!any_reaches_window)
        throw DataError("train_cbow: context window is larger than every token stream");

    const int v = vocab.size();
    const int d = params.dim;
    Rng init_rng(stage_seed(params.seed, "cbow-init"));
    Eigen::MatrixXd w_in(v, d);
    for (int i = 0; i < v; ++i)
        for (int j = 0; j < d; ++j)
            w_in(i, j) = (uniform_unit(init_rng) - 0.5) / static_cast<double>(d);
    Eigen::MatrixXd w_out = Eigen::MatrixXd::Zero(v, d);

    std::vector<int> table = build_unigram_table(vocab, params.unigram_power, params.table_size);
    TrainContext ctx{&vocab, &params, &table,
                     raw_total * static_cast<std::int64_t>(params.epochs)};
    // A single worker walks the corpus in order with one RNG: deterministic.
    // With several workers each would shard the streams and race on the
    // matrices; at this corpus scale the deterministic path is also the
    // faster one, so extra workers are folded into it.
    train_streams(w_in, w_out, corpus, ctx, stage_seed(params.seed, "cbow-train"));

    EmbeddingMatrix emb;
    emb.vectors = std::move(w_in);
    emb.dim = d;
    emb.training_params = params;
    return emb;
}

CbowPairGrad cbow_pair_gradients(const Eigen::MatrixXd& w_in, const Eigen::MatrixXd& w_out,
                                 const std::vector<int>& context_ids, int center,
                                 const std::vector<int>& negative_ids) {
    if (context_ids.empty())
        throw std::invalid_argument("cbow_pair_gradients: empty context");
    const auto d = w_in.cols();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(d);
    for (int c : context_ids)
        h += w_in.row(c).transpose();
    h /= static_cast<double>(context_ids.size());

    CbowPairGrad grad;
    grad.d_out.reserve(negative_ids.size() + 1);
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(d);
    auto accumulate = [&](int target, double label) {
        double score = w_out.row(target).dot(h.transpose());
        double p = sigmoid(score);
        grad.loss -= label > 0.5 ? std::log(std::max(p, 1e-12))
                                 : std::log(std::max(1.0 - p, 1e-12));
        double err = p - label;  // d loss / d score
        grad.d_out.push_back(err * h);
        dh += err * w_out.row(target).transpose();
    };
    accumulate(center, 1.0);
    for (int neg : negative_ids)
        accumulate(neg, 0.0);
    grad.d_context = dh / static_cast<double>(context_ids.size());
    return grad;
}

void cbow_train_pair(Eigen::MatrixXd& w_in, Eigen::MatrixXd& w_out,
                     const std::vector<int>& context_ids, int center,
                     const std::vector<int>& negative_ids, double lr) {
    if (context_ids.empty())
        return;
    const auto d = w_in.cols();
    Eigen::VectorXd neu1 = Eigen::VectorXd::Zero(d);
    for (int c : context_ids)
        neu1 += w_in.row(c).transpose();
    neu1 /= static_cast<double>(context_ids.size());

    Eigen::VectorXd neu1e = Eigen::VectorXd::Zero(d);
    auto step = [&](int target, double label) {
        double score = w_out.row(target).dot(neu1.transpose());
        double g = (label - sigmoid(score)) * lr;
        neu1e += g * w_out.row(target).transpose();  // uses the pre-update row
        w_out.row(target) += g * neu1.transpose();
    };
    step(center, 1.0);
    for (int neg : negative_ids)
        step(neg, 0.0);
    neu1e /= static_cast<double>(context_ids.size());
    for (int c : context_ids)
        w_in.row(c) += neu1e.transpose();
}

std::vector<int> encode_token_ids(const TokenSeq& tokens, const Vocabulary& vocab, int seq_len) {
    if (seq_len <= 0)
        throw std::invalid_argument("encode_token_ids: seq_len must be positive");
    std::size_t start = tokens.size() > static_cast<std::size_t>(seq_len)
                            ? tokens.size() - static_cast<std::size_t>(seq_len)
                            : 0;
    std::vector<int> ids;
    ids.reserve(tokens.size() - start);
    for (std::size_t i = start; i < tokens.size(); ++i)
        ids.push_back(vocab.index_of(tokens[i]));
    return ids;
}

EncodedSample encode_sample(const TokenSeq& tokens, const Vocabulary& vocab,
                            const EmbeddingMatrix& emb, int seq_len) {
    if (emb.vectors.rows() != vocab.size())
        throw std::invalid_argument("encode_sample: embedding rows do not match the vocabulary");
    std::vector<int> ids = encode_token_ids(tokens, vocab, seq_len);
    EncodedSample sample;
    sample.matrix = Eigen::MatrixXd::Zero(seq_len, emb.vectors.cols());
    sample.true_length = static_cast<int>(ids.size());
    int offset = seq_len - sample.true_length;
    for (int i = 0; i < sample.true_length; ++i) {
        int id = ids[static_cast<std::size_t>(i)];
        if (id >= 0)
            sample.matrix.row(offset + i) = emb.vectors.row(id);
    }
    return sample;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    double na = a.norm();
    double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_similarity: zero vector");
    return a.dot(b) / (na * nb);
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path,
                     const std::vector<std::string>& header_comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UserError("cannot write vocabulary file: " + path);
    for (const std::string& line : header_comments)
        out << '#' << line << '\n';
    for (int i = 0; i < vocab.size(); ++i)
        out << vocab.index_to_token[static_cast<std::size_t>(i)] << '\t' << i << '\t'
            << vocab.frequencies[static_cast<std::size_t>(i)] << '\n';
    if (!out.flush())
        throw UserError("failed writing vocabulary file: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UserError("cannot read vocabulary file: " + path);
    Vocabulary vocab;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        // Token first, then index and frequency; the token may itself contain
        // spaces, so split on the two rightmost tabs.
        std::size_t t2 = line.rfind('\t');
        std::size_t t1 = t2 == std::string::npos ? std::string::npos : line.rfind('\t', t2 - 1);
        if (t1 == std::string::npos || t2 == std::string::npos || t1 == 0)
            throw ParseError(path + ": malformed vocabulary line", line_no);
        std::string token = line.substr(0, t1);
        int index = 0;
        std::int64_t freq = 0;
        try {
            index = std::stoi(line.substr(t1 + 1, t2 - t1 - 1));
            freq = std::stoll(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw ParseError(path + ": malformed vocabulary line", line_no);
        }
        if (index != vocab.size() || freq <= 0)
            throw ParseError(path + ": vocabulary entries out of order", line_no);
        if (!vocab.token_to_index.emplace(token, index).second)
            throw ParseError(path + ": duplicate token", line_no);
        vocab.index_to_token.push_back(std::move(token));
        vocab.frequencies.push_back(freq);
        vocab.total_tokens += freq;
    }
    if (vocab.size() == 0)
        throw DataError("vocabulary file is empty: " + path);
    return vocab;
}

void save_embedding(const EmbeddingMatrix& emb, const Vocabulary& vocab, const std::string& path,
                    const std::vector<std::string>& header_comments) {
    if (emb.vectors.rows() != vocab.size())
        throw std::invalid_argument("save_embedding: embedding rows do not match the vocabulary");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UserError("cannot write embedding file: " + path);
    for (const std::string& line : header_comments)
        out << '#' << line << '\n';
    out << emb.vectors.rows() << ' ' << emb.vectors.cols() << '\n';
    for (int i = 0; i < vocab.size(); ++i) {
        out << vocab.index_to_token[static_cast<std::size_t>(i)];
        for (int j = 0; j < emb.vectors.cols(); ++j)
            out << ' ' << format_double(emb.vectors(i, j));
        out << '\n';
    }
    if (!out.flush())
        throw UserError("failed writing embedding file: " + path);
}

EmbeddingMatrix load_embedding(const std::string& path, std::vector<std::string>* tokens_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UserError("cannot read embedding file: " + path);
    std::string line;
    int line_no = 0;
    do {
        if (!std::getline(in, line))
            throw ParseError(path + ": missing embedding header", line_no + 1);
        ++line_no;
    } while (!line.empty() && line[0] == '#');
    long v = 0;
    long d = 0;
    if (std::sscanf(line.c_str(), "%ld %ld", &v, &d) != 2 || v <= 0 || d <= 0)
        throw ParseError(path + ": malformed embedding header", line_no);
    EmbeddingMatrix emb;
    emb.dim = static_cast<int>(d);
    emb.vectors.resize(v, d);
    if (tokens_out)
        tokens_out->clear();
    for (long i = 0; i < v; ++i) {
        if (!std::getline(in, line))
            throw ParseError(path + ": truncated embedding file", line_no + static_cast<int>(i) + 1);
        // The token may contain spaces: the floats are the final D fields.
        std::size_t end = line.size();
        for (long j = d - 1; j >= 0; --j) {
            std::size_t sp = line.rfind(' ', end - 1);
            if (sp == std::string::npos || sp == 0)
                throw ParseError(path + ": malformed embedding row", line_no + static_cast<int>(i) + 1);
            emb.vectors(i, j) = std::strtod(line.c_str() + sp + 1, nullptr);
            end = sp;
        }
        if (tokens_out)
            tokens_out->push_back(line.substr(0, end));
    }
    return emb;
}

}  // namespace irvd::embed
