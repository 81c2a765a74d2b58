#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace irvd::embed {

using TokenSeq = std::vector<std::string>;

/// Token inventory in first-occurrence order. There is no padding token:
/// padding and out-of-vocabulary positions are represented by the all-zero
/// input vector.
struct Vocabulary {
    std::unordered_map<std::string, int> token_to_index;
    std::vector<std::string> index_to_token;
    std::vector<std::int64_t> frequencies;  // by index
    std::int64_t total_tokens = 0;

    int size() const { return static_cast<int>(index_to_token.size()); }
    /// Index of a token, -1 when absent.
    int index_of(const std::string& token) const {
        auto it = token_to_index.find(token);
        return it == token_to_index.end() ? -1 : it->second;
    }
};

Vocabulary build_vocabulary(const std::vector<const TokenSeq*>& corpus);

/// Probability of keeping an occurrence of a token under frequency
/// subsampling: min(1, sqrt(rate / f)) with f the corpus frequency.
double subsample_keep_probability(std::int64_t token_freq, std::int64_t total, double rate);

struct CbowParams {
    int dim = 100;
    int window = 3;          // context radius per side
    double downsample = 1e-3;
    int negatives = 5;
    int epochs = 5;
    double alpha = 0.025;     // initial learning rate, linearly decayed
    double min_alpha = 1e-4;
    std::uint64_t seed = 1;
    int workers = 1;          // >1 trades determinism for speed
    double unigram_power = 0.75;
    int table_size = 1 << 20;
};

struct EmbeddingMatrix {
    Eigen::MatrixXd vectors;  // V x dim
    int dim = 0;
    CbowParams training_params;
};

/// Trains continuous bag-of-words embeddings with negative sampling: the
/// mean of the context vectors predicts the center token. Deterministic for
/// a fixed seed when workers == 1. Throws DataError when the window exceeds
/// the length of every stream.
EmbeddingMatrix train_cbow(const std::vector<const TokenSeq*>& corpus, const Vocabulary& vocab,
                           const CbowParams& params);

/// Loss and analytic gradients of one negative-sampling step. `context_ids`
/// index rows of w_in; the center and negative ids index rows of w_out.
struct CbowPairGrad {
    double loss = 0.0;
    Eigen::VectorXd d_context;                 // gradient wrt each context row (shared)
    std::vector<Eigen::VectorXd> d_out;        // per target (center first, then negatives)
};
CbowPairGrad cbow_pair_gradients(const Eigen::MatrixXd& w_in, const Eigen::MatrixXd& w_out,
                                 const std::vector<int>& context_ids, int center,
                                 const std::vector<int>& negative_ids);

/// One SGD step of the pair objective, shared by the trainer and the tests.
void cbow_train_pair(Eigen::MatrixXd& w_in, Eigen::MatrixXd& w_out,
                     const std::vector<int>& context_ids, int center,
                     const std::vector<int>& negative_ids, double lr);

/// A fixed-shape classifier input: seq_len x dim with zero rows in front
/// (pre-padding) and the embeddings of the final tokens right-aligned.
struct EncodedSample {
    Eigen::MatrixXd matrix;   // seq_len x dim
    int label = -1;
    int true_length = 0;      // rows carrying token embeddings
};

/// Encodes a token stream: the last min(len, seq_len) tokens map to the last
/// rows in order, earlier rows are zero, longer streams keep their final
/// seq_len tokens, out-of-vocabulary tokens map to the zero vector.
EncodedSample encode_sample(const TokenSeq& tokens, const Vocabulary& vocab,
                            const EmbeddingMatrix& emb, int seq_len = 1000);

/// Token ids for the same encoding (-1 marks out-of-vocabulary), already
/// truncated to the final seq_len tokens. The compact form used on disk and
/// by the trainer; expanding through the embedding rows reproduces
/// encode_sample exactly.
std::vector<int> encode_token_ids(const TokenSeq& tokens, const Vocabulary& vocab, int seq_len);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Vocabulary file: one `token<TAB>index<TAB>frequency` line per token, UTF-8.
/// `header_comments` are emitted first, one '#'-prefixed line each; loaders
/// skip '#' lines.
void save_vocabulary(const Vocabulary& vocab, const std::string& path,
                     const std::vector<std::string>& header_comments = {});
Vocabulary load_vocabulary(const std::string& path);

/// Embedding file: header `V D`, then one `token v1 .. vD` line per token in
/// vocabulary order; floats survive a save/load round trip exactly.
void save_embedding(const EmbeddingMatrix& emb, const Vocabulary& vocab, const std::string& path,
                    const std::vector<std::string>& header_comments = {});
EmbeddingMatrix load_embedding(const std::string& path, std::vector<std::string>* tokens_out = nullptr);

}  // namespace irvd::embed
