#include "irvd/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace irvd::nn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

int dir_count(const ModelConfig& c) { return c.bidirectional ? 2 : 1; }

const char* dir_name(int dir) { return dir == 0 ? "fwd" : "bwd"; }

/// Input width feeding RNN layer `layer`.
int layer_in_width(const ModelConfig& c, int layer) {
    return layer == 0 ? c.input_dim : c.units * dir_count(c);
}

int head_width(const ModelConfig& c) { return c.units * dir_count(c); }

int dense_in_width(const ModelConfig& c, int d) {
    return d == 0 ? head_width(c) : c.units;
}

int dense_out_width(const ModelConfig& c, int d) {
    return d == c.dense_layers - 1 ? c.num_classes : c.units;
}

std::size_t rnn_tensor_index(const ModelConfig& c, int layer, int dir, int which) {
    return static_cast<std::size_t>((layer * dir_count(c) + dir) * 3 + which);
}

std::size_t dense_tensor_index(const ModelConfig& c, int d, int which) {
    return static_cast<std::size_t>(c.rnn_layers * dir_count(c) * 3 + d * 2 + which);
}

struct TensorSpec {
    std::string name;
    int rows;
    int cols;
};

std::vector<TensorSpec> param_layout(const ModelConfig& c) {
    const int g = gate_blocks(c.cell);
    std::vector<TensorSpec> layout;
    for (int l = 0; l < c.rnn_layers; ++l) {
        const int in_w = layer_in_width(c, l);
        for (int dir = 0; dir < dir_count(c); ++dir) {
            std::string base = "rnn" + std::to_string(l) + "." + dir_name(dir) + ".";
            layout.push_back({base + "wx", in_w, g * c.units});
            layout.push_back({base + "wh", c.units, g * c.units});
            layout.push_back({base + "b", 1, g * c.units});
        }
    }
    for (int d = 0; d < c.dense_layers; ++d) {
        std::string base = "dense" + std::to_string(d) + ".";
        layout.push_back({base + "w", dense_in_width(c, d), dense_out_width(c, d)});
        layout.push_back({base + "b", 1, dense_out_width(c, d)});
    }
    return layout;
}

double gaussian(Rng& rng) {
    // Box-Muller, cosine branch only: deterministic two draws per value.
    double u1 = 1.0 - uniform_unit(rng);  // (0, 1], keeps the log finite
    double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Orthogonal square matrix: QR of a seeded Gaussian draw, signs fixed so the
/// factorization (and therefore the result) is unique.
MatrixXd orthogonal(int n, Rng& rng) {
    MatrixXd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            a(r, c) = gaussian(rng);
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
    for (int j = 0; j < n; ++j)
        if (qr.matrixQR()(j, j) < 0.0)
            q.col(j) = -q.col(j);
    return q;
}

void fill_glorot(MatrixXd& m, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c)
            m(r, c) = uniform_real(rng, -limit, limit);
}

// ---------------------------------------------------------------------------
// Batched cell steps. `b` is a 1-row bias matrix.
// ---------------------------------------------------------------------------

void srnn_step(const MatrixXd& x, const MatrixXd* hprev, const MatrixXd& wx, const MatrixXd& wh,
               const MatrixXd& b, MatrixXd& hout) {
    MatrixXd a = x * wx;
    if (hprev)
        a += *hprev * wh;
    a.rowwise() += b.row(0);
    hout = a.array().tanh().matrix();
}

void gru_step(const MatrixXd& x, const MatrixXd* hprev, const MatrixXd& wx, const MatrixXd& wh,
              const MatrixXd& b, MatrixXd& gates, MatrixXd& rh, MatrixXd& hout) {
    const Index u = wh.rows();
    const Index batch = x.rows();
    MatrixXd a = x * wx;  // B x 3U, blocks [update | reset | candidate]
    a.rowwise() += b.row(0);
    if (hprev)
        a.leftCols(2 * u) += *hprev * wh.leftCols(2 * u);
    gates.resize(batch, 3 * u);
    gates.leftCols(2 * u) = (1.0 + (-a.leftCols(2 * u).array()).exp()).inverse().matrix();
    if (hprev) {
        rh = gates.middleCols(u, u).cwiseProduct(*hprev);
        a.rightCols(u) += rh * wh.rightCols(u);
    } else {
        rh = MatrixXd::Zero(batch, u);
    }
    gates.rightCols(u) = a.rightCols(u).array().tanh().matrix();
    // update gate carries the previous state
    if (hprev)
        hout = (gates.leftCols(u).array() * hprev->array() +
                (1.0 - gates.leftCols(u).array()) * gates.rightCols(u).array())
                   .matrix();
    else
        hout = ((1.0 - gates.leftCols(u).array()) * gates.rightCols(u).array()).matrix();
}

void lstm_step(const MatrixXd& x, const MatrixXd* hprev, const MatrixXd* cprev,
               const MatrixXd& wx, const MatrixXd& wh, const MatrixXd& b, MatrixXd& gates,
               MatrixXd& cout_, MatrixXd& tc, MatrixXd& hout) {
    const Index u = wh.rows();
    const Index batch = x.rows();
    MatrixXd a = x * wx;  // B x 4U, blocks [input | forget | candidate | output]
    if (hprev)
        a += *hprev * wh;
    a.rowwise() += b.row(0);
    gates.resize(batch, 4 * u);
    gates.leftCols(2 * u) = (1.0 + (-a.leftCols(2 * u).array()).exp()).inverse().matrix();
    gates.middleCols(2 * u, u) = a.middleCols(2 * u, u).array().tanh().matrix();
    gates.rightCols(u) = (1.0 + (-a.rightCols(u).array()).exp()).inverse().matrix();
    cout_ = gates.leftCols(u).cwiseProduct(gates.middleCols(2 * u, u));
    if (cprev)
        cout_ += gates.middleCols(u, u).cwiseProduct(*cprev);
    tc = cout_.array().tanh().matrix();
    hout = gates.rightCols(u).cwiseProduct(tc);
}

/// Runs one direction of one layer over the input sequence. Processing
/// position p consumes input step (reverse ? L-1-p : p); states are cached by
/// position so forward and backward share one code path.
void run_direction(CellKind cell, bool reverse, const MatrixXd& wx, const MatrixXd& wh,
                   const MatrixXd& b, const std::vector<MatrixXd>& in_seq, DirectionCache& dc) {
    const int steps = static_cast<int>(in_seq.size());
    dc.h.resize(static_cast<std::size_t>(steps));
    if (cell == CellKind::GRU) {
        dc.gates.resize(static_cast<std::size_t>(steps));
        dc.rh.resize(static_cast<std::size_t>(steps));
    } else if (cell == CellKind::LSTM) {
        dc.gates.resize(static_cast<std::size_t>(steps));
        dc.c.resize(static_cast<std::size_t>(steps));
        dc.tc.resize(static_cast<std::size_t>(steps));
    }
    for (int p = 0; p < steps; ++p) {
        const int t = reverse ? steps - 1 - p : p;
        const std::size_t sp = static_cast<std::size_t>(p);
        const MatrixXd* hprev = p ? &dc.h[sp - 1] : nullptr;
        switch (cell) {
            case CellKind::SRNN:
                srnn_step(in_seq[static_cast<std::size_t>(t)], hprev, wx, wh, b, dc.h[sp]);
                break;
            case CellKind::GRU:
                gru_step(in_seq[static_cast<std::size_t>(t)], hprev, wx, wh, b, dc.gates[sp],
                         dc.rh[sp], dc.h[sp]);
                break;
            case CellKind::LSTM:
                lstm_step(in_seq[static_cast<std::size_t>(t)], hprev, p ? &dc.c[sp - 1] : nullptr,
                          wx, wh, b, dc.gates[sp], dc.c[sp], dc.tc[sp], dc.h[sp]);
                break;
        }
    }
}

/// BPTT over one direction; accumulates parameter gradients and (optionally)
/// the gradient w.r.t. the layer's input sequence. `col_offset` selects this
/// direction's block in the layer's per-step output gradient.
void bptt_direction(CellKind cell, bool reverse, Index u, const std::vector<MatrixXd>& in_seq,
                    const DirectionCache& dc, const std::vector<MatrixXd>& d_out_seq,
                    Index col_offset, const MatrixXd& wx, const MatrixXd& wh, MatrixXd& g_wx,
                    MatrixXd& g_wh, MatrixXd& g_b, std::vector<MatrixXd>* d_in_seq) {
    const int steps = static_cast<int>(in_seq.size());
    const Index batch = in_seq.empty() ? 0 : in_seq[0].rows();
    MatrixXd carry_h = MatrixXd::Zero(batch, u);
    MatrixXd carry_c;  // LSTM only
    if (cell == CellKind::LSTM)
        carry_c = MatrixXd::Zero(batch, u);
    MatrixXd da;
    for (int p = steps - 1; p >= 0; --p) {
        const int t = reverse ? steps - 1 - p : p;
        const std::size_t sp = static_cast<std::size_t>(p);
        const std::size_t st = static_cast<std::size_t>(t);
        MatrixXd dh = d_out_seq[st].middleCols(col_offset, u) + carry_h;
        const MatrixXd* hprev = p ? &dc.h[sp - 1] : nullptr;
        switch (cell) {
            case CellKind::SRNN: {
                da = (dh.array() * (1.0 - dc.h[sp].array().square())).matrix();
                carry_h = da * wh.transpose();
                break;
            }
            case CellKind::GRU: {
                auto z = dc.gates[sp].leftCols(u);
                auto r = dc.gates[sp].middleCols(u, u);
                auto g = dc.gates[sp].rightCols(u);
                MatrixXd dg = (dh.array() * (1.0 - z.array())).matrix();
                MatrixXd dag = (dg.array() * (1.0 - g.array().square())).matrix();
                MatrixXd drh = dag * wh.rightCols(u).transpose();
                da.resize(batch, 3 * u);
                da.rightCols(u) = dag;
                if (hprev) {
                    MatrixXd dz = dh.cwiseProduct(*hprev - g);
                    MatrixXd dr = drh.cwiseProduct(*hprev);
                    da.leftCols(u) = (dz.array() * z.array() * (1.0 - z.array())).matrix();
                    da.middleCols(u, u) = (dr.array() * r.array() * (1.0 - r.array())).matrix();
                } else {
                    // zero previous state: the update and reset branches carry
                    // no gradient
                    MatrixXd dz = dh.cwiseProduct(-g);
                    da.leftCols(u) = (dz.array() * z.array() * (1.0 - z.array())).matrix();
                    da.middleCols(u, u).setZero();
                }
                carry_h = dh.cwiseProduct(z) + drh.cwiseProduct(r) +
                          da.leftCols(2 * u) * wh.leftCols(2 * u).transpose();
                if (hprev)
                    g_wh.rightCols(u) += dc.rh[sp].transpose() * dag;
                break;
            }
            case CellKind::LSTM: {
                auto gi = dc.gates[sp].leftCols(u);
                auto gf = dc.gates[sp].middleCols(u, u);
                auto gg = dc.gates[sp].middleCols(2 * u, u);
                auto go = dc.gates[sp].rightCols(u);
                const MatrixXd& tc = dc.tc[sp];
                MatrixXd do_ = dh.cwiseProduct(tc);
                MatrixXd dct =
                    carry_c + (dh.array() * go.array() * (1.0 - tc.array().square())).matrix();
                MatrixXd di = dct.cwiseProduct(gg);
                MatrixXd dg = dct.cwiseProduct(gi);
                da.resize(batch, 4 * u);
                da.leftCols(u) = (di.array() * gi.array() * (1.0 - gi.array())).matrix();
                if (p) {
                    MatrixXd df = dct.cwiseProduct(dc.c[sp - 1]);
                    da.middleCols(u, u) = (df.array() * gf.array() * (1.0 - gf.array())).matrix();
                } else {
                    da.middleCols(u, u).setZero();
                }
                da.middleCols(2 * u, u) = (dg.array() * (1.0 - gg.array().square())).matrix();
                da.rightCols(u) = (do_.array() * go.array() * (1.0 - go.array())).matrix();
                carry_c = dct.cwiseProduct(gf);
                carry_h = da * wh.transpose();
                break;
            }
        }
        g_wx += in_seq[st].transpose() * da;
        g_b += da.colwise().sum();
        if (hprev) {
            if (cell == CellKind::GRU)
                g_wh.leftCols(2 * u) += hprev->transpose() * da.leftCols(2 * u);
            else
                g_wh += hprev->transpose() * da;
        }
        if (d_in_seq)
            (*d_in_seq)[st] += da * wx.transpose();
    }
}

}  // namespace

std::string to_string(CellKind kind) {
    switch (kind) {
        case CellKind::SRNN: return "srnn";
        case CellKind::GRU: return "gru";
        case CellKind::LSTM: return "lstm";
    }
    return "srnn";
}

CellKind cell_from_string(const std::string& name) {
    if (name == "srnn") return CellKind::SRNN;
    if (name == "gru") return CellKind::GRU;
    if (name == "lstm") return CellKind::LSTM;
    throw std::invalid_argument("unknown cell kind: " + name);
}

int gate_blocks(CellKind kind) {
    switch (kind) {
        case CellKind::SRNN: return 1;
        case CellKind::GRU: return 3;
        case CellKind::LSTM: return 4;
    }
    return 1;
}

void validate(const ModelConfig& c) {
    if (c.rnn_layers < 1 || c.rnn_layers > 3)
        throw std::invalid_argument("rnn_layers must be between 1 and 3");
    if (c.dense_layers != c.rnn_layers)
        throw std::invalid_argument("dense_layers must equal rnn_layers");
    if (c.units < 1)
        throw std::invalid_argument("units must be positive");
    if (c.input_dim < 1)
        throw std::invalid_argument("input_dim must be positive");
    if (c.seq_len < 1)
        throw std::invalid_argument("seq_len must be positive");
    if (c.num_classes < 2)
        throw std::invalid_argument("num_classes must be at least 2");
}

Eigen::MatrixXd& ModelParams::at(const std::string& name) {
    for (Tensor& t : tensors)
        if (t.name == name)
            return t.value;
    throw std::invalid_argument("no parameter tensor named " + name);
}

const Eigen::MatrixXd& ModelParams::at(const std::string& name) const {
    for (const Tensor& t : tensors)
        if (t.name == name)
            return t.value;
    throw std::invalid_argument("no parameter tensor named " + name);
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    validate(config);
    ModelParams params;
    params.config = config;
    Rng rng(stage_seed(seed, "model-init"));
    const int g = gate_blocks(config.cell);
    for (const TensorSpec& spec : param_layout(config)) {
        Tensor t;
        t.name = spec.name;
        t.value.resize(spec.rows, spec.cols);
        if (t.name.ends_with(".wx") || t.name.ends_with(".w")) {
            fill_glorot(t.value, rng);
        } else if (t.name.ends_with(".wh")) {
            for (int block = 0; block < g; ++block)
                t.value.middleCols(static_cast<Index>(block) * config.units, config.units) =
                    orthogonal(config.units, rng);
        } else {  // biases
            t.value.setZero();
            if (config.cell == CellKind::LSTM && t.name.starts_with("rnn"))
                t.value.middleCols(config.units, config.units).setOnes();  // forget gate
        }
        params.tensors.push_back(std::move(t));
    }
    return params;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams out;
    out.config = params.config;
    out.tensors.reserve(params.tensors.size());
    for (const Tensor& t : params.tensors)
        out.tensors.push_back({t.name, MatrixXd::Zero(t.value.rows(), t.value.cols())});
    return out;
}

std::int64_t param_count(const ModelConfig& config) {
    validate(config);
    std::int64_t n = 0;
    for (const TensorSpec& spec : param_layout(config))
        n += static_cast<std::int64_t>(spec.rows) * spec.cols;
    return n;
}

// ---------------------------------------------------------------------------
// Single-sample cells (spec-level API; the batched steps do the work).
// ---------------------------------------------------------------------------

namespace {

void check_cell_shapes(const Eigen::VectorXd& x, const Eigen::VectorXd& h, const CellParams& p,
                       int blocks) {
    if (p.wx.rows() != x.size() || p.wh.rows() != h.size() ||
        p.wx.cols() != blocks * h.size() || p.wh.cols() != blocks * h.size() ||
        p.b.size() != blocks * h.size())
        throw std::invalid_argument("cell parameter shapes do not match the state and input");
}

}  // namespace

Eigen::VectorXd srnn_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                          const CellParams& p) {
    check_cell_shapes(x, h, p, 1);
    MatrixXd hp = h.transpose();
    MatrixXd b = p.b;
    MatrixXd out;
    srnn_step(x.transpose(), &hp, p.wx, p.wh, b, out);
    return out.row(0).transpose();
}

Eigen::VectorXd gru_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h, const CellParams& p) {
    check_cell_shapes(x, h, p, 3);
    MatrixXd hp = h.transpose();
    MatrixXd b = p.b;
    MatrixXd gates, rh, out;
    gru_step(x.transpose(), &hp, p.wx, p.wh, b, gates, rh, out);
    return out.row(0).transpose();
}

LstmState lstm_cell(const Eigen::VectorXd& x, const LstmState& state, const CellParams& p) {
    check_cell_shapes(x, state.h, p, 4);
    if (state.c.size() != state.h.size())
        throw std::invalid_argument("lstm state vectors must have equal size");
    MatrixXd hp = state.h.transpose();
    MatrixXd cp = state.c.transpose();
    MatrixXd b = p.b;
    MatrixXd gates, c, tc, out;
    lstm_step(x.transpose(), &hp, &cp, p.wx, p.wh, b, gates, c, tc, out);
    return {out.row(0).transpose(), c.row(0).transpose()};
}

Eigen::MatrixXd run_layer(const Eigen::MatrixXd& seq, CellKind cell, Direction direction,
                          const CellParams& fwd, const CellParams* bwd) {
    if (seq.rows() < 1)
        throw std::invalid_argument("run_layer: empty sequence");
    if (direction == Direction::Bidirectional && !bwd)
        throw std::invalid_argument("run_layer: bidirectional needs backward parameters");
    const int steps = static_cast<int>(seq.rows());
    const Index u = fwd.wh.rows();
    std::vector<MatrixXd> in_seq(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t)
        in_seq[static_cast<std::size_t>(t)] = seq.row(t);

    auto run_one = [&](const CellParams& p, bool reverse) {
        if (p.wx.rows() != seq.cols())
            throw std::invalid_argument("run_layer: input width does not match kernel");
        DirectionCache dc;
        MatrixXd b = p.b;
        run_direction(cell, reverse, p.wx, p.wh, b, in_seq, dc);
        return dc;
    };

    if (direction == Direction::Forward) {
        DirectionCache dc = run_one(fwd, false);
        MatrixXd out(steps, u);
        for (int t = 0; t < steps; ++t)
            out.row(t) = dc.h[static_cast<std::size_t>(t)].row(0);
        return out;
    }
    if (direction == Direction::Backward) {
        DirectionCache dc = run_one(fwd, true);
        MatrixXd out(steps, u);
        for (int t = 0; t < steps; ++t)
            out.row(t) = dc.h[static_cast<std::size_t>(steps - 1 - t)].row(0);
        return out;
    }
    DirectionCache df = run_one(fwd, false);
    DirectionCache db = run_one(*bwd, true);
    MatrixXd out(steps, 2 * u);
    for (int t = 0; t < steps; ++t) {
        out.row(t).leftCols(u) = df.h[static_cast<std::size_t>(t)].row(0);
        out.row(t).rightCols(u) = db.h[static_cast<std::size_t>(steps - 1 - t)].row(0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batch input.
// ---------------------------------------------------------------------------

BatchInput::BatchInput(const Eigen::MatrixXd* embedding, std::vector<const std::vector<int>*> ids,
                       int seq_len)
    : embedding_(embedding), ids_(std::move(ids)) {
    if (!embedding_)
        throw std::invalid_argument("BatchInput: null embedding");
    if (seq_len < 1)
        throw std::invalid_argument("BatchInput: seq_len must be positive");
    batch_ = static_cast<int>(ids_.size());
    steps_ = seq_len;
    dim_ = static_cast<int>(embedding_->cols());
    for (const std::vector<int>* sample : ids_) {
        if (!sample || static_cast<int>(sample->size()) > seq_len)
            throw std::invalid_argument("BatchInput: sample longer than seq_len");
        for (int id : *sample)
            if (id >= embedding_->rows())
                throw std::invalid_argument("BatchInput: token id outside the embedding");
    }
}

BatchInput::BatchInput(std::vector<Eigen::MatrixXd> steps) : dense_(std::move(steps)) {
    if (dense_.empty())
        throw std::invalid_argument("BatchInput: empty step list");
    batch_ = static_cast<int>(dense_[0].rows());
    steps_ = static_cast<int>(dense_.size());
    dim_ = static_cast<int>(dense_[0].cols());
    for (const MatrixXd& m : dense_)
        if (m.rows() != batch_ || m.cols() != dim_)
            throw std::invalid_argument("BatchInput: inconsistent step shapes");
}

Eigen::MatrixXd BatchInput::step(int t) const {
    if (t < 0 || t >= steps_)
        throw std::invalid_argument("BatchInput: step out of range");
    if (!dense_.empty())
        return dense_[static_cast<std::size_t>(t)];
    MatrixXd out = MatrixXd::Zero(batch_, dim_);
    for (int b = 0; b < batch_; ++b) {
        const std::vector<int>& ids = *ids_[static_cast<std::size_t>(b)];
        int offset = steps_ - static_cast<int>(ids.size());  // pre-padding
        if (t >= offset) {
            int id = ids[static_cast<std::size_t>(t - offset)];
            if (id >= 0)
                out.row(b) = embedding_->row(id);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward.
// ---------------------------------------------------------------------------

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
    MatrixXd out(logits.rows(), logits.cols());
    for (Index r = 0; r < logits.rows(); ++r) {
        Eigen::RowVectorXd row = logits.row(r);
        double m = row.maxCoeff();
        Eigen::RowVectorXd e = (row.array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

double weighted_cross_entropy(const Eigen::VectorXd& probs, int label,
                              const std::vector<double>& class_weights) {
    if (label < 0 || label >= probs.size())
        throw std::invalid_argument("weighted_cross_entropy: label out of range");
    double w = class_weights.empty() ? 1.0 : class_weights.at(static_cast<std::size_t>(label));
    return -w * std::log(std::max(probs(label), 1e-12));
}

ForwardResult forward_batch(const ModelParams& params, const BatchInput& input,
                            const std::vector<int>& labels,
                            const std::vector<double>& class_weights, ForwardCache* cache) {
    const ModelConfig& c = params.config;
    if (input.dim() != c.input_dim)
        throw std::invalid_argument("forward_batch: input width does not match the model");
    if (input.steps() != c.seq_len)
        throw std::invalid_argument("forward_batch: sequence length does not match the model");
    if (!labels.empty() && static_cast<int>(labels.size()) != input.batch_size())
        throw std::invalid_argument("forward_batch: label count does not match the batch");
    const int batch = input.batch_size();
    const int steps = input.steps();
    const Index u = c.units;

    ForwardCache local;
    ForwardCache& fc = cache ? *cache : local;
    fc.input_steps.resize(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t)
        fc.input_steps[static_cast<std::size_t>(t)] = input.step(t);

    fc.layers.assign(static_cast<std::size_t>(c.rnn_layers), LayerCache{});
    const std::vector<MatrixXd>* in_seq = &fc.input_steps;
    for (int l = 0; l < c.rnn_layers; ++l) {
        LayerCache& lc = fc.layers[static_cast<std::size_t>(l)];
        for (int dir = 0; dir < dir_count(c); ++dir) {
            const MatrixXd& wx = params.tensors[rnn_tensor_index(c, l, dir, 0)].value;
            const MatrixXd& wh = params.tensors[rnn_tensor_index(c, l, dir, 1)].value;
            const MatrixXd& b = params.tensors[rnn_tensor_index(c, l, dir, 2)].value;
            run_direction(c.cell, dir == 1, wx, wh, b, *in_seq, lc.dirs[dir]);
        }
        lc.output.resize(static_cast<std::size_t>(steps));
        for (int t = 0; t < steps; ++t) {
            const std::size_t st = static_cast<std::size_t>(t);
            MatrixXd& out = lc.output[st];
            out.resize(batch, head_width(c));
            out.leftCols(u) = lc.dirs[0].h[st];
            if (c.bidirectional)
                out.rightCols(u) = lc.dirs[1].h[static_cast<std::size_t>(steps - 1 - t)];
        }
        in_seq = &lc.output;
    }

    // Head: final state of each direction (for the backward direction that is
    // the state after consuming the whole reversed sequence).
    const LayerCache& last = fc.layers.back();
    fc.head_input.resize(batch, head_width(c));
    fc.head_input.leftCols(u) = last.dirs[0].h[static_cast<std::size_t>(steps - 1)];
    if (c.bidirectional)
        fc.head_input.rightCols(u) = last.dirs[1].h[static_cast<std::size_t>(steps - 1)];

    fc.dense_in.assign(static_cast<std::size_t>(c.dense_layers), MatrixXd());
    MatrixXd z = fc.head_input;
    for (int d = 0; d < c.dense_layers; ++d) {
        fc.dense_in[static_cast<std::size_t>(d)] = z;
        const MatrixXd& w = params.tensors[dense_tensor_index(c, d, 0)].value;
        const MatrixXd& b = params.tensors[dense_tensor_index(c, d, 1)].value;
        z = (z * w).rowwise() + b.row(0);  // linear activation throughout
    }
    fc.logits = std::move(z);
    fc.probs = softmax(fc.logits);

    ForwardResult result;
    result.probs = fc.probs;
    if (!labels.empty()) {
        double sum = 0.0;
        for (int bi = 0; bi < batch; ++bi) {
            int y = labels[static_cast<std::size_t>(bi)];
            if (y < 0 || y >= c.num_classes)
                throw std::invalid_argument("forward_batch: label out of range");
            double w = class_weights.empty() ? 1.0 : class_weights.at(static_cast<std::size_t>(y));
            sum += -w * std::log(std::max(fc.probs(bi, y), 1e-12));
        }
        result.loss = sum / static_cast<double>(batch);
    }
    return result;
}

GradSet backward_batch(const ModelParams& params, const ForwardCache& cache,
                       const BatchInput& input, const std::vector<int>& labels,
                       const std::vector<double>& class_weights) {
    const ModelConfig& c = params.config;
    const int batch = input.batch_size();
    const int steps = input.steps();
    const Index u = c.units;
    if (static_cast<int>(labels.size()) != batch)
        throw std::invalid_argument("backward_batch: label count does not match the batch");

    GradSet grads = zeros_like(params);

    // dL/dlogits for mean weighted cross-entropy with softmax outputs.
    MatrixXd dcur = cache.probs;
    for (int bi = 0; bi < batch; ++bi) {
        int y = labels[static_cast<std::size_t>(bi)];
        double w = class_weights.empty() ? 1.0 : class_weights.at(static_cast<std::size_t>(y));
        dcur(bi, y) -= 1.0;
        dcur.row(bi) *= w / static_cast<double>(batch);
    }

    for (int d = c.dense_layers - 1; d >= 0; --d) {
        const MatrixXd& w = params.tensors[dense_tensor_index(c, d, 0)].value;
        grads.tensors[dense_tensor_index(c, d, 0)].value =
            cache.dense_in[static_cast<std::size_t>(d)].transpose() * dcur;
        grads.tensors[dense_tensor_index(c, d, 1)].value = dcur.colwise().sum();
        dcur = dcur * w.transpose();
    }
    // dcur is now the gradient at the head input.

    std::vector<MatrixXd> d_seq(static_cast<std::size_t>(steps),
                                MatrixXd::Zero(batch, head_width(c)));
    d_seq[static_cast<std::size_t>(steps - 1)].leftCols(u) += dcur.leftCols(u);
    if (c.bidirectional)
        d_seq[0].rightCols(u) += dcur.rightCols(u);

    for (int l = c.rnn_layers - 1; l >= 0; --l) {
        const LayerCache& lc = cache.layers[static_cast<std::size_t>(l)];
        const std::vector<MatrixXd>& in_seq =
            l == 0 ? cache.input_steps : cache.layers[static_cast<std::size_t>(l - 1)].output;
        std::vector<MatrixXd> d_in;
        std::vector<MatrixXd>* d_in_ptr = nullptr;
        if (l > 0) {
            d_in.assign(static_cast<std::size_t>(steps),
                        MatrixXd::Zero(batch, layer_in_width(c, l)));
            d_in_ptr = &d_in;
        }
        for (int dir = 0; dir < dir_count(c); ++dir) {
            const MatrixXd& wx = params.tensors[rnn_tensor_index(c, l, dir, 0)].value;
            const MatrixXd& wh = params.tensors[rnn_tensor_index(c, l, dir, 1)].value;
            bptt_direction(c.cell, dir == 1, u, in_seq, lc.dirs[dir], d_seq,
                           static_cast<Index>(dir) * u, wx, wh,
                           grads.tensors[rnn_tensor_index(c, l, dir, 0)].value,
                           grads.tensors[rnn_tensor_index(c, l, dir, 1)].value,
                           grads.tensors[rnn_tensor_index(c, l, dir, 2)].value, d_in_ptr);
        }
        if (l > 0)
            d_seq = std::move(d_in);
    }
    return grads;
}

Eigen::VectorXd forward(const ModelParams& params, const Eigen::MatrixXd& seq) {
    const ModelConfig& c = params.config;
    if (seq.rows() != c.seq_len || seq.cols() != c.input_dim)
        throw std::invalid_argument("forward: sample shape does not match the model config");
    std::vector<MatrixXd> steps(static_cast<std::size_t>(seq.rows()));
    for (Index t = 0; t < seq.rows(); ++t)
        steps[static_cast<std::size_t>(t)] = seq.row(t);
    BatchInput input(std::move(steps));
    ForwardResult r = forward_batch(params, input, {}, {}, nullptr);
    return r.probs.row(0).transpose();
}

// ---------------------------------------------------------------------------
// Weights container.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'I', 'R', 'V', 'D', 'W', 'T', 'S', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw DataError("truncated weights file: " + path);
    return value;
}

}  // namespace

void save_params(const ModelParams& params, const std::string& path, std::uint64_t config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw UserError("cannot write weights file: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    const ModelConfig& c = params.config;
    write_pod(out, static_cast<std::uint8_t>(c.cell));
    write_pod(out, static_cast<std::uint8_t>(c.bidirectional ? 1 : 0));
    write_pod(out, static_cast<std::int32_t>(c.rnn_layers));
    write_pod(out, static_cast<std::int32_t>(c.dense_layers));
    write_pod(out, static_cast<std::int32_t>(c.units));
    write_pod(out, static_cast<std::int32_t>(c.input_dim));
    write_pod(out, static_cast<std::int32_t>(c.seq_len));
    write_pod(out, static_cast<std::int32_t>(c.num_classes));
    write_pod(out, config_hash);
    write_pod(out, static_cast<std::uint32_t>(params.tensors.size()));
    for (const Tensor& t : params.tensors) {
        write_pod(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_pod(out, static_cast<std::uint64_t>(t.value.rows()));
        write_pod(out, static_cast<std::uint64_t>(t.value.cols()));
        for (Index r = 0; r < t.value.rows(); ++r)
            for (Index col = 0; col < t.value.cols(); ++col)
                write_pod(out, t.value(r, col));
    }
    if (!out.flush())
        throw UserError("failed writing weights file: " + path);
}

LoadedParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UserError("cannot read weights file: " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a weights file: " + path);
    if (read_pod<std::uint32_t>(in, path) != kFormatVersion)
        throw DataError("unsupported weights format version: " + path);
    LoadedParams loaded;
    ModelConfig c;
    auto cell_raw = read_pod<std::uint8_t>(in, path);
    if (cell_raw > 2)
        throw DataError("corrupt weights file (bad cell kind): " + path);
    c.cell = static_cast<CellKind>(cell_raw);
    c.bidirectional = read_pod<std::uint8_t>(in, path) != 0;
    c.rnn_layers = read_pod<std::int32_t>(in, path);
    c.dense_layers = read_pod<std::int32_t>(in, path);
    c.units = read_pod<std::int32_t>(in, path);
    c.input_dim = read_pod<std::int32_t>(in, path);
    c.seq_len = read_pod<std::int32_t>(in, path);
    c.num_classes = read_pod<std::int32_t>(in, path);
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw DataError("corrupt weights file (" + std::string(e.what()) + "): " + path);
    }
    loaded.config_hash = read_pod<std::uint64_t>(in, path);
    auto count = read_pod<std::uint32_t>(in, path);
    std::vector<TensorSpec> layout = param_layout(c);
    if (count != layout.size())
        throw DataError("corrupt weights file (tensor count mismatch): " + path);
    loaded.params.config = c;
    for (const TensorSpec& spec : layout) {
        auto name_len = read_pod<std::uint32_t>(in, path);
        if (name_len == 0 || name_len > 256)
            throw DataError("corrupt weights file (bad tensor name): " + path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), static_cast<std::streamsize>(name_len)))
            throw DataError("truncated weights file: " + path);
        auto rows = read_pod<std::uint64_t>(in, path);
        auto cols = read_pod<std::uint64_t>(in, path);
        if (name != spec.name || rows != static_cast<std::uint64_t>(spec.rows) ||
            cols != static_cast<std::uint64_t>(spec.cols))
            throw DataError("corrupt weights file (unexpected tensor " + name + "): " + path);
        Tensor t;
        t.name = name;
        t.value.resize(static_cast<Index>(rows), static_cast<Index>(cols));
        for (Index r = 0; r < t.value.rows(); ++r)
            for (Index col = 0; col < t.value.cols(); ++col)
                t.value(r, col) = read_pod<double>(in, path);
        loaded.params.tensors.push_back(std::move(t));
    }
    return loaded;
}

}  // namespace irvd::nn
