#include "grec/toyseq2seq.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "grec/rng.hpp"
#include "grec/schema.hpp"

namespace grec::toy {

// ---------------------------------------------------------------- vocabulary

namespace {
const std::vector<std::string> kReservedTokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_ = kReservedTokens;
  tokens_.insert(tokens_.end(), std::make_move_iterator(tokens.begin()), std::make_move_iterator(tokens.end()));
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& t = tokens_[i];
    if (t.empty() || contains_whitespace(t)) throw DataError("vocabulary token '" + t + "' is empty or has whitespace");
    if (!index_.emplace(t, static_cast<int>(i)).second) throw DataError("duplicate vocabulary token '" + t + "'");
  }
}

Vocab Vocab::build(const std::vector<EncodedPair>& pairs) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : pairs) {
    for (const auto& t : split_whitespace(p.source)) ++counts[t];
    for (const auto& t : split_whitespace(p.target)) ++counts[t];
  }
  for (const auto& r : kReservedTokens) counts.erase(r);
  if (counts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(sorted.size());
  for (auto& [t, c] : sorted) tokens.push_back(std::move(t));
  return Vocab(std::move(tokens));
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& t : split_whitespace(std::string(text))) ids.push_back(id(t));
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

// ---------------------------------------------------------------- configs

void validate_model_config(const ModelConfig& c) {
  if (c.embed_dim == 0) throw UsageError("embed_dim must be positive");
  if (c.head_count == 0) throw UsageError("head_count must be positive");
  if (c.embed_dim % c.head_count != 0) throw UsageError("embed_dim must be divisible by head_count");
  if (c.layer_count == 0) throw UsageError("layer_count must be positive");
  if (c.feedforward_dim == 0) throw UsageError("feedforward_dim must be positive");
  if (c.max_source_len == 0) throw UsageError("max_source_len must be positive");
  if (c.max_target_len < 2) throw UsageError("max_target_len must be at least 2");
}

void validate_train_config(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) throw UsageError("learning rate must be positive");
  if (c.batch_size == 0) throw UsageError("batch size must be positive");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw UsageError("Adam betas must lie in [0, 1)");
  }
  if (!(c.adam_epsilon > 0.0)) throw UsageError("Adam epsilon must be positive");
}

// ---------------------------------------------------------------- layers

namespace {

using Params = std::vector<Parameter>;
using Eigen::Index;
using Vector = Eigen::VectorXd;

constexpr double kNormEpsilon = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

Matrix linear_forward(const Params& P, const detail::Linear& l, const Matrix& x) {
  Matrix y = x * P[l.weight].value;
  y.rowwise() += P[l.bias].value.row(0);
  return y;
}

Matrix linear_backward(const Params& P, Gradients& G, const detail::Linear& l, const Matrix& x, const Matrix& dy) {
  G[l.weight].noalias() += x.transpose() * dy;
  G[l.bias] += dy.colwise().sum();
  return dy * P[l.weight].value.transpose();
}

struct NormCache {
  Matrix xhat;
  Vector inv_std;
};

Matrix norm_forward(const Params& P, const detail::Norm& n, const Matrix& x, NormCache& c) {
  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  const Vector var = centered.array().square().rowwise().sum() / static_cast<double>(x.cols());
  c.inv_std = (var.array() + kNormEpsilon).rsqrt();
  c.xhat = (centered.array().colwise() * c.inv_std.array()).matrix();
  Matrix y = (c.xhat.array().rowwise() * P[n.gain].value.row(0).array()).matrix();
  y.rowwise() += P[n.bias].value.row(0);
  return y;
}

Matrix norm_backward(const Params& P, Gradients& G, const detail::Norm& n, const NormCache& c, const Matrix& dy) {
  G[n.gain] += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  G[n.bias] += dy.colwise().sum();
  const Matrix dxhat = (dy.array().rowwise() * P[n.gain].value.row(0).array()).matrix();
  const Vector m1 = dxhat.rowwise().mean();
  const Vector m2 = (dxhat.array() * c.xhat.array()).rowwise().sum() / static_cast<double>(dy.cols());
  Matrix dx = dxhat.colwise() - m1;
  dx -= (c.xhat.array().colwise() * m2.array()).matrix();
  return (dx.array().colwise() * c.inv_std.array()).matrix();
}

double gelu(double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v))); }

double gelu_derivative(double v) {
  const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
  return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
}

struct FeedForwardCache {
  Matrix input, pre, act;
};

Matrix ff_forward(const Params& P, const detail::FeedForward& f, const Matrix& x, FeedForwardCache& c) {
  c.input = x;
  c.pre = linear_forward(P, f.in, x);
  c.act = c.pre.unaryExpr(&gelu);
  return linear_forward(P, f.out, c.act);
}

Matrix ff_backward(const Params& P, Gradients& G, const detail::FeedForward& f, const FeedForwardCache& c,
                   const Matrix& dy) {
  const Matrix dact = linear_backward(P, G, f.out, c.act, dy);
  const Matrix dpre = dact.cwiseProduct(c.pre.unaryExpr(&gelu_derivative));
  return linear_backward(P, G, f.in, c.input, dpre);
}

struct AttentionCache {
  Matrix q_in, kv_in;
  Matrix q, k, v;
  std::vector<Matrix> probs;
  Matrix concat;
};

void softmax_rows(Matrix& s) {
  for (Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp().matrix();
    s.row(i) /= s.row(i).sum();
  }
}

Matrix attention_forward(const Params& P, const detail::Attention& a, const Matrix& q_in, const Matrix& kv_in,
                         bool causal, std::size_t heads, AttentionCache& c) {
  c.q_in = q_in;
  c.kv_in = kv_in;
  c.q = linear_forward(P, a.query, q_in);
  c.k = linear_forward(P, a.key, kv_in);
  c.v = linear_forward(P, a.value, kv_in);
  const Index d = c.q.cols();
  const Index dh = d / static_cast<Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c.concat.resize(q_in.rows(), d);
  c.probs.assign(heads, Matrix());
  for (std::size_t h = 0; h < heads; ++h) {
    const Index off = static_cast<Index>(h) * dh;
    Matrix s = (c.q.middleCols(off, dh) * c.k.middleCols(off, dh).transpose()) * scale;
    if (causal) {
      for (Index i = 0; i < s.rows(); ++i) {
        for (Index j = i + 1; j < s.cols(); ++j) s(i, j) = -std::numeric_limits<double>::infinity();
      }
    }
    softmax_rows(s);
    c.concat.middleCols(off, dh).noalias() = s * c.v.middleCols(off, dh);
    c.probs[h] = std::move(s);
  }
  return linear_forward(P, a.output, c.concat);
}

// Returns (d query input, d key/value input).
std::pair<Matrix, Matrix> attention_backward(const Params& P, Gradients& G, const detail::Attention& a,
                                             const AttentionCache& c, const Matrix& dy, std::size_t heads) {
  const Matrix dconcat = linear_backward(P, G, a.output, c.concat, dy);
  const Index d = c.q.cols();
  const Index dh = d / static_cast<Index>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
  for (std::size_t h = 0; h < heads; ++h) {
    const Index off = static_cast<Index>(h) * dh;
    const Matrix& p = c.probs[h];
    const auto dout = dconcat.middleCols(off, dh);
    const Matrix dp = dout * c.v.middleCols(off, dh).transpose();
    dv.middleCols(off, dh).noalias() = p.transpose() * dout;
    const Vector row_dot = (p.array() * dp.array()).rowwise().sum();
    const Matrix ds = ((p.array() * (dp.colwise() - row_dot).array()) * scale).matrix();
    dq.middleCols(off, dh).noalias() = ds * c.k.middleCols(off, dh);
    dk.middleCols(off, dh).noalias() = ds.transpose() * c.q.middleCols(off, dh);
  }
  Matrix dq_in = linear_backward(P, G, a.query, c.q_in, dq);
  Matrix dkv_in = linear_backward(P, G, a.key, c.kv_in, dk);
  dkv_in += linear_backward(P, G, a.value, c.kv_in, dv);
  return {std::move(dq_in), std::move(dkv_in)};
}

struct EncoderCache {
  NormCache n1;
  AttentionCache attn;
  NormCache n2;
  FeedForwardCache ff;
};

struct DecoderCache {
  NormCache n1;
  AttentionCache self_attn;
  NormCache n2;
  AttentionCache cross_attn;
  NormCache n3;
  FeedForwardCache ff;
};

struct Net {
  const Params& P;
  const detail::Layout& L;
  const Matrix& positions;
  std::size_t heads;
};

Matrix encoder_layer_forward(const Net& net, const detail::EncoderLayer& l, const Matrix& x, EncoderCache& c) {
  const Matrix h1 = norm_forward(net.P, l.norm1, x, c.n1);
  const Matrix x1 = x + attention_forward(net.P, l.attention, h1, h1, false, net.heads, c.attn);
  const Matrix h2 = norm_forward(net.P, l.norm2, x1, c.n2);
  return x1 + ff_forward(net.P, l.ff, h2, c.ff);
}

Matrix encoder_layer_backward(const Net& net, Gradients& G, const detail::EncoderLayer& l, const EncoderCache& c,
                              const Matrix& dout) {
  const Matrix dx1 = dout + norm_backward(net.P, G, l.norm2, c.n2, ff_backward(net.P, G, l.ff, c.ff, dout));
  const auto [dq, dkv] = attention_backward(net.P, G, l.attention, c.attn, dx1, net.heads);
  return dx1 + norm_backward(net.P, G, l.norm1, c.n1, dq + dkv);
}

Matrix decoder_layer_forward(const Net& net, const detail::DecoderLayer& l, const Matrix& y, const Matrix& memory,
                             DecoderCache& c) {
  const Matrix h1 = norm_forward(net.P, l.norm1, y, c.n1);
  const Matrix y1 = y + attention_forward(net.P, l.self_attention, h1, h1, true, net.heads, c.self_attn);
  const Matrix h2 = norm_forward(net.P, l.norm2, y1, c.n2);
  const Matrix y2 = y1 + attention_forward(net.P, l.cross_attention, h2, memory, false, net.heads, c.cross_attn);
  const Matrix h3 = norm_forward(net.P, l.norm3, y2, c.n3);
  return y2 + ff_forward(net.P, l.ff, h3, c.ff);
}

Matrix decoder_layer_backward(const Net& net, Gradients& G, const detail::DecoderLayer& l, const DecoderCache& c,
                              const Matrix& dout, Matrix& dmemory) {
  const Matrix dy2 = dout + norm_backward(net.P, G, l.norm3, c.n3, ff_backward(net.P, G, l.ff, c.ff, dout));
  const auto [dq_cross, dmem] = attention_backward(net.P, G, l.cross_attention, c.cross_attn, dy2, net.heads);
  dmemory += dmem;
  const Matrix dy1 = dy2 + norm_backward(net.P, G, l.norm2, c.n2, dq_cross);
  const auto [dq_self, dkv_self] = attention_backward(net.P, G, l.self_attention, c.self_attn, dy1, net.heads);
  return dy1 + norm_backward(net.P, G, l.norm1, c.n1, dq_self + dkv_self);
}

Matrix embed(const Net& net, const std::vector<int>& ids) {
  const Matrix& E = net.P[net.L.embedding].value;
  Matrix x(static_cast<Index>(ids.size()), E.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    x.row(static_cast<Index>(i)) = E.row(ids[i]) + net.positions.row(static_cast<Index>(i));
  }
  return x;
}

struct PassCache {
  std::vector<EncoderCache> enc;
  NormCache enc_norm;
  Matrix memory;
  std::vector<DecoderCache> dec;
  NormCache dec_norm;
  Matrix dec_out;
};

Matrix run_encoder(const Net& net, const std::vector<int>& source, PassCache& c) {
  Matrix x = embed(net, source);
  c.enc.resize(net.L.encoder.size());
  for (std::size_t i = 0; i < net.L.encoder.size(); ++i) x = encoder_layer_forward(net, net.L.encoder[i], x, c.enc[i]);
  c.memory = norm_forward(net.P, net.L.encoder_norm, x, c.enc_norm);
  return c.memory;
}

Matrix run_decoder(const Net& net, const Matrix& memory, const std::vector<int>& inputs, PassCache& c) {
  Matrix y = embed(net, inputs);
  c.dec.resize(net.L.decoder.size());
  for (std::size_t i = 0; i < net.L.decoder.size(); ++i) {
    y = decoder_layer_forward(net, net.L.decoder[i], y, memory, c.dec[i]);
  }
  c.dec_out = norm_forward(net.P, net.L.decoder_norm, y, c.dec_norm);
  return c.dec_out;
}

// Row-wise log-softmax.
Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

std::vector<int> decoder_inputs(const TokenizedPair& pair) {
  std::vector<int> in{Vocab::kBos};
  in.insert(in.end(), pair.target.begin(), pair.target.end());
  return in;
}

std::vector<int> decoder_labels(const TokenizedPair& pair) {
  std::vector<int> out = pair.target;
  out.push_back(Vocab::kEos);
  return out;
}

std::size_t batch_tokens(std::span<const TokenizedPair> batch) {
  std::size_t n = 0;
  for (const auto& p : batch) n += p.target.size() + 1;
  return n;
}

// Summed cross-entropy of the batch; gradients of (sum / total_tokens) are accumulated when G != nullptr.
double run_batch(const Net& net, std::span<const TokenizedPair> batch, Gradients* G) {
  const std::size_t total = batch_tokens(batch);
  double loss_sum = 0.0;
  for (const auto& pair : batch) {
    if (pair.source.empty()) throw DataError("cannot score an empty source sequence");
    PassCache c;
    const Matrix memory = run_encoder(net, pair.source, c);
    const std::vector<int> inputs = decoder_inputs(pair);
    const std::vector<int> labels = decoder_labels(pair);
    const Matrix out = run_decoder(net, memory, inputs, c);
    const Matrix logp = log_softmax_rows(linear_forward(net.P, net.L.projection, out));
    for (std::size_t i = 0; i < labels.size(); ++i) loss_sum -= logp(static_cast<Index>(i), labels[i]);
    if (G == nullptr) continue;

    Matrix dlogits = logp.array().exp().matrix();
    for (std::size_t i = 0; i < labels.size(); ++i) dlogits(static_cast<Index>(i), labels[i]) -= 1.0;
    dlogits /= static_cast<double>(total);

    Gradients& g = *G;
    Matrix dy = linear_backward(net.P, g, net.L.projection, c.dec_out, dlogits);
    dy = norm_backward(net.P, g, net.L.decoder_norm, c.dec_norm, dy);
    Matrix dmemory = Matrix::Zero(memory.rows(), memory.cols());
    for (std::size_t i = net.L.decoder.size(); i-- > 0;) {
      dy = decoder_layer_backward(net, g, net.L.decoder[i], c.dec[i], dy, dmemory);
    }
    Matrix& dE = g[net.L.embedding];
    for (std::size_t i = 0; i < inputs.size(); ++i) dE.row(inputs[i]) += dy.row(static_cast<Index>(i));

    Matrix dx = norm_backward(net.P, g, net.L.encoder_norm, c.enc_norm, dmemory);
    for (std::size_t i = net.L.encoder.size(); i-- > 0;) dx = encoder_layer_backward(net, g, net.L.encoder[i], c.enc[i], dx);
    for (std::size_t i = 0; i < pair.source.size(); ++i) dE.row(pair.source[i]) += dx.row(static_cast<Index>(i));
  }
  return loss_sum;
}

Matrix sinusoidal_positions(std::size_t rows, std::size_t dim) {
  Matrix pe(static_cast<Index>(rows), static_cast<Index>(dim));
  for (std::size_t pos = 0; pos < rows; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * freq;
      pe(static_cast<Index>(pos), static_cast<Index>(i)) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace

// ---------------------------------------------------------------- model

Model::Model(ModelConfig config, Vocab vocab) : config_(config), vocab_(std::move(vocab)) {
  validate_model_config(config_);
  Rng rng(mix_seed(config_.seed, 0x5EED));
  const auto d = static_cast<Index>(config_.embed_dim);
  const auto ff = static_cast<Index>(config_.feedforward_dim);
  const auto v = static_cast<Index>(vocab_.size());

  auto add = [&](const std::string& name, Index rows, Index cols, double stddev, double fill) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = stddev > 0.0 ? stddev * rng.normal() : fill;
    }
    params_.push_back({name, std::move(m)});
    return params_.size() - 1;
  };
  auto linear = [&](const std::string& name, Index in, Index out) {
    const double xavier = std::sqrt(2.0 / static_cast<double>(in + out));
    detail::Linear l;
    l.weight = add(name + ".weight", in, out, xavier, 0.0);
    l.bias = add(name + ".bias", 1, out, 0.0, 0.0);
    return l;
  };
  auto norm = [&](const std::string& name) {
    detail::Norm n;
    n.gain = add(name + ".gain", 1, d, 0.0, 1.0);
    n.bias = add(name + ".bias", 1, d, 0.0, 0.0);
    return n;
  };
  auto attention = [&](const std::string& name) {
    return detail::Attention{linear(name + ".query", d, d), linear(name + ".key", d, d), linear(name + ".value", d, d),
                             linear(name + ".output", d, d)};
  };
  auto feedforward = [&](const std::string& name) {
    return detail::FeedForward{linear(name + ".in", d, ff), linear(name + ".out", ff, d)};
  };

  layout_.embedding = add("embedding", v, d, 0.5, 0.0);
  for (std::size_t i = 0; i < config_.layer_count; ++i) {
    const std::string p = "encoder." + std::to_string(i);
    detail::EncoderLayer l;
    l.norm1 = norm(p + ".norm1");
    l.attention = attention(p + ".self");
    l.norm2 = norm(p + ".norm2");
    l.ff = feedforward(p + ".ff");
    layout_.encoder.push_back(l);
  }
  layout_.encoder_norm = norm("encoder.norm");
  for (std::size_t i = 0; i < config_.layer_count; ++i) {
    const std::string p = "decoder." + std::to_string(i);
    detail::DecoderLayer l;
    l.norm1 = norm(p + ".norm1");
    l.self_attention = attention(p + ".self");
    l.norm2 = norm(p + ".norm2");
    l.cross_attention = attention(p + ".cross");
    l.norm3 = norm(p + ".norm3");
    l.ff = feedforward(p + ".ff");
    layout_.decoder.push_back(l);
  }
  layout_.decoder_norm = norm("decoder.norm");
  layout_.projection = linear("projection", d, v);

  positions_ = sinusoidal_positions(std::max(config_.max_source_len, config_.max_target_len), config_.embed_dim);
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

TokenizedPair Model::tokenize(std::string_view source, std::string_view target) const {
  TokenizedPair out{vocab_.encode(source), vocab_.encode(target)};
  if (out.source.empty()) throw DataError("source sequence is empty");
  if (out.source.size() > config_.max_source_len) {
    throw DataError("source has " + std::to_string(out.source.size()) + " tokens, limit is " +
                    std::to_string(config_.max_source_len));
  }
  if (out.target.size() + 1 > config_.max_target_len) {
    throw DataError("target has " + std::to_string(out.target.size()) + " tokens plus EOS, limit is " +
                    std::to_string(config_.max_target_len));
  }
  return out;
}

TokenizedPair Model::tokenize(const EncodedPair& pair) const {
  try {
    return tokenize(pair.source, pair.target);
  } catch (const DataError& e) {
    throw DataError("pair from sentence '" + pair.sentence_id + "': " + e.what());
  }
}

double Model::loss(std::span<const TokenizedPair> batch) const {
  const std::size_t total = batch_tokens(batch);
  if (total == 0) return 0.0;
  const Net net{params_, layout_, positions_, config_.head_count};
  return run_batch(net, batch, nullptr) / static_cast<double>(total);
}

double Model::loss_and_gradient(std::span<const TokenizedPair> batch, Gradients& gradients) const {
  gradients.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    gradients[i] = Matrix::Zero(params_[i].value.rows(), params_[i].value.cols());
  }
  const std::size_t total = batch_tokens(batch);
  if (total == 0) return 0.0;
  const Net net{params_, layout_, positions_, config_.head_count};
  return run_batch(net, batch, &gradients) / static_cast<double>(total);
}

ForwardProbe Model::probe(const TokenizedPair& pair) const {
  if (pair.source.empty()) throw DataError("cannot probe an empty source sequence");
  const Net net{params_, layout_, positions_, config_.head_count};
  PassCache c;
  const Matrix memory = run_encoder(net, pair.source, c);
  const Matrix out = run_decoder(net, memory, decoder_inputs(pair), c);

  ForwardProbe probe;
  auto record = [&](std::string where, const AttentionCache& a) {
    probe.attention.push_back(
        {std::move(where), a.q_in.rows(), a.q_in.cols(), a.concat.rows(), a.concat.cols(), a.probs});
  };
  for (std::size_t i = 0; i < c.enc.size(); ++i) record("encoder." + std::to_string(i) + ".self", c.enc[i].attn);
  for (std::size_t i = 0; i < c.dec.size(); ++i) {
    record("decoder." + std::to_string(i) + ".self", c.dec[i].self_attn);
    record("decoder." + std::to_string(i) + ".cross", c.dec[i].cross_attn);
  }
  probe.output_probabilities = log_softmax_rows(linear_forward(params_, layout_.projection, out)).array().exp().matrix();
  return probe;
}

Matrix Model::encode(const std::vector<int>& source) const {
  if (source.empty()) throw DataError("cannot encode an empty source sequence");
  if (source.size() > config_.max_source_len) {
    throw DataError("source has " + std::to_string(source.size()) + " tokens, limit is " +
                    std::to_string(config_.max_source_len));
  }
  const Net net{params_, layout_, positions_, config_.head_count};
  PassCache c;
  return run_encoder(net, source, c);
}

Eigen::VectorXd Model::next_token_log_probs(const Matrix& memory, const std::vector<int>& prefix) const {
  if (prefix.empty() || prefix.front() != Vocab::kBos) throw UsageError("decoder prefix must start with BOS");
  if (prefix.size() > config_.max_target_len) throw UsageError("decoder prefix exceeds max_target_len");
  const Net net{params_, layout_, positions_, config_.head_count};
  PassCache c;
  const Matrix out = run_decoder(net, memory, prefix, c);
  const Matrix last = out.bottomRows(1);
  return log_softmax_rows(linear_forward(params_, layout_.projection, last)).row(0).transpose();
}

std::vector<int> Model::greedy_decode(const std::vector<int>& source) const {
  const Matrix memory = encode(source);
  std::vector<int> prefix{Vocab::kBos};
  double running = 0.0;
  for (std::size_t step = 0; step < config_.max_target_len; ++step) {
    const Vector logp = next_token_log_probs(memory, prefix);
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Index t = Vocab::kEos; t < logp.size(); ++t) {
      const double s = running + logp(t);
      if (best < 0 || s > best_score) {
        best = static_cast<int>(t);
        best_score = s;
      }
    }
    running = best_score;
    if (best == Vocab::kEos) break;
    prefix.push_back(best);
  }
  return {prefix.begin() + 1, prefix.end()};
}

std::vector<Hypothesis> Model::beam_search(const std::vector<int>& source, std::size_t beam_width) const {
  if (beam_width == 0) throw UsageError("beam width must be positive");
  const Matrix memory = encode(source);

  struct Live {
    std::vector<int> tokens;
    double log_prob;
  };
  struct Expansion {
    std::size_t parent;
    int token;
    double log_prob;
  };
  std::vector<Live> alive{{{}, 0.0}};
  std::vector<Hypothesis> done;
  auto hyp_less = [](const Hypothesis& a, const Hypothesis& b) {
    return a.log_prob != b.log_prob ? a.log_prob > b.log_prob : a.tokens < b.tokens;
  };

  bool stopped_early = false;
  for (std::size_t step = 0; step < config_.max_target_len && !alive.empty(); ++step) {
    std::vector<Expansion> ex;
    for (std::size_t h = 0; h < alive.size(); ++h) {
      std::vector<int> prefix{Vocab::kBos};
      prefix.insert(prefix.end(), alive[h].tokens.begin(), alive[h].tokens.end());
      const Vector logp = next_token_log_probs(memory, prefix);
      for (Index t = Vocab::kEos; t < logp.size(); ++t) {
        ex.push_back({h, static_cast<int>(t), alive[h].log_prob + logp(t)});
      }
    }
    // All expansions at one step have equal length, so parent order then token order is sequence order.
    auto better = [&](const Expansion& a, const Expansion& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (alive[a.parent].tokens != alive[b.parent].tokens) return alive[a.parent].tokens < alive[b.parent].tokens;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(beam_width, ex.size());
    std::partial_sort(ex.begin(), ex.begin() + static_cast<std::ptrdiff_t>(keep), ex.end(), better);

    std::vector<Live> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Live& parent = alive[ex[i].parent];
      if (ex[i].token == Vocab::kEos) {
        done.push_back({parent.tokens, ex[i].log_prob, true});
      } else {
        Live child{parent.tokens, ex[i].log_prob};
        child.tokens.push_back(ex[i].token);
        next.push_back(std::move(child));
      }
    }
    alive = std::move(next);

    // Extending a hypothesis never raises its log-probability.
    if (done.size() >= beam_width && !alive.empty()) {
      std::sort(done.begin(), done.end(), hyp_less);
      double best_alive = -std::numeric_limits<double>::infinity();
      for (const auto& a : alive) best_alive = std::max(best_alive, a.log_prob);
      if (best_alive <= done[beam_width - 1].log_prob) {
        stopped_early = true;
        break;
      }
    }
  }
  if (!stopped_early) {
    for (auto& a : alive) done.push_back({std::move(a.tokens), a.log_prob, false});
  }
  std::sort(done.begin(), done.end(), hyp_less);
  if (done.size() > beam_width) done.resize(beam_width);
  return done;
}

bool Model::operator==(const Model& other) const {
  if (!(config_ == other.config_) || !(vocab_ == other.vocab_) || params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
    if (std::memcmp(a.value.data(), b.value.data(), sizeof(double) * static_cast<std::size_t>(a.value.size())) != 0) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------- checkpoint

namespace {

constexpr char kMagic[8] = {'G', 'R', 'E', 'C', 'T', 'O', 'Y', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_double(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

struct Reader {
  std::istream& in;
  const std::string& path;

  void need(bool ok) const {
    if (!ok) throw DataError("truncated or corrupt model checkpoint '" + path + "'");
  }
  std::uint64_t u64() const {
    unsigned char b[8];
    need(static_cast<bool>(in.read(reinterpret_cast<char*>(b), 8)));
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::string str() const {
    const std::uint64_t n = u64();
    need(n < (1u << 20));
    std::string s(n, '\0');
    need(static_cast<bool>(in.read(s.data(), static_cast<std::streamsize>(n))));
    return s;
  }
  double f64() const {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
};

}  // namespace

void Model::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put_u64(out, kFormatVersion);
  put_u64(out, config_.embed_dim);
  put_u64(out, config_.layer_count);
  put_u64(out, config_.head_count);
  put_u64(out, config_.feedforward_dim);
  put_u64(out, config_.max_source_len);
  put_u64(out, config_.max_target_len);
  put_u64(out, config_.seed);
  const auto tokens = vocab_.non_reserved();
  put_u64(out, tokens.size());
  for (const auto& t : tokens) put_string(out, t);
  put_u64(out, params_.size());
  for (const auto& p : params_) {
    put_string(out, p.name);
    put_u64(out, static_cast<std::uint64_t>(p.value.rows()));
    put_u64(out, static_cast<std::uint64_t>(p.value.cols()));
    for (Index i = 0; i < p.value.size(); ++i) put_double(out, p.value.data()[i]);
  }
  out.flush();
  if (!out) throw DataError("failed writing model checkpoint '" + path + "'");
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model checkpoint '" + path + "'");
  const Reader r{in, path};
  char magic[sizeof kMagic];
  r.need(static_cast<bool>(in.read(magic, sizeof magic)));
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw DataError("'" + path + "' is not a model checkpoint");
  const std::uint64_t version = r.u64();
  if (version != kFormatVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " in '" + path + "'");
  }
  ModelConfig config;
  config.embed_dim = r.u64();
  config.layer_count = r.u64();
  config.head_count = r.u64();
  config.feedforward_dim = r.u64();
  config.max_source_len = r.u64();
  config.max_target_len = r.u64();
  config.seed = r.u64();
  const std::uint64_t vocab_size = r.u64();
  r.need(vocab_size < (1u << 24));
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str());

  Model model = [&] {
    try {
      return Model(config, Vocab(std::move(tokens)));
    } catch (const UsageError& e) {
      throw DataError("checkpoint '" + path + "' has an invalid configuration: " + e.what());
    }
  }();
  const std::uint64_t count = r.u64();
  if (count != model.params_.size()) throw DataError("checkpoint '" + path + "' has the wrong parameter count");
  for (auto& p : model.params_) {
    const std::string name = r.str();
    const auto rows = static_cast<Index>(r.u64());
    const auto cols = static_cast<Index>(r.u64());
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw DataError("checkpoint '" + path + "' parameter '" + name + "' does not match the model layout");
    }
    for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = r.f64();
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes in model checkpoint '" + path + "'");
  return model;
}

// ---------------------------------------------------------------- training

TrainResult train(const std::vector<EncodedPair>& pairs, const Vocab& vocab, const ModelConfig& model_config,
                  const TrainConfig& tc) {
  validate_train_config(tc);
  Model model(model_config, vocab);
  if (pairs.empty()) throw DataError("no training pairs");
  std::vector<TokenizedPair> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs) data.push_back(model.tokenize(p));

  auto& params = model.parameters();
  std::vector<Matrix> m1, m2;
  for (const auto& p : params) {
    m1.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    m2.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }

  Rng rng(mix_seed(model_config.seed, 0x7A1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients grads;
  std::vector<TokenizedPair> batch;
  std::vector<double> losses;
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    rng.shuffle(order);
    double weighted = 0.0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + tc.batch_size); ++i) batch.push_back(data[order[i]]);
      const double l = model.loss_and_gradient(batch, grads);
      ++step;
      bool finite = std::isfinite(l);
      for (const auto& g : grads) finite = finite && g.allFinite();
      if (!finite) {
        throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1) + ", step " +
                                 std::to_string(step) + " (loss " + std::to_string(l) + ", learning rate " +
                                 std::to_string(tc.learning_rate) + ")");
      }
      const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        m1[i] = tc.beta1 * m1[i] + (1.0 - tc.beta1) * grads[i];
        m2[i] = tc.beta2 * m2[i] + (1.0 - tc.beta2) * grads[i].cwiseProduct(grads[i]);
        params[i].value.array() -=
            tc.learning_rate * (m1[i].array() / c1) / ((m2[i].array() / c2).sqrt() + tc.adam_epsilon);
      }
      const std::size_t n = batch_tokens(batch);
      weighted += l * static_cast<double>(n);
      tokens += n;
    }
    losses.push_back(weighted / static_cast<double>(tokens));
    if (tc.on_epoch) tc.on_epoch(epoch + 1, losses.back());
  }
  return {std::move(model), std::move(losses)};
}

GradCheckResult grad_check(const Model& model, std::span<const TokenizedPair> batch, double epsilon,
                           std::size_t coordinates, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw UsageError("finite-difference epsilon must be positive");
  Gradients analytic;
  model.loss_and_gradient(batch, analytic);

  const std::size_t total = model.parameter_count();
  const std::size_t wanted = std::min(coordinates, total);
  Rng rng(mix_seed(seed, 0x6C));
  std::set<std::size_t> chosen;
  while (chosen.size() < wanted) chosen.insert(static_cast<std::size_t>(rng.uniform_index(total)));

  Model work = model;
  auto& params = work.parameters();
  GradCheckResult result;
  result.coordinates = chosen.size();
  std::size_t param = 0, offset = 0;
  for (const std::size_t flat : chosen) {
    while (flat >= offset + static_cast<std::size_t>(params[param].value.size())) {
      offset += static_cast<std::size_t>(params[param].value.size());
      ++param;
    }
    double& slot = params[param].value.data()[flat - offset];
    const double original = slot;
    slot = original + epsilon;
    const double plus = work.loss(batch);
    slot = original - epsilon;
    const double minus = work.loss(batch);
    slot = original;
    const double numeric = (plus - minus) / (2.0 * epsilon);
    const double a = analytic[param].data()[flat - offset];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    result.max_relative_error = std::max(result.max_relative_error, rel);
    result.max_abs_gradient = std::max(result.max_abs_gradient, std::abs(a));
  }
  return result;
}

// ---------------------------------------------------------------- backend

ToyBackend::ToyBackend(std::shared_ptr<const Model> model, std::size_t beam_width)
    : model_(std::move(model)), beam_width_(beam_width) {
  if (!model_) throw UsageError("ToyBackend needs a model");
}

std::vector<Candidate> ToyBackend::generate_top_n(const GenerationRequest& request) const {
  if (request.top_n == 0) throw UsageError("top_n must be positive");
  const std::vector<int> source = model_->vocab().encode(request.source);
  const std::size_t width = std::max(request.top_n, beam_width_);
  std::vector<Candidate> out;
  for (const auto& h : model_->beam_search(source, width)) {
    const double score = std::clamp(std::exp(h.log_prob), DBL_MIN, 1.0);
    out.push_back({model_->vocab().decode(h.tokens), score});
  }
  out = normalize_candidates(std::move(out));
  if (out.size() > request.top_n) out.resize(request.top_n);
  return out;
}

}  // namespace grec::toy
