#pragma once

// A small pre-norm encoder-decoder transformer in 64-bit floats with hand-written
// backpropagation. It implements GenerationBackend so the full pipeline can run
// end to end without an external model.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "grec/encoder.hpp"
#include "grec/genbackend.hpp"

namespace grec::toy {

using Matrix = Eigen::MatrixXd;

/// Whitespace-token vocabulary. Ids 0..3 are PAD, BOS, EOS and UNK.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocab();
  // Non-reserved tokens in id order (id = kReserved + position).
  explicit Vocab(std::vector<std::string> tokens);

  // Tokens sorted by descending frequency, then lexicographically. Throws DataError on an empty corpus.
  static Vocab build(const std::vector<EncodedPair>& pairs);

  int id(const std::string& token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  std::vector<std::string> non_reserved() const { return {tokens_.begin() + kReserved, tokens_.end()}; }

  std::vector<int> encode(std::string_view text) const;
  std::string decode(const std::vector<int>& ids) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct ModelConfig {
  std::size_t embed_dim = 64;
  std::size_t layer_count = 2;
  std::size_t head_count = 2;
  std::size_t feedforward_dim = 128;
  std::size_t max_source_len = 128;
  std::size_t max_target_len = 64;  // generated tokens, EOS included
  std::uint64_t seed = 1;

  bool operator==(const ModelConfig&) const = default;
};

void validate_model_config(const ModelConfig& config);

struct TrainConfig {
  double learning_rate = 3e-4;
  std::size_t batch_size = 16;
  std::size_t epochs = 30;
  // Adam moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

void validate_train_config(const TrainConfig& config);

struct Parameter {
  std::string name;
  Matrix value;
};

using Gradients = std::vector<Matrix>;

/// Token ids of one training pair; the target excludes BOS and EOS.
struct TokenizedPair {
  std::vector<int> source;
  std::vector<int> target;
};

struct Hypothesis {
  std::vector<int> tokens;  // EOS excluded
  double log_prob = 0.0;
  bool finished = false;    // false when cut off at max_target_len
};

/// Intermediate values captured by a forward pass, for numerical and shape checks.
struct ForwardProbe {
  struct AttentionRecord {
    std::string where;                  // "encoder.0.self", "decoder.1.cross", ...
    Eigen::Index input_rows, input_cols;
    Eigen::Index output_rows, output_cols;
    std::vector<Matrix> probabilities;  // one per head, rows = queries
  };
  std::vector<AttentionRecord> attention;
  Matrix output_probabilities;  // target positions x vocab
};

namespace detail {
struct Linear { std::size_t weight, bias; };
struct Norm { std::size_t gain, bias; };
struct Attention { Linear query, key, value, output; };
struct FeedForward { Linear in, out; };
struct EncoderLayer { Norm norm1; Attention attention; Norm norm2; FeedForward ff; };
struct DecoderLayer { Norm norm1; Attention self_attention; Norm norm2; Attention cross_attention; Norm norm3; FeedForward ff; };
struct Layout {
  std::size_t embedding = 0;
  std::vector<EncoderLayer> encoder;
  Norm encoder_norm{};
  std::vector<DecoderLayer> decoder;
  Norm decoder_norm{};
  Linear projection{};
};
}  // namespace detail

class Model {
 public:
  /// Randomly initialized from config.seed.
  Model(ModelConfig config, Vocab vocab);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t parameter_count() const;

  /// Throws DataError when the pair exceeds the configured length limits.
  TokenizedPair tokenize(const EncodedPair& pair) const;
  TokenizedPair tokenize(std::string_view source, std::string_view target) const;

  /// Mean token cross-entropy over the batch (0 for an empty batch).
  double loss(std::span<const TokenizedPair> batch) const;
  /// Same loss; writes d loss / d parameter into `gradients` (resized and zeroed here).
  double loss_and_gradient(std::span<const TokenizedPair> batch, Gradients& gradients) const;

  ForwardProbe probe(const TokenizedPair& pair) const;

  Matrix encode(const std::vector<int>& source) const;
  /// Log-probabilities of the next token given an encoded source and a prefix starting with BOS.
  Eigen::VectorXd next_token_log_probs(const Matrix& memory, const std::vector<int>& prefix) const;

  std::vector<int> greedy_decode(const std::vector<int>& source) const;
  /// Hypotheses sorted by log-probability (descending), ties by token sequence.
  std::vector<Hypothesis> beam_search(const std::vector<int>& source, std::size_t beam_width) const;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

  bool operator==(const Model& other) const;

 private:
  ModelConfig config_;
  Vocab vocab_;
  detail::Layout layout_;
  std::vector<Parameter> params_;
  Matrix positions_;  // sinusoidal table, max(max_source_len, max_target_len) x embed_dim
};

struct TrainResult {
  Model model;
  std::vector<double> epoch_losses;  // token-weighted mean loss per epoch
};

/// Teacher-forced training with Adam. Deterministic given the configs.
TrainResult train(const std::vector<EncodedPair>& pairs, const Vocab& vocab, const ModelConfig& model_config,
                  const TrainConfig& train_config);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  double max_abs_gradient = 0.0;
};

/// Compares analytic gradients with central differences on randomly chosen coordinates.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const Model& model, std::span<const TokenizedPair> batch, double epsilon,
                           std::size_t coordinates = 256, std::uint64_t seed = 0);

/// GenerationBackend over a frozen model. Candidate score = exp(sum of token log-probs).
class ToyBackend : public GenerationBackend {
 public:
  // beam_width 0 uses top_n.
  explicit ToyBackend(std::shared_ptr<const Model> model, std::size_t beam_width = 0);

  std::vector<Candidate> generate_top_n(const GenerationRequest& request) const override;

 private:
  std::shared_ptr<const Model> model_;
  std::size_t beam_width_;
};

}  // namespace grec::toy
