#pragma once

// File-to-file pipeline stages. Each returns a one-line JSON summary; the CLI prints it.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "grec/encoder.hpp"
#include "grec/formats.hpp"
#include "grec/ingest.hpp"
#include "grec/metrics.hpp"
#include "grec/ratio.hpp"
#include "grec/sampler.hpp"
#include "grec/scaling.hpp"
#include "grec/toyseq2seq.hpp"

namespace grec::pipeline {

/// FNV-1a of the compact JSON dump.
std::string config_hash(const Json& config);

struct ConvertOptions {
  std::string adapter;  // tacred | semeval | canonical
  std::string input;
  std::string output;
  std::string schema;
  std::string null_label;  // empty = dataset default
  bool strict = false;
};
Json cmd_convert(const ConvertOptions& options);

struct EncodeStageOptions {
  std::string input;  // canonical JSONL
  std::string schema;
  std::string output;  // encoded pairs JSONL
  EncodeOptions encoding;
  bool strict = false;
};
Json cmd_encode(const EncodeStageOptions& options);

struct SampleStageOptions {
  std::string input;
  std::string output;
  SamplingConfig sampling;
};
Json cmd_sample(const SampleStageOptions& options);

struct TrainStageOptions {
  std::string input;  // encoded pairs
  std::string model_out;
  toy::ModelConfig model;
  toy::TrainConfig train;
};
Json cmd_train(const TrainStageOptions& options);

struct GenerateStageOptions {
  std::string input;  // encoded pairs
  std::string model;
  std::string output;  // candidate records
  std::size_t top_n = 5;
  std::size_t beam_width = 0;  // 0 = top_n
};
Json cmd_generate(const GenerateStageOptions& options);

struct SelectStageOptions {
  std::string candidates;
  std::string data;  // canonical JSONL the pairs were encoded from
  std::string schema;
  std::string output;  // prediction JSONL
  ScalingConfig scaling;
  EncodingMode mode = EncodingMode::EntityPair;
  TargetOrder order = TargetOrder::SRO;
};
Json cmd_select(const SelectStageOptions& options);

struct ScoreStageOptions {
  std::string predictions;
  std::string gold;
  std::string schema;
  ScoringMode mode = ScoringMode::MicroPositive;
  std::string report;  // optional report file
};
Json cmd_score(const ScoreStageOptions& options);

struct SynthesizeOptions {
  SyntheticGrammarConfig grammar;
  std::string out_dir;  // receives train.jsonl, dev.jsonl, test.jsonl, schema.json
};
Json cmd_synthesize(const SynthesizeOptions& options);

struct AblateOptions {
  std::string train;  // canonical JSONL
  std::string test;   // canonical JSONL
  std::string schema;
  std::string work_dir;
  std::vector<Ratio> alphas;
  std::vector<double> betas;
  std::uint64_t seed = 0;  // sampling seed
  EncodeOptions encoding;
  toy::ModelConfig model;
  toy::TrainConfig train_config;
  std::size_t top_n = 5;
  ScoringMode scoring = ScoringMode::MicroPositive;
};

struct AblationCell {
  Ratio alpha;
  double beta = 1.0;
  PRF prf;
  std::size_t positive_predictions = 0;
  std::size_t sampled_negatives = 0;
  std::size_t training_pairs = 0;
};

struct AblationReport {
  std::vector<Ratio> alphas;
  std::vector<double> betas;
  std::vector<std::vector<AblationCell>> cells;  // [alpha][beta]

  Json to_json() const;
  std::string to_table() const;  // rows alpha, columns beta, cells P/R/F1
};

/// Retrains the toy model once per alpha and selects once per beta, composing the stage
/// functions above through files in work_dir.
AblationReport run_ablation(const AblateOptions& options);
Json cmd_ablate(const AblateOptions& options);

struct GradCheckOptions {
  std::string input;  // encoded pairs; empty = a small synthetic corpus
  std::size_t pair_count = 4;
  toy::ModelConfig model{8, 1, 2, 16, 64, 32, 1};
  double epsilon = 1e-4;
  std::size_t coordinates = 256;
  double tolerance = 1e-3;
};
Json cmd_grad_check(const GradCheckOptions& options);

}  // namespace grec::pipeline
