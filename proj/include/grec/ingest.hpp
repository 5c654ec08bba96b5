#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grec/formats.hpp"
#include "grec/ratio.hpp"
#include "grec/schema.hpp"

namespace grec {

struct LoadResult {
  std::vector<LabeledExample> examples;
  std::vector<RecordError> errors;
};

struct AdapterOptions {
  // Dataset spelling of the null relation; mapped onto schema.null_type().
  // Empty selects the dataset default ("no_relation" for TACRED, "Other" for SemEval).
  std::string null_label;
  bool strict = false;  // upgrade the first record-level error to a DataError
};

/// TACRED JSON array. Inclusive token indices are converted to exclusive ends.
/// Entity 0 is the subject mention and entity 1 the object mention.
LoadResult load_tacred(const std::string& path, const RelationSchema& schema, const AdapterOptions& options = {});

inline constexpr const char* kSemEvalEntityType = "Entity";

/// SemEval 2010 Task 8 text format. Directed labels are stored as their base type with the
/// subject/object roles assigned from the direction suffix.
LoadResult load_semeval(const std::string& path, const RelationSchema& schema, const AdapterOptions& options = {});

/// Splits raw text into tokens, detaching leading and trailing punctuation.
std::vector<std::string> simple_tokenize(const std::string& text);

// Canonical JSONL: {"id", "tokens", "entities": [{start, end, type}], "triples": [{subj_idx, obj_idx, relation}]}
Json canonical_to_json(const LabeledExample& example);
LabeledExample canonical_from_json(const Json& j, const RelationSchema& schema);
void write_canonical(const std::vector<LabeledExample>& examples, const std::string& path);
LoadResult load_canonical(const std::string& path, const RelationSchema& schema, const AdapterOptions& options = {});

struct SyntheticGrammarConfig {
  std::size_t entity_type_count = 4;
  std::size_t relation_type_count = 4;
  std::size_t templates_per_relation = 10;
  std::size_t vocabulary_size = 200;
  Ratio negative_fraction{1, 5};
  std::uint64_t seed = 13;
  std::size_t train_size = 500;
  std::size_t dev_size = 100;
  std::size_t test_size = 100;
  std::size_t names_per_type = 12;
};

void validate_synthetic_config(const SyntheticGrammarConfig& config);

struct SyntheticCorpus {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  RelationSchema schema;
};

/// Deterministic templated corpus. Each sentence mentions two entities; a positive sentence
/// instantiates a relation template so (template, entity order) determines the relation.
SyntheticCorpus synthesize_corpus(const SyntheticGrammarConfig& config);

}  // namespace grec
