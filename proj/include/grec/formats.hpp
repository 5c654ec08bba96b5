#pragma once

// JSONL interchange formats shared by the pipeline stages.

#include <cstddef>
#include <functional>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grec/encoder.hpp"
#include "grec/genbackend.hpp"
#include "grec/schema.hpp"

namespace grec {

using Json = nlohmann::ordered_json;

/// Calls `fn` for every non-blank line parsed as JSON. Errors carry path and line number.
void read_jsonl(const std::string& path, const std::function<void(const Json&, std::size_t line)>& fn);

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);
  void write(const Json& record);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

std::string read_text_file(const std::string& path);

// Schema sidecar: {"relation_types": [...], "null_type": "...", "entity_types": [...]}
Json schema_to_json(const RelationSchema& schema);
RelationSchema schema_from_json(const Json& j);
RelationSchema load_schema(const std::string& path);
void write_schema(const RelationSchema& schema, const std::string& path);

// Encoded pairs: {source, target, sentence_id, subj_idx, obj_idx, is_positive}
Json encoded_pair_to_json(const EncodedPair& pair);
EncodedPair encoded_pair_from_json(const Json& j);
void write_encoded_pairs(const std::vector<EncodedPair>& pairs, const std::string& path);
std::vector<EncodedPair> read_encoded_pairs(const std::string& path);

/// Generation output for one encoded pair.
struct CandidateRecord {
  std::string sentence_id;
  std::optional<std::size_t> subj_idx;
  std::optional<std::size_t> obj_idx;
  std::string source;
  std::vector<Candidate> candidates;

  bool operator==(const CandidateRecord&) const = default;
};

Json candidate_record_to_json(const CandidateRecord& record);
CandidateRecord candidate_record_from_json(const Json& j);
void write_candidate_records(const std::vector<CandidateRecord>& records, const std::string& path);
std::vector<CandidateRecord> read_candidate_records(const std::string& path);

struct PredictedTriple {
  RelationTriple triple;
  std::optional<double> score;  // absent in gold files

  bool operator==(const PredictedTriple&) const = default;
};

/// Prediction JSONL: {sentence_id, triples: [{subj: {start,end,type,surface}, obj: {...}, relation, score}]}
struct PredictionRecord {
  std::string sentence_id;
  std::vector<PredictedTriple> triples;

  bool operator==(const PredictionRecord&) const = default;
};

Json entity_to_json(const Entity& entity);
Entity entity_from_json(const Json& j);
Json prediction_record_to_json(const PredictionRecord& record);
PredictionRecord prediction_record_from_json(const Json& j);
void write_prediction_records(const std::vector<PredictionRecord>& records, const std::string& path);
std::vector<PredictionRecord> read_prediction_records(const std::string& path);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace grec
