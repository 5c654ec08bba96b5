#include "grec/formats.hpp"

#include <cstdint>
#include <cstdio>
#include <sstream>

namespace grec {

void read_jsonl(const std::string& path, const std::function<void(const Json&, std::size_t line)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    try {
      fn(j, line_no);
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

JsonlWriter::JsonlWriter(const std::string& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw DataError("cannot write " + path);
}

void JsonlWriter::write(const Json& record) { out_ << record.dump() << '\n'; }

void JsonlWriter::close() {
  out_.close();
  if (!out_) throw DataError("failed writing " + path_);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

Json schema_to_json(const RelationSchema& schema) {
  Json j;
  j["relation_types"] = schema.relation_types();
  j["null_type"] = schema.null_type();
  j["entity_types"] = schema.entity_types();
  return j;
}

RelationSchema schema_from_json(const Json& j) {
  SchemaFields fields;
  try {
    fields.relation_types = j.at("relation_types").get<std::vector<std::string>>();
    fields.null_type = j.at("null_type").get<std::string>();
    if (j.contains("entity_types")) fields.entity_types = j.at("entity_types").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed schema: ") + e.what());
  }
  return RelationSchema(std::move(fields));
}

RelationSchema load_schema(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return schema_from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
}

void write_schema(const RelationSchema& schema, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << schema_to_json(schema).dump(2) << '\n';
}

// ---------------------------------------------------------------------------

namespace {

Json optional_index(const std::optional<std::size_t>& idx) { return idx ? Json(*idx) : Json(nullptr); }

std::optional<std::size_t> index_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::size_t>();
}

}  // namespace

Json encoded_pair_to_json(const EncodedPair& pair) {
  Json j;
  j["source"] = pair.source;
  j["target"] = pair.target;
  j["sentence_id"] = pair.sentence_id;
  j["subj_idx"] = optional_index(pair.subj_idx);
  j["obj_idx"] = optional_index(pair.obj_idx);
  j["is_positive"] = pair.is_positive;
  return j;
}

EncodedPair encoded_pair_from_json(const Json& j) {
  EncodedPair p;
  p.source = j.at("source").get<std::string>();
  p.target = j.at("target").get<std::string>();
  p.sentence_id = j.at("sentence_id").get<std::string>();
  p.subj_idx = index_from(j, "subj_idx");
  p.obj_idx = index_from(j, "obj_idx");
  p.is_positive = j.at("is_positive").get<bool>();
  if (p.source.empty() || p.target.empty()) throw DataError("encoded pair with empty source or target");
  return p;
}

void write_encoded_pairs(const std::vector<EncodedPair>& pairs, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& p : pairs) w.write(encoded_pair_to_json(p));
  w.close();
}

std::vector<EncodedPair> read_encoded_pairs(const std::string& path) {
  std::vector<EncodedPair> out;
  read_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(encoded_pair_from_json(j)); });
  return out;
}

// ---------------------------------------------------------------------------

Json candidate_record_to_json(const CandidateRecord& record) {
  Json j;
  j["sentence_id"] = record.sentence_id;
  j["subj_idx"] = optional_index(record.subj_idx);
  j["obj_idx"] = optional_index(record.obj_idx);
  j["source"] = record.source;
  Json cands = Json::array();
  for (const auto& c : record.candidates) {
    Json cj;
    cj["text"] = c.text;
    cj["score"] = c.score;
    cands.push_back(std::move(cj));
  }
  j["candidates"] = std::move(cands);
  return j;
}

CandidateRecord candidate_record_from_json(const Json& j) {
  CandidateRecord r;
  r.sentence_id = j.at("sentence_id").get<std::string>();
  r.subj_idx = index_from(j, "subj_idx");
  r.obj_idx = index_from(j, "obj_idx");
  r.source = j.value("source", std::string());
  for (const auto& c : j.at("candidates")) {
    Candidate cand{c.at("text").get<std::string>(), c.at("score").get<double>()};
    validate_candidate(cand);
    r.candidates.push_back(std::move(cand));
  }
  return r;
}

void write_candidate_records(const std::vector<CandidateRecord>& records, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& r : records) w.write(candidate_record_to_json(r));
  w.close();
}

std::vector<CandidateRecord> read_candidate_records(const std::string& path) {
  std::vector<CandidateRecord> out;
  read_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(candidate_record_from_json(j)); });
  return out;
}

// ---------------------------------------------------------------------------

Json entity_to_json(const Entity& entity) {
  Json j;
  j["start"] = entity.start();
  j["end"] = entity.end();
  j["type"] = entity.type();
  j["surface"] = entity.surface();
  return j;
}

Entity entity_from_json(const Json& j) {
  return Entity(j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(), j.at("type").get<std::string>(),
                j.at("surface").get<std::string>());
}

Json prediction_record_to_json(const PredictionRecord& record) {
  Json j;
  j["sentence_id"] = record.sentence_id;
  Json triples = Json::array();
  for (const auto& pt : record.triples) {
    Json tj;
    tj["subj"] = entity_to_json(pt.triple.subject());
    tj["obj"] = entity_to_json(pt.triple.object());
    tj["relation"] = pt.triple.relation();
    if (pt.score) tj["score"] = *pt.score;
    triples.push_back(std::move(tj));
  }
  j["triples"] = std::move(triples);
  return j;
}

PredictionRecord prediction_record_from_json(const Json& j) {
  PredictionRecord r;
  r.sentence_id = j.at("sentence_id").get<std::string>();
  for (const auto& tj : j.at("triples")) {
    std::optional<double> score;
    if (tj.contains("score") && !tj.at("score").is_null()) score = tj.at("score").get<double>();
    r.triples.push_back({RelationTriple(entity_from_json(tj.at("subj")), tj.at("relation").get<std::string>(),
                                        entity_from_json(tj.at("obj"))),
                         score});
  }
  return r;
}

void write_prediction_records(const std::vector<PredictionRecord>& records, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& r : records) w.write(prediction_record_to_json(r));
  w.close();
}

std::vector<PredictionRecord> read_prediction_records(const std::string& path) {
  std::vector<PredictionRecord> out;
  read_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(prediction_record_from_json(j)); });
  return out;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace grec
