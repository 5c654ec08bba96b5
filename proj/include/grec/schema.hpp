#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace grec {

/// Bad input data: a malformed record, an invariant violation, a missing file.
struct DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or command-line usage.
struct UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A per-record problem that was collected instead of aborting the whole load.
struct RecordError {
  std::string record_id;
  std::string message;

  bool operator==(const RecordError&) const = default;
};

bool contains_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view separator);
std::vector<std::string> split_whitespace(std::string_view text);
std::string_view trim(std::string_view text);

/// An entity mention: a token span [start, end) with a type label.
class Entity {
 public:
  Entity(std::size_t start, std::size_t end, std::string type, std::string surface);

  // Surface is derived from the tokens of the span.
  static Entity from_span(const std::vector<std::string>& tokens, std::size_t start, std::size_t end,
                          std::string type);

  std::size_t start() const { return start_; }
  std::size_t end() const { return end_; }
  const std::string& type() const { return type_; }
  const std::string& surface() const { return surface_; }

  bool overlaps(const Entity& other) const { return start_ < other.end_ && other.start_ < end_; }
  bool same_span(const Entity& other) const { return start_ == other.start_ && end_ == other.end_; }

  bool operator==(const Entity&) const = default;

 private:
  std::size_t start_;
  std::size_t end_;
  std::string type_;
  std::string surface_;
};

class Sentence {
 public:
  Sentence(std::string id, std::vector<std::string> tokens, std::vector<Entity> entities);

  const std::string& id() const { return id_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<Entity>& entities() const { return entities_; }

  std::string text() const { return join(tokens_, " "); }
  std::optional<std::size_t> entity_index(const Entity& entity) const;

  bool operator==(const Sentence&) const = default;

 private:
  std::string id_;
  std::vector<std::string> tokens_;
  std::vector<Entity> entities_;
};

struct SchemaFields {
  std::vector<std::string> relation_types;
  std::string null_type;
  std::vector<std::string> entity_types;

  bool operator==(const SchemaFields&) const = default;
};

/// Returns every invariant violation of the given schema fields; empty when valid.
std::vector<std::string> validate_schema(const SchemaFields& fields);

/// Ordered non-null relation types r_1..r_K plus the designated null type.
class RelationSchema {
 public:
  explicit RelationSchema(SchemaFields fields);

  const std::vector<std::string>& relation_types() const { return fields_.relation_types; }
  const std::string& null_type() const { return fields_.null_type; }
  const std::vector<std::string>& entity_types() const { return fields_.entity_types; }

  bool is_null(std::string_view label) const { return label == fields_.null_type; }
  bool is_relation(std::string_view label) const;
  bool contains(std::string_view label) const { return is_null(label) || is_relation(label); }
  bool allows_entity_type(std::string_view type) const;

  bool operator==(const RelationSchema&) const = default;

 private:
  SchemaFields fields_;
};

/// A directed (subject, relation, object) triple. The relation may be the null type.
class RelationTriple {
 public:
  RelationTriple(Entity subject, std::string relation, Entity object);

  const Entity& subject() const { return subject_; }
  const std::string& relation() const { return relation_; }
  const Entity& object() const { return object_; }

  bool operator==(const RelationTriple&) const = default;

 private:
  Entity subject_;
  std::string relation_;
  Entity object_;
};

/// A sentence with its positive gold triples.
class LabeledExample {
 public:
  LabeledExample(Sentence sentence, std::vector<RelationTriple> gold_triples, const RelationSchema& schema);

  const Sentence& sentence() const { return sentence_; }
  const std::vector<RelationTriple>& gold_triples() const { return gold_triples_; }

  bool operator==(const LabeledExample&) const = default;

 private:
  Sentence sentence_;
  std::vector<RelationTriple> gold_triples_;
};

}  // namespace grec
