#include "grec/schema.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace grec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool has_reserved_label_char(std::string_view label) {
  return label.find_first_of("[]|") != std::string_view::npos;
}

}  // namespace

bool contains_whitespace(std::string_view text) { return std::any_of(text.begin(), text.end(), is_space); }

std::string join(const std::vector<std::string>& parts, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return text.substr(b, e - b);
}

// ---------------------------------------------------------------------------

Entity::Entity(std::size_t start, std::size_t end, std::string type, std::string surface)
    : start_(start), end_(end), type_(std::move(type)), surface_(std::move(surface)) {
  if (start_ >= end_) {
    throw DataError("entity span [" + std::to_string(start_) + ", " + std::to_string(end_) + ") is empty");
  }
  if (type_.empty() || contains_whitespace(type_)) {
    throw DataError("entity type '" + type_ + "' must be a non-empty single token");
  }
  if (surface_.empty()) throw DataError("entity surface is empty");
}

Entity Entity::from_span(const std::vector<std::string>& tokens, std::size_t start, std::size_t end,
                         std::string type) {
  if (start >= end || end > tokens.size()) {
    throw DataError("entity span [" + std::to_string(start) + ", " + std::to_string(end) +
                    ") outside sentence of " + std::to_string(tokens.size()) + " tokens");
  }
  std::vector<std::string> span(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                                tokens.begin() + static_cast<std::ptrdiff_t>(end));
  return Entity(start, end, std::move(type), join(span, " "));
}

Sentence::Sentence(std::string id, std::vector<std::string> tokens, std::vector<Entity> entities)
    : id_(std::move(id)), tokens_(std::move(tokens)), entities_(std::move(entities)) {
  for (const auto& token : tokens_) {
    if (token.empty()) throw DataError("sentence " + id_ + ": empty token");
    if (contains_whitespace(token)) throw DataError("sentence " + id_ + ": token '" + token + "' contains whitespace");
  }
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const Entity& e = entities_[i];
    if (e.end() > tokens_.size()) {
      throw DataError("sentence " + id_ + ": entity span [" + std::to_string(e.start()) + ", " +
                      std::to_string(e.end()) + ") exceeds " + std::to_string(tokens_.size()) + " tokens");
    }
    if (Entity::from_span(tokens_, e.start(), e.end(), e.type()).surface() != e.surface()) {
      throw DataError("sentence " + id_ + ": entity surface '" + e.surface() + "' does not match its span");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (entities_[j] == e) throw DataError("sentence " + id_ + ": duplicate entity '" + e.surface() + "'");
    }
  }
}

std::optional<std::size_t> Sentence::entity_index(const Entity& entity) const {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (entities_[i] == entity) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate_schema(const SchemaFields& fields) {
  std::vector<std::string> violations;
  const std::string& null_type = fields.null_type;
  if (null_type.empty()) violations.push_back("null type is empty");
  if (has_reserved_label_char(null_type)) violations.push_back("null type '" + null_type + "' contains '[', ']' or '|'");
  if (!null_type.empty() && trim(null_type) != null_type) violations.push_back("null type has surrounding whitespace");

  if (fields.relation_types.empty()) violations.push_back("schema has no relation types");
  std::set<std::string> seen;
  for (const auto& label : fields.relation_types) {
    if (label.empty()) {
      violations.push_back("empty relation type");
      continue;
    }
    if (!seen.insert(label).second) violations.push_back("duplicate relation type '" + label + "'");
    if (label == null_type) violations.push_back("relation type '" + label + "' equals the null type");
    if (has_reserved_label_char(label)) violations.push_back("relation type '" + label + "' contains '[', ']' or '|'");
    if (trim(label) != label) violations.push_back("relation type '" + label + "' has surrounding whitespace");
  }

  std::set<std::string> seen_types;
  for (const auto& type : fields.entity_types) {
    if (type.empty() || contains_whitespace(type)) {
      violations.push_back("entity type '" + type + "' must be a non-empty single token");
    } else if (!seen_types.insert(type).second) {
      violations.push_back("duplicate entity type '" + type + "'");
    }
  }
  return violations;
}

RelationSchema::RelationSchema(SchemaFields fields) : fields_(std::move(fields)) {
  auto violations = validate_schema(fields_);
  if (!violations.empty()) throw DataError("invalid relation schema: " + join(violations, "; "));
}

bool RelationSchema::is_relation(std::string_view label) const {
  return std::find(fields_.relation_types.begin(), fields_.relation_types.end(), label) !=
         fields_.relation_types.end();
}

bool RelationSchema::allows_entity_type(std::string_view type) const {
  // An empty entity type list leaves entity types unconstrained.
  return fields_.entity_types.empty() ||
         std::find(fields_.entity_types.begin(), fields_.entity_types.end(), type) != fields_.entity_types.end();
}

// ---------------------------------------------------------------------------

RelationTriple::RelationTriple(Entity subject, std::string relation, Entity object)
    : subject_(std::move(subject)), relation_(std::move(relation)), object_(std::move(object)) {
  if (relation_.empty()) throw DataError("relation triple has an empty relation label");
  if (subject_ == object_) throw DataError("relation triple links entity '" + subject_.surface() + "' to itself");
}

LabeledExample::LabeledExample(Sentence sentence, std::vector<RelationTriple> gold_triples,
                               const RelationSchema& schema)
    : sentence_(std::move(sentence)), gold_triples_(std::move(gold_triples)) {
  for (const auto& entity : sentence_.entities()) {
    if (!schema.allows_entity_type(entity.type())) {
      throw DataError("sentence " + sentence_.id() + ": entity type '" + entity.type() + "' not in schema");
    }
  }
  for (const auto& triple : gold_triples_) {
    if (!schema.is_relation(triple.relation())) {
      throw DataError("sentence " + sentence_.id() + ": gold relation '" + triple.relation() +
                      "' is not a non-null schema relation");
    }
    if (!sentence_.entity_index(triple.subject()) || !sentence_.entity_index(triple.object())) {
      throw DataError("sentence " + sentence_.id() + ": gold triple refers to an entity outside the sentence");
    }
  }
}

}  // namespace grec
