#include "grec/parser.hpp"

#include <cctype>

namespace grec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

constexpr std::string_view kNone = "None";

}  // namespace

std::size_t field_count(TargetOrder order) { return order == TargetOrder::RelOnly ? 1 : 3; }

std::size_t relation_field(TargetOrder order) {
  switch (order) {
    case TargetOrder::RelOnly: return 0;
    case TargetOrder::SRO: return 1;
    case TargetOrder::RSO: return 0;
    case TargetOrder::SOR: return 2;
  }
  return 0;
}

std::size_t subject_field(TargetOrder order) { return order == TargetOrder::RSO ? 1 : 0; }

std::size_t object_field(TargetOrder order) {
  switch (order) {
    case TargetOrder::SRO: return 2;
    case TargetOrder::RSO: return 2;
    case TargetOrder::SOR: return 1;
    case TargetOrder::RelOnly: return 0;
  }
  return 0;
}

ParseOutcome parse_target(std::string_view text, TargetOrder order) {
  const std::size_t arity = field_count(order);
  std::vector<RawTriple> triples;
  std::size_t pos = 0;
  while (true) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    if (pos == text.size()) break;
    if (text[pos] != '[') {
      return Malformed{"expected '[' at offset " + std::to_string(pos)};
    }
    const std::size_t open = pos++;
    std::size_t close = std::string_view::npos;
    for (std::size_t i = pos; i < text.size(); ++i) {
      if (text[i] == ']') {
        close = i;
        break;
      }
      if (text[i] == '[') return Malformed{"nested '[' at offset " + std::to_string(i)};
    }
    if (close == std::string_view::npos) return Malformed{"unclosed block"};

    const std::string_view body = text.substr(open + 1, close - open - 1);
    RawTriple raw;
    std::size_t field_start = 0;
    while (true) {
      const std::size_t bar = body.find('|', field_start);
      const std::string_view field = trim(body.substr(field_start, bar == std::string_view::npos ? bar : bar - field_start));
      if (field.empty()) {
        return Malformed{"empty field in block " + std::to_string(triples.size() + 1)};
      }
      raw.fields.emplace_back(field);
      if (bar == std::string_view::npos) break;
      field_start = bar + 1;
    }
    if (raw.fields.size() != arity) {
      return Malformed{"block " + std::to_string(triples.size() + 1) + " has " + std::to_string(raw.fields.size()) +
                       " fields, expected " + std::to_string(arity)};
    }
    triples.push_back(std::move(raw));
    pos = close + 1;
    if (pos < text.size() && !is_space(text[pos])) {
      return Malformed{"expected whitespace after block at offset " + std::to_string(pos)};
    }
  }
  if (triples.empty()) return Malformed{"empty target"};
  return Parsed{std::move(triples)};
}

PairResolution resolve_pair(const RawTriple& raw, const Entity& subj, const Entity& obj, const RelationSchema& schema,
                            TargetOrder order) {
  const std::size_t arity = field_count(order);
  if (raw.fields.size() != arity) {
    return PairResolution{RelationTriple(subj, schema.null_type(), obj), true, false};
  }
  const std::string& relation = raw.fields[relation_field(order)];
  const bool known = schema.contains(relation);
  PairResolution out{RelationTriple(subj, known ? relation : schema.null_type(), obj), !known, false};
  if (order != TargetOrder::RelOnly) {
    out.entity_mismatch =
        raw.fields[subject_field(order)] != subj.surface() || raw.fields[object_field(order)] != obj.surface();
  }
  return out;
}

namespace {

const Entity* find_by_surface(const Sentence& sentence, std::string_view surface) {
  const Entity* best = nullptr;
  for (const auto& e : sentence.entities()) {
    if (e.surface() != surface) continue;
    if (best == nullptr || e.start() < best->start()) best = &e;
  }
  return best;
}

}  // namespace

OnePassResolution resolve_one_pass(const std::vector<RawTriple>& raws, const Sentence& sentence,
                                   const RelationSchema& schema, TargetOrder order) {
  OnePassResolution out;
  for (const auto& raw : raws) {
    bool all_none = !raw.fields.empty();
    for (const auto& f : raw.fields) all_none = all_none && f == kNone;
    if (all_none) continue;

    if (order == TargetOrder::RelOnly || raw.fields.size() != field_count(order)) {
      ++out.dropped;
      continue;
    }
    const std::string& relation = raw.fields[relation_field(order)];
    const Entity* subj = find_by_surface(sentence, raw.fields[subject_field(order)]);
    const Entity* obj = find_by_surface(sentence, raw.fields[object_field(order)]);
    if (!schema.is_relation(relation) || subj == nullptr || obj == nullptr || subj == obj) {
      ++out.dropped;
      continue;
    }
    out.triples.emplace_back(*subj, relation, *obj);
  }
  return out;
}

}  // namespace grec
