#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "grec/encoder.hpp"
#include "grec/schema.hpp"

namespace grec {

/// One bracketed block split into trimmed fields. Interpretation depends on the TargetOrder.
struct RawTriple {
  std::vector<std::string> fields;

  bool operator==(const RawTriple&) const = default;
};

struct Parsed {
  std::vector<RawTriple> triples;  // never empty
};

struct Malformed {
  std::string reason;
};

class ParseOutcome {
 public:
  ParseOutcome(Parsed parsed) : value_(std::move(parsed)) {}
  ParseOutcome(Malformed malformed) : value_(std::move(malformed)) {}

  bool ok() const { return std::holds_alternative<Parsed>(value_); }
  const std::vector<RawTriple>& triples() const { return std::get<Parsed>(value_).triples; }
  const std::string& reason() const { return std::get<Malformed>(value_).reason; }

 private:
  std::variant<Parsed, Malformed> value_;
};

std::size_t field_count(TargetOrder order);
std::size_t relation_field(TargetOrder order);
std::size_t subject_field(TargetOrder order);  // not meaningful for RelOnly
std::size_t object_field(TargetOrder order);

/// Parses whitespace-separated "[a | b | c]" blocks. Never throws.
ParseOutcome parse_target(std::string_view text, TargetOrder order);

struct PairResolution {
  RelationTriple triple;
  bool unknown_relation = false;
  bool entity_mismatch = false;
};

/// Entity-pair resolution: the given pair is authoritative, the relation field decides.
PairResolution resolve_pair(const RawTriple& raw, const Entity& subj, const Entity& obj, const RelationSchema& schema,
                            TargetOrder order);

struct OnePassResolution {
  std::vector<RelationTriple> triples;
  std::size_t dropped = 0;
};

/// Matches subject/object fields to sentence entities by exact surface (earliest start wins).
/// Blocks that cannot be resolved to a positive schema relation are dropped and counted.
OnePassResolution resolve_one_pass(const std::vector<RawTriple>& raws, const Sentence& sentence,
                                   const RelationSchema& schema, TargetOrder order = TargetOrder::SRO);

}  // namespace grec
