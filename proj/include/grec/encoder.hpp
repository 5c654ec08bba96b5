#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grec/schema.hpp"

namespace grec {

/// How entity boundaries are marked in the source sentence.
enum class MarkerScheme {
  None,         // tokens unchanged
  SpecialToken, // "$" around the subject, "&" around the object
  EntityType,   // each entity flanked by its own type label
};

/// Field layout of a generated target block.
enum class TargetOrder {
  RelOnly,  // [r]
  SRO,      // [s | r | o]
  RSO,      // [r | s | o]
  SOR,      // [s | o | r]
};

enum class EncodingMode { EntityPair, OnePass };

std::string to_string(MarkerScheme scheme);
std::string to_string(TargetOrder order);
std::string to_string(EncodingMode mode);
MarkerScheme parse_marker_scheme(std::string_view text);  // none | special | typed
TargetOrder parse_target_order(std::string_view text);    // r | sro | rso | sor
EncodingMode parse_encoding_mode(std::string_view text);  // entity-pair | one-pass

inline constexpr std::string_view kSubjectMarker = "$";
inline constexpr std::string_view kObjectMarker = "&";
inline constexpr std::string_view kEmptyOnePassTarget = "[None | None | None]";

struct EncodedPair {
  std::string source;
  std::string target;
  std::string sentence_id;
  std::optional<std::size_t> subj_idx;  // unset in one-pass mode
  std::optional<std::size_t> obj_idx;
  bool is_positive = false;

  bool operator==(const EncodedPair&) const = default;
};

/// Token sequence with entity markers inserted around subject and object.
/// Throws DataError when the two spans overlap.
std::vector<std::string> mark_entities(const Sentence& sentence, const Entity& subj, const Entity& obj,
                                       MarkerScheme scheme);

/// Every entity of the sentence flanked by its type label. Nested spans close
/// innermost-first; spans sharing a boundary open outermost-first.
std::vector<std::string> mark_all_entities(const Sentence& sentence);

/// "[<subj> # <subj type> , <obj> # <obj type>]"
std::string direction_block(const Entity& subj, const Entity& obj);
/// "[r_1 - r_2 - ... - r_K]", null type excluded.
std::string relation_list_block(const RelationSchema& schema);
/// "[e_1 # T_1 , e_2 # T_2 , ...]" in sentence order.
std::string entity_list_block(const Sentence& sentence);

std::string build_pair_source(const Sentence& sentence, const Entity& subj, const Entity& obj, MarkerScheme scheme,
                              const RelationSchema& schema);
std::string build_pair_target(const Entity& subj, const Entity& obj, std::string_view relation, TargetOrder order);

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(const Sentence& sentence);

std::string build_one_pass_source(const Sentence& sentence, const RelationSchema& schema, bool with_entities);
std::string build_one_pass_target(const std::vector<RelationTriple>& gold_triples,
                                  TargetOrder order = TargetOrder::SRO);

struct EncodeOptions {
  EncodingMode mode = EncodingMode::EntityPair;
  MarkerScheme scheme = MarkerScheme::EntityType;
  TargetOrder order = TargetOrder::SRO;
  bool with_entities = true;  // one-pass only
};

struct EncodeResult {
  std::vector<EncodedPair> pairs;
  std::vector<RecordError> errors;  // skipped sentences, and skipped overlapping pairs in entity-pair mode
};

EncodeResult encode_dataset(const std::vector<LabeledExample>& examples, const EncodeOptions& options,
                            const RelationSchema& schema);

/// Throws DataError if the surface contains a character reserved by the target grammar.
void check_encodable_surface(const Entity& entity);

}  // namespace grec
