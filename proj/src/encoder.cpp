#include "grec/encoder.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace grec {

std::string to_string(MarkerScheme scheme) {
  switch (scheme) {
    case MarkerScheme::None: return "none";
    case MarkerScheme::SpecialToken: return "special";
    case MarkerScheme::EntityType: return "typed";
  }
  return "?";
}

std::string to_string(TargetOrder order) {
  switch (order) {
    case TargetOrder::RelOnly: return "r";
    case TargetOrder::SRO: return "sro";
    case TargetOrder::RSO: return "rso";
    case TargetOrder::SOR: return "sor";
  }
  return "?";
}

std::string to_string(EncodingMode mode) {
  return mode == EncodingMode::EntityPair ? "entity-pair" : "one-pass";
}

MarkerScheme parse_marker_scheme(std::string_view text) {
  if (text == "none") return MarkerScheme::None;
  if (text == "special") return MarkerScheme::SpecialToken;
  if (text == "typed") return MarkerScheme::EntityType;
  throw UsageError("unknown marker scheme '" + std::string(text) + "' (expected none, special or typed)");
}

TargetOrder parse_target_order(std::string_view text) {
  if (text == "r") return TargetOrder::RelOnly;
  if (text == "sro") return TargetOrder::SRO;
  if (text == "rso") return TargetOrder::RSO;
  if (text == "sor") return TargetOrder::SOR;
  throw UsageError("unknown target order '" + std::string(text) + "' (expected r, sro, rso or sor)");
}

EncodingMode parse_encoding_mode(std::string_view text) {
  if (text == "entity-pair") return EncodingMode::EntityPair;
  if (text == "one-pass") return EncodingMode::OnePass;
  throw UsageError("unknown mode '" + std::string(text) + "' (expected entity-pair or one-pass)");
}

void check_encodable_surface(const Entity& entity) {
  if (entity.surface().find_first_of("[]|#") != std::string::npos) {
    throw DataError("entity surface '" + entity.surface() + "' contains a reserved character ('[', ']', '|' or '#')");
  }
}

std::vector<std::string> mark_entities(const Sentence& sentence, const Entity& subj, const Entity& obj,
                                       MarkerScheme scheme) {
  if (subj.overlaps(obj)) {
    throw DataError("sentence " + sentence.id() + ": subject '" + subj.surface() + "' and object '" + obj.surface() +
                    "' overlap");
  }
  const auto& tokens = sentence.tokens();
  if (scheme == MarkerScheme::None) return tokens;

  const std::string subj_marker = scheme == MarkerScheme::SpecialToken ? std::string(kSubjectMarker) : subj.type();
  const std::string obj_marker = scheme == MarkerScheme::SpecialToken ? std::string(kObjectMarker) : obj.type();

  std::vector<std::string> out;
  out.reserve(tokens.size() + 4);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == subj.start()) out.push_back(subj_marker);
    if (i == obj.start()) out.push_back(obj_marker);
    out.push_back(tokens[i]);
    if (i + 1 == subj.end()) out.push_back(subj_marker);
    if (i + 1 == obj.end()) out.push_back(obj_marker);
  }
  return out;
}

std::vector<std::string> mark_all_entities(const Sentence& sentence) {
  const auto& tokens = sentence.tokens();
  const auto& entities = sentence.entities();
  std::vector<std::string> out;
  out.reserve(tokens.size() + 2 * entities.size());

  for (std::size_t boundary = 0; boundary <= tokens.size(); ++boundary) {
    // Close spans ending here, latest-opened (innermost) first.
    std::vector<std::size_t> closing;
    for (std::size_t i = 0; i < entities.size(); ++i) {
      if (entities[i].end() == boundary) closing.push_back(i);
    }
    std::sort(closing.begin(), closing.end(), [&](std::size_t a, std::size_t b) {
      return std::tuple(entities[b].start(), b) < std::tuple(entities[a].start(), a);
    });
    for (std::size_t i : closing) out.push_back(entities[i].type());

    // Open spans starting here, longest (outermost) first.
    std::vector<std::size_t> opening;
    for (std::size_t i = 0; i < entities.size(); ++i) {
      if (entities[i].start() == boundary) opening.push_back(i);
    }
    std::sort(opening.begin(), opening.end(), [&](std::size_t a, std::size_t b) {
      return std::tuple(entities[b].end(), a) < std::tuple(entities[a].end(), b);
    });
    for (std::size_t i : opening) out.push_back(entities[i].type());

    if (boundary < tokens.size()) out.push_back(tokens[boundary]);
  }
  return out;
}

std::string direction_block(const Entity& subj, const Entity& obj) {
  return "[" + subj.surface() + " # " + subj.type() + " , " + obj.surface() + " # " + obj.type() + "]";
}

std::string relation_list_block(const RelationSchema& schema) {
  return "[" + join(schema.relation_types(), " - ") + "]";
}

namespace {

std::vector<std::size_t> sentence_order(const Sentence& sentence) {
  const auto& entities = sentence.entities();
  std::vector<std::size_t> order(entities.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(entities[a].start(), entities[a].end()) < std::tuple(entities[b].start(), entities[b].end());
  });
  return order;
}

}  // namespace

std::string entity_list_block(const Sentence& sentence) {
  std::vector<std::string> items;
  for (std::size_t i : sentence_order(sentence)) {
    const Entity& e = sentence.entities()[i];
    items.push_back(e.surface() + " # " + e.type());
  }
  return "[" + join(items, " , ") + "]";
}

std::string build_pair_source(const Sentence& sentence, const Entity& subj, const Entity& obj, MarkerScheme scheme,
                              const RelationSchema& schema) {
  return join(mark_entities(sentence, subj, obj, scheme), " ") + " " + direction_block(subj, obj) + " " +
         relation_list_block(schema);
}

std::string build_pair_target(const Entity& subj, const Entity& obj, std::string_view relation, TargetOrder order) {
  const std::string r(relation);
  switch (order) {
    case TargetOrder::RelOnly: return "[" + r + "]";
    case TargetOrder::SRO: return "[" + subj.surface() + " | " + r + " | " + obj.surface() + "]";
    case TargetOrder::RSO: return "[" + r + " | " + subj.surface() + " | " + obj.surface() + "]";
    case TargetOrder::SOR: return "[" + subj.surface() + " | " + obj.surface() + " | " + r + "]";
  }
  return {};
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(const Sentence& sentence) {
  const std::size_t m = sentence.entities().size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m > 0 ? m * (m - 1) : 0);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t o = 0; o < m; ++o) {
      if (s != o) pairs.emplace_back(s, o);
    }
  }
  return pairs;
}

std::string build_one_pass_source(const Sentence& sentence, const RelationSchema& schema, bool with_entities) {
  if (!with_entities) return sentence.text() + " " + relation_list_block(schema);
  return join(mark_all_entities(sentence), " ") + " " + entity_list_block(sentence) + " " +
         relation_list_block(schema);
}

std::string build_one_pass_target(const std::vector<RelationTriple>& gold_triples, TargetOrder order) {
  if (gold_triples.empty()) {
    return order == TargetOrder::RelOnly ? "[None]" : std::string(kEmptyOnePassTarget);
  }
  std::vector<const RelationTriple*> sorted;
  for (const auto& t : gold_triples) sorted.push_back(&t);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RelationTriple* a, const RelationTriple* b) {
    return std::tuple(a->subject().start(), a->object().start(), a->relation(), a->subject().end(),
                      a->object().end()) <
           std::tuple(b->subject().start(), b->object().start(), b->relation(), b->subject().end(),
                      b->object().end());
  });
  std::vector<std::string> blocks;
  for (const auto* t : sorted) blocks.push_back(build_pair_target(t->subject(), t->object(), t->relation(), order));
  return join(blocks, " ");
}

namespace {

void encode_entity_pairs(const LabeledExample& example, const EncodeOptions& options, const RelationSchema& schema,
                         std::vector<EncodedPair>& out, std::vector<RecordError>& errors) {
  const Sentence& sentence = example.sentence();
  const auto& entities = sentence.entities();
  std::vector<EncodedPair> local;
  for (auto [s, o] : enumerate_pairs(sentence)) {
    const Entity& subj = entities[s];
    const Entity& obj = entities[o];
    if (subj.overlaps(obj)) {
      errors.push_back({sentence.id(), "pair (" + std::to_string(s) + ", " + std::to_string(o) + ") skipped: '" +
                                           subj.surface() + "' and '" + obj.surface() + "' overlap"});
      continue;
    }
    const std::string* relation = &schema.null_type();
    for (const auto& triple : example.gold_triples()) {
      if (triple.subject() == subj && triple.object() == obj) {
        relation = &triple.relation();
        break;
      }
    }
    EncodedPair pair;
    pair.source = build_pair_source(sentence, subj, obj, options.scheme, schema);
    pair.target = build_pair_target(subj, obj, *relation, options.order);
    pair.sentence_id = sentence.id();
    pair.subj_idx = s;
    pair.obj_idx = o;
    pair.is_positive = !schema.is_null(*relation);
    local.push_back(std::move(pair));
  }
  out.insert(out.end(), std::make_move_iterator(local.begin()), std::make_move_iterator(local.end()));
}

void encode_one_pass(const LabeledExample& example, const EncodeOptions& options, const RelationSchema& schema,
                     std::vector<EncodedPair>& out) {
  EncodedPair pair;
  pair.source = build_one_pass_source(example.sentence(), schema, options.with_entities);
  pair.target = build_one_pass_target(example.gold_triples(), options.order);
  pair.sentence_id = example.sentence().id();
  pair.is_positive = !example.gold_triples().empty();
  out.push_back(std::move(pair));
}

}  // namespace

EncodeResult encode_dataset(const std::vector<LabeledExample>& examples, const EncodeOptions& options,
                            const RelationSchema& schema) {
  EncodeResult result;
  for (const auto& example : examples) {
    try {
      for (const auto& entity : example.sentence().entities()) check_encodable_surface(entity);
      if (options.mode == EncodingMode::EntityPair) {
        encode_entity_pairs(example, options, schema, result.pairs, result.errors);
      } else {
        encode_one_pass(example, options, schema, result.pairs);
      }
    } catch (const DataError& e) {
      result.errors.push_back({example.sentence().id(), e.what()});
    }
  }
  return result;
}

}  // namespace grec
