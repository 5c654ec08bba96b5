#include "grec/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "grec/ingest.hpp"

namespace grec {

std::string to_string(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::MicroPositive: return "micro";
    case ScoringMode::MacroSemEval: return "macro";
    case ScoringMode::Rel: return "rel";
    case ScoringMode::RelPlus: return "relplus";
  }
  return "?";
}

ScoringMode parse_scoring_mode(std::string_view text) {
  if (text == "micro") return ScoringMode::MicroPositive;
  if (text == "macro") return ScoringMode::MacroSemEval;
  if (text == "rel") return ScoringMode::Rel;
  if (text == "relplus") return ScoringMode::RelPlus;
  throw UsageError("unknown scoring mode '" + std::string(text) + "' (expected micro, macro, rel or relplus)");
}

PRF PRF::from_counts(std::size_t tp, std::size_t predicted, std::size_t gold) {
  PRF p;
  p.true_positives = tp;
  p.predicted_positives = predicted;
  p.gold_positives = gold;
  p.precision = predicted > 0 ? Rational(tp, predicted) : Rational(0);
  p.recall = gold > 0 ? Rational(tp, gold) : Rational(0);
  // 2PR / (P + R) simplifies to 2tp / (pred + gold).
  p.f1 = predicted + gold > 0 ? Rational(2 * tp, predicted + gold) : Rational(0);
  return p;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

DirectedLabel parse_directed_label(std::string_view label) {
  const auto open = label.find('(');
  if (open == std::string_view::npos) {
    if (label.find(')') != std::string_view::npos || label.empty()) {
      throw DataError("cannot parse relation label '" + std::string(label) + "'");
    }
    return {std::string(label), DirectedLabel::Direction::Undirected};
  }
  const std::string_view suffix = label.substr(open);
  DirectedLabel out{std::string(label.substr(0, open)), DirectedLabel::Direction::Undirected};
  if (suffix == "(e1,e2)") {
    out.direction = DirectedLabel::Direction::E1E2;
  } else if (suffix == "(e2,e1)") {
    out.direction = DirectedLabel::Direction::E2E1;
  } else {
    throw DataError("cannot parse direction of relation label '" + std::string(label) + "'");
  }
  if (out.base.empty()) throw DataError("relation label '" + std::string(label) + "' has an empty base type");
  return out;
}

namespace {

using SpanKey = std::tuple<std::size_t, std::size_t>;
using EntityKey = std::tuple<std::size_t, std::size_t, std::string>;

EntityKey entity_key(const Entity& e) { return {e.start(), e.end(), e.type()}; }

// The comparable projection of a triple under a scoring mode.
using MatchKey = std::tuple<std::string, EntityKey, EntityKey>;

MatchKey match_key(const RelationTriple& t, ScoringMode mode) {
  switch (mode) {
    case ScoringMode::Rel:
      return {t.relation(), EntityKey{t.subject().start(), t.subject().end(), ""},
              EntityKey{t.object().start(), t.object().end(), ""}};
    case ScoringMode::RelPlus:
    case ScoringMode::MicroPositive:
      return {t.relation(), entity_key(t.subject()), entity_key(t.object())};
    case ScoringMode::MacroSemEval: {
      const DirectedLabel label = parse_directed_label(t.relation());
      if (label.direction == DirectedLabel::Direction::E2E1) {
        return {label.base, entity_key(t.object()), entity_key(t.subject())};
      }
      return {label.base, entity_key(t.subject()), entity_key(t.object())};
    }
  }
  return {};
}

std::vector<RelationTriple> positive_unique(const std::vector<RelationTriple>& triples, const RelationSchema& schema) {
  std::vector<RelationTriple> out;
  for (const auto& t : triples) {
    if (schema.is_null(t.relation())) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

// One-to-one matching count. The match relation is an equivalence on keys, so pairing
// per key class is a maximum matching.
std::size_t count_matches(const std::vector<RelationTriple>& preds, const std::vector<RelationTriple>& golds,
                          ScoringMode mode) {
  std::map<MatchKey, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& t : preds) ++counts[match_key(t, mode)].first;
  for (const auto& t : golds) ++counts[match_key(t, mode)].second;
  std::size_t tp = 0;
  for (const auto& [key, c] : counts) tp += std::min(c.first, c.second);
  return tp;
}

void check_labels(const std::vector<RelationTriple>& triples, const RelationSchema& schema) {
  for (const auto& t : triples) {
    if (!schema.contains(t.relation())) throw DataError("relation '" + t.relation() + "' is not in the schema");
  }
}

// Pairs predicted and gold sentences by id; gold sentences missing from the predictions
// are scored against no predictions.
std::vector<std::pair<const SentenceTriples*, const SentenceTriples*>> align(
    const std::vector<SentenceTriples>& preds, const std::vector<SentenceTriples>& golds) {
  std::unordered_map<std::string, std::size_t> gold_index;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (!gold_index.emplace(golds[i].sentence_id, i).second) {
      throw DataError("duplicate gold sentence id '" + golds[i].sentence_id + "'");
    }
  }
  std::vector<const SentenceTriples*> pred_for(golds.size(), nullptr);
  for (const auto& p : preds) {
    auto it = gold_index.find(p.sentence_id);
    if (it == gold_index.end()) throw DataError("prediction sentence id '" + p.sentence_id + "' not found in gold");
    if (pred_for[it->second] != nullptr) throw DataError("duplicate prediction sentence id '" + p.sentence_id + "'");
    pred_for[it->second] = &p;
  }
  std::vector<std::pair<const SentenceTriples*, const SentenceTriples*>> out;
  for (std::size_t i = 0; i < golds.size(); ++i) out.emplace_back(pred_for[i], &golds[i]);
  return out;
}

const std::vector<RelationTriple>& triples_or_empty(const SentenceTriples* s) {
  static const std::vector<RelationTriple> empty;
  return s != nullptr ? s->triples : empty;
}

}  // namespace

bool match_triples(const RelationTriple& pred, const RelationTriple& gold, ScoringMode mode) {
  return match_key(pred, mode) == match_key(gold, mode);
}

PRF micro_prf(const std::vector<RelationTriple>& preds, const std::vector<RelationTriple>& golds, ScoringMode mode,
              const RelationSchema& schema) {
  const auto p = positive_unique(preds, schema);
  const auto g = positive_unique(golds, schema);
  return PRF::from_counts(count_matches(p, g, mode), p.size(), g.size());
}

PRF micro_prf_corpus(const std::vector<SentenceTriples>& preds, const std::vector<SentenceTriples>& golds,
                     ScoringMode mode, const RelationSchema& schema) {
  std::size_t tp = 0, predicted = 0, gold = 0;
  for (const auto& [ps, gs] : align(preds, golds)) {
    check_labels(triples_or_empty(ps), schema);
    check_labels(gs->triples, schema);
    const PRF s = micro_prf(triples_or_empty(ps), gs->triples, mode, schema);
    tp += s.true_positives;
    predicted += s.predicted_positives;
    gold += s.gold_positives;
  }
  return PRF::from_counts(tp, predicted, gold);
}

MacroReport macro_semeval(const std::vector<SentenceTriples>& preds, const std::vector<SentenceTriples>& golds,
                          const RelationSchema& schema) {
  std::vector<std::string> bases;
  for (const auto& label : schema.relation_types()) {
    std::string base = parse_directed_label(label).base;
    if (std::find(bases.begin(), bases.end(), base) == bases.end()) bases.push_back(std::move(base));
  }
  struct Counts {
    std::size_t tp = 0, predicted = 0, gold = 0;
  };
  std::map<std::string, Counts> counts;

  for (const auto& [ps, gs] : align(preds, golds)) {
    check_labels(triples_or_empty(ps), schema);
    check_labels(gs->triples, schema);
    const auto p = positive_unique(triples_or_empty(ps), schema);
    const auto g = positive_unique(gs->triples, schema);
    for (const auto& t : p) ++counts[parse_directed_label(t.relation()).base].predicted;
    for (const auto& t : g) ++counts[parse_directed_label(t.relation()).base].gold;
    std::map<MatchKey, std::pair<std::size_t, std::size_t>> keyed;
    for (const auto& t : p) ++keyed[match_key(t, ScoringMode::MacroSemEval)].first;
    for (const auto& t : g) ++keyed[match_key(t, ScoringMode::MacroSemEval)].second;
    for (const auto& [key, c] : keyed) counts[std::get<0>(key)].tp += std::min(c.first, c.second);
  }

  MacroReport report;
  Rational sum(0);
  for (const auto& base : bases) {
    const Counts& c = counts[base];
    if (c.predicted == 0 && c.gold == 0) continue;
    PRF prf = PRF::from_counts(c.tp, c.predicted, c.gold);
    sum += prf.f1;
    report.per_type.emplace_back(base, std::move(prf));
  }
  report.macro_f1 = report.per_type.empty() ? Rational(0) : sum / Rational(report.per_type.size());
  return report;
}

std::vector<SentenceTriples> to_sentence_triples(const std::vector<PredictionRecord>& records) {
  std::vector<SentenceTriples> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    SentenceTriples s{r.sentence_id, {}};
    for (const auto& pt : r.triples) s.triples.push_back(pt.triple);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

Json prf_json(const PRF& p) {
  Json j;
  j["precision"] = to_double(p.precision);
  j["recall"] = to_double(p.recall);
  j["f1"] = to_double(p.f1);
  j["true_positives"] = p.true_positives;
  j["predicted_positives"] = p.predicted_positives;
  j["gold_positives"] = p.gold_positives;
  return j;
}

bool looks_canonical(const std::string& path) {
  bool canonical = false;
  bool decided = false;
  try {
    read_jsonl(path, [&](const Json& j, std::size_t) {
      if (!decided) {
        canonical = j.contains("tokens");
        decided = true;
      }
    });
  } catch (const DataError&) {
    return false;
  }
  return canonical;
}

}  // namespace

Json ScoreReport::to_json() const {
  Json j;
  j["mode"] = to_string(mode);
  j["sentences"] = sentences;
  if (mode == ScoringMode::MacroSemEval) {
    j["macro_f1"] = to_double(macro.macro_f1);
    Json per = Json::object();
    for (const auto& [base, prf] : macro.per_type) per[base] = prf_json(prf);
    j["per_type"] = std::move(per);
  } else {
    j.update(prf_json(micro));
  }
  return j;
}

ScoreReport score_run(const std::string& pred_path, const std::string& gold_path, ScoringMode mode,
                      const RelationSchema& schema) {
  std::vector<SentenceTriples> golds;
  if (looks_canonical(gold_path)) {
    AdapterOptions strict;
    strict.strict = true;
    for (const auto& ex : load_canonical(gold_path, schema, strict).examples) {
      golds.push_back({ex.sentence().id(), ex.gold_triples()});
    }
  } else {
    golds = to_sentence_triples(read_prediction_records(gold_path));
  }
  const auto preds = to_sentence_triples(read_prediction_records(pred_path));

  ScoreReport report;
  report.mode = mode;
  report.sentences = golds.size();
  if (mode == ScoringMode::MacroSemEval) {
    report.macro = macro_semeval(preds, golds, schema);
    std::size_t tp = 0, predicted = 0, gold = 0;
    for (const auto& [base, prf] : report.macro.per_type) {
      tp += prf.true_positives;
      predicted += prf.predicted_positives;
      gold += prf.gold_positives;
    }
    report.micro = PRF::from_counts(tp, predicted, gold);
  } else {
    report.micro = micro_prf_corpus(preds, golds, mode, schema);
  }
  return report;
}

}  // namespace grec
