#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "grec/formats.hpp"
#include "grec/schema.hpp"

namespace grec {

using Rational = boost::multiprecision::cpp_rational;

enum class ScoringMode {
  MicroPositive,  // same mentions (span + type), same relation, direction-sensitive
  MacroSemEval,   // per base type, direction-sensitive, unweighted mean
  Rel,            // spans + relation
  RelPlus,        // spans + entity types + relation
};

std::string to_string(ScoringMode mode);
ScoringMode parse_scoring_mode(std::string_view text);  // micro | macro | rel | relplus

/// Exact precision/recall/F1 from counts.
struct PRF {
  std::size_t true_positives = 0;
  std::size_t predicted_positives = 0;
  std::size_t gold_positives = 0;
  Rational precision;
  Rational recall;
  Rational f1;

  static PRF from_counts(std::size_t tp, std::size_t predicted, std::size_t gold);
  bool operator==(const PRF&) const = default;
};

double to_double(const Rational& r);

/// Directed SemEval-style label "Base(e1,e2)", "Base(e2,e1)" or an undirected "Base".
struct DirectedLabel {
  enum class Direction { Undirected, E1E2, E2E1 };
  std::string base;
  Direction direction = Direction::Undirected;
};

/// Throws DataError for labels with a malformed direction suffix.
DirectedLabel parse_directed_label(std::string_view label);

bool match_triples(const RelationTriple& pred, const RelationTriple& gold, ScoringMode mode);

/// Per-sentence micro scoring: null predictions are ignored, duplicates collapse,
/// each gold triple matches at most once.
PRF micro_prf(const std::vector<RelationTriple>& preds, const std::vector<RelationTriple>& golds, ScoringMode mode,
              const RelationSchema& schema);

struct SentenceTriples {
  std::string sentence_id;
  std::vector<RelationTriple> triples;
};

/// Sums micro counts over sentences. Every predicted sentence id must occur in the gold list.
PRF micro_prf_corpus(const std::vector<SentenceTriples>& preds, const std::vector<SentenceTriples>& golds,
                     ScoringMode mode, const RelationSchema& schema);

struct MacroReport {
  std::vector<std::pair<std::string, PRF>> per_type;  // only types that were predicted or gold
  Rational macro_f1;
};

/// Directional macro F1 over base relation types. Types never predicted and never gold are
/// left out of the mean; a type predicted but never gold contributes F1 = 0.
MacroReport macro_semeval(const std::vector<SentenceTriples>& preds, const std::vector<SentenceTriples>& golds,
                          const RelationSchema& schema);

struct ScoreReport {
  ScoringMode mode = ScoringMode::MicroPositive;
  PRF micro;               // micro modes; for macro the pooled counts
  MacroReport macro;       // macro mode only
  std::size_t sentences = 0;

  Json to_json() const;
};

/// Scores a prediction JSONL file against a gold file. The gold file may be either the
/// prediction format or canonical JSONL.
ScoreReport score_run(const std::string& pred_path, const std::string& gold_path, ScoringMode mode,
                      const RelationSchema& schema);

std::vector<SentenceTriples> to_sentence_triples(const std::vector<PredictionRecord>& records);

}  // namespace grec
