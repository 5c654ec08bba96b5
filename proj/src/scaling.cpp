#include "grec/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "grec/parser.hpp"

namespace grec {

void validate_scaling_config(const ScalingConfig& config) {
  if (!(config.beta >= 1.0) || !std::isfinite(config.beta)) {
    throw UsageError("beta must be a finite value >= 1, got " + std::to_string(config.beta));
  }
  if (config.top_n < 1) throw UsageError("top_n must be at least 1");
}

ClassifiedCandidates classify_candidates(const std::vector<Candidate>& candidates, const Entity& subj,
                                         const Entity& obj, const RelationSchema& schema, TargetOrder order) {
  ClassifiedCandidates out;
  for (const auto& candidate : normalize_candidates(candidates)) {
    const ParseOutcome parsed = parse_target(candidate.text, order);
    if (!parsed.ok() || parsed.triples().size() != 1) {
      ScoredTriple st{RelationTriple(subj, schema.null_type(), obj), candidate.score, candidate.text};
      st.malformed = true;
      out.negatives.push_back(std::move(st));
      continue;
    }
    PairResolution resolved = resolve_pair(parsed.triples().front(), subj, obj, schema, order);
    ScoredTriple st{std::move(resolved.triple), candidate.score, candidate.text};
    st.unknown_relation = resolved.unknown_relation;
    st.entity_mismatch = resolved.entity_mismatch;
    (schema.is_null(st.triple.relation()) ? out.negatives : out.positives).push_back(std::move(st));
  }
  return out;
}

namespace {

SelectedPrediction from_scored(const ScoredTriple& st) {
  SelectedPrediction p{st.triple, st.score, std::nullopt, std::nullopt};
  p.malformed = st.malformed;
  return p;
}

}  // namespace

SelectedPrediction select_prediction(const std::vector<Candidate>& candidates, const ScalingConfig& config,
                                     const Entity& subj, const Entity& obj, const RelationSchema& schema,
                                     TargetOrder order) {
  validate_scaling_config(config);
  if (candidates.empty()) {
    SelectedPrediction p{RelationTriple(subj, schema.null_type(), obj), 0.0, std::nullopt, std::nullopt};
    p.empty_candidates = true;
    return p;
  }
  std::vector<Candidate> top = normalize_candidates(candidates);
  if (top.size() > config.top_n) top.resize(config.top_n);
  const ClassifiedCandidates split = classify_candidates(top, subj, obj, schema, order);
  if (split.negatives.empty()) return from_scored(split.positives.front());
  if (split.positives.empty()) return from_scored(split.negatives.front());

  const ScoredTriple& best_pos = split.positives.front();
  const ScoredTriple& best_neg = split.negatives.front();
  SelectedPrediction p = from_scored(best_pos.score / best_neg.score >= config.beta ? best_pos : best_neg);
  p.positive_score = best_pos.score;
  p.negative_score = best_neg.score;
  return p;
}

}  // namespace grec
