#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "grec/encoder.hpp"
#include "grec/genbackend.hpp"
#include "grec/schema.hpp"

namespace grec {

struct ScalingConfig {
  double beta = 1.0;       // >= 1; 1 disables scaling
  std::size_t top_n = 5;   // >= 1
};

void validate_scaling_config(const ScalingConfig& config);

/// A candidate resolved against the known entity pair.
struct ScoredTriple {
  RelationTriple triple;
  double score = 0.0;
  std::string text;
  bool malformed = false;
  bool unknown_relation = false;
  bool entity_mismatch = false;
};

struct ClassifiedCandidates {
  std::vector<ScoredTriple> positives;
  std::vector<ScoredTriple> negatives;
};

/// Splits candidates into positive (non-null relation) and negative triples.
/// Malformed generations count as negatives; both lists are in descending score order.
ClassifiedCandidates classify_candidates(const std::vector<Candidate>& candidates, const Entity& subj,
                                         const Entity& obj, const RelationSchema& schema, TargetOrder order);

struct SelectedPrediction {
  RelationTriple triple;
  double score = 0.0;
  std::optional<double> positive_score;  // best positive, when the ratio test ran
  std::optional<double> negative_score;  // best negative, when the ratio test ran
  bool empty_candidates = false;
  bool malformed = false;

  bool is_positive(const RelationSchema& schema) const { return !schema.is_null(triple.relation()); }
};

/// Picks the prediction for one entity pair. With mixed positive and negative candidates the
/// best positive wins iff P(best positive) / P(best negative) >= beta.
SelectedPrediction select_prediction(const std::vector<Candidate>& candidates, const ScalingConfig& config,
                                     const Entity& subj, const Entity& obj, const RelationSchema& schema,
                                     TargetOrder order);

}  // namespace grec
