#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace grec {

/// A generated target with its raw sequence probability P(y | z).
struct Candidate {
  std::string text;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

struct GenerationRequest {
  std::string source;
  std::size_t top_n = 1;
};

/// Throws DataError unless score is a finite value in (0, 1].
void validate_candidate(const Candidate& candidate);

/// Sorts by score descending, ties by text ascending, and keeps the first occurrence of each text.
std::vector<Candidate> normalize_candidates(std::vector<Candidate> candidates);

/// Seq2seq backends implement this. generate_top_n must be safe for concurrent callers.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  // At most request.top_n distinct candidates, scores non-increasing.
  virtual std::vector<Candidate> generate_top_n(const GenerationRequest& request) const = 0;
};

/// Returns registered candidate lists verbatim (after normalization).
class MockBackend : public GenerationBackend {
 public:
  // Returns true if an earlier registration for the source was replaced.
  bool register_candidates(const std::string& source, std::vector<Candidate> candidates);

  std::vector<Candidate> generate_top_n(const GenerationRequest& request) const override;

  std::size_t size() const { return table_.size(); }

  // JSONL fixture lines: {"source": ..., "candidates": [{"text": ..., "score": ...}]}
  static MockBackend load_fixtures(const std::string& path);

 private:
  std::map<std::string, std::vector<Candidate>> table_;
};

}  // namespace grec
