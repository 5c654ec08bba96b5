#include "grec/genbackend.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "grec/schema.hpp"

namespace grec {

void validate_candidate(const Candidate& candidate) {
  if (!std::isfinite(candidate.score) || candidate.score <= 0.0 || candidate.score > 1.0) {
    throw DataError("candidate '" + candidate.text + "' has score " + std::to_string(candidate.score) +
                    " outside (0, 1]");
  }
}

std::vector<Candidate> normalize_candidates(std::vector<Candidate> candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.text < b.text;
  });
  std::set<std::string> seen;
  std::vector<Candidate> out;
  for (auto& c : candidates) {
    if (seen.insert(c.text).second) out.push_back(std::move(c));
  }
  return out;
}

bool MockBackend::register_candidates(const std::string& source, std::vector<Candidate> candidates) {
  for (const auto& c : candidates) validate_candidate(c);
  auto [it, inserted] = table_.insert_or_assign(source, normalize_candidates(std::move(candidates)));
  if (!inserted) std::cerr << "warning: mock backend replaced candidates for source '" << it->first << "'\n";
  return !inserted;
}

std::vector<Candidate> MockBackend::generate_top_n(const GenerationRequest& request) const {
  if (request.top_n == 0) throw UsageError("top_n must be at least 1");
  auto it = table_.find(request.source);
  if (it == table_.end()) return {};
  const auto& all = it->second;
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(request.top_n, all.size()))};
}

MockBackend MockBackend::load_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mock fixture file " + path);
  MockBackend backend;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      std::vector<Candidate> candidates;
      for (const auto& c : j.at("candidates")) {
        candidates.push_back({c.at("text").get<std::string>(), c.at("score").get<double>()});
      }
      backend.register_candidates(j.at("source").get<std::string>(), std::move(candidates));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return backend;
}

}  // namespace grec
