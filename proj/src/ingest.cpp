#include "grec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "grec/metrics.hpp"
#include "grec/rng.hpp"
#include "grec/sampler.hpp"

namespace grec {

namespace {

void record_error(LoadResult& result, const AdapterOptions& options, std::string id, std::string message) {
  if (options.strict) throw DataError("record " + id + ": " + message);
  result.errors.push_back({std::move(id), std::move(message)});
}

std::string record_id_of(const Json& record, std::size_t index) {
  if (record.is_object() && record.contains("id")) {
    const auto& id = record.at("id");
    return id.is_string() ? id.get<std::string>() : id.dump();
  }
  return "#" + std::to_string(index);
}

}  // namespace

// ---------------------------------------------------------------------------
// TACRED

LoadResult load_tacred(const std::string& path, const RelationSchema& schema, const AdapterOptions& options) {
  const std::string null_label = options.null_label.empty() ? "no_relation" : options.null_label;
  Json records;
  try {
    records = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
  if (!records.is_array()) throw DataError(path + ": expected a JSON array of records");

  LoadResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Json& rec = records[i];
    const std::string id = record_id_of(rec, i);
    try {
      auto tokens = rec.at("token").get<std::vector<std::string>>();
      const auto subj_start = rec.at("subj_start").get<long long>();
      const auto subj_end = rec.at("subj_end").get<long long>();
      const auto obj_start = rec.at("obj_start").get<long long>();
      const auto obj_end = rec.at("obj_end").get<long long>();
      const long long n = static_cast<long long>(tokens.size());
      for (long long v : {subj_start, subj_end, obj_start, obj_end}) {
        if (v < 0 || v >= n) throw DataError("token index " + std::to_string(v) + " out of range [0, " + std::to_string(n) + ")");
      }
      if (subj_start > subj_end || obj_start > obj_end) throw DataError("entity span start after end");

      const std::string relation = rec.at("relation").get<std::string>();
      const bool is_null = relation == null_label;
      if (!is_null && !schema.is_relation(relation)) throw DataError("unknown relation label '" + relation + "'");

      Entity subj = Entity::from_span(tokens, static_cast<std::size_t>(subj_start),
                                      static_cast<std::size_t>(subj_end) + 1, rec.at("subj_type").get<std::string>());
      Entity obj = Entity::from_span(tokens, static_cast<std::size_t>(obj_start), static_cast<std::size_t>(obj_end) + 1,
                                     rec.at("obj_type").get<std::string>());
      std::vector<RelationTriple> gold;
      if (!is_null) gold.emplace_back(subj, relation, obj);
      Sentence sentence(id, std::move(tokens), {subj, obj});
      result.examples.emplace_back(std::move(sentence), std::move(gold), schema);
    } catch (const Json::exception& e) {
      record_error(result, options, id, std::string("malformed record: ") + e.what());
    } catch (const DataError& e) {
      record_error(result, options, id, e.what());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// SemEval 2010 Task 8

std::vector<std::string> simple_tokenize(const std::string& text) {
  static const std::string leading = "\"'([{";
  static const std::string trailing = ".,;:!?\"')]}";
  std::vector<std::string> out;
  for (const auto& chunk : split_whitespace(text)) {
    std::size_t b = 0;
    std::size_t e = chunk.size();
    std::vector<std::string> head;
    std::vector<std::string> tail;
    while (b < e && leading.find(chunk[b]) != std::string::npos) head.emplace_back(1, chunk[b++]);
    while (e > b && trailing.find(chunk[e - 1]) != std::string::npos) tail.emplace_back(1, chunk[--e]);
    out.insert(out.end(), head.begin(), head.end());
    if (e > b) out.push_back(chunk.substr(b, e - b));
    out.insert(out.end(), tail.rbegin(), tail.rend());
  }
  return out;
}

namespace {

struct SemEvalRecord {
  std::string id;
  std::string text;
  std::string label;
};

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

LabeledExample semeval_example(const SemEvalRecord& rec, const RelationSchema& schema, const std::string& null_label) {
  std::string text = rec.text;
  for (const char* tag : {"<e1>", "</e1>", "<e2>", "</e2>"}) {
    if (text.find(tag) == std::string::npos) {
      throw DataError(std::string("missing ") + tag + " tag");
    }
    text = replace_all(text, tag, std::string(" ") + tag + " ");
  }

  std::vector<std::string> tokens;
  std::size_t e1_start = 0, e1_end = 0, e2_start = 0, e2_end = 0;
  int seen = 0;
  for (const auto& chunk : split_whitespace(text)) {
    if (chunk == "<e1>") { e1_start = tokens.size(); seen |= 1; continue; }
    if (chunk == "</e1>") { e1_end = tokens.size(); seen |= 2; continue; }
    if (chunk == "<e2>") { e2_start = tokens.size(); seen |= 4; continue; }
    if (chunk == "</e2>") { e2_end = tokens.size(); seen |= 8; continue; }
    for (auto& t : simple_tokenize(chunk)) tokens.push_back(std::move(t));
  }
  if (seen != 15) throw DataError("incomplete entity tag pair");
  if (e1_start >= e1_end || e2_start >= e2_end) throw DataError("empty or inverted entity tag pair");

  Entity e1 = Entity::from_span(tokens, e1_start, e1_end, kSemEvalEntityType);
  Entity e2 = Entity::from_span(tokens, e2_start, e2_end, kSemEvalEntityType);
  if (e1.overlaps(e2)) throw DataError("entity tag pairs overlap");

  std::vector<RelationTriple> gold;
  if (rec.label != null_label) {
    DirectedLabel parsed;
    try {
      parsed = parse_directed_label(rec.label);
    } catch (const DataError&) {
      throw DataError("unknown relation label '" + rec.label + "'");
    }
    if (!schema.is_relation(parsed.base)) throw DataError("unknown relation label '" + rec.label + "'");
    if (parsed.direction == DirectedLabel::Direction::E2E1) {
      gold.emplace_back(e2, parsed.base, e1);
    } else {
      gold.emplace_back(e1, parsed.base, e2);
    }
  }
  return LabeledExample(Sentence(rec.id, std::move(tokens), {e1, e2}), std::move(gold), schema);
}

}  // namespace

LoadResult load_semeval(const std::string& path, const RelationSchema& schema, const AdapterOptions& options) {
  const std::string null_label = options.null_label.empty() ? "Other" : options.null_label;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  static const std::regex sentence_line(R"(^\s*(\d+)\s+\"(.*)\"\s*$)");
  std::vector<SemEvalRecord> records;
  std::vector<bool> has_label;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    std::smatch m;
    if (std::regex_match(line, m, sentence_line)) {
      records.push_back({m[1].str(), m[2].str(), {}});
      has_label.push_back(false);
    } else if (t.rfind("Comment", 0) == 0) {
      continue;
    } else if (!records.empty() && !has_label.back()) {
      records.back().label = std::string(t);
      has_label.back() = true;
    } else {
      throw DataError(path + ": unexpected line '" + std::string(t) + "'");
    }
  }

  LoadResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      if (!has_label[i]) throw DataError("missing relation label line");
      result.examples.push_back(semeval_example(records[i], schema, null_label));
    } catch (const DataError& e) {
      record_error(result, options, records[i].id, e.what());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Canonical JSONL

Json canonical_to_json(const LabeledExample& example) {
  const Sentence& s = example.sentence();
  Json j;
  j["id"] = s.id();
  j["tokens"] = s.tokens();
  Json entities = Json::array();
  for (const auto& e : s.entities()) {
    Json ej;
    ej["start"] = e.start();
    ej["end"] = e.end();
    ej["type"] = e.type();
    entities.push_back(std::move(ej));
  }
  j["entities"] = std::move(entities);
  Json triples = Json::array();
  for (const auto& t : example.gold_triples()) {
    Json tj;
    tj["subj_idx"] = *s.entity_index(t.subject());
    tj["obj_idx"] = *s.entity_index(t.object());
    tj["relation"] = t.relation();
    triples.push_back(std::move(tj));
  }
  j["triples"] = std::move(triples);
  return j;
}

LabeledExample canonical_from_json(const Json& j, const RelationSchema& schema) {
  const std::string id = j.at("id").get<std::string>();
  auto tokens = j.at("tokens").get<std::vector<std::string>>();
  std::vector<Entity> entities;
  for (const auto& ej : j.at("entities")) {
    entities.push_back(Entity::from_span(tokens, ej.at("start").get<std::size_t>(), ej.at("end").get<std::size_t>(),
                                         ej.at("type").get<std::string>()));
  }
  std::vector<RelationTriple> triples;
  for (const auto& tj : j.at("triples")) {
    const auto s = tj.at("subj_idx").get<std::size_t>();
    const auto o = tj.at("obj_idx").get<std::size_t>();
    if (s >= entities.size() || o >= entities.size()) throw DataError("triple entity index out of range");
    if (s == o) throw DataError("triple links an entity to itself");
    triples.emplace_back(entities[s], tj.at("relation").get<std::string>(), entities[o]);
  }
  return LabeledExample(Sentence(id, std::move(tokens), std::move(entities)), std::move(triples), schema);
}

void write_canonical(const std::vector<LabeledExample>& examples, const std::string& path) {
  JsonlWriter w(path);
  for (const auto& ex : examples) w.write(canonical_to_json(ex));
  w.close();
}

LoadResult load_canonical(const std::string& path, const RelationSchema& schema, const AdapterOptions& options) {
  LoadResult result;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    const std::string id = j.is_object() && j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                                                   : "line " + std::to_string(line_no);
    try {
      result.examples.push_back(canonical_from_json(j, schema));
    } catch (const Json::exception& e) {
      record_error(result, options, id, std::string("malformed record: ") + e.what());
    } catch (const DataError& e) {
      record_error(result, options, id, e.what());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

void validate_synthetic_config(const SyntheticGrammarConfig& c) {
  if (c.entity_type_count < 1 || c.relation_type_count < 1 || c.templates_per_relation < 1 || c.vocabulary_size < 1 ||
      c.names_per_type < 1) {
    throw UsageError("synthetic corpus counts must all be at least 1");
  }
  if (c.negative_fraction.num > c.negative_fraction.den) throw UsageError("negative_fraction must lie in [0, 1]");
  if (c.vocabulary_size < c.relation_type_count + 1) {
    throw UsageError("vocabulary_size must exceed relation_type_count (one trigger word per relation)");
  }
}

namespace {

constexpr const char* kEntityTypeNames[] = {"Person", "Organization", "Location", "Product",
                                            "Event",  "Facility",     "Vehicle",  "Weapon"};
constexpr const char* kRelationNames[] = {"works for", "located at", "part of",   "founded by",
                                          "owns",      "member of",  "born in",   "produces",
                                          "married to", "supplies",  "hosted by", "rivals"};

std::string pseudo_word(Rng& rng, std::size_t syllables) {
  static const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr"};
  static const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) {
    w += onsets[rng.uniform_index(std::size(onsets))];
    w += vowels[rng.uniform_index(std::size(vowels))];
  }
  return w;
}

// A template is a token list where "@S" and "@O" stand for subject and object slots.
using Template = std::vector<std::string>;

struct Grammar {
  std::vector<std::string> entity_types;
  std::vector<std::string> relations;
  std::vector<std::pair<std::size_t, std::size_t>> signatures;  // (subject type, object type)
  std::vector<std::vector<Template>> relation_templates;
  std::vector<Template> null_templates;
  std::vector<std::vector<std::vector<std::string>>> names;  // per type, per name, tokens
};

Template make_template(Rng& rng, const std::vector<std::string>& filler, const std::string* trigger) {
  const std::size_t length = 3 + rng.uniform_index(4);
  Template t;
  for (std::size_t i = 0; i < length; ++i) t.push_back(filler[rng.uniform_index(filler.size())]);
  if (trigger != nullptr) t[rng.uniform_index(t.size())] = *trigger;
  // Slots go at distinct insertion points; the subject precedes the object 70% of the time.
  std::size_t a = rng.uniform_index(t.size() + 1);
  std::size_t b = rng.uniform_index(t.size() + 1);
  if (a > b) std::swap(a, b);
  const bool subject_first = rng.bernoulli(0.7);
  t.insert(t.begin() + static_cast<std::ptrdiff_t>(b), subject_first ? "@O" : "@S");
  t.insert(t.begin() + static_cast<std::ptrdiff_t>(a), subject_first ? "@S" : "@O");
  t.push_back(".");
  return t;
}

Grammar build_grammar(const SyntheticGrammarConfig& c, Rng& rng) {
  Grammar g;
  for (std::size_t i = 0; i < c.entity_type_count; ++i) {
    g.entity_types.push_back(i < std::size(kEntityTypeNames) ? kEntityTypeNames[i] : "Type" + std::to_string(i));
  }
  for (std::size_t i = 0; i < c.relation_type_count; ++i) {
    g.relations.push_back(i < std::size(kRelationNames) ? kRelationNames[i] : "relation " + std::to_string(i));
  }

  std::set<std::string> used{"none"};
  auto fresh_word = [&](std::size_t syllables) {
    for (;;) {
      std::string w = pseudo_word(rng, syllables);
      if (used.insert(w).second) return w;
      ++syllables;
    }
  };
  std::vector<std::string> filler;
  std::vector<std::string> triggers;
  for (std::size_t i = 0; i < c.relation_type_count; ++i) triggers.push_back(fresh_word(3));
  for (std::size_t i = c.relation_type_count; i < c.vocabulary_size; ++i) filler.push_back(fresh_word(2));

  for (std::size_t t = 0; t < c.entity_type_count; ++t) {
    std::vector<std::vector<std::string>> pool;
    for (std::size_t n = 0; n < c.names_per_type; ++n) {
      std::vector<std::string> name;
      const std::size_t parts = rng.bernoulli(0.25) ? 2 : 1;
      for (std::size_t p = 0; p < parts; ++p) {
        std::string w = fresh_word(2);
        w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        name.push_back(std::move(w));
      }
      pool.push_back(std::move(name));
    }
    g.names.push_back(std::move(pool));
  }

  std::set<Template> seen_templates;
  auto unique_template = [&](const std::string* trigger) {
    for (;;) {
      Template t = make_template(rng, filler, trigger);
      if (seen_templates.insert(t).second) return t;
    }
  };
  for (std::size_t r = 0; r < c.relation_type_count; ++r) {
    const std::size_t st = rng.uniform_index(c.entity_type_count);
    std::size_t ot = st;
    if (c.entity_type_count > 1) ot = (st + 1 + rng.uniform_index(c.entity_type_count - 1)) % c.entity_type_count;
    g.signatures.emplace_back(st, ot);
    std::vector<Template> templates;
    for (std::size_t k = 0; k < c.templates_per_relation; ++k) templates.push_back(unique_template(&triggers[r]));
    g.relation_templates.push_back(std::move(templates));
  }
  for (std::size_t k = 0; k < c.templates_per_relation; ++k) g.null_templates.push_back(unique_template(nullptr));
  return g;
}

LabeledExample instantiate(const Grammar& g, const Template& t, std::size_t subj_type, std::size_t obj_type,
                           const std::string* relation, const std::string& id, Rng& rng,
                           const RelationSchema& schema) {
  const auto& subj_pool = g.names[subj_type];
  const auto& obj_pool = g.names[obj_type];
  const auto& subj_name = subj_pool[rng.uniform_index(subj_pool.size())];
  const std::vector<std::string>* obj_name = &obj_pool[rng.uniform_index(obj_pool.size())];
  while (obj_name == &subj_name && obj_pool.size() > 1) obj_name = &obj_pool[rng.uniform_index(obj_pool.size())];

  std::vector<std::string> tokens;
  std::size_t s_start = 0, o_start = 0;
  for (const auto& tok : t) {
    if (tok == "@S") {
      s_start = tokens.size();
      tokens.insert(tokens.end(), subj_name.begin(), subj_name.end());
    } else if (tok == "@O") {
      o_start = tokens.size();
      tokens.insert(tokens.end(), obj_name->begin(), obj_name->end());
    } else {
      tokens.push_back(tok);
    }
  }
  Entity subj = Entity::from_span(tokens, s_start, s_start + subj_name.size(), g.entity_types[subj_type]);
  Entity obj = Entity::from_span(tokens, o_start, o_start + obj_name->size(), g.entity_types[obj_type]);
  std::vector<RelationTriple> gold;
  if (relation != nullptr) gold.emplace_back(subj, *relation, obj);
  // Entities are listed in sentence order.
  std::vector<Entity> entities = s_start < o_start ? std::vector<Entity>{subj, obj} : std::vector<Entity>{obj, subj};
  return LabeledExample(Sentence(id, std::move(tokens), std::move(entities)), std::move(gold), schema);
}

std::vector<LabeledExample> generate_split(const Grammar& g, const SyntheticGrammarConfig& c, std::size_t count,
                                           const std::string& prefix, Rng& rng, const RelationSchema& schema) {
  const std::size_t negatives = round_half_up(c.negative_fraction, count);
  std::vector<bool> is_negative(count, false);
  std::fill(is_negative.begin(), is_negative.begin() + static_cast<std::ptrdiff_t>(negatives), true);
  rng.shuffle(is_negative);

  std::vector<LabeledExample> out;
  out.reserve(count);
  const int width = static_cast<int>(std::to_string(count).size());
  for (std::size_t i = 0; i < count; ++i) {
    std::ostringstream id;
    id << prefix << '-' << std::string(static_cast<std::size_t>(width) - std::to_string(i).size(), '0') << i;
    if (is_negative[i]) {
      const Template& t = g.null_templates[rng.uniform_index(g.null_templates.size())];
      const std::size_t st = rng.uniform_index(g.entity_types.size());
      const std::size_t ot = rng.uniform_index(g.entity_types.size());
      out.push_back(instantiate(g, t, st, ot, nullptr, id.str(), rng, schema));
    } else {
      const std::size_t r = rng.uniform_index(g.relations.size());
      const auto& templates = g.relation_templates[r];
      const Template& t = templates[rng.uniform_index(templates.size())];
      out.push_back(instantiate(g, t, g.signatures[r].first, g.signatures[r].second, &g.relations[r], id.str(), rng,
                                schema));
    }
  }
  return out;
}

}  // namespace

SyntheticCorpus synthesize_corpus(const SyntheticGrammarConfig& config) {
  validate_synthetic_config(config);
  Rng rng(config.seed);
  const Grammar g = build_grammar(config, rng);
  RelationSchema schema(SchemaFields{g.relations, "None", g.entity_types});
  Rng train_rng(mix_seed(config.seed, 1));
  Rng dev_rng(mix_seed(config.seed, 2));
  Rng test_rng(mix_seed(config.seed, 3));
  auto train = generate_split(g, config, config.train_size, "train", train_rng, schema);
  auto dev = generate_split(g, config, config.dev_size, "dev", dev_rng, schema);
  auto test = generate_split(g, config, config.test_size, "test", test_rng, schema);
  return SyntheticCorpus{std::move(train), std::move(dev), std::move(test), std::move(schema)};
}

}  // namespace grec
