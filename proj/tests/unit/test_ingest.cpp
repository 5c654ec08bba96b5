#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "grec/ingest.hpp"
#include "test_support.hpp"

using namespace grec;

namespace {

RelationSchema semeval_schema() { return load_schema(testing::fixture_path("semeval_schema.json")); }

const LabeledExample& by_id(const LoadResult& r, const std::string& id) {
  for (const auto& ex : r.examples) {
    if (ex.sentence().id() == id) return ex;
  }
  throw std::runtime_error("no example " + id);
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("tacred records") {
  const auto schema = load_schema(testing::fixture_path("tacred_schema.json"));
  const auto r = load_tacred(testing::fixture_path("tacred_sample.json"), schema);
  REQUIRE(r.examples.size() == 2);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].record_id == "t3");

  const auto& t1 = by_id(r, "t1");
  REQUIRE(t1.gold_triples().size() == 1);
  const auto& triple = t1.gold_triples()[0];
  CHECK(triple.relation() == "per:title");
  // inclusive end 1 covers two tokens
  CHECK(triple.subject().start() == 0);
  CHECK(triple.subject().end() == 2);
  CHECK(triple.subject().surface() == "Tom Thabane");
  CHECK(triple.object().surface() == "chief executive");
  CHECK(triple.object().type() == "TITLE");

  const auto& t2 = by_id(r, "t2");
  CHECK(t2.gold_triples().empty());
  CHECK(t2.sentence().entities().size() == 2);
  CHECK(t2.sentence().entities()[1].surface() == "Ohio");

  CHECK_THROWS_AS(load_tacred(testing::fixture_path("tacred_sample.json"), schema, {"", true}), DataError);
}

TEST_CASE("tacred custom null spelling") {
  const auto dir = testing::scratch_dir("ingest_tacred_null");
  testing::write_file(dir + "/in.json",
                      R"([{"id": "a", "relation": "NA", "token": ["x", "y"], "subj_start": 0, "subj_end": 0,
                           "subj_type": "PERSON", "obj_start": 1, "obj_end": 1, "obj_type": "CITY"}])");
  const auto schema = load_schema(testing::fixture_path("tacred_schema.json"));
  CHECK(load_tacred(dir + "/in.json", schema).errors.size() == 1);
  const auto r = load_tacred(dir + "/in.json", schema, {"NA", false});
  REQUIRE(r.examples.size() == 1);
  CHECK(r.examples[0].gold_triples().empty());
  testing::write_file(dir + "/broken.json", "{not json");
  CHECK_THROWS_AS(load_tacred(dir + "/broken.json", schema), DataError);
}

TEST_CASE("semeval records") {
  const auto r = load_semeval(testing::fixture_path("semeval_sample.txt"), semeval_schema());
  CHECK(r.examples.size() == 9);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].record_id == "10");

  const auto& forward = by_id(r, "9");
  REQUIRE(forward.gold_triples().size() == 1);
  CHECK(forward.gold_triples()[0].relation() == "Content-Container");
  CHECK(forward.gold_triples()[0].subject().surface() == "lawsonite");
  CHECK(forward.gold_triples()[0].object().surface() == "platinum crucible");

  const auto& reversed = by_id(r, "7");
  REQUIRE(reversed.gold_triples().size() == 1);
  CHECK(reversed.gold_triples()[0].relation() == "Cause-Effect");
  CHECK(reversed.gold_triples()[0].subject().surface() == "infection");
  CHECK(reversed.gold_triples()[0].object().surface() == "inflammation");

  CHECK(by_id(r, "2").gold_triples().empty());
  const auto& first = by_id(r, "1");
  CHECK(first.sentence().tokens().back() == ".");
  CHECK(first.sentence().entities()[0].type() == kSemEvalEntityType);
}

TEST_CASE("large generated semeval file") {
  const auto dir = testing::scratch_dir("ingest_semeval_large");
  const auto schema = semeval_schema();
  Rng rng(77);
  std::map<std::string, std::pair<std::string, bool>> expected;  // id -> (base, reversed)
  {
    std::ofstream out(dir + "/big.txt");
    for (int i = 1; i <= 8000; ++i) {
      const auto& rels = schema.relation_types();
      std::string label = "Other";
      bool reversed = false;
      if (!rng.bernoulli(0.2)) {
        reversed = rng.bernoulli(0.5);
        label = rels[rng.uniform_index(rels.size())];
        expected[std::to_string(i)] = {label, reversed};
        label += reversed ? "(e2,e1)" : "(e1,e2)";
      }
      out << i << "\t\"Some <e1>first thing</e1>, said the " << i << " <e2>other</e2>.\"\r\n"
          << label << "\r\nComment:\r\n\r\n";
    }
  }
  const auto r = load_semeval(dir + "/big.txt", schema);
  CHECK(r.examples.size() == 8000);
  CHECK(r.errors.empty());
  std::size_t checked = 0;
  for (const auto& ex : r.examples) {
    auto it = expected.find(ex.sentence().id());
    if (it == expected.end()) {
      CHECK(ex.gold_triples().empty());
      continue;
    }
    REQUIRE(ex.gold_triples().size() == 1);
    const auto& t = ex.gold_triples()[0];
    CHECK(t.relation() == it->second.first);
    CHECK(t.subject().surface() == (it->second.second ? "other" : "first thing"));
    ++checked;
  }
  CHECK(checked == expected.size());
}

TEST_CASE("semeval with an unknown label") {
  const auto dir = testing::scratch_dir("ingest_semeval_unknown");
  testing::write_file(dir + "/in.txt", "1\t\"<e1>a</e1> b <e2>c</e2>\"\nFoo-Bar(e1,e2)\n");
  const auto r = load_semeval(dir + "/in.txt", semeval_schema());
  CHECK(r.examples.empty());
  CHECK(r.errors.size() == 1);
}

TEST_CASE("tokenizer detaches punctuation") {
  CHECK(simple_tokenize("Hello, (world)!") == std::vector<std::string>{"Hello", ",", "(", "world", ")", "!"});
  CHECK(simple_tokenize("Peru's U.S.A.") == std::vector<std::string>{"Peru's", "U.S.A", "."});
  CHECK(simple_tokenize("...") == std::vector<std::string>{".", ".", "."});
}

TEST_CASE("canonical round trips") {
  const auto dir = testing::scratch_dir("ingest_canonical");
  Rng rng(5);
  const auto schema = testing::random_schema(rng, 4, 3);
  for (std::size_t n : {0u, 1u, 1000u}) {
    const auto corpus = testing::random_corpus(rng, schema, n);
    write_canonical(corpus, dir + "/c.jsonl");
    const auto back = load_canonical(dir + "/c.jsonl", schema);
    CHECK(back.errors.empty());
    CHECK(back.examples == corpus);
  }
  const auto ex = testing::toefting_example();
  CHECK(canonical_from_json(canonical_to_json(ex), testing::toefting_schema()) == ex);
}

TEST_CASE("canonical record errors") {
  const auto dir = testing::scratch_dir("ingest_canonical_errors");
  const RelationSchema schema({{"r"}, "None", {}});
  testing::write_file(dir + "/in.jsonl",
                      R"({"id": "ok", "tokens": ["a", "b"], "entities": [{"start": 0, "end": 1, "type": "T"}, {"start": 1, "end": 2, "type": "T"}], "triples": [{"subj_idx": 0, "obj_idx": 1, "relation": "r"}]}
{"id": "self", "tokens": ["a", "b"], "entities": [{"start": 0, "end": 1, "type": "T"}], "triples": [{"subj_idx": 0, "obj_idx": 0, "relation": "r"}]}
{"id": "range", "tokens": ["a"], "entities": [{"start": 0, "end": 3, "type": "T"}], "triples": []}
{"id": "label", "tokens": ["a", "b"], "entities": [{"start": 0, "end": 1, "type": "T"}, {"start": 1, "end": 2, "type": "T"}], "triples": [{"subj_idx": 0, "obj_idx": 1, "relation": "q"}]}
{"id": "shape"}
)");
  const auto r = load_canonical(dir + "/in.jsonl", schema);
  CHECK(r.examples.size() == 1);
  CHECK(r.errors.size() == 4);
  CHECK_THROWS_AS(load_canonical(dir + "/in.jsonl", schema, {"", true}), DataError);
  testing::write_file(dir + "/bad.jsonl", "{oops\n");
  CHECK_THROWS_AS(load_canonical(dir + "/bad.jsonl", schema), DataError);
}

TEST_CASE("synthetic corpus is deterministic") {
  SyntheticGrammarConfig c;
  c.train_size = 200;
  c.dev_size = 20;
  c.test_size = 30;
  const auto a = synthesize_corpus(c);
  const auto b = synthesize_corpus(c);
  CHECK(a.train == b.train);
  CHECK(a.dev == b.dev);
  CHECK(a.test == b.test);
  CHECK(a.schema == b.schema);
  CHECK(a.train.size() == 200);
  CHECK(a.test.size() == 30);
  c.seed = 14;
  CHECK_FALSE(synthesize_corpus(c).train == a.train);
}

TEST_CASE("synthetic corpus structure") {
  SyntheticGrammarConfig c;
  c.relation_type_count = 2;
  c.templates_per_relation = 10;
  c.train_size = 1000;
  c.dev_size = 0;
  c.test_size = 0;
  const auto corpus = synthesize_corpus(c);
  std::size_t negatives = 0;
  std::map<std::string, std::set<std::vector<std::string>>> templates;
  std::map<std::vector<std::string>, std::string> relation_of;
  for (const auto& ex : corpus.train) {
    const auto& es = ex.sentence().entities();
    REQUIRE(es.size() == 2);
    CHECK(es[0].start() < es[1].start());
    CHECK(ex.gold_triples().size() <= 1);
    if (ex.gold_triples().empty()) {
      ++negatives;
      continue;
    }
    const auto& t = ex.gold_triples()[0];
    std::vector<std::string> masked;
    for (std::size_t i = 0; i < ex.sentence().tokens().size();) {
      if (i == t.subject().start()) {
        masked.push_back("@S");
        i = t.subject().end();
      } else if (i == t.object().start()) {
        masked.push_back("@O");
        i = t.object().end();
      } else {
        masked.push_back(ex.sentence().tokens()[i++]);
      }
    }
    templates[t.relation()].insert(masked);
    // a template with its slot order determines the relation
    CHECK(relation_of.emplace(masked, t.relation()).first->second == t.relation());
  }
  CHECK(negatives == 200);
  CHECK(templates.size() == 2);
  CHECK(relation_of.size() <= 20);
  for (const auto& [rel, set] : templates) CHECK(set.size() <= c.templates_per_relation);

  c.negative_fraction = Ratio{0, 1};
  for (const auto& ex : synthesize_corpus(c).train) CHECK(ex.gold_triples().size() == 1);
}

TEST_CASE("synthetic configuration limits") {
  SyntheticGrammarConfig c;
  c.relation_type_count = 0;
  CHECK_THROWS_AS(synthesize_corpus(c), UsageError);
  c = {};
  c.negative_fraction = Ratio{3, 2};
  CHECK_THROWS_AS(synthesize_corpus(c), UsageError);
  c = {};
  c.vocabulary_size = 3;
  CHECK_THROWS_AS(synthesize_corpus(c), UsageError);
}

}
