#include <doctest.h>

#include "grec/encoder.hpp"
#include "grec/parser.hpp"
#include "test_support.hpp"

using namespace grec;

TEST_SUITE("parser") {

TEST_CASE("golden target parses to one raw triple") {
  const auto r = parse_target("[Toefting | works for | Bolton]", TargetOrder::SRO);
  REQUIRE(r.ok());
  REQUIRE(r.triples().size() == 1);
  CHECK(r.triples()[0].fields == std::vector<std::string>{"Toefting", "works for", "Bolton"});
}

TEST_CASE("empty one-pass target parses") {
  const auto r = parse_target("[None | None | None]", TargetOrder::SRO);
  REQUIRE(r.ok());
  CHECK(r.triples()[0].fields == std::vector<std::string>{"None", "None", "None"});
}

TEST_CASE("unclosed block") {
  const auto r = parse_target("[a | b", TargetOrder::SRO);
  REQUIRE_FALSE(r.ok());
  CHECK(r.reason() == "unclosed block");
}

TEST_CASE("grammar deviations are malformed") {
  for (const char* text : {"", "   ", "garbage", "[a | b]", "[a | b | c | d]", "[a | | c]", "[a | b | c]x",
                           "[a | b | c] junk", "[a [b] | c]", "a | b | c", "]"}) {
    CAPTURE(text);
    CHECK_FALSE(parse_target(text, TargetOrder::SRO).ok());
  }
  CHECK_FALSE(parse_target("[a | b]", TargetOrder::RelOnly).ok());
  CHECK(parse_target("[works for]", TargetOrder::RelOnly).ok());
}

TEST_CASE("fields are trimmed and blocks may be separated by any whitespace") {
  const auto r = parse_target("  [ a  |b|  c d ]\n\t[e | f | g]  ", TargetOrder::SRO);
  REQUIRE(r.ok());
  REQUIRE(r.triples().size() == 2);
  CHECK(r.triples()[0].fields == std::vector<std::string>{"a", "b", "c d"});
  CHECK(r.triples()[1].fields == std::vector<std::string>{"e", "f", "g"});
}

TEST_CASE("parse never throws on arbitrary bytes") {
  Rng rng(99);
  const std::string alphabet = "[]| ab\t\n#-\x01\xff";
  for (int i = 0; i < 20000; ++i) {
    std::string text;
    const auto len = rng.uniform_index(24);
    for (std::size_t j = 0; j < len; ++j) {
      text += rng.bernoulli(0.8) ? alphabet[rng.uniform_index(alphabet.size())]
                                 : static_cast<char>(rng.uniform_index(256));
    }
    for (auto order : {TargetOrder::RelOnly, TargetOrder::SRO}) {
      ParseOutcome r = parse_target("", order);
      CHECK_NOTHROW(r = parse_target(text, order));
      if (r.ok()) {
        for (const auto& t : r.triples()) {
          CHECK(t.fields.size() == field_count(order));
          for (const auto& f : t.fields) CHECK(f.find_first_of("[]|") == std::string::npos);
        }
      }
    }
  }
}

TEST_CASE("parse inverts build_pair_target field-wise") {
  Rng rng(8);
  const auto schema = testing::random_schema(rng, 4, 2);
  for (const auto& ex : testing::random_corpus(rng, schema, 300)) {
    const auto& es = ex.sentence().entities();
    for (auto [s, o] : enumerate_pairs(ex.sentence())) {
      const std::string& rel = schema.relation_types()[rng.uniform_index(schema.relation_types().size())];
      for (auto order : {TargetOrder::RelOnly, TargetOrder::SRO, TargetOrder::RSO, TargetOrder::SOR}) {
        const auto r = parse_target(build_pair_target(es[s], es[o], rel, order), order);
        REQUIRE(r.ok());
        const auto& f = r.triples()[0].fields;
        CHECK(f[relation_field(order)] == rel);
        if (order != TargetOrder::RelOnly) {
          CHECK(f[subject_field(order)] == es[s].surface());
          CHECK(f[object_field(order)] == es[o].surface());
        }
      }
    }
  }
}

TEST_CASE("resolve_pair policies") {
  const auto ex = testing::toefting_example();
  const auto schema = testing::toefting_schema();
  const Entity& toefting = ex.sentence().entities()[0];
  const Entity& bolton = ex.sentence().entities()[1];

  const auto ok = resolve_pair({{"Toefting", "works for", "Bolton"}}, toefting, bolton, schema, TargetOrder::SRO);
  CHECK(ok.triple.relation() == "works for");
  CHECK_FALSE(ok.unknown_relation);
  CHECK_FALSE(ok.entity_mismatch);

  const auto mismatch = resolve_pair({{"X", "works for", "Bolton"}}, toefting, bolton, schema, TargetOrder::SRO);
  CHECK(mismatch.triple.relation() == "works for");
  CHECK(mismatch.entity_mismatch);
  CHECK(mismatch.triple.subject() == toefting);

  const auto unknown = resolve_pair({{"Toefting", "flies to", "Bolton"}}, toefting, bolton, schema, TargetOrder::SRO);
  CHECK(unknown.triple.relation() == "None");
  CHECK(unknown.unknown_relation);

  const auto rel_only = resolve_pair({{"makes"}}, toefting, bolton, schema, TargetOrder::RelOnly);
  CHECK(rel_only.triple.relation() == "makes");
  CHECK_FALSE(rel_only.entity_mismatch);

  const auto null = resolve_pair({{"None", "Toefting", "Bolton"}}, toefting, bolton, schema, TargetOrder::RSO);
  CHECK(null.triple.relation() == "None");
  CHECK_FALSE(null.unknown_relation);
}

TEST_CASE("resolve_one_pass on the golden target") {
  const auto ex = testing::toefting_example();
  const auto schema = testing::toefting_schema();
  const auto parsed = parse_target(build_one_pass_target(ex.gold_triples()), TargetOrder::SRO);
  REQUIRE(parsed.ok());
  const auto r = resolve_one_pass(parsed.triples(), ex.sentence(), schema);
  CHECK(r.dropped == 0);
  CHECK(r.triples == ex.gold_triples());
}

TEST_CASE("resolve_one_pass empty and hallucinated blocks") {
  const auto ex = testing::toefting_example();
  const auto schema = testing::toefting_schema();
  const auto none = parse_target("[None | None | None]", TargetOrder::SRO);
  const auto r0 = resolve_one_pass(none.triples(), ex.sentence(), schema);
  CHECK(r0.triples.empty());
  CHECK(r0.dropped == 0);

  const auto mixed = parse_target(
      "[Toefting | works for | Bolton] [Toefting | works for | Munich] [club | affiliated to | German]",
      TargetOrder::SRO);
  const auto r1 = resolve_one_pass(mixed.triples(), ex.sentence(), schema);
  CHECK(r1.triples.size() == 2);
  CHECK(r1.dropped == 1);

  const auto bad_rel = parse_target("[Toefting | flies to | Bolton]", TargetOrder::SRO);
  CHECK(resolve_one_pass(bad_rel.triples(), ex.sentence(), schema).dropped == 1);
}

TEST_CASE("ambiguous surface resolves to the earliest mention") {
  const RelationSchema schema({{"r"}, "None", {}});
  const Sentence s("s", {"Paris", "and", "Paris", "x"},
                   {Entity(2, 3, "T", "Paris"), Entity(0, 1, "T", "Paris"), Entity(3, 4, "T", "x")});
  const auto r = resolve_one_pass({{{"Paris", "r", "x"}}}, s, schema);
  REQUIRE(r.triples.size() == 1);
  CHECK(r.triples[0].subject().start() == 0);
}

TEST_CASE("one-pass round trip for every order with distinct surfaces") {
  Rng rng(23);
  const auto schema = testing::random_schema(rng, 4, 3);
  testing::RandomSentenceOptions opt;
  opt.unique_surfaces = true;
  for (const auto& ex : testing::random_corpus(rng, schema, 400, opt)) {
    for (auto order : {TargetOrder::SRO, TargetOrder::RSO, TargetOrder::SOR}) {
      const auto parsed = parse_target(build_one_pass_target(ex.gold_triples(), order), order);
      REQUIRE(parsed.ok());
      const auto r = resolve_one_pass(parsed.triples(), ex.sentence(), schema, order);
      CHECK(r.dropped == 0);
      auto got = r.triples;
      auto want = ex.gold_triples();
      CHECK(got.size() == want.size());
      for (const auto& t : want) CHECK(std::find(got.begin(), got.end(), t) != got.end());
    }
  }
}

}
