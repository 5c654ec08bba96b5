// Runs the acceptance criteria and prints one PASS/FAIL line for each.
// Usage: grec_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "grec/pipeline.hpp"
#include "grec/parser.hpp"
#include "test_support.hpp"

using namespace grec;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Collects failures; the first few messages are kept for the report.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (messages_.size() < 3) messages_.push_back(what);
  }
  std::size_t failed() const { return failed_; }
  std::size_t total() const { return total_; }
  Verdict verdict(const std::string& summary) const {
    Verdict v{failed_ == 0, summary};
    if (failed_ > 0) {
      v.detail += "; " + std::to_string(failed_) + " of " + std::to_string(total_) + " checks failed";
      for (const auto& m : messages_) v.detail += "; " + m;
    }
    return v;
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> messages_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- 1

Verdict golden_encodings() {
  const auto start = Clock::now();
  Check c;
  const auto ex = testing::toefting_example();
  const auto schema = testing::toefting_schema();
  const auto& e = ex.sentence().entities();
  c.expect(build_pair_source(ex.sentence(), e[0], e[1], MarkerScheme::EntityType, schema) ==
               testing::kGoldenPairSource,
           "entity-pair source differs");
  c.expect(build_pair_target(e[0], e[1], "works for", TargetOrder::SRO) == testing::kGoldenPairTarget,
           "entity-pair target differs");
  c.expect(build_one_pass_source(ex.sentence(), schema, true) == testing::kGoldenOnePassSource,
           "one-pass source differs");
  c.expect(build_one_pass_target(ex.gold_triples()) == testing::kGoldenOnePassTarget, "one-pass target differs");

  // the same strings through the dataset encoder
  const auto pairs = encode_dataset({ex}, {}, schema).pairs;
  bool found = false;
  for (const auto& p : pairs) {
    if (p.subj_idx == 0u && p.obj_idx == 1u) {
      found = p.source == testing::kGoldenPairSource && p.target == testing::kGoldenPairTarget;
    }
  }
  c.expect(found, "encode_dataset pair (Toefting, Bolton) differs");
  EncodeOptions one_pass;
  one_pass.mode = EncodingMode::OnePass;
  const auto op = encode_dataset({ex}, one_pass, schema).pairs;
  c.expect(op.size() == 1 && op[0].source == testing::kGoldenOnePassSource &&
               op[0].target == testing::kGoldenOnePassTarget,
           "encode_dataset one-pass record differs");
  const double t = seconds_since(start);
  c.expect(t < 1.0, "runtime " + fmt(t) + " s exceeds 1 s");
  return c.verdict("4 golden strings byte-exact, runtime " + fmt(t, 3) + " s");
}

// ---------------------------------------------------------------- 2

Verdict round_trip() {
  const auto start = Clock::now();
  Check c;
  Rng rng(2024);
  std::size_t pair_trips = 0, one_pass_trips = 0;
  const std::vector<TargetOrder> all_orders{TargetOrder::RelOnly, TargetOrder::SRO, TargetOrder::RSO,
                                            TargetOrder::SOR};
  const std::size_t sentences = 10000;
  std::size_t produced = 0;
  while (produced < sentences) {
    const auto schema = testing::random_schema(rng, 1 + rng.uniform_index(6), 1 + rng.uniform_index(4));
    testing::RandomSentenceOptions opt;
    opt.unique_surfaces = true;
    const auto corpus = testing::random_corpus(rng, schema, std::min<std::size_t>(100, sentences - produced), opt);
    produced += corpus.size();
    for (const auto& ex : corpus) {
      const auto& es = ex.sentence().entities();
      for (auto [s, o] : enumerate_pairs(ex.sentence())) {
        const bool null = rng.bernoulli(0.3);
        const auto& labels = schema.relation_types();
        const std::string rel = null ? schema.null_type() : labels[rng.uniform_index(labels.size())];
        const RelationTriple want(es[s], rel, es[o]);
        for (auto order : all_orders) {
          const auto parsed = parse_target(build_pair_target(es[s], es[o], rel, order), order);
          bool ok = parsed.ok() && parsed.triples().size() == 1;
          if (ok) {
            const auto r = resolve_pair(parsed.triples()[0], es[s], es[o], schema, order);
            ok = r.triple == want && !r.unknown_relation && !r.entity_mismatch;
          }
          c.expect(ok, "pair round trip failed in " + ex.sentence().id() + " order " + to_string(order));
          ++pair_trips;
        }
      }
      for (auto order : {TargetOrder::SRO, TargetOrder::RSO, TargetOrder::SOR}) {
        const auto parsed = parse_target(build_one_pass_target(ex.gold_triples(), order), order);
        bool ok = parsed.ok();
        if (ok) {
          const auto r = resolve_one_pass(parsed.triples(), ex.sentence(), schema, order);
          std::vector<RelationTriple> got = r.triples;
          ok = r.dropped == 0 && got.size() == ex.gold_triples().size();
          for (const auto& t : ex.gold_triples()) ok = ok && std::find(got.begin(), got.end(), t) != got.end();
        }
        c.expect(ok, "one-pass round trip failed in " + ex.sentence().id() + " order " + to_string(order));
        ++one_pass_trips;
      }
    }
  }
  const double t = seconds_since(start);
  c.expect(t < 30.0, "runtime " + fmt(t) + " s exceeds 30 s");
  return c.verdict(std::to_string(produced) + " sentences, " + std::to_string(pair_trips) + " pair and " +
                   std::to_string(one_pass_trips) + " one-pass round trips, " + std::to_string(c.failed()) +
                   " failures, runtime " + fmt(t, 3) + " s");
}

// ---------------------------------------------------------------- 3

Verdict pair_counts() {
  Check c;
  Rng rng(3);
  std::size_t sentences = 0, pairs_total = 0;
  for (int corpus_i = 0; corpus_i < 50; ++corpus_i) {
    const auto schema = testing::random_schema(rng, 1 + rng.uniform_index(5), 3);
    testing::RandomSentenceOptions opt;
    opt.max_entities = 1 + rng.uniform_index(8);
    const auto corpus = testing::random_corpus(rng, schema, 200, opt);
    const auto result = encode_dataset(corpus, {}, schema);
    c.expect(result.errors.empty(), "unexpected encoding errors");
    std::map<std::string, std::size_t> per_sentence;
    for (const auto& p : result.pairs) ++per_sentence[p.sentence_id];
    for (const auto& ex : corpus) {
      const std::size_t m = ex.sentence().entities().size();
      const std::size_t got = per_sentence.count(ex.sentence().id()) ? per_sentence[ex.sentence().id()] : 0;
      c.expect(got == m * (m - (m > 0 ? 1 : 0)),
               ex.sentence().id() + ": " + std::to_string(got) + " pairs for m=" + std::to_string(m));
    }
    EncodeOptions one_pass;
    one_pass.mode = EncodingMode::OnePass;
    const auto op = encode_dataset(corpus, one_pass, schema);
    std::map<std::string, std::size_t> op_count;
    for (const auto& p : op.pairs) ++op_count[p.sentence_id];
    for (const auto& ex : corpus) c.expect(op_count[ex.sentence().id()] == 1, "one-pass count is not 1");
    c.expect(op.pairs.size() == corpus.size(), "one-pass total differs from sentence count");
    sentences += corpus.size();
    pairs_total += result.pairs.size();
  }
  return c.verdict(std::to_string(sentences) + " sentences, " + std::to_string(pairs_total) +
                   " entity pairs, all equal to m(m-1); one record per sentence in one-pass mode");
}

// ---------------------------------------------------------------- 4

Verdict sampling_law() {
  Check c;
  Rng rng(4);
  std::size_t runs = 0;
  for (int corpus_i = 0; corpus_i < 40; ++corpus_i) {
    const auto schema = testing::random_schema(rng, 3, 2);
    const auto corpus = testing::random_corpus(rng, schema, 20 + rng.uniform_index(150));
    const auto pairs = encode_dataset(corpus, {}, schema).pairs;
    std::vector<EncodedPair> positives;
    std::size_t n_neg = 0;
    for (const auto& p : pairs) {
      if (p.is_positive) {
        positives.push_back(p);
      } else {
        ++n_neg;
      }
    }
    const std::uint64_t seed = rng.next();
    for (std::uint64_t tenth = 0; tenth <= 10; ++tenth) {
      const Ratio alpha{tenth, 10};
      const auto out = sample_negatives(pairs, {alpha, seed});
      std::vector<EncodedPair> kept_pos;
      std::size_t kept_neg = 0;
      for (const auto& p : out) {
        if (p.is_positive) {
          kept_pos.push_back(p);
        } else {
          ++kept_neg;
        }
      }
      const auto expected = static_cast<std::size_t>(
          std::floor(static_cast<long double>(tenth) * static_cast<long double>(n_neg) / 10.0L + 0.5L));
      c.expect(kept_neg == expected, "alpha " + alpha.to_string() + ": " + std::to_string(kept_neg) +
                                         " negatives, expected " + std::to_string(expected));
      c.expect(kept_pos == positives, "positives not retained at alpha " + alpha.to_string());
      c.expect(sample_negatives(pairs, {alpha, seed}) == out, "sampling not deterministic");
      ++runs;
    }
  }
  return c.verdict(std::to_string(runs) + " sampling runs over 40 corpora for alpha in {0, 0.1, ..., 1}");
}

// ---------------------------------------------------------------- 5

Verdict decoding_scaling() {
  Check c;
  const testing::ScalingPair f;
  auto select = [&](const std::vector<Candidate>& cands, double beta) {
    return select_prediction(cands, {beta, 5}, f.subj, f.obj, f.schema, TargetOrder::SRO);
  };
  Rng rng(5);
  const std::size_t sets = 10000;
  for (std::size_t i = 0; i < sets; ++i) {
    const auto cands = testing::random_candidates(rng);

    // beta = 1 is the argmax over all candidates
    double best = 0;
    for (const auto& x : cands) best = std::max(best, x.score);
    const auto p = select(cands, 1.0);
    bool is_argmax = false;
    for (const auto& x : cands) {
      if (x.score == best) is_argmax = is_argmax || select({x}, 1.0).triple == p.triple;
    }
    c.expect(p.score == best && is_argmax, "beta=1 selection is not an argmax");

    // threshold property: once negative, larger beta stays negative
    bool previous = true;
    for (double beta : {1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0, 1e6}) {
      const bool positive = select(cands, beta).is_positive(f.schema);
      c.expect(previous || !positive, "positive reappears at larger beta");
      previous = positive;
    }

    // uniform rescaling by a power of two is exact and must not change the decision
    const double beta = 1.0 + static_cast<double>(rng.uniform_index(40)) / 10.0;
    const auto base = select(cands, beta);
    for (int k : {1, 7, 30}) {
      auto scaled = cands;
      for (auto& x : scaled) x.score = std::ldexp(x.score, -k);
      c.expect(select(scaled, beta).triple == base.triple, "decision changed under rescaling");
    }
  }
  return c.verdict(std::to_string(sets) + " candidate sets: argmax at beta=1, monotone in beta, scale invariant; " +
                   std::to_string(c.failed()) + " violations");
}

// ---------------------------------------------------------------- 6

RelationSchema directed_schema(Rng& rng) {
  SchemaFields fields;
  const std::size_t bases = 1 + rng.uniform_index(4);
  for (std::size_t b = 0; b < bases; ++b) {
    const std::string base = "Base" + std::to_string(b);
    fields.relation_types.push_back(base + "(e1,e2)");
    if (rng.bernoulli(0.7)) fields.relation_types.push_back(base + "(e2,e1)");
  }
  fields.null_type = "Other";
  return RelationSchema(std::move(fields));
}

Verdict metric_oracle() {
  Check c;
  {
    const Entity a(0, 1, "P", "a"), b(1, 2, "O", "b"), d(2, 3, "O", "d");
    const RelationSchema schema({{"r", "q"}, "None", {}});
    const RelationTriple t1(a, "r", b), t2(a, "r", d), t3(b, "q", d);
    const PRF p = micro_prf({t1, t3}, {t1, t2}, ScoringMode::MicroPositive, schema);
    c.expect(p.precision == Rational(1, 2) && p.recall == Rational(1, 2) && p.f1 == Rational(1, 2),
             "worked example is not P=R=F1=1/2");
  }
  Rng rng(6);
  const std::size_t corpora = 1000;
  std::size_t triples_seen = 0;
  for (std::size_t i = 0; i < corpora; ++i) {
    const RelationSchema schema =
        rng.bernoulli(0.5) ? directed_schema(rng) : testing::random_schema(rng, 1 + rng.uniform_index(5), 2);
    testing::RandomSentenceOptions opt;
    opt.max_entities = 5;
    std::vector<SentenceTriples> golds, preds;
    std::size_t triple_count = 0;
    const std::size_t wanted = 1 + rng.uniform_index(12);
    for (std::size_t s = 0; s < wanted; ++s) {
      const auto ex = testing::random_example(rng, schema, opt, "s" + std::to_string(s));
      const auto pred = testing::perturb_triples(ex.gold_triples(), ex, schema, rng);
      if (triple_count + ex.gold_triples().size() + pred.size() > 50) break;
      triple_count += ex.gold_triples().size() + pred.size();
      golds.push_back({ex.sentence().id(), ex.gold_triples()});
      if (rng.bernoulli(0.9)) preds.push_back({ex.sentence().id(), pred});
    }
    triples_seen += triple_count;
    for (auto mode : {ScoringMode::MicroPositive, ScoringMode::Rel, ScoringMode::RelPlus}) {
      const PRF got = micro_prf_corpus(preds, golds, mode, schema);
      const auto want = testing::oracle_micro(preds, golds, mode, schema);
      c.expect(got.precision == want.precision && got.recall == want.recall && got.f1 == want.f1,
               "micro mismatch in corpus " + std::to_string(i) + " mode " + to_string(mode));
    }
    c.expect(macro_semeval(preds, golds, schema).macro_f1 == testing::oracle_macro(preds, golds, schema),
             "macro mismatch in corpus " + std::to_string(i));
  }
  return c.verdict("worked example 1/2; " + std::to_string(corpora) + " corpora (" + std::to_string(triples_seen) +
                   " triples) exactly equal to the brute-force scorer in micro, rel, relplus and macro");
}

// ---------------------------------------------------------------- 7

std::vector<EncodedPair> small_synthetic_pairs(std::size_t sentences) {
  SyntheticGrammarConfig g;
  g.train_size = sentences;
  g.dev_size = 0;
  g.test_size = 0;
  const auto corpus = synthesize_corpus(g);
  return encode_dataset(corpus.train, {}, corpus.schema).pairs;
}

Verdict toy_numerics() {
  Check c;
  const auto pairs = small_synthetic_pairs(30);

  const toy::Model small(toy::ModelConfig{8, 1, 2, 16, 64, 32, 1}, toy::Vocab::build(pairs));
  std::vector<toy::TokenizedPair> batch;
  for (std::size_t i = 0; i < 4; ++i) batch.push_back(small.tokenize(pairs[i]));
  const auto gc = toy::grad_check(small, batch, 1e-4, 256);
  c.expect(gc.coordinates >= 200, "fewer than 200 coordinates checked");
  c.expect(gc.max_relative_error < 1e-3, "gradient check error " + fmt(gc.max_relative_error));

  toy::TrainConfig tc;
  tc.epochs = 3;
  tc.learning_rate = 3e-3;
  const auto trained = toy::train(pairs, toy::Vocab::build(pairs), toy::ModelConfig{16, 2, 2, 32, 128, 24, 2}, tc);
  const toy::Model fresh(toy::ModelConfig{}, toy::Vocab::build(pairs));
  double worst_row = 0;
  std::size_t rows = 0, beams = 0;
  for (const toy::Model* m : {&trained.model, &fresh}) {
    for (std::size_t i = 0; i < 20; ++i) {
      const auto tp = m->tokenize(pairs[i]);
      const auto probe = m->probe(tp);
      auto check_rows = [&](const toy::Matrix& mat) {
        const double dev = (mat.rowwise().sum().array() - 1.0).abs().maxCoeff();
        worst_row = std::max(worst_row, dev);
        rows += static_cast<std::size_t>(mat.rows());
      };
      check_rows(probe.output_probabilities);
      for (const auto& a : probe.attention) {
        for (const auto& h : a.probabilities) check_rows(h);
      }
      if (m == &fresh && i >= 5) continue;  // beam search on the untrained default model is slow
      const auto beam = m->beam_search(tp.source, 1);
      c.expect(beam.size() == 1 && beam[0].tokens == m->greedy_decode(tp.source), "beam-1 differs from greedy");
      ++beams;
    }
  }
  c.expect(worst_row <= 1e-6, "softmax row sum off by " + fmt(worst_row));
  return c.verdict("grad-check max relative error " + fmt(gc.max_relative_error, 3) + " over " +
                   std::to_string(gc.coordinates) + " coordinates (epsilon 1e-4); " + std::to_string(rows) +
                   " softmax rows within " + fmt(worst_row, 2) + " of 1; beam-1 = greedy on " +
                   std::to_string(beams) + " sources");
}

// ---------------------------------------------------------------- 8 and 9

struct SyntheticSetup {
  std::string dir;
  std::string train, test, schema;
};

SyntheticSetup synthesize_setup(const std::string& name) {
  SyntheticSetup s;
  s.dir = testing::scratch_dir(name);
  SyntheticGrammarConfig g;
  g.train_size = 500;
  g.dev_size = 0;
  g.test_size = 100;
  g.relation_type_count = 4;
  pipeline::cmd_synthesize({g, s.dir + "/data"});
  s.train = s.dir + "/data/train.jsonl";
  s.test = s.dir + "/data/test.jsonl";
  s.schema = s.dir + "/data/schema.json";
  return s;
}

Verdict end_to_end() {
  const auto start = Clock::now();
  Check c;
  const auto s = synthesize_setup("acceptance_e2e");
  const std::string w = s.dir;
  const Json enc_train = pipeline::cmd_encode({s.train, s.schema, w + "/train.pairs.jsonl", {}, false});
  pipeline::cmd_encode({s.test, s.schema, w + "/test.pairs.jsonl", {}, false});
  pipeline::TrainStageOptions train{w + "/train.pairs.jsonl", w + "/model.bin", toy::ModelConfig{}, toy::TrainConfig{}};
  const Json tr = pipeline::cmd_train(train);
  pipeline::cmd_generate({w + "/test.pairs.jsonl", w + "/model.bin", w + "/candidates.jsonl", 5, 0});
  pipeline::cmd_select({w + "/candidates.jsonl", s.test, s.schema, w + "/predictions.jsonl", {1.0, 5}});
  pipeline::ScoreStageOptions score_opts;
  score_opts.predictions = w + "/predictions.jsonl";
  score_opts.gold = s.test;
  score_opts.schema = s.schema;
  const Json score = pipeline::cmd_score(score_opts);
  const double f1 = score["f1"].get<double>();
  const double t = seconds_since(start);
  c.expect(train.train.epochs <= 30, "more than 30 epochs");
  c.expect(f1 >= 0.95, "micro F1 " + fmt(f1) + " below 0.95");
  c.expect(t <= 600.0, "runtime " + fmt(t) + " s exceeds 10 minutes");
  return c.verdict("500 train / 100 test sentences, 4 relations, " + std::to_string(train.train.epochs) +
                   " epochs, final loss " + fmt(tr["losses"].back().get<double>(), 3) + "; micro P/R/F1 " +
                   fmt(score["precision"].get<double>()) + " / " + fmt(score["recall"].get<double>()) + " / " +
                   fmt(f1) + "; runtime " + fmt(t, 3) + " s");
}

Verdict ablation_trends() {
  const auto start = Clock::now();
  Check c;
  const auto s = synthesize_setup("acceptance_ablation");
  pipeline::AblateOptions o;
  o.train = s.train;
  o.test = s.test;
  o.schema = s.schema;
  o.work_dir = s.dir + "/grid";
  o.alphas = {Ratio{0, 1}, Ratio{1, 2}, Ratio{1, 1}};
  o.betas = {1.0, 2.0, 4.0, 100.0};
  o.seed = 9;
  o.train_config.epochs = 10;
  const auto report = pipeline::run_ablation(o);

  std::ostringstream counts;
  for (std::size_t i = 0; i < report.cells.size(); ++i) {
    const auto& row = report.cells[i];
    counts << (i ? "; " : "") << "alpha " << report.alphas[i].to_string() << ": negatives "
           << row[0].sampled_negatives << ", positives by beta";
    for (std::size_t j = 0; j < row.size(); ++j) {
      counts << ' ' << row[j].positive_predictions;
      if (j > 0) {
        c.expect(row[j].positive_predictions <= row[j - 1].positive_predictions,
                 "positive predictions rise with beta at alpha " + report.alphas[i].to_string());
      }
    }
    if (i > 0) {
      c.expect(row[0].sampled_negatives >= report.cells[i - 1][0].sampled_negatives,
               "sampled negatives fall as alpha grows");
    }
  }
  std::cout << report.to_table();
  return c.verdict(counts.str() + "; runtime " + fmt(seconds_since(start), 3) + " s");
}

// ---------------------------------------------------------------- 10

Verdict adapter_conformance() {
  Check c;
  auto compare = [&](const LoadResult& got, const std::string& expected_file, const RelationSchema& schema,
                     const std::set<std::string>& bad_ids, const std::string& name) {
    const auto expected = load_canonical(testing::fixture_path(expected_file), schema, {"", true}).examples;
    c.expect(got.examples.size() == expected.size(), name + ": " + std::to_string(got.examples.size()) +
                                                         " records, expected " + std::to_string(expected.size()));
    for (std::size_t i = 0; i < std::min(got.examples.size(), expected.size()); ++i) {
      c.expect(got.examples[i] == expected[i], name + " record " + expected[i].sentence().id() + " differs");
    }
    std::set<std::string> bad;
    for (const auto& e : got.errors) bad.insert(e.record_id);
    c.expect(bad == bad_ids, name + ": unexpected set of rejected records");
  };
  const auto semeval_schema = load_schema(testing::fixture_path("semeval_schema.json"));
  const auto semeval = load_semeval(testing::fixture_path("semeval_sample.txt"), semeval_schema);
  compare(semeval, "semeval_expected.jsonl", semeval_schema, {"10"}, "SemEval");
  const auto tacred_schema = load_schema(testing::fixture_path("tacred_schema.json"));
  const auto tacred = load_tacred(testing::fixture_path("tacred_sample.json"), tacred_schema);
  compare(tacred, "tacred_expected.jsonl", tacred_schema, {"t3"}, "TACRED");
  return c.verdict("SemEval: " + std::to_string(semeval.examples.size()) + " records + " +
                   std::to_string(semeval.errors.size()) + " rejected; TACRED: " +
                   std::to_string(tacred.examples.size()) + " records + " + std::to_string(tacred.errors.size()) +
                   " rejected; all equal to the hand-built canonical records");
}

struct Criterion {
  int number;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "golden encoding fidelity", golden_encodings},
      {2, "round-trip law", round_trip},
      {3, "pair-count law", pair_counts},
      {4, "sampling law", sampling_law},
      {5, "decoding-scaling equivalences", decoding_scaling},
      {6, "metric oracle equivalence", metric_oracle},
      {7, "toy numerical correctness", toy_numerics},
      {8, "end-to-end desk-scale run", end_to_end},
      {9, "alpha/beta count trends", ablation_trends},
      {10, "adapter conformance", adapter_conformance},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& cr : criteria) {
    if (!wanted.empty() && !wanted.count(cr.number)) continue;
    Verdict v;
    try {
      v = cr.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << cr.number << " (" << cr.name << "): " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
