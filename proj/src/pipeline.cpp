#include "grec/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "grec/parser.hpp"

namespace grec::pipeline {

namespace fs = std::filesystem;

std::string config_hash(const Json& config) { return fnv1a_hex(config.dump()); }

namespace {

void report_errors(const std::vector<RecordError>& errors) {
  for (const auto& e : errors) std::cerr << "warning: record " << e.record_id << ": " << e.message << '\n';
}

Json summary(const std::string& stage, const Json& config) {
  Json j;
  j["stage"] = stage;
  j["config_hash"] = config_hash(config);
  return j;
}

Json model_config_json(const toy::ModelConfig& c) {
  return Json{{"embed_dim", c.embed_dim},          {"layer_count", c.layer_count},
              {"head_count", c.head_count},        {"feedforward_dim", c.feedforward_dim},
              {"max_source_len", c.max_source_len}, {"max_target_len", c.max_target_len},
              {"seed", c.seed}};
}

Json train_config_json(const toy::TrainConfig& c) {
  return Json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
              {"beta1", c.beta1},                 {"beta2", c.beta2},           {"adam_epsilon", c.adam_epsilon}};
}

Json encoding_json(const EncodeOptions& e) {
  return Json{{"mode", to_string(e.mode)},
              {"marker", to_string(e.scheme)},
              {"order", to_string(e.order)},
              {"with_entities", e.with_entities}};
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError(what + " path is required");
  if (!fs::exists(path)) throw DataError(what + " '" + path + "' does not exist");
}

std::vector<LabeledExample> load_examples(const std::string& path, const RelationSchema& schema, bool strict,
                                          std::size_t* skipped = nullptr) {
  AdapterOptions options;
  options.strict = strict;
  LoadResult result = load_canonical(path, schema, options);
  report_errors(result.errors);
  if (skipped != nullptr) *skipped = result.errors.size();
  return std::move(result.examples);
}

std::size_t count_positive(const std::vector<EncodedPair>& pairs) {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.is_positive; }));
}

}  // namespace

Json cmd_convert(const ConvertOptions& o) {
  if (o.adapter != "tacred" && o.adapter != "semeval" && o.adapter != "canonical") {
    throw UsageError("unknown adapter '" + o.adapter + "' (expected tacred, semeval or canonical)");
  }
  require_file(o.input, "input");
  require_file(o.schema, "schema");
  if (o.output.empty()) throw UsageError("output path is required");
  const RelationSchema schema = load_schema(o.schema);
  AdapterOptions adapter;
  adapter.null_label = o.null_label;
  adapter.strict = o.strict;
  LoadResult result;
  if (o.adapter == "tacred") {
    result = load_tacred(o.input, schema, adapter);
  } else if (o.adapter == "semeval") {
    result = load_semeval(o.input, schema, adapter);
  } else {
    result = load_canonical(o.input, schema, adapter);
  }
  report_errors(result.errors);
  write_canonical(result.examples, o.output);

  const Json config{{"adapter", o.adapter}, {"input", o.input},           {"schema", o.schema},
                    {"output", o.output},   {"null_label", o.null_label}, {"strict", o.strict}};
  Json s = summary("convert", config);
  s["adapter"] = o.adapter;
  s["records"] = result.examples.size();
  s["skipped"] = result.errors.size();
  return s;
}

Json cmd_encode(const EncodeStageOptions& o) {
  require_file(o.input, "input");
  require_file(o.schema, "schema");
  if (o.output.empty()) throw UsageError("output path is required");
  const RelationSchema schema = load_schema(o.schema);
  std::size_t skipped_records = 0;
  const auto examples = load_examples(o.input, schema, o.strict, &skipped_records);
  const EncodeResult result = encode_dataset(examples, o.encoding, schema);
  if (o.strict && !result.errors.empty()) {
    throw DataError("record " + result.errors.front().record_id + ": " + result.errors.front().message);
  }
  report_errors(result.errors);
  write_encoded_pairs(result.pairs, o.output);

  Json config = encoding_json(o.encoding);
  config["input"] = o.input;
  config["schema"] = o.schema;
  config["output"] = o.output;
  config["strict"] = o.strict;
  Json s = summary("encode", config);
  s["sentences"] = examples.size();
  s["pairs"] = result.pairs.size();
  s["positives"] = count_positive(result.pairs);
  s["negatives"] = result.pairs.size() - count_positive(result.pairs);
  s["skipped"] = skipped_records + result.errors.size();
  return s;
}

Json cmd_sample(const SampleStageOptions& o) {
  if (o.sampling.alpha.num > o.sampling.alpha.den) {
    throw UsageError("alpha must lie in [0, 1], got " + o.sampling.alpha.to_string());
  }
  require_file(o.input, "input");
  if (o.output.empty()) throw UsageError("output path is required");
  const auto pairs = read_encoded_pairs(o.input);
  const auto kept = sample_negatives(pairs, o.sampling);
  write_encoded_pairs(kept, o.output);

  const Json config{{"input", o.input},
                    {"output", o.output},
                    {"alpha", o.sampling.alpha.to_string()},
                    {"seed", o.sampling.seed}};
  Json s = summary("sample", config);
  s["alpha"] = o.sampling.alpha.to_string();
  s["seed"] = o.sampling.seed;
  s["positives"] = count_positive(kept);
  s["negatives_in"] = pairs.size() - count_positive(pairs);
  s["negatives_out"] = kept.size() - count_positive(kept);
  return s;
}

Json cmd_train(const TrainStageOptions& o) {
  require_file(o.input, "input");
  if (o.model_out.empty()) throw UsageError("model output path is required");
  toy::validate_model_config(o.model);
  toy::validate_train_config(o.train);
  const auto pairs = read_encoded_pairs(o.input);
  if (pairs.empty()) throw DataError("training file '" + o.input + "' has no pairs");
  const toy::Vocab vocab = toy::Vocab::build(pairs);
  const toy::TrainResult result = toy::train(pairs, vocab, o.model, o.train);
  result.model.save(o.model_out);

  Json config{{"input", o.input}, {"model_out", o.model_out}};
  config["model"] = model_config_json(o.model);
  config["train"] = train_config_json(o.train);
  Json s = summary("train", config);
  s["pairs"] = pairs.size();
  s["vocab"] = vocab.size();
  s["parameters"] = result.model.parameter_count();
  s["epochs"] = o.train.epochs;
  s["seed"] = o.model.seed;
  s["losses"] = result.epoch_losses;
  return s;
}

Json cmd_generate(const GenerateStageOptions& o) {
  require_file(o.input, "input");
  require_file(o.model, "model");
  if (o.output.empty()) throw UsageError("output path is required");
  if (o.top_n == 0) throw UsageError("top-n must be positive");
  const auto pairs = read_encoded_pairs(o.input);
  auto model = std::make_shared<const toy::Model>(toy::Model::load(o.model));
  const toy::ToyBackend backend(model, o.beam_width);

  JsonlWriter out(o.output);
  std::size_t candidates = 0;
  for (const auto& p : pairs) {
    CandidateRecord r{p.sentence_id, p.subj_idx, p.obj_idx, p.source, {}};
    try {
      r.candidates = backend.generate_top_n({p.source, o.top_n});
    } catch (const DataError& e) {
      throw DataError("pair from sentence '" + p.sentence_id + "': " + e.what());
    }
    candidates += r.candidates.size();
    out.write(candidate_record_to_json(r));
  }
  out.close();

  const Json config{{"input", o.input},
                    {"model", o.model},
                    {"output", o.output},
                    {"top_n", o.top_n},
                    {"beam_width", o.beam_width}};
  Json s = summary("generate", config);
  s["pairs"] = pairs.size();
  s["candidates"] = candidates;
  s["top_n"] = o.top_n;
  return s;
}

Json cmd_select(const SelectStageOptions& o) {
  require_file(o.candidates, "candidates");
  require_file(o.data, "data");
  require_file(o.schema, "schema");
  if (o.output.empty()) throw UsageError("output path is required");
  validate_scaling_config(o.scaling);
  const RelationSchema schema = load_schema(o.schema);
  const auto examples = load_examples(o.data, schema, true);
  const auto records = read_candidate_records(o.candidates);

  std::unordered_map<std::string, std::size_t> index;
  std::vector<PredictionRecord> predictions;
  for (const auto& ex : examples) {
    index.emplace(ex.sentence().id(), predictions.size());
    predictions.push_back({ex.sentence().id(), {}});
  }

  std::size_t positives = 0, empty = 0, malformed = 0, dropped = 0;
  for (const auto& r : records) {
    auto it = index.find(r.sentence_id);
    if (it == index.end()) throw DataError("candidate sentence id '" + r.sentence_id + "' not found in data");
    const Sentence& sentence = examples[it->second].sentence();
    auto& out = predictions[it->second].triples;
    auto add = [&](RelationTriple t, double score) {
      for (const auto& existing : out) {
        if (existing.triple == t) return;
      }
      out.push_back({std::move(t), score});
      ++positives;
    };

    if (o.mode == EncodingMode::EntityPair) {
      if (!r.subj_idx || !r.obj_idx || *r.subj_idx >= sentence.entities().size() ||
          *r.obj_idx >= sentence.entities().size()) {
        throw DataError("candidate record for sentence '" + r.sentence_id + "' has no valid entity pair");
      }
      const Entity& subj = sentence.entities()[*r.subj_idx];
      const Entity& obj = sentence.entities()[*r.obj_idx];
      const SelectedPrediction p = select_prediction(r.candidates, o.scaling, subj, obj, schema, o.order);
      empty += p.empty_candidates ? 1 : 0;
      malformed += p.malformed ? 1 : 0;
      if (p.is_positive(schema)) add(p.triple, p.score);
    } else {
      auto cands = normalize_candidates(r.candidates);
      if (cands.empty()) {
        ++empty;
        continue;
      }
      const ParseOutcome parsed = parse_target(cands.front().text, o.order);
      if (!parsed.ok()) {
        ++malformed;
        continue;
      }
      const OnePassResolution res = resolve_one_pass(parsed.triples(), sentence, schema, o.order);
      dropped += res.dropped;
      for (const auto& t : res.triples) {
        if (!schema.is_null(t.relation())) add(t, cands.front().score);
      }
    }
  }
  write_prediction_records(predictions, o.output);

  const Json config{{"candidates", o.candidates}, {"data", o.data},
                    {"schema", o.schema},         {"output", o.output},
                    {"beta", o.scaling.beta},     {"top_n", o.scaling.top_n},
                    {"mode", to_string(o.mode)},  {"order", to_string(o.order)}};
  Json s = summary("select", config);
  s["sentences"] = predictions.size();
  s["records"] = records.size();
  s["positive_predictions"] = positives;
  s["empty_candidates"] = empty;
  s["malformed"] = malformed;
  s["dropped_blocks"] = dropped;
  s["beta"] = o.scaling.beta;
  return s;
}

Json cmd_score(const ScoreStageOptions& o) {
  require_file(o.predictions, "predictions");
  require_file(o.gold, "gold");
  require_file(o.schema, "schema");
  const RelationSchema schema = load_schema(o.schema);
  const ScoreReport report = score_run(o.predictions, o.gold, o.mode, schema);
  const Json config{{"predictions", o.predictions}, {"gold", o.gold}, {"schema", o.schema}, {"mode", to_string(o.mode)}};
  Json s = summary("score", config);
  s.update(report.to_json());
  if (!o.report.empty()) {
    JsonlWriter out(o.report);
    out.write(s);
    out.close();
  }
  return s;
}

Json cmd_synthesize(const SynthesizeOptions& o) {
  if (o.out_dir.empty()) throw UsageError("output directory is required");
  validate_synthetic_config(o.grammar);
  const SyntheticCorpus corpus = synthesize_corpus(o.grammar);
  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  write_canonical(corpus.train, (dir / "train.jsonl").string());
  write_canonical(corpus.dev, (dir / "dev.jsonl").string());
  write_canonical(corpus.test, (dir / "test.jsonl").string());
  write_schema(corpus.schema, (dir / "schema.json").string());

  const auto& g = o.grammar;
  const Json config{{"entity_type_count", g.entity_type_count},
                    {"relation_type_count", g.relation_type_count},
                    {"templates_per_relation", g.templates_per_relation},
                    {"vocabulary_size", g.vocabulary_size},
                    {"negative_fraction", g.negative_fraction.to_string()},
                    {"seed", g.seed},
                    {"train_size", g.train_size},
                    {"dev_size", g.dev_size},
                    {"test_size", g.test_size},
                    {"names_per_type", g.names_per_type},
                    {"out_dir", o.out_dir}};
  Json s = summary("synthesize", config);
  s["train"] = corpus.train.size();
  s["dev"] = corpus.dev.size();
  s["test"] = corpus.test.size();
  s["relation_types"] = corpus.schema.relation_types().size();
  s["seed"] = g.seed;
  return s;
}

// ---------------------------------------------------------------- ablation

Json AblationReport::to_json() const {
  Json j;
  Json a = Json::array();
  for (const auto& r : alphas) a.push_back(r.to_string());
  j["alphas"] = std::move(a);
  j["betas"] = betas;
  Json rows = Json::array();
  for (const auto& row : cells) {
    Json jr = Json::array();
    for (const auto& c : row) {
      jr.push_back(Json{{"precision", to_double(c.prf.precision)},
                        {"recall", to_double(c.prf.recall)},
                        {"f1", to_double(c.prf.f1)},
                        {"positive_predictions", c.positive_predictions},
                        {"sampled_negatives", c.sampled_negatives},
                        {"training_pairs", c.training_pairs}});
    }
    rows.push_back(std::move(jr));
  }
  j["cells"] = std::move(rows);
  return j;
}

std::string AblationReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << std::setw(8) << "alpha";
  for (double b : betas) {
    std::ostringstream head;
    head << "beta=" << b;
    out << " | " << std::setw(20) << head.str();
  }
  out << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << std::setw(8) << alphas[i].to_string();
    for (const auto& c : cells[i]) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << 100.0 * to_double(c.prf.precision) << " / "
           << 100.0 * to_double(c.prf.recall) << " / " << 100.0 * to_double(c.prf.f1);
      out << " | " << std::setw(20) << cell.str();
    }
    out << '\n';
  }
  return out.str();
}

AblationReport run_ablation(const AblateOptions& o) {
  if (o.alphas.empty() || o.betas.empty()) throw UsageError("ablation grid needs at least one alpha and one beta");
  for (const auto& a : o.alphas) {
    if (a.num > a.den) throw UsageError("alpha " + a.to_string() + " is greater than 1");
  }
  for (double b : o.betas) validate_scaling_config({b, o.top_n});
  if (o.work_dir.empty()) throw UsageError("work directory is required");
  fs::create_directories(o.work_dir);
  const fs::path dir(o.work_dir);

  const std::string train_pairs = (dir / "train.pairs.jsonl").string();
  const std::string test_pairs = (dir / "test.pairs.jsonl").string();
  cmd_encode({o.train, o.schema, train_pairs, o.encoding, false});
  cmd_encode({o.test, o.schema, test_pairs, o.encoding, false});

  AblationReport report;
  report.alphas = o.alphas;
  report.betas = o.betas;
  for (std::size_t i = 0; i < o.alphas.size(); ++i) {
    const fs::path adir = dir / ("alpha-" + std::to_string(i));
    fs::create_directories(adir);
    const std::string sampled = (adir / "train.sampled.jsonl").string();
    const std::string model = (adir / "model.bin").string();
    const std::string candidates = (adir / "candidates.jsonl").string();
    const Json sample = cmd_sample({train_pairs, sampled, {o.alphas[i], o.seed}});
    cmd_train({sampled, model, o.model, o.train_config});
    cmd_generate({test_pairs, model, candidates, o.top_n, 0});

    std::vector<AblationCell> row;
    for (std::size_t j = 0; j < o.betas.size(); ++j) {
      const std::string preds = (adir / ("predictions.beta-" + std::to_string(j) + ".jsonl")).string();
      const Json sel = cmd_select({candidates, o.test, o.schema, preds, {o.betas[j], o.top_n}, o.encoding.mode,
                                   o.encoding.order});
      const ScoreReport score = score_run(preds, o.test, o.scoring, load_schema(o.schema));
      AblationCell cell;
      cell.alpha = o.alphas[i];
      cell.beta = o.betas[j];
      cell.prf = score.micro;
      if (o.scoring == ScoringMode::MacroSemEval) {
        cell.prf.f1 = score.macro.macro_f1;
      }
      cell.positive_predictions = sel["positive_predictions"].get<std::size_t>();
      cell.sampled_negatives = sample["negatives_out"].get<std::size_t>();
      cell.training_pairs = sample["positives"].get<std::size_t>() + cell.sampled_negatives;
      row.push_back(std::move(cell));
    }
    report.cells.push_back(std::move(row));
  }
  return report;
}

Json cmd_ablate(const AblateOptions& o) {
  require_file(o.train, "train");
  require_file(o.test, "test");
  require_file(o.schema, "schema");
  const AblationReport report = run_ablation(o);
  const fs::path dir(o.work_dir);
  {
    JsonlWriter out((dir / "report.json").string());
    out.write(report.to_json());
    out.close();
  }
  {
    std::ofstream table(dir / "report.txt");
    table << report.to_table();
    if (!table) throw DataError("cannot write ablation table in '" + o.work_dir + "'");
  }

  Json alphas = Json::array();
  for (const auto& a : o.alphas) alphas.push_back(a.to_string());
  Json config = encoding_json(o.encoding);
  config["train"] = o.train;
  config["test"] = o.test;
  config["schema"] = o.schema;
  config["work_dir"] = o.work_dir;
  config["alphas"] = alphas;
  config["betas"] = o.betas;
  config["seed"] = o.seed;
  config["top_n"] = o.top_n;
  config["scoring"] = to_string(o.scoring);
  config["model"] = model_config_json(o.model);
  config["train_config"] = train_config_json(o.train_config);
  Json s = summary("ablate", config);
  s.update(report.to_json());
  return s;
}

Json cmd_grad_check(const GradCheckOptions& o) {
  if (o.pair_count == 0) throw UsageError("grad-check needs at least one pair");
  std::vector<EncodedPair> pairs;
  if (o.input.empty()) {
    SyntheticGrammarConfig g;
    g.train_size = 20;
    g.dev_size = 0;
    g.test_size = 0;
    const SyntheticCorpus corpus = synthesize_corpus(g);
    pairs = encode_dataset(corpus.train, EncodeOptions{}, corpus.schema).pairs;
  } else {
    require_file(o.input, "input");
    pairs = read_encoded_pairs(o.input);
  }
  if (pairs.size() > o.pair_count) pairs.resize(o.pair_count);
  if (pairs.empty()) throw DataError("no pairs available for the gradient check");

  const toy::Model model(o.model, toy::Vocab::build(pairs));
  std::vector<toy::TokenizedPair> batch;
  for (const auto& p : pairs) batch.push_back(model.tokenize(p));
  const toy::GradCheckResult r = toy::grad_check(model, batch, o.epsilon, o.coordinates, o.model.seed);

  Json config{{"input", o.input},
              {"pair_count", o.pair_count},
              {"epsilon", o.epsilon},
              {"coordinates", o.coordinates},
              {"tolerance", o.tolerance}};
  config["model"] = model_config_json(o.model);
  Json s = summary("grad-check", config);
  s["parameters"] = model.parameter_count();
  s["coordinates"] = r.coordinates;
  s["max_relative_error"] = r.max_relative_error;
  s["passed"] = r.max_relative_error < o.tolerance;
  return s;
}

}  // namespace grec::pipeline
