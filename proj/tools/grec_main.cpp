// grec: command-line driver for the relation-triple generation pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grec/pipeline.hpp"

namespace {

using namespace grec;

struct ModelFlags {
  toy::ModelConfig model;
  toy::TrainConfig train;

  void add(CLI::App* cmd, bool with_training) {
    cmd->add_option("--embed-dim", model.embed_dim, "embedding width")->capture_default_str();
    cmd->add_option("--layers", model.layer_count, "encoder and decoder layers")->capture_default_str();
    cmd->add_option("--heads", model.head_count, "attention heads")->capture_default_str();
    cmd->add_option("--ff-dim", model.feedforward_dim, "feed-forward width")->capture_default_str();
    cmd->add_option("--max-source-len", model.max_source_len, "source token limit")->capture_default_str();
    cmd->add_option("--max-target-len", model.max_target_len, "target token limit, EOS included")
        ->capture_default_str();
    if (!with_training) return;
    cmd->add_option("--lr", train.learning_rate, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch-size", train.batch_size, "pairs per update")->capture_default_str();
    cmd->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  }
};

struct EncodingFlags {
  std::string mode = "entity-pair";
  std::string marker = "typed";
  std::string order = "sro";
  bool no_entities = false;

  void add(CLI::App* cmd, bool with_marker) {
    cmd->add_option("--mode", mode, "entity-pair | one-pass")->capture_default_str();
    cmd->add_option("--order", order, "target order: r | sro | rso | sor")->capture_default_str();
    if (!with_marker) return;
    cmd->add_option("--marker", marker, "entity markers: none | special | typed")->capture_default_str();
    cmd->add_flag("--no-entities", no_entities, "one-pass: omit the entity list block");
  }

  EncodeOptions resolve() const {
    EncodeOptions e;
    e.mode = parse_encoding_mode(mode);
    e.scheme = parse_marker_scheme(marker);
    e.order = parse_target_order(order);
    e.with_entities = !no_entities;
    return e;
  }
};

void print(const Json& summary) { std::cout << summary.dump() << std::endl; }

void progress(std::size_t epoch, double loss) {
  std::cerr << "epoch " << epoch << " loss " << loss << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation triple generation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI or TOML file with default flag values");

  // convert
  pipeline::ConvertOptions convert;
  auto* c_convert = app.add_subcommand("convert", "dataset file to canonical JSONL");
  c_convert->add_option("--adapter", convert.adapter, "tacred | semeval | canonical")->required();
  c_convert->add_option("--input,-i", convert.input)->required();
  c_convert->add_option("--output,-o", convert.output)->required();
  c_convert->add_option("--schema", convert.schema, "schema JSON")->required();
  c_convert->add_option("--null-label", convert.null_label, "dataset spelling of the null relation");
  c_convert->add_flag("--strict", convert.strict, "fail on the first bad record");

  // encode
  pipeline::EncodeStageOptions encode;
  EncodingFlags encode_flags;
  auto* c_encode = app.add_subcommand("encode", "canonical JSONL to source/target pairs");
  c_encode->add_option("--input,-i", encode.input)->required();
  c_encode->add_option("--output,-o", encode.output)->required();
  c_encode->add_option("--schema", encode.schema)->required();
  c_encode->add_flag("--strict", encode.strict);
  encode_flags.add(c_encode, true);

  // sample
  pipeline::SampleStageOptions sample;
  std::string sample_alpha = "1";
  auto* c_sample = app.add_subcommand("sample", "negative sampling over encoded pairs");
  c_sample->add_option("--input,-i", sample.input)->required();
  c_sample->add_option("--output,-o", sample.output)->required();
  c_sample->add_option("--alpha", sample_alpha, "kept fraction of negatives, decimal or a/b")->capture_default_str();
  c_sample->add_option("--seed", sample.sampling.seed)->capture_default_str();

  // train
  pipeline::TrainStageOptions train;
  ModelFlags train_flags;
  auto* c_train = app.add_subcommand("train", "train the toy seq2seq model");
  c_train->add_option("--input,-i", train.input)->required();
  c_train->add_option("--model,-o", train.model_out, "checkpoint output")->required();
  c_train->add_option("--seed", train_flags.model.seed)->capture_default_str();
  c_train->add_flag("--quiet", "no per-epoch progress");
  train_flags.add(c_train, true);

  // generate
  pipeline::GenerateStageOptions generate;
  auto* c_generate = app.add_subcommand("generate", "top-N candidates per encoded pair");
  c_generate->add_option("--input,-i", generate.input)->required();
  c_generate->add_option("--model,-m", generate.model)->required();
  c_generate->add_option("--output,-o", generate.output)->required();
  c_generate->add_option("--top-n", generate.top_n)->capture_default_str();
  c_generate->add_option("--beam-width", generate.beam_width, "0 uses top-n")->capture_default_str();

  // select
  pipeline::SelectStageOptions select;
  EncodingFlags select_flags;
  auto* c_select = app.add_subcommand("select", "pick predictions from candidates");
  c_select->add_option("--candidates,-i", select.candidates)->required();
  c_select->add_option("--data", select.data, "canonical JSONL the pairs came from")->required();
  c_select->add_option("--schema", select.schema)->required();
  c_select->add_option("--output,-o", select.output)->required();
  c_select->add_option("--beta", select.scaling.beta)->capture_default_str();
  c_select->add_option("--top-n", select.scaling.top_n)->capture_default_str();
  select_flags.add(c_select, false);

  // score
  pipeline::ScoreStageOptions score;
  std::string score_metric = "micro";
  auto* c_score = app.add_subcommand("score", "precision, recall and F1");
  c_score->add_option("--predictions,-i", score.predictions)->required();
  c_score->add_option("--gold", score.gold, "prediction-format or canonical JSONL")->required();
  c_score->add_option("--schema", score.schema)->required();
  c_score->add_option("--metric", score_metric, "micro | macro | rel | relplus")->capture_default_str();
  c_score->add_option("--report", score.report, "also write the report here");

  // synthesize
  pipeline::SynthesizeOptions synth;
  std::string synth_negative = "1/5";
  auto* c_synth = app.add_subcommand("synthesize", "templated synthetic corpus");
  auto& g = synth.grammar;
  c_synth->add_option("--out-dir,-o", synth.out_dir)->required();
  c_synth->add_option("--entity-types", g.entity_type_count)->capture_default_str();
  c_synth->add_option("--relation-types", g.relation_type_count)->capture_default_str();
  c_synth->add_option("--templates", g.templates_per_relation, "templates per relation")->capture_default_str();
  c_synth->add_option("--vocabulary", g.vocabulary_size, "filler vocabulary size")->capture_default_str();
  c_synth->add_option("--negative-fraction", synth_negative)->capture_default_str();
  c_synth->add_option("--seed", g.seed)->capture_default_str();
  c_synth->add_option("--train-size", g.train_size)->capture_default_str();
  c_synth->add_option("--dev-size", g.dev_size)->capture_default_str();
  c_synth->add_option("--test-size", g.test_size)->capture_default_str();
  c_synth->add_option("--names-per-type", g.names_per_type)->capture_default_str();

  // ablate
  pipeline::AblateOptions ablate;
  EncodingFlags ablate_encoding;
  ModelFlags ablate_model;
  std::vector<std::string> ablate_alphas{"0", "0.5", "1"};
  std::string ablate_metric = "micro";
  auto* c_ablate = app.add_subcommand("ablate", "alpha x beta grid, retraining per alpha");
  c_ablate->add_option("--train", ablate.train)->required();
  c_ablate->add_option("--test", ablate.test)->required();
  c_ablate->add_option("--schema", ablate.schema)->required();
  c_ablate->add_option("--work-dir", ablate.work_dir)->required();
  c_ablate->add_option("--alphas", ablate_alphas)->delimiter(',')->capture_default_str();
  ablate.betas = {1.0, 2.0, 4.0};
  c_ablate->add_option("--betas", ablate.betas)->delimiter(',')->capture_default_str();
  c_ablate->add_option("--seed", ablate.seed, "sampling seed")->capture_default_str();
  c_ablate->add_option("--model-seed", ablate_model.model.seed)->capture_default_str();
  c_ablate->add_option("--top-n", ablate.top_n)->capture_default_str();
  c_ablate->add_option("--metric", ablate_metric)->capture_default_str();
  ablate_encoding.add(c_ablate, true);
  ablate_model.add(c_ablate, true);

  // grad-check
  pipeline::GradCheckOptions grad;
  auto* c_grad = app.add_subcommand("grad-check", "finite-difference gradient check on a small model");
  c_grad->add_option("--input,-i", grad.input, "encoded pairs; default is a small synthetic set");
  c_grad->add_option("--pairs", grad.pair_count)->capture_default_str();
  c_grad->add_option("--epsilon", grad.epsilon)->capture_default_str();
  c_grad->add_option("--coordinates", grad.coordinates)->capture_default_str();
  c_grad->add_option("--tolerance", grad.tolerance)->capture_default_str();
  c_grad->add_option("--embed-dim", grad.model.embed_dim)->capture_default_str();
  c_grad->add_option("--layers", grad.model.layer_count)->capture_default_str();
  c_grad->add_option("--heads", grad.model.head_count)->capture_default_str();
  c_grad->add_option("--ff-dim", grad.model.feedforward_dim)->capture_default_str();
  c_grad->add_option("--seed", grad.model.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (c_convert->parsed()) {
      print(pipeline::cmd_convert(convert));
    } else if (c_encode->parsed()) {
      encode.encoding = encode_flags.resolve();
      print(pipeline::cmd_encode(encode));
    } else if (c_sample->parsed()) {
      sample.sampling.alpha = Ratio::parse(sample_alpha);
      print(pipeline::cmd_sample(sample));
    } else if (c_train->parsed()) {
      train.model = train_flags.model;
      train.train = train_flags.train;
      if (c_train->count("--quiet") == 0) train.train.on_epoch = progress;
      print(pipeline::cmd_train(train));
    } else if (c_generate->parsed()) {
      print(pipeline::cmd_generate(generate));
    } else if (c_select->parsed()) {
      select.mode = parse_encoding_mode(select_flags.mode);
      select.order = parse_target_order(select_flags.order);
      print(pipeline::cmd_select(select));
    } else if (c_score->parsed()) {
      score.mode = parse_scoring_mode(score_metric);
      print(pipeline::cmd_score(score));
    } else if (c_synth->parsed()) {
      synth.grammar.negative_fraction = Ratio::parse(synth_negative);
      print(pipeline::cmd_synthesize(synth));
    } else if (c_ablate->parsed()) {
      ablate.alphas.clear();
      for (const auto& a : ablate_alphas) ablate.alphas.push_back(Ratio::parse(a));
      ablate.encoding = ablate_encoding.resolve();
      ablate.model = ablate_model.model;
      ablate.train_config = ablate_model.train;
      ablate.scoring = parse_scoring_mode(ablate_metric);
      const Json s = pipeline::cmd_ablate(ablate);
      print(s);
    } else if (c_grad->parsed()) {
      const Json s = pipeline::cmd_grad_check(grad);
      print(s);
      if (!s["passed"].get<bool>()) {
        std::cerr << "error: gradient check exceeded tolerance\n";
        return 3;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::ordered_json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
