#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "strokekit/errors.hpp"
#include "strokekit/io.hpp"
#include "strokekit/metrics.hpp"
#include "strokekit/pipeline.hpp"
#include "strokekit/synth.hpp"
#include "strokekit/tactics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace strokekit;

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : csv) {
    if (ch == ',') {
      parts.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(current);
  return parts;
}

json hyperparams_to_json(const Hyperparams& p) {
  return {{"sigma", p.sigma},
          {"threshold", p.threshold},
          {"alpha", p.alpha},
          {"beta", p.beta},
          {"max_segment_len", p.max_segment_len},
          {"epochs", p.epochs},
          {"seg_epochs", p.seg_epochs},
          {"learning_rate", p.learning_rate},
          {"seed", p.seed},
          {"use_uncertainty", p.use_uncertainty},
          {"seg_hidden", p.seg_hidden},
          {"cls_hidden", p.cls_hidden}};
}

fs::path manifest_path(const fs::path& primary_output) {
  fs::path p = primary_output;
  p += ".manifest.json";
  return p;
}

struct GenArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> rallies;
};

void run_gen(const GenArgs& args) {
  SynthConfig config;
  if (!args.config_path.empty()) config = read_synth_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.rallies) config.rally_count = *args.rallies;

  const SynthCorpus corpus = generate(config);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);

  std::vector<FrameFeatureSeries> features;
  std::vector<RallyAnnotation> annotations;
  std::vector<RallyOutcome> outcomes;
  for (std::size_t i = 0; i < corpus.rallies.size(); ++i) {
    const LabeledRally& rally = corpus.rallies[i];
    features.push_back(rally.series);
    RallyAnnotation annotation;
    annotation.rally_id = rally.series.rally_id;
    for (std::size_t k = 0; k < rally.stroke_frames.size(); ++k) {
      annotation.strokes.push_back(
          {rally.stroke_frames[k],
           corpus.labels.name(rally.stroke_labels[k])});
    }
    annotations.push_back(std::move(annotation));
    outcomes.push_back({corpus.outcomes[i].rally_id, corpus.outcomes[i].server,
                        corpus.outcomes[i].winner});
  }
  write_features(features, dir / "features.jsonl");
  write_annotations(annotations, dir / "annotations.jsonl");
  write_outcomes(outcomes, dir / "outcomes.jsonl");

  json win_table = json::object();
  for (const auto& [key, value] : config.win_table) win_table[key] = value;
  const json manifest = {
      {"tool", "strokekit"},
      {"command", "gen"},
      {"options",
       {{"labels", config.labels.empty()
                       ? LabelSet::default_table_tennis().names()
                       : config.labels},
        {"transition_strength", config.transition_strength},
        {"explicit_transition", !config.transition.empty()},
        {"rally_count", config.rally_count},
        {"strokes_per_rally", config.strokes_per_rally},
        {"gap_range", config.gap_range},
        {"lead_in", config.lead_in},
        {"tail", config.tail},
        {"max_rally_frames", config.max_rally_frames},
        {"feature_dim", config.feature_dim},
        {"sigma", config.sigma},
        {"noise_scale", config.noise_scale},
        {"class_mean_scale", config.class_mean_scale},
        {"stroke_offset", config.stroke_offset},
        {"win_table", win_table},
        {"default_win_prob", config.default_win_prob},
        {"fps", config.fps},
        {"seed", config.seed}}},
      {"outputs",
       {{"features", (dir / "features.jsonl").string()},
        {"annotations", (dir / "annotations.jsonl").string()},
        {"outcomes", (dir / "outcomes.jsonl").string()}}}};
  write_manifest(manifest, dir / "gen.manifest.json");
  std::cout << "wrote " << corpus.rallies.size() << " rallies to "
            << args.out_dir << "\n";
}

struct TrainArgs {
  std::string features_path;
  std::string annotations_path;
  std::string model_path;
  std::string loss_log_path;
  std::string labels_csv;
  Hyperparams params;
  bool fixed_stride = false;
};

void run_train(const TrainArgs& args) {
  Hyperparams params = args.params;
  params.use_uncertainty = !args.fixed_stride;
  params.validate();

  const LabelSet labels = args.labels_csv.empty()
                              ? LabelSet::default_table_tennis()
                              : LabelSet(split_csv(args.labels_csv));

  const auto features = read_features(args.features_path);
  const auto annotations = read_annotations(args.annotations_path);
  const auto corpus = build_corpus(features, annotations, labels);

  TrainLog log;
  const PipelineModel model = train(corpus, labels, params, &log);
  save_model(model, args.model_path);
  if (!args.loss_log_path.empty()) write_loss_log(log, args.loss_log_path);

  const json manifest = {
      {"tool", "strokekit"},
      {"command", "train"},
      {"options",
       {{"labels", labels.names()}, {"hyperparams", hyperparams_to_json(params)}}},
      {"inputs",
       {{"features", args.features_path},
        {"annotations", args.annotations_path}}},
      {"outputs",
       {{"model", args.model_path}, {"loss_log", args.loss_log_path}}}};
  write_manifest(manifest, manifest_path(args.model_path));

  const double final_bce = log.seg_bce.empty() ? 0.0 : log.seg_bce.back();
  const double final_acc = log.cls.empty() ? 0.0 : log.cls.back().accuracy;
  std::cout << "trained on " << corpus.size() << " rallies; final seg BCE "
            << final_bce << ", final cls accuracy " << final_acc << "\n";
}

struct InferArgs {
  std::string model_path;
  std::string features_path;
  std::string out_path;
};

void run_infer(const InferArgs& args) {
  const PipelineModel model = load_model(args.model_path);
  const auto features = read_features(args.features_path);

  std::vector<NamedStrokeSequence> predictions;
  predictions.reserve(features.size());
  std::size_t total_strokes = 0;
  for (const FrameFeatureSeries& series : features) {
    const StrokeSequence sequence = infer(model, series);
    NamedStrokeSequence named;
    named.rally_id = sequence.rally_id;
    for (const PredictedStroke& stroke : sequence.strokes) {
      named.strokes.push_back({model.labels.name(stroke.label),
                               stroke.peak_frame, stroke.start, stroke.end});
    }
    total_strokes += named.strokes.size();
    predictions.push_back(std::move(named));
  }
  write_predictions(predictions, args.out_path);

  const json manifest = {
      {"tool", "strokekit"},
      {"command", "infer"},
      {"options", {{"hyperparams", hyperparams_to_json(model.params)}}},
      {"inputs",
       {{"model", args.model_path}, {"features", args.features_path}}},
      {"outputs", {{"predictions", args.out_path}}}};
  write_manifest(manifest, manifest_path(args.out_path));
  std::cout << "predicted " << total_strokes << " strokes over "
            << features.size() << " rallies\n";
}

struct EvalArgs {
  std::string pred_path;
  std::string annotations_path;
  std::string features_path;
  std::string report_path;
  std::string csv_path;
  int max_segment_len = 40;
};

void run_eval(const EvalArgs& args) {
  const auto predictions = read_predictions(args.pred_path);
  const auto annotations = read_annotations(args.annotations_path);
  const auto features = read_features(args.features_path);

  // Shared label table across ground truth and predictions.
  std::vector<std::string> names;
  auto intern = [&names](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == name) return static_cast<int>(i);
    }
    names.push_back(name);
    return static_cast<int>(names.size()) - 1;
  };

  std::unordered_map<std::string, const RallyAnnotation*> gt_by_id;
  for (const auto& a : annotations) gt_by_id[a.rally_id] = &a;
  std::unordered_map<std::string, const NamedStrokeSequence*> pred_by_id;
  for (const auto& p : predictions) pred_by_id[p.rally_id] = &p;

  std::vector<EvalPair> pairs;
  pairs.reserve(features.size());
  for (const FrameFeatureSeries& series : features) {
    const auto git = gt_by_id.find(series.rally_id);
    if (git == gt_by_id.end()) {
      throw InputError("rally '" + series.rally_id + "' missing from '" +
                       args.annotations_path + "'");
    }
    const auto pit = pred_by_id.find(series.rally_id);
    if (pit == pred_by_id.end()) {
      throw InputError("rally '" + series.rally_id + "' missing from '" +
                       args.pred_path + "'");
    }
    const int n = series.num_frames();

    std::vector<LabeledStroke> gt_strokes;
    for (const StrokeAnnotation& s : git->second->strokes) {
      gt_strokes.push_back({s.frame, intern(s.technique)});
    }
    EvalPair pair;
    pair.rally_id = series.rally_id;
    pair.gt = annotations_to_frame_labels(gt_strokes, n, args.max_segment_len);

    pair.pred.assign(static_cast<std::size_t>(n), kBackgroundLabel);
    for (const NamedStroke& s : pit->second->strokes) {
      if (s.start < 0 || s.end > n || s.start >= s.end) {
        throw InputError("rally '" + series.rally_id +
                         "': predicted segment outside the rally");
      }
      const int label = intern(s.technique);
      for (int t = s.start; t < s.end; ++t) {
        pair.pred[static_cast<std::size_t>(t)] = label;
      }
    }
    pairs.push_back(std::move(pair));
  }

  const EvalReport report = evaluate_rallies(pairs);
  write_eval_report(report, args.report_path);
  if (!args.csv_path.empty()) write_eval_csv(report, args.csv_path);

  const json manifest = {
      {"tool", "strokekit"},
      {"command", "eval"},
      {"options", {{"max_segment_len", args.max_segment_len}}},
      {"inputs",
       {{"predictions", args.pred_path},
        {"annotations", args.annotations_path},
        {"features", args.features_path}}},
      {"outputs", {{"report", args.report_path}, {"csv", args.csv_path}}}};
  write_manifest(manifest, manifest_path(args.report_path));

  std::cout << "acc " << report.micro.accuracy << "  edit "
            << report.micro.edit << "  f1@{10,25,50} " << report.micro.f1[0]
            << ", " << report.micro.f1[1] << ", " << report.micro.f1[2]
            << "  (" << report.per_rally.size() << " rallies)\n";
}

struct MineArgs {
  std::string strokes_path;
  std::string outcomes_path;
  std::string csv_path;
  std::string report_path;
  std::string prefix_csv;
  int top_k = 10;
  MineOptions options;
  bool all_windows = false;
};

// Accepts either prediction records ("peak_frame") or annotation records
// ("frame"); only the technique order matters here.
std::vector<Rally> load_rallies(const MineArgs& args) {
  const auto outcomes = read_outcomes(args.outcomes_path);
  std::unordered_map<std::string, const RallyOutcome*> outcome_by_id;
  for (const auto& o : outcomes) outcome_by_id[o.rally_id] = &o;

  std::vector<Rally> rallies;
  std::vector<NamedStrokeSequence> sequences;
  try {
    sequences = read_predictions(args.strokes_path);
  } catch (const InputError&) {
    for (const RallyAnnotation& a : read_annotations(args.strokes_path)) {
      NamedStrokeSequence seq;
      seq.rally_id = a.rally_id;
      for (const StrokeAnnotation& s : a.strokes) {
        seq.strokes.push_back({s.technique, s.frame, s.frame, s.frame + 1});
      }
      sequences.push_back(std::move(seq));
    }
  }
  for (const NamedStrokeSequence& seq : sequences) {
    const auto it = outcome_by_id.find(seq.rally_id);
    if (it == outcome_by_id.end()) {
      throw InputError("rally '" + seq.rally_id + "' missing from '" +
                       args.outcomes_path + "'");
    }
    Rally rally;
    rally.rally_id = seq.rally_id;
    for (const NamedStroke& s : seq.strokes) rally.strokes.push_back(s.technique);
    rally.server = it->second->server;
    rally.winner = it->second->winner;
    rallies.push_back(std::move(rally));
  }
  return rallies;
}

void run_mine(const MineArgs& args_in) {
  MineArgs args = args_in;
  args.options.serve_only = !args.all_windows;
  const std::vector<Rally> rallies = load_rallies(args);

  json manifest_outputs;
  if (!args.prefix_csv.empty()) {
    const auto parts = split_csv(args.prefix_csv);
    if (parts.size() != 2) {
      throw ConfigError("--prefix expects two comma-separated techniques");
    }
    const auto followups = conditional_followups(
        rallies, {parts[0], parts[1]}, args.options);
    write_followups_csv(followups, args.csv_path);
    manifest_outputs = {{"followups_csv", args.csv_path}};
    std::cout << "mined " << followups.size() << " follow-ups after "
              << parts[0] << ", " << parts[1] << "\n";
  } else {
    const auto stats = mine_tactics(rallies, args.options);
    write_tactics_csv(stats, args.csv_path);
    if (!args.report_path.empty()) {
      write_tactics_report(stats, args.top_k, args.report_path);
    }
    manifest_outputs = {{"csv", args.csv_path}, {"report", args.report_path}};
    std::cout << "mined " << stats.size() << " trigrams over "
              << rallies.size() << " rallies\n";
  }

  const json manifest = {
      {"tool", "strokekit"},
      {"command", "mine"},
      {"options",
       {{"min_occurrences", args.options.min_occurrences},
        {"serve_only", args.options.serve_only},
        {"prefix", args.prefix_csv},
        {"top_k", args.top_k}}},
      {"inputs",
       {{"strokes", args.strokes_path}, {"outcomes", args.outcomes_path}}},
      {"outputs", manifest_outputs}};
  write_manifest(manifest, manifest_path(args.csv_path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage stroke-technique recognition over per-frame "
               "feature series: event-signal segmentation, transition-graph "
               "fused classification, evaluation, tactic mining"};
  app.require_subcommand(1);

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  gen->add_option("--config", gen_args.config_path,
                  "generator config JSON (defaults when omitted)");
  gen->add_option("--out-dir", gen_args.out_dir, "output directory")
      ->required();
  std::uint64_t gen_seed = 0;
  int gen_rallies = 0;
  CLI::Option* gen_seed_opt =
      gen->add_option("--seed", gen_seed, "override config seed");
  CLI::Option* gen_rallies_opt =
      gen->add_option("--rallies", gen_rallies, "override rally count");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "train a pipeline model");
  train_cmd->add_option("--features", train_args.features_path)->required();
  train_cmd->add_option("--annotations", train_args.annotations_path)
      ->required();
  train_cmd->add_option("--model", train_args.model_path, "output model file")
      ->required();
  train_cmd->add_option("--loss-log", train_args.loss_log_path,
                        "per-epoch loss CSV");
  train_cmd->add_option("--labels", train_args.labels_csv,
                        "comma-separated technique names");
  train_cmd->add_option("--sigma", train_args.params.sigma);
  train_cmd->add_option("--threshold", train_args.params.threshold);
  train_cmd->add_option("--alpha", train_args.params.alpha);
  train_cmd->add_option("--beta", train_args.params.beta);
  train_cmd->add_option("--max-segment-len", train_args.params.max_segment_len);
  train_cmd->add_option("--epochs", train_args.params.epochs);
  train_cmd->add_option("--seg-epochs", train_args.params.seg_epochs,
                        "stage-1 epochs (-1 = same as --epochs)");
  train_cmd->add_option("--lr", train_args.params.learning_rate);
  train_cmd->add_option("--seed", train_args.params.seed);
  train_cmd->add_option("--seg-hidden", train_args.params.seg_hidden);
  train_cmd->add_option("--cls-hidden", train_args.params.cls_hidden);
  train_cmd->add_flag("--fixed-stride", train_args.fixed_stride,
                      "disable the uncertainty term in graph updates");

  InferArgs infer_args;
  CLI::App* infer_cmd =
      app.add_subcommand("infer", "predict stroke sequences");
  infer_cmd->add_option("--model", infer_args.model_path)->required();
  infer_cmd->add_option("--features", infer_args.features_path)->required();
  infer_cmd->add_option("--out", infer_args.out_path)->required();

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "score predictions against annotations");
  eval_cmd->add_option("--pred", eval_args.pred_path)->required();
  eval_cmd->add_option("--annotations", eval_args.annotations_path)
      ->required();
  eval_cmd->add_option("--features", eval_args.features_path,
                       "feature file (provides rally lengths)")
      ->required();
  eval_cmd->add_option("--report", eval_args.report_path)->required();
  eval_cmd->add_option("--csv", eval_args.csv_path);
  eval_cmd->add_option("--max-segment-len", eval_args.max_segment_len);

  MineArgs mine_args;
  CLI::App* mine_cmd =
      app.add_subcommand("mine", "mine tactic scoring rates");
  mine_cmd->add_option("--strokes", mine_args.strokes_path,
                       "predictions or annotations JSONL")
      ->required();
  mine_cmd->add_option("--outcomes", mine_args.outcomes_path)->required();
  mine_cmd->add_option("--csv", mine_args.csv_path)->required();
  mine_cmd->add_option("--report", mine_args.report_path, "top-k JSON report");
  mine_cmd->add_option("--top-k", mine_args.top_k);
  mine_cmd->add_option("--min-occurrences", mine_args.options.min_occurrences);
  mine_cmd->add_option("--prefix", mine_args.prefix_csv,
                       "mine follow-ups after \"tec1,tec2\"");
  mine_cmd->add_flag("--all-windows", mine_args.all_windows,
                     "count every trigram window, not just serve-initiated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      if (*gen_seed_opt) gen_args.seed = gen_seed;
      if (*gen_rallies_opt) gen_args.rallies = gen_rallies;
      run_gen(gen_args);
    } else if (*train_cmd) {
      run_train(train_args);
    } else if (*infer_cmd) {
      run_infer(infer_args);
    } else if (*eval_cmd) {
      run_eval(eval_args);
    } else if (*mine_cmd) {
      run_mine(mine_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
