#include "strokekit/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "strokekit/errors.hpp"
#include "strokekit/rng.hpp"

namespace strokekit {

using nlohmann::json;

void Hyperparams::validate() const {
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (threshold < 0.0 || threshold > 1.0) {
    throw ConfigError("threshold must be in [0, 1]");
  }
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (beta < 0.0 || beta >= 1.0) {
    throw ConfigError("beta must be in [0, 1): the update stride beta*u "
                      "must stay below 1");
  }
  if (max_segment_len < 1) throw ConfigError("max_segment_len must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (seg_hidden < 1 || cls_hidden < 1) {
    throw ConfigError("hidden widths must be >= 1");
  }
}

namespace {

std::vector<Segment> segments_from_stroke_frames(
    std::span<const int> stroke_frames, int num_frames, int max_len) {
  std::vector<StrokeEvent> events;
  events.reserve(stroke_frames.size());
  for (int frame : stroke_frames) {
    events.push_back({frame, frame, frame, 1.0});
  }
  return form_segments(events, num_frames, max_len);
}

}  // namespace

PipelineModel train(std::span<const LabeledRally> corpus,
                    const LabelSet& labels, const Hyperparams& params,
                    TrainLog* log) {
  params.validate();
  if (corpus.empty()) throw InputError("training corpus is empty");
  const int c = labels.size();
  for (const LabeledRally& rally : corpus) {
    if (rally.stroke_frames.empty()) {
      throw InputError("rally '" + rally.series.rally_id +
                       "' has no annotated strokes");
    }
    if (rally.stroke_frames.size() != rally.stroke_labels.size()) {
      throw InputError("rally '" + rally.series.rally_id +
                       "': stroke frames and labels differ in length");
    }
    for (int label : rally.stroke_labels) {
      if (label < 0 || label >= c) {
        throw InputError("rally '" + rally.series.rally_id +
                         "': stroke label outside the label set");
      }
    }
  }

  PipelineModel model;
  model.labels = labels;
  model.params = params;

  // Stage 1: stroke head on cosine targets.
  SegTrainConfig seg_config;
  seg_config.hidden_dim = params.seg_hidden;
  seg_config.epochs = params.effective_seg_epochs();
  seg_config.learning_rate = params.learning_rate;
  seg_config.sigma = params.sigma;
  seg_config.seed = derive_seed(params.seed, 1);
  SegTrainResult seg_result = train_seg_head(corpus, seg_config);
  model.seg_head = std::move(seg_result.head);
  if (log) log->seg_bce = std::move(seg_result.epoch_loss);

  // Stage 2: graph init from all known sequences, then joint epochs.
  std::vector<std::vector<int>> sequences;
  sequences.reserve(corpus.size());
  for (const LabeledRally& rally : corpus) {
    sequences.push_back(rally.stroke_labels);
  }
  model.graph = TechniqueGraph::init_from_corpus(sequences, c);

  const int dim = corpus[0].series.feature_dim;
  model.classifier =
      init_classifier(dim, params.cls_hidden, c, derive_seed(params.seed, 2));

  Rng order_rng(derive_seed(params.seed, 3));
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    order_rng.shuffle(order);
    double ce_total = 0.0;
    long long correct = 0;
    long long total = 0;
    for (std::size_t idx : order) {
      const LabeledRally& rally = corpus[idx];
      const std::vector<Segment> segments = segments_from_stroke_frames(
          rally.stroke_frames, rally.series.num_frames(),
          params.max_segment_len);
      for (std::size_t k = 0; k < segments.size(); ++k) {
        const std::vector<double> feature = aggregate_features(
            rally.series, segments[k].start, segments[k].end);
        const int gt = rally.stroke_labels[k];
        const int prev =
            k == 0 ? model.graph.null_node() : rally.stroke_labels[k - 1];
        FusedForward step;
        try {
          step = classifier_train_step(model.classifier, feature,
                                       model.graph.row(prev), params.alpha,
                                       gt, params.learning_rate);
        } catch (const TrainingError&) {
          throw TrainingError(
              "classifier training diverged: non-finite gradient", epoch);
        }
        ce_total += step.loss;
        ++total;
        if (step.predicted == gt) {
          ++correct;
        } else {
          const double u =
              params.use_uncertainty ? uncertainty(step.raw_logits) : 1.0;
          model.graph.update_row(prev, step.predicted, gt, params.beta, u);
        }
      }
    }
    const double mean_ce = ce_total / static_cast<double>(total);
    if (!std::isfinite(mean_ce)) {
      throw TrainingError("classifier training diverged: loss is not finite",
                          epoch);
    }
    if (log) {
      log->cls.push_back({mean_ce, static_cast<double>(correct) /
                                       static_cast<double>(total)});
    }
  }
  return model;
}

std::vector<int> classify_segments(const PipelineModel& model,
                                   const FrameFeatureSeries& series,
                                   std::span<const Segment> segments) {
  if (series.feature_dim != model.classifier.net.in_dim) {
    throw InputError("rally '" + series.rally_id +
                     "': feature dimension does not match the model");
  }
  std::vector<int> labels;
  labels.reserve(segments.size());
  int prev = model.graph.null_node();
  for (const Segment& seg : segments) {
    const std::vector<double> feature =
        aggregate_features(series, seg.start, seg.end);
    const std::vector<double> logits = model.classifier.logits(feature);
    const std::vector<double> fused =
        fuse(logits, model.graph.row(prev), model.params.alpha);
    const int label = argmax_index(fused);
    labels.push_back(label);
    prev = label;
  }
  return labels;
}

StrokeSequence infer(const PipelineModel& model,
                     const FrameFeatureSeries& series) {
  const std::vector<double> probabilities = model.seg_head.probabilities(series);
  const std::vector<StrokeEvent> events = extract_events(
      probabilities, model.params.threshold, model.params.sigma);
  const std::vector<Segment> segments =
      form_segments(events, series.num_frames(), model.params.max_segment_len);
  const std::vector<int> labels = classify_segments(model, series, segments);

  StrokeSequence sequence;
  sequence.rally_id = series.rally_id;
  sequence.strokes.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const StrokeEvent& ev =
        events[static_cast<std::size_t>(segments[i].source_event)];
    sequence.strokes.push_back(
        {labels[i], ev.peak_frame, segments[i].start, segments[i].end});
  }
  return sequence;
}

namespace {

json mlp_to_json(const Mlp& net) {
  return json{{"in_dim", net.in_dim},   {"hidden_dim", net.hidden_dim},
              {"out_dim", net.out_dim}, {"w1", net.w1},
              {"b1", net.b1},           {"w2", net.w2},
              {"b2", net.b2}};
}

template <typename T>
T get_field(const json& doc, const std::string& field) {
  const auto it = doc.find(field);
  if (it == doc.end()) {
    throw LoadError("model file is missing field '" + field + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw LoadError("model field '" + field + "' has the wrong type");
  }
}

Mlp mlp_from_json(const json& doc, const std::string& field) {
  const json sub = get_field<json>(doc, field);
  Mlp net;
  net.in_dim = get_field<int>(sub, "in_dim");
  net.hidden_dim = get_field<int>(sub, "hidden_dim");
  net.out_dim = get_field<int>(sub, "out_dim");
  net.w1 = get_field<std::vector<double>>(sub, "w1");
  net.b1 = get_field<std::vector<double>>(sub, "b1");
  net.w2 = get_field<std::vector<double>>(sub, "w2");
  net.b2 = get_field<std::vector<double>>(sub, "b2");
  if (net.in_dim < 1 || net.hidden_dim < 1 || net.out_dim < 1 ||
      net.w1.size() != static_cast<std::size_t>(net.hidden_dim) * net.in_dim ||
      net.b1.size() != static_cast<std::size_t>(net.hidden_dim) ||
      net.w2.size() != static_cast<std::size_t>(net.out_dim) * net.hidden_dim ||
      net.b2.size() != static_cast<std::size_t>(net.out_dim)) {
    throw LoadError("model field '" + field + "' has inconsistent shapes");
  }
  if (!net.finite()) {
    throw LoadError("model field '" + field + "' contains non-finite weights");
  }
  return net;
}

}  // namespace

void save_model(const PipelineModel& model,
                const std::filesystem::path& path) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["label_set"] = model.labels.names();
  doc["hyperparams"] = {
      {"sigma", model.params.sigma},
      {"threshold", model.params.threshold},
      {"alpha", model.params.alpha},
      {"beta", model.params.beta},
      {"max_segment_len", model.params.max_segment_len},
      {"epochs", model.params.epochs},
      {"seg_epochs", model.params.seg_epochs},
      {"learning_rate", model.params.learning_rate},
      {"seed", model.params.seed},
      {"use_uncertainty", model.params.use_uncertainty},
      {"seg_hidden", model.params.seg_hidden},
      {"cls_hidden", model.params.cls_hidden},
  };
  doc["seg_head_weights"] = mlp_to_json(model.seg_head.net);
  doc["classifier_weights"] = mlp_to_json(model.classifier.net);

  json nodes = json::array();
  for (const std::string& name : model.labels.names()) nodes.push_back(name);
  nodes.push_back(std::string(kNullNodeName));
  doc["graph_nodes"] = nodes;

  const int c = model.graph.num_labels();
  json matrix = json::array();
  for (int s = 0; s <= c; ++s) {
    const auto row = model.graph.row(s);
    matrix.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["graph_matrix"] = matrix;

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(1) << '\n';
}

PipelineModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw LoadError("model file '" + path.string() +
                    "' is not valid JSON: " + e.what());
  }

  const int version = get_field<int>(doc, "format_version");
  if (version != kModelFormatVersion) {
    throw LoadError("unsupported format_version " + std::to_string(version) +
                    " (this build reads version " +
                    std::to_string(kModelFormatVersion) + ")");
  }

  PipelineModel model;
  model.labels = LabelSet(get_field<std::vector<std::string>>(doc, "label_set"));

  const json hp = get_field<json>(doc, "hyperparams");
  model.params.sigma = get_field<double>(hp, "sigma");
  model.params.threshold = get_field<double>(hp, "threshold");
  model.params.alpha = get_field<double>(hp, "alpha");
  model.params.beta = get_field<double>(hp, "beta");
  model.params.max_segment_len = get_field<int>(hp, "max_segment_len");
  model.params.epochs = get_field<int>(hp, "epochs");
  model.params.seg_epochs = get_field<int>(hp, "seg_epochs");
  model.params.learning_rate = get_field<double>(hp, "learning_rate");
  model.params.seed = get_field<std::uint64_t>(hp, "seed");
  model.params.use_uncertainty = get_field<bool>(hp, "use_uncertainty");
  model.params.seg_hidden = get_field<int>(hp, "seg_hidden");
  model.params.cls_hidden = get_field<int>(hp, "cls_hidden");

  model.seg_head.net = mlp_from_json(doc, "seg_head_weights");
  model.classifier.net = mlp_from_json(doc, "classifier_weights");

  const auto nodes = get_field<std::vector<std::string>>(doc, "graph_nodes");
  const int c = model.labels.size();
  if (static_cast<int>(nodes.size()) != c + 1 ||
      nodes.back() != kNullNodeName) {
    throw LoadError("model field 'graph_nodes' must list the label set "
                    "followed by 'null'");
  }
  for (int i = 0; i < c; ++i) {
    if (nodes[static_cast<std::size_t>(i)] != model.labels.name(i)) {
      throw LoadError("model field 'graph_nodes' does not match 'label_set'");
    }
  }

  const auto rows =
      get_field<std::vector<std::vector<double>>>(doc, "graph_matrix");
  if (static_cast<int>(rows.size()) != c + 1) {
    throw LoadError("model field 'graph_matrix' must have C+1 rows");
  }
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(c + 1) * c);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw LoadError("model field 'graph_matrix' row width must equal the "
                      "label count");
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  model.graph = TechniqueGraph::from_matrix(c, std::move(flat));

  if (model.classifier.net.out_dim != c) {
    throw LoadError("model field 'classifier_weights' output width does not "
                    "match the label set");
  }
  if (model.classifier.net.in_dim != model.seg_head.net.in_dim) {
    throw LoadError("model fields 'seg_head_weights' and "
                    "'classifier_weights' disagree on the feature dimension");
  }
  if (model.seg_head.net.out_dim != 1) {
    throw LoadError("model field 'seg_head_weights' must have one output");
  }
  model.params.validate();
  return model;
}

}  // namespace strokekit
