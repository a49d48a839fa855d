#include "strokekit/io.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "strokekit/errors.hpp"

namespace strokekit {

using nlohmann::json;

namespace {

std::string at_line(const std::filesystem::path& path, int line) {
  return path.filename().string() + ":" + std::to_string(line);
}

// Applies `handle(record, line_number)` to every non-empty line.
template <typename Handler>
void for_each_record(const std::filesystem::path& path, Handler&& handle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(at_line(path, line_number) +
                       ": invalid JSON record: " + e.what());
    }
    try {
      handle(record, line_number);
    } catch (const json::exception& e) {
      throw InputError(at_line(path, line_number) +
                       ": malformed record: " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  return out;
}

Side parse_side(const std::string& s, const std::filesystem::path& path,
                int line) {
  if (s == "A") return Side::A;
  if (s == "B") return Side::B;
  throw InputError(at_line(path, line) + ": side must be \"A\" or \"B\", got \"" +
                   s + "\"");
}

const char* side_name(Side s) { return s == Side::A ? "A" : "B"; }

}  // namespace

std::vector<FrameFeatureSeries> read_features(
    const std::filesystem::path& path) {
  std::vector<FrameFeatureSeries> result;
  for_each_record(path, [&](const json& record, int line) {
    FrameFeatureSeries series;
    series.rally_id = record.at("rally_id").get<std::string>();
    series.fps = record.value("fps", 0.0);
    const json& frames = record.at("frames");
    if (!frames.is_array() || frames.empty()) {
      throw InputError(at_line(path, line) +
                       ": 'frames' must be a non-empty array");
    }
    series.feature_dim = static_cast<int>(frames.front().size());
    if (series.feature_dim < 1) {
      throw InputError(at_line(path, line) + ": empty feature vector");
    }
    series.data.reserve(frames.size() *
                        static_cast<std::size_t>(series.feature_dim));
    for (const json& frame : frames) {
      if (static_cast<int>(frame.size()) != series.feature_dim) {
        throw InputError(at_line(path, line) +
                         ": ragged feature vectors in rally '" +
                         series.rally_id + "'");
      }
      for (const json& v : frame) series.data.push_back(v.get<double>());
    }
    try {
      series.validate();
    } catch (const InputError& e) {
      throw InputError(at_line(path, line) + ": " + e.what());
    }
    result.push_back(std::move(series));
  });
  return result;
}

void write_features(std::span<const FrameFeatureSeries> series,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const FrameFeatureSeries& s : series) {
    json frames = json::array();
    for (int t = 0; t < s.num_frames(); ++t) {
      const auto row = s.frame(t);
      frames.push_back(std::vector<double>(row.begin(), row.end()));
    }
    const json record = {
        {"rally_id", s.rally_id}, {"fps", s.fps}, {"frames", frames}};
    out << record.dump() << '\n';
  }
}

std::vector<RallyAnnotation> read_annotations(
    const std::filesystem::path& path) {
  std::vector<RallyAnnotation> result;
  for_each_record(path, [&](const json& record, int line) {
    RallyAnnotation annotation;
    annotation.rally_id = record.at("rally_id").get<std::string>();
    for (const json& stroke : record.at("strokes")) {
      annotation.strokes.push_back(
          {stroke.at("frame").get<int>(),
           stroke.at("technique").get<std::string>()});
    }
    for (std::size_t i = 1; i < annotation.strokes.size(); ++i) {
      if (annotation.strokes[i].frame <= annotation.strokes[i - 1].frame) {
        throw InputError(at_line(path, line) + ": rally '" +
                         annotation.rally_id +
                         "' stroke frames must be strictly increasing");
      }
    }
    result.push_back(std::move(annotation));
  });
  return result;
}

void write_annotations(std::span<const RallyAnnotation> annotations,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const RallyAnnotation& annotation : annotations) {
    json strokes = json::array();
    for (const StrokeAnnotation& stroke : annotation.strokes) {
      strokes.push_back(
          {{"frame", stroke.frame}, {"technique", stroke.technique}});
    }
    const json record = {{"rally_id", annotation.rally_id},
                         {"strokes", strokes}};
    out << record.dump() << '\n';
  }
}

std::vector<RallyOutcome> read_outcomes(const std::filesystem::path& path) {
  std::vector<RallyOutcome> result;
  for_each_record(path, [&](const json& record, int line) {
    RallyOutcome outcome;
    outcome.rally_id = record.at("rally_id").get<std::string>();
    outcome.server =
        parse_side(record.at("server_side").get<std::string>(), path, line);
    outcome.winner =
        parse_side(record.at("winner_side").get<std::string>(), path, line);
    result.push_back(std::move(outcome));
  });
  return result;
}

void write_outcomes(std::span<const RallyOutcome> outcomes,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const RallyOutcome& outcome : outcomes) {
    const json record = {{"rally_id", outcome.rally_id},
                         {"server_side", side_name(outcome.server)},
                         {"winner_side", side_name(outcome.winner)}};
    out << record.dump() << '\n';
  }
}

std::vector<NamedStrokeSequence> read_predictions(
    const std::filesystem::path& path) {
  std::vector<NamedStrokeSequence> result;
  for_each_record(path, [&](const json& record, int line) {
    NamedStrokeSequence sequence;
    sequence.rally_id = record.at("rally_id").get<std::string>();
    for (const json& stroke : record.at("strokes")) {
      NamedStroke s;
      s.technique = stroke.at("technique").get<std::string>();
      s.peak_frame = stroke.at("peak_frame").get<int>();
      s.start = stroke.at("start").get<int>();
      s.end = stroke.at("end").get<int>();
      if (s.start > s.peak_frame || s.peak_frame >= s.end) {
        throw InputError(at_line(path, line) + ": rally '" +
                         sequence.rally_id +
                         "' has a peak outside its segment");
      }
      sequence.strokes.push_back(std::move(s));
    }
    result.push_back(std::move(sequence));
  });
  return result;
}

void write_predictions(std::span<const NamedStrokeSequence> predictions,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (const NamedStrokeSequence& sequence : predictions) {
    json strokes = json::array();
    for (const NamedStroke& s : sequence.strokes) {
      strokes.push_back({{"technique", s.technique},
                         {"peak_frame", s.peak_frame},
                         {"start", s.start},
                         {"end", s.end}});
    }
    const json record = {{"rally_id", sequence.rally_id},
                         {"strokes", strokes}};
    out << record.dump() << '\n';
  }
}

std::vector<LabeledRally> build_corpus(
    std::span<const FrameFeatureSeries> features,
    std::span<const RallyAnnotation> annotations, const LabelSet& labels) {
  std::unordered_map<std::string, const RallyAnnotation*> by_id;
  for (const RallyAnnotation& annotation : annotations) {
    if (!by_id.emplace(annotation.rally_id, &annotation).second) {
      throw InputError("duplicate annotation for rally '" +
                       annotation.rally_id + "'");
    }
  }

  std::vector<LabeledRally> corpus;
  corpus.reserve(features.size());
  for (const FrameFeatureSeries& series : features) {
    const auto it = by_id.find(series.rally_id);
    if (it == by_id.end()) {
      throw InputError("rally '" + series.rally_id +
                       "' has features but no annotations");
    }
    LabeledRally rally;
    rally.series = series;
    const int n = series.num_frames();
    for (const StrokeAnnotation& stroke : it->second->strokes) {
      if (stroke.frame < 0 || stroke.frame >= n) {
        throw InputError("rally '" + series.rally_id + "': stroke frame " +
                         std::to_string(stroke.frame) + " outside [0, " +
                         std::to_string(n) + ")");
      }
      rally.stroke_frames.push_back(stroke.frame);
      rally.stroke_labels.push_back(labels.require(stroke.technique));
    }
    corpus.push_back(std::move(rally));
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw InputError("annotation for rally '" +
                     by_id.begin()->first + "' has no matching features");
  }
  return corpus;
}

SynthConfig read_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("config file '" + path.string() +
                     "' is not valid JSON: " + e.what());
  }

  SynthConfig config;
  try {
    config.labels = doc.value("labels", config.labels);
    config.transition = doc.value("transition", config.transition);
    config.transition_strength =
        doc.value("transition_strength", config.transition_strength);
    config.rally_count = doc.value("rally_count", config.rally_count);
    config.strokes_per_rally =
        doc.value("strokes_per_rally", config.strokes_per_rally);
    config.gap_range = doc.value("gap_range", config.gap_range);
    config.lead_in = doc.value("lead_in", config.lead_in);
    config.tail = doc.value("tail", config.tail);
    config.max_rally_frames =
        doc.value("max_rally_frames", config.max_rally_frames);
    config.feature_dim = doc.value("feature_dim", config.feature_dim);
    config.sigma = doc.value("sigma", config.sigma);
    config.noise_scale = doc.value("noise_scale", config.noise_scale);
    config.class_mean_scale =
        doc.value("class_mean_scale", config.class_mean_scale);
    config.stroke_offset = doc.value("stroke_offset", config.stroke_offset);
    config.default_win_prob =
        doc.value("default_win_prob", config.default_win_prob);
    config.fps = doc.value("fps", config.fps);
    config.seed = doc.value("seed", config.seed);
    if (doc.contains("win_table")) {
      for (const auto& [key, value] : doc.at("win_table").items()) {
        config.win_table[key] = value.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw InputError("config file '" + path.string() + "': " + e.what());
  }
  return config;
}

void write_manifest(const json& manifest, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << manifest.dump(1) << '\n';
}

namespace {

json aggregate_to_json(const AggregateEval& agg) {
  return {{"acc", agg.accuracy},  {"edit", agg.edit},
          {"f1_10", agg.f1[0]},   {"f1_25", agg.f1[1]},
          {"f1_50", agg.f1[2]}};
}

}  // namespace

void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& path) {
  json per_rally = json::array();
  for (const RallyEval& rally : report.per_rally) {
    per_rally.push_back({{"rally_id", rally.rally_id},
                         {"acc", rally.accuracy},
                         {"edit", rally.edit},
                         {"f1_10", rally.f1[0]},
                         {"f1_25", rally.f1[1]},
                         {"f1_50", rally.f1[2]}});
  }
  const json doc = {{"per_rally", per_rally},
                    {"aggregate", aggregate_to_json(report.micro)},
                    {"aggregate_macro", aggregate_to_json(report.macro)}};
  std::ofstream out = open_out(path);
  out << doc.dump(1) << '\n';
}

void write_eval_csv(const EvalReport& report,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "rally_id,acc,edit,f1_10,f1_25,f1_50\n";
  const auto line = [&out](const std::string& id, double acc, double edit,
                           const double f1[3]) {
    std::ostringstream ss;
    ss << id << ',' << acc << ',' << edit << ',' << f1[0] << ',' << f1[1]
       << ',' << f1[2] << '\n';
    out << ss.str();
  };
  for (const RallyEval& rally : report.per_rally) {
    line(rally.rally_id, rally.accuracy, rally.edit, rally.f1);
  }
  line("aggregate_micro", report.micro.accuracy, report.micro.edit,
       report.micro.f1);
  line("aggregate_macro", report.macro.accuracy, report.macro.edit,
       report.macro.f1);
}

void write_tactics_csv(std::span<const TacticStat> stats,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "tec_1,tec_2,tec_3,occurrences,wins,scoring_rate\n";
  for (const TacticStat& stat : stats) {
    out << stat.trigram[0] << ',' << stat.trigram[1] << ',' << stat.trigram[2]
        << ',' << stat.occurrences << ',' << stat.wins << ','
        << stat.scoring_rate << '\n';
  }
}

void write_tactics_report(std::span<const TacticStat> stats, int top_k,
                          const std::filesystem::path& path) {
  json top = json::array();
  const int n = std::min<int>(top_k, static_cast<int>(stats.size()));
  for (int i = 0; i < n; ++i) {
    top.push_back({{"trigram", stats[static_cast<std::size_t>(i)].trigram},
                   {"occurrences", stats[static_cast<std::size_t>(i)].occurrences},
                   {"wins", stats[static_cast<std::size_t>(i)].wins},
                   {"scoring_rate", stats[static_cast<std::size_t>(i)].scoring_rate}});
  }
  const json doc = {{"top_tactics", top},
                    {"total_trigrams", static_cast<int>(stats.size())}};
  std::ofstream out = open_out(path);
  out << doc.dump(1) << '\n';
}

void write_followups_csv(std::span<const FollowupStat> stats,
                         const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "third,occurrences,wins,scoring_rate\n";
  for (const FollowupStat& stat : stats) {
    out << stat.third << ',' << stat.occurrences << ',' << stat.wins << ','
        << stat.scoring_rate << '\n';
  }
}

void write_loss_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "stage,epoch,loss,accuracy\n";
  for (std::size_t i = 0; i < log.seg_bce.size(); ++i) {
    out << "seg," << i << ',' << log.seg_bce[i] << ",\n";
  }
  for (std::size_t i = 0; i < log.cls.size(); ++i) {
    out << "cls," << i << ',' << log.cls[i].mean_ce << ','
        << log.cls[i].accuracy << '\n';
  }
}

}  // namespace strokekit
