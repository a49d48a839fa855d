#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "strokekit/metrics.hpp"
#include "strokekit/pipeline.hpp"
#include "strokekit/synth.hpp"
#include "strokekit/tactics.hpp"
#include "strokekit/types.hpp"

namespace strokekit {

// All data files are line-delimited JSON, one record per line. Readers
// throw InputError with "file:line" context on parse or validation
// failures.

std::vector<FrameFeatureSeries> read_features(const std::filesystem::path& path);
void write_features(std::span<const FrameFeatureSeries> series,
                    const std::filesystem::path& path);

std::vector<RallyAnnotation> read_annotations(const std::filesystem::path& path);
void write_annotations(std::span<const RallyAnnotation> annotations,
                       const std::filesystem::path& path);

struct RallyOutcome {
  std::string rally_id;
  Side server = Side::A;
  Side winner = Side::A;
};

std::vector<RallyOutcome> read_outcomes(const std::filesystem::path& path);
void write_outcomes(std::span<const RallyOutcome> outcomes,
                    const std::filesystem::path& path);

// Predictions carry technique names so they are readable without the model.
struct NamedStroke {
  std::string technique;
  int peak_frame = 0;
  int start = 0;
  int end = 0;
};

struct NamedStrokeSequence {
  std::string rally_id;
  std::vector<NamedStroke> strokes;
};

std::vector<NamedStrokeSequence> read_predictions(
    const std::filesystem::path& path);
void write_predictions(std::span<const NamedStrokeSequence> predictions,
                       const std::filesystem::path& path);

// Joins features with annotations by rally_id (features order kept) and
// resolves technique names against the label set. Throws InputError on
// missing rallies, unknown labels, or unsorted stroke frames.
std::vector<LabeledRally> build_corpus(
    std::span<const FrameFeatureSeries> features,
    std::span<const RallyAnnotation> annotations, const LabelSet& labels);

SynthConfig read_synth_config(const std::filesystem::path& path);

// Reproducibility record written next to each CLI output.
void write_manifest(const nlohmann::json& manifest,
                    const std::filesystem::path& path);

void write_eval_report(const EvalReport& report,
                       const std::filesystem::path& path);
void write_eval_csv(const EvalReport& report,
                    const std::filesystem::path& path);

void write_tactics_csv(std::span<const TacticStat> stats,
                       const std::filesystem::path& path);
void write_tactics_report(std::span<const TacticStat> stats, int top_k,
                          const std::filesystem::path& path);
void write_followups_csv(std::span<const FollowupStat> stats,
                         const std::filesystem::path& path);

void write_loss_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace strokekit
