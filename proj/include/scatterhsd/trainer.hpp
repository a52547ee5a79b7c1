#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "scatterhsd/checkpoint.hpp"
#include "scatterhsd/corpus.hpp"
#include "scatterhsd/downstream.hpp"
#include "scatterhsd/infoplane.hpp"
#include "scatterhsd/optim.hpp"
#include "scatterhsd/scatter.hpp"
#include "scatterhsd/upstream.hpp"

namespace scatterhsd::trainer {

enum class Schedule { step_decay, cosine };
enum class Mode { classify, segment };
/// joint trains both streams; the other two stages make up the two-stage baseline.
enum class Stage { joint, upstream_only, downstream_only };

struct ModelConfig {
  upstream::UpstreamConfig upstream;
  downstream::HFEConfig hfe;
};

/// Small networks sized for CPU-minute training runs on the procedural corpus.
ModelConfig desk_scale_model(std::size_t classes = corpus::kNumClasses, std::size_t part_classes = 0);

struct TrainConfig {
  std::size_t epochs = 60;
  std::size_t batch_size = 16;
  double lr_init = 0.001;
  Schedule schedule = Schedule::step_decay;
  double decay_factor = 0.8;
  std::size_t decay_every = 50;
  /// Cosine floor as a fraction of lr_init.
  double cosine_min_factor = 0.005;
  downstream::LossWeights weights;
  downstream::Objective objective = downstream::Objective::hsd;
  downstream::DistillConfig distill;
  std::size_t views = 8;
  std::uint64_t seed = 0;
  Mode mode = Mode::classify;
  Stage stage = Stage::joint;
  /// Stops downstream gradients from reaching the upstream.
  bool detach_reconstruction = false;
  std::size_t trace_batch = 64;
  std::size_t mi_bins = infoplane::kDefaultBins;
  /// Evaluate per-level test metrics every n epochs (0: never during training).
  std::size_t eval_every = 0;
  ad::AdamConfig adam;

  void validate() const;
};

double learning_rate(const TrainConfig& cfg, std::size_t epoch);

/// Both streams and their shared parameter set.
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;

  const ModelConfig& config() const noexcept { return cfg_; }
  ad::ParameterSet& params() noexcept { return params_; }
  const ad::ParameterSet& params() const noexcept { return params_; }
  const upstream::Upstream& up() const noexcept { return up_; }
  const downstream::Downstream& down() const noexcept { return down_; }

 private:
  ModelConfig cfg_;
  ad::ParameterSet params_;
  upstream::Upstream up_;
  downstream::Downstream down_;
};

/// One training/evaluation object: scattered views, the complete target, labels.
struct Sample {
  int class_id = 0;
  std::uint64_t spec_seed = 0;
  ad::Tensor gt;                      // [target_points, 3]
  std::vector<std::size_t> gt_parts;  // per gt point; empty for single-part classes
  std::vector<ad::Tensor> views;      // each [seeds * neighbors, 3]
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::size_t classes = 0;
};

/// Generates dense clouds, complete targets (FPS to target_points) and scattered
/// views. Training objects get `views` draws, test objects a single held-out draw.
Dataset prepare(const corpus::DatasetSplit& split, const scatter::ScatterConfig& scatter,
                std::size_t target_points, std::size_t views, std::size_t classes);

struct StepLog {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double rec = 0.0;
  std::vector<double> ce;
  std::vector<double> kl;
  double total = 0.0;
  double lr = 0.0;
  double identity_residual = 0.0;
};

struct LevelEval {
  double oa = 0.0;
  double macc = 0.0;

  bool operator==(const LevelEval&) const = default;
};

struct LevelMetrics {
  std::size_t epoch = 0;
  std::size_t level = 0;
  double oa = 0.0;
  double macc = 0.0;
  double ce = 0.0;
  double kl_gap = 0.0;
};

struct EvalReport {
  double oa = 0.0;
  double macc = 0.0;
  double cd_x1000 = 0.0;
  std::vector<LevelEval> per_level;
  double miou = 0.0;
  double ciou = 0.0;
  /// Analytic expected mIOU of a uniform-random part labeller on the same points.
  double random_miou = 0.0;
  std::size_t samples = 0;
  std::vector<std::string> warnings;

  bool operator==(const EvalReport&) const = default;
};

struct TrainResult {
  std::vector<StepLog> steps;
  std::vector<infoplane::MITrace> traces;
  std::vector<LevelMetrics> level_metrics;
  checkpoint::Checkpoint checkpoint;
  std::string checkpoint_hash;
};

using StepCallback = std::function<void(const StepLog&, const Model&)>;

/// Joint training: per step, reconstruct each scattered view, score it against the
/// complete target, classify the reconstruction, combine the losses and take one
/// optimizer step through both streams. On a NumericsError the parameters are
/// rolled back to the last good step and the error is rethrown.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg,
                  const StepCallback& on_step = {});

/// Two-stage reference: an upstream trained on reconstruction alone, then a
/// downstream trained on its frozen reconstructions, each for cfg.epochs.
TrainResult train_two_stage(Model& model, const Dataset& data, const TrainConfig& cfg);

EvalReport evaluate(const Model& model, const std::vector<Sample>& samples, std::size_t classes,
                    Mode mode, downstream::PredictMode head = downstream::PredictMode::teacher);

// Metric kernels.
double overall_accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth);
/// Unweighted mean of per-class recall over classes present in `truth`; absent
/// classes are appended to `excluded`.
double mean_class_accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth,
                           std::size_t classes, std::vector<std::size_t>* excluded = nullptr);
/// IoU per part; a part absent from both prediction and truth scores 1.
std::vector<double> part_ious(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth,
                              std::size_t parts);
/// Large-sample expected mIOU of uniform random labels on one instance: a part
/// with truth fraction f scores f / (1 + (parts - 1) * f).
double uniform_random_miou(const std::vector<std::size_t>& truth, std::size_t parts);

enum class Suite { baseline, dsn, scl, full_hsd };
std::string_view suite_name(Suite s);

/// Applies one ablation row to copies of the configs.
void apply_suite(Suite suite, ModelConfig& model, TrainConfig& train);

struct AblationRow {
  Suite suite = Suite::baseline;
  std::uint64_t seed = 0;
  std::vector<LevelEval> per_level;
  double oa = 0.0;
  double cd_x1000 = 0.0;
  std::vector<infoplane::MITrace> traces;
};

std::vector<AblationRow> ablate(const std::vector<Suite>& suites, const std::vector<std::uint64_t>& seeds,
                                const Dataset& data, const ModelConfig& model, const TrainConfig& train);

// CSV logs.
void write_steps_csv(std::ostream& out, const std::vector<StepLog>& steps);
void write_traces_csv(std::ostream& out, const std::vector<infoplane::MITrace>& traces);
void write_level_metrics_csv(std::ostream& out, const std::vector<LevelMetrics>& rows);
/// One row per (suite, seed) plus one mean row per suite: per-level OA/mAcc and CD x1000.
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace scatterhsd::trainer
