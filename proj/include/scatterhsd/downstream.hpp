#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scatterhsd/autodiff.hpp"
#include "scatterhsd/optim.hpp"

namespace scatterhsd {
class Rng;
}

namespace scatterhsd::downstream {

struct HFEConfig {
  std::size_t levels = 3;
  /// Neighbourhood size per level; must be strictly increasing.
  std::vector<std::size_t> k_per_level{8, 16, 24};
  /// Fraction of the input point count kept as centroids at each level. The count
  /// never drops below the last level's k, so every level can group.
  std::vector<double> sample_fractions{0.25, 0.125, 0.0625};
  std::vector<std::size_t> level_widths{64, 128, 256};
  std::size_t head_dim = 256;
  std::size_t classes = 8;
  /// > 0 builds per-level point-wise part heads.
  std::size_t part_classes = 0;
  std::size_t seg_hidden = 64;

  std::size_t min_points() const { return k_per_level.back(); }
  void validate() const;
};

/// Sampling and grouping of one level, in the index space of the previous level.
struct LevelPlan {
  std::vector<std::size_t> centroids;
  std::size_t k = 0;
  std::vector<std::size_t> neighbors;  // [centroids.size() * k], row-major
  std::vector<double> centroid_xyz;    // positions of the centroids
};

/// Lexicographic (x, y, z) ordering of a flat xyz buffer. Running the hierarchy in
/// this order makes its output independent of the input point order.
std::vector<std::size_t> canonical_order(const std::vector<double>& xyz);

/// FPS + kNN plan for all levels over points that are already in canonical order.
std::vector<LevelPlan> plan_hierarchy(const std::vector<double>& xyz, const HFEConfig& cfg);

/// Per-level outputs for a batch. logits[l] is [B, C]; aligned_features[l] is [B, head_dim].
/// The last level is the teacher.
struct LevelOutputs {
  std::vector<ad::Tensor> logits;
  std::vector<ad::Tensor> aligned_features;

  std::size_t levels() const noexcept { return logits.size(); }
};

/// Part-segmentation outputs: point_logits[l] is [B, N, P]; shape_codes[l] is
/// [B, head_dim] and is what the segmentation variant distils.
struct SegOutputs {
  std::vector<ad::Tensor> point_logits;
  std::vector<ad::Tensor> shape_codes;

  std::size_t levels() const noexcept { return point_logits.size(); }
};

/// PointNet++-style hierarchical feature extraction with one head per level.
class Downstream {
 public:
  Downstream(HFEConfig cfg, ad::ParameterSet& params, Rng& rng, std::string prefix = "down.");

  const HFEConfig& config() const noexcept { return cfg_; }

  LevelOutputs forward(const std::vector<ad::Tensor>& clouds) const;
  SegOutputs forward_segment(const std::vector<ad::Tensor>& clouds) const;

  /// Name prefix of parameters used only by level `l` (0-based).
  std::string level_prefix(std::size_t l) const;

 private:
  struct Dense {
    ad::Tensor w, b;
  };
  struct Level {
    Dense mlp1, mlp2, align, classify;
    Dense seg_hidden, seg_out;
  };
  struct CloudPass {
    std::vector<std::size_t> order;
    std::vector<LevelPlan> plans;
    std::vector<ad::Tensor> level_features;  // [m_l, width_l]
    std::vector<ad::Tensor> aligned;         // [1, head_dim]
    ad::Tensor canonical_xyz;                // [N, 3]
  };

  CloudPass run(const ad::Tensor& cloud) const;

  HFEConfig cfg_;
  std::string prefix_;
  std::vector<Level> levels_;
};

/// Mean over rows of -log softmax(logits)[label].
ad::Tensor cross_entropy(const ad::Tensor& logits, const std::vector<std::size_t>& labels);

enum class KlDirection { teacher_to_student, student_to_teacher };

struct DistillConfig {
  double temperature = 1.0;
  KlDirection direction = KlDirection::teacher_to_student;
};

/// Row-averaged KL between softmax distributions with the teacher detached: no
/// gradient reaches the teacher through this term.
ad::Tensor kl_to_teacher(const ad::Tensor& teacher, const ad::Tensor& student,
                         const DistillConfig& cfg = {});

struct LevelLosses {
  ad::Tensor total;
  std::vector<ad::Tensor> per_level;
};

/// Sum over levels of softmax cross-entropy.
LevelLosses dsn_loss(const LevelOutputs& outs, const std::vector<std::size_t>& labels);

/// Sum over students of KL(teacher || student); the last entry of `level_logits`
/// is the teacher. Requires at least two levels.
LevelLosses hsd_kl(const std::vector<ad::Tensor>& level_logits, const DistillConfig& cfg = {});
LevelLosses hsd_kl(const LevelOutputs& outs, const DistillConfig& cfg = {});

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.001;
  double gamma = 0.8;

  void validate() const;
};

/// baseline: teacher-head CE only. dsn: CE on every head, no distillation term.
/// hsd: CE on every head plus the distillation term.
enum class Objective { baseline, dsn, hsd };

struct LossBreakdown {
  double rec = 0.0;
  std::vector<double> ce_per_level;
  std::vector<double> kl_per_level;
  /// 1 for heads whose CE enters the objective, 0 otherwise.
  std::vector<double> ce_level_weights;
  double total = 0.0;
  LossWeights weights;  // effective weights (gamma is 1 for baseline and dsn)
  ad::Tensor total_tensor;

  /// total - (alpha*rec + beta*gamma*sum(w_l*ce_l) + beta*(1-gamma)*sum(kl)).
  double identity_residual() const;
};

LossBreakdown joint_loss(const ad::Tensor& rec, const std::vector<ad::Tensor>& ce_terms,
                         const std::vector<ad::Tensor>& kl_terms, const LossWeights& w,
                         Objective objective = Objective::hsd);

LossBreakdown joint_loss(const ad::Tensor& rec, const LevelOutputs& outs,
                         const std::vector<std::size_t>& labels, const LossWeights& w,
                         Objective objective = Objective::hsd, const DistillConfig& distill = {});

enum class PredictMode { teacher, level, mean_ensemble };

/// Argmax class per row. `level` is only read in PredictMode::level.
std::vector<std::size_t> predict(const LevelOutputs& outs, PredictMode mode, std::size_t level = 0);

/// Argmax part label per point for one level of a segmentation pass, [B * N].
std::vector<std::size_t> predict_parts(const SegOutputs& outs, std::size_t level);

}  // namespace scatterhsd::downstream
