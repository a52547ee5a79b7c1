#include "scatterhsd/downstream.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::downstream {

using ad::Tensor;

namespace {

std::vector<double> values_of(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::size_t argmax_row(const double* row, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
  const std::size_t cols = t.shape().back();
  const std::size_t rows = t.size() / cols;
  std::vector<std::size_t> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = argmax_row(t.data().data() + r * cols, cols);
  return out;
}

Tensor sum_all(const std::vector<Tensor>& terms) {
  Tensor acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
  return acc;
}

}  // namespace

void HFEConfig::validate() const {
  if (levels == 0) throw InvalidInput("hfe: need at least one level");
  if (k_per_level.size() != levels || sample_fractions.size() != levels ||
      level_widths.size() != levels) {
    throw InvalidInput("hfe: k_per_level, sample_fractions and level_widths must have one entry per level");
  }
  for (std::size_t l = 0; l < levels; ++l) {
    if (k_per_level[l] == 0 || level_widths[l] == 0) throw InvalidInput("hfe: zero k or width");
    if (!(sample_fractions[l] > 0.0 && sample_fractions[l] <= 1.0)) {
      throw InvalidInput("hfe: sample fractions must lie in (0, 1]");
    }
    if (l > 0 && k_per_level[l] <= k_per_level[l - 1]) {
      throw InvalidInput("hfe: k_per_level must be strictly increasing");
    }
  }
  if (head_dim == 0 || classes < 2) throw InvalidInput("hfe: head_dim must be > 0 and classes >= 2");
  if (part_classes == 1) throw InvalidInput("hfe: part_classes must be 0 or >= 2");
}

std::vector<std::size_t> canonical_order(const std::vector<double>& xyz) {
  std::vector<std::size_t> order(xyz.size() / 3);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(xyz.begin() + 3 * a, xyz.begin() + 3 * a + 3,
                                        xyz.begin() + 3 * b, xyz.begin() + 3 * b + 3);
  });
  return order;
}

std::vector<LevelPlan> plan_hierarchy(const std::vector<double>& xyz, const HFEConfig& cfg) {
  const std::size_t n = xyz.size() / 3;
  if (n < cfg.min_points()) {
    throw InvalidInput("hfe: need at least " + std::to_string(cfg.min_points()) + " points, got " +
                       std::to_string(n));
  }
  std::vector<LevelPlan> plans;
  std::vector<double> prev = xyz;
  for (std::size_t l = 0; l < cfg.levels; ++l) {
    const std::size_t available = prev.size() / 3;
    const auto wanted = static_cast<std::size_t>(std::ceil(cfg.sample_fractions[l] * static_cast<double>(n)));
    const std::size_t m = std::min(available, std::max(cfg.min_points(), wanted));
    LevelPlan plan;
    plan.k = cfg.k_per_level[l];
    plan.centroids = geometry::fps_flat(prev, m, 0);
    plan.neighbors.reserve(m * plan.k);
    plan.centroid_xyz.reserve(m * 3);
    for (std::size_t c : plan.centroids) {
      const auto nb = geometry::knn_flat(prev, prev.data() + 3 * c, plan.k);
      plan.neighbors.insert(plan.neighbors.end(), nb.begin(), nb.end());
      plan.centroid_xyz.insert(plan.centroid_xyz.end(), prev.begin() + 3 * c, prev.begin() + 3 * c + 3);
    }
    prev = plan.centroid_xyz;
    plans.push_back(std::move(plan));
  }
  return plans;
}

Downstream::Downstream(HFEConfig cfg, ad::ParameterSet& params, Rng& rng, std::string prefix)
    : cfg_(std::move(cfg)), prefix_(std::move(prefix)) {
  cfg_.validate();
  std::size_t prev_width = 0;
  for (std::size_t l = 0; l < cfg_.levels; ++l) {
    const std::string p = level_prefix(l);
    const std::size_t w = cfg_.level_widths[l];
    Level level;
    level.mlp1 = {params.add_weight(p + "mlp1.w", 3 + prev_width, w, rng), params.add_bias(p + "mlp1.b", w)};
    level.mlp2 = {params.add_weight(p + "mlp2.w", w, w, rng), params.add_bias(p + "mlp2.b", w)};
    level.align = {params.add_weight(p + "align.w", w, cfg_.head_dim, rng),
                   params.add_bias(p + "align.b", cfg_.head_dim)};
    level.classify = {params.add_weight(p + "cls.w", cfg_.head_dim, cfg_.classes, rng),
                      params.add_bias(p + "cls.b", cfg_.classes)};
    if (cfg_.part_classes > 0) {
      level.seg_hidden = {params.add_weight(p + "seg.hidden.w", w + 3, cfg_.seg_hidden, rng),
                          params.add_bias(p + "seg.hidden.b", cfg_.seg_hidden)};
      level.seg_out = {params.add_weight(p + "seg.out.w", cfg_.seg_hidden, cfg_.part_classes, rng),
                       params.add_bias(p + "seg.out.b", cfg_.part_classes)};
    }
    levels_.push_back(std::move(level));
    prev_width = w;
  }
}

std::string Downstream::level_prefix(std::size_t l) const {
  return prefix_ + "l" + std::to_string(l + 1) + ".";
}

Downstream::CloudPass Downstream::run(const Tensor& cloud) const {
  if (cloud.rank() != 2 || cloud.dim(1) != 3) throw ShapeError("hfe: expected points[N, 3]");
  CloudPass pass;
  pass.order = canonical_order(values_of(cloud));
  pass.canonical_xyz = ad::gather(cloud, pass.order);
  pass.plans = plan_hierarchy(values_of(pass.canonical_xyz), cfg_);

  Tensor prev_xyz = pass.canonical_xyz;
  Tensor prev_feat;
  for (std::size_t l = 0; l < cfg_.levels; ++l) {
    const LevelPlan& plan = pass.plans[l];
    const Level& level = levels_[l];
    const std::size_t m = plan.centroids.size();
    const std::size_t w = cfg_.level_widths[l];

    std::vector<std::size_t> owner(m * plan.k);
    for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = i / plan.k;
    const Tensor centers = ad::gather(prev_xyz, plan.centroids);
    Tensor grouped = ad::sub(ad::gather(prev_xyz, plan.neighbors), ad::gather(centers, owner));
    if (prev_feat.defined()) grouped = ad::concat({grouped, ad::gather(prev_feat, plan.neighbors)}, 1);

    Tensor h = ad::relu(ad::linear(grouped, level.mlp1.w, level.mlp1.b));
    h = ad::relu(ad::linear(h, level.mlp2.w, level.mlp2.b));
    const Tensor pooled = ad::max_over_set(ad::reshape(h, {m, plan.k, w}), 1);
    const Tensor global = ad::reshape(ad::max_over_set(pooled, 0), {1, w});
    pass.aligned.push_back(ad::relu(ad::linear(global, level.align.w, level.align.b)));
    pass.level_features.push_back(pooled);

    prev_xyz = centers;
    prev_feat = pooled;
  }
  return pass;
}

LevelOutputs Downstream::forward(const std::vector<Tensor>& clouds) const {
  if (clouds.empty()) throw InvalidInput("hfe: empty batch");
  std::vector<std::vector<Tensor>> logits(cfg_.levels), aligned(cfg_.levels);
  for (const auto& cloud : clouds) {
    const CloudPass pass = run(cloud);
    for (std::size_t l = 0; l < cfg_.levels; ++l) {
      aligned[l].push_back(pass.aligned[l]);
      logits[l].push_back(ad::linear(pass.aligned[l], levels_[l].classify.w, levels_[l].classify.b));
    }
  }
  LevelOutputs out;
  for (std::size_t l = 0; l < cfg_.levels; ++l) {
    out.logits.push_back(ad::concat(logits[l], 0));
    out.aligned_features.push_back(ad::concat(aligned[l], 0));
  }
  return out;
}

SegOutputs Downstream::forward_segment(const std::vector<Tensor>& clouds) const {
  if (cfg_.part_classes == 0) throw InvalidInput("hfe: model was built without part heads");
  if (clouds.empty()) throw InvalidInput("hfe: empty batch");
  const std::size_t n = clouds.front().dim(0);
  std::vector<std::vector<Tensor>> logits(cfg_.levels), codes(cfg_.levels);
  for (const auto& cloud : clouds) {
    if (cloud.dim(0) != n) throw ShapeError("segment: all clouds in a batch need the same size");
    const CloudPass pass = run(cloud);
    const auto canon = values_of(pass.canonical_xyz);
    std::vector<std::size_t> inverse(n);
    for (std::size_t j = 0; j < n; ++j) inverse[pass.order[j]] = j;

    for (std::size_t l = 0; l < cfg_.levels; ++l) {
      const LevelPlan& plan = pass.plans[l];
      const std::size_t kk = std::min<std::size_t>(3, plan.centroids.size());
      // Inverse-distance interpolation of level features back onto the points.
      std::vector<std::size_t> idx;
      std::vector<double> wts;
      idx.reserve(n * kk);
      wts.reserve(n * kk);
      for (std::size_t i = 0; i < n; ++i) {
        const auto nb = geometry::knn_flat(plan.centroid_xyz, canon.data() + 3 * i, kk);
        double norm = 0.0;
        std::array<double, 3> raw{};
        for (std::size_t j = 0; j < kk; ++j) {
          const double* c = plan.centroid_xyz.data() + 3 * nb[j];
          const double d = (c[0] - canon[3 * i]) * (c[0] - canon[3 * i]) +
                           (c[1] - canon[3 * i + 1]) * (c[1] - canon[3 * i + 1]) +
                           (c[2] - canon[3 * i + 2]) * (c[2] - canon[3 * i + 2]);
          raw[j] = 1.0 / (d + 1e-8);
          norm += raw[j];
        }
        for (std::size_t j = 0; j < kk; ++j) {
          idx.push_back(nb[j]);
          wts.push_back(raw[j] / norm);
        }
      }
      const Tensor interp = ad::weighted_gather(pass.level_features[l], idx, wts, kk);
      const Tensor feat = ad::concat({interp, pass.canonical_xyz}, 1);
      const Level& level = levels_[l];
      const Tensor h = ad::relu(ad::linear(feat, level.seg_hidden.w, level.seg_hidden.b));
      const Tensor point_logits = ad::linear(h, level.seg_out.w, level.seg_out.b);
      logits[l].push_back(ad::gather(point_logits, inverse));
      codes[l].push_back(pass.aligned[l]);
    }
  }
  SegOutputs out;
  for (std::size_t l = 0; l < cfg_.levels; ++l) {
    out.point_logits.push_back(
        ad::reshape(ad::concat(logits[l], 0), {clouds.size(), n, cfg_.part_classes}));
    out.shape_codes.push_back(ad::concat(codes[l], 0));
  }
  return out;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<std::size_t>& labels) {
  Tensor rows = logits;
  if (logits.rank() != 2) {
    const std::size_t cols = logits.shape().back();
    rows = ad::reshape(logits, {logits.size() / cols, cols});
  }
  if (labels.size() != rows.dim(0)) throw ShapeError("cross_entropy: one label per row required");
  for (auto y : labels) {
    if (y >= rows.dim(1)) throw InvalidInput("cross_entropy: label out of range");
  }
  return ad::scale(ad::mean(ad::pick(ad::log_softmax(rows), labels)), -1.0);
}

Tensor kl_to_teacher(const Tensor& teacher, const Tensor& student, const DistillConfig& cfg) {
  if (teacher.shape() != student.shape()) throw ShapeError("kl: teacher/student shape mismatch");
  if (!(cfg.temperature > 0.0)) throw InvalidInput("kl: temperature must be positive");
  const double inv_t = 1.0 / cfg.temperature;
  const double rows = static_cast<double>(teacher.size() / teacher.shape().back());
  const Tensor log_pt = ad::log_softmax(ad::scale(ad::detach(teacher), inv_t));
  const Tensor log_ps = ad::log_softmax(ad::scale(student, inv_t));
  Tensor terms;
  if (cfg.direction == KlDirection::teacher_to_student) {
    const Tensor pt = ad::exp(log_pt);
    terms = ad::mul(pt, ad::sub(log_pt, log_ps));
  } else {
    terms = ad::mul(ad::exp(log_ps), ad::sub(log_ps, log_pt));
  }
  return ad::scale(ad::sum(terms), 1.0 / rows);
}

LevelLosses dsn_loss(const LevelOutputs& outs, const std::vector<std::size_t>& labels) {
  LevelLosses out;
  for (const auto& logits : outs.logits) out.per_level.push_back(cross_entropy(logits, labels));
  out.total = sum_all(out.per_level);
  return out;
}

LevelLosses hsd_kl(const std::vector<Tensor>& level_logits, const DistillConfig& cfg) {
  if (level_logits.size() < 2) throw InvalidInput("hsd_kl: need at least two levels");
  LevelLosses out;
  const Tensor& teacher = level_logits.back();
  for (std::size_t l = 0; l + 1 < level_logits.size(); ++l) {
    out.per_level.push_back(kl_to_teacher(teacher, level_logits[l], cfg));
  }
  out.total = sum_all(out.per_level);
  return out;
}

LevelLosses hsd_kl(const LevelOutputs& outs, const DistillConfig& cfg) { return hsd_kl(outs.logits, cfg); }

void LossWeights::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) {
    throw InvalidInput("loss weights must be finite");
  }
  if (gamma < 0.0 || gamma > 1.0) throw InvalidInput("gamma must lie in [0, 1]");
}

double LossBreakdown::identity_residual() const {
  double ce = 0.0;
  for (std::size_t l = 0; l < ce_per_level.size(); ++l) ce += ce_level_weights[l] * ce_per_level[l];
  double kl = 0.0;
  for (double v : kl_per_level) kl += v;
  return total - (weights.alpha * rec + weights.beta * weights.gamma * ce +
                  weights.beta * (1.0 - weights.gamma) * kl);
}

LossBreakdown joint_loss(const Tensor& rec, const std::vector<Tensor>& ce_terms,
                         const std::vector<Tensor>& kl_terms, const LossWeights& w,
                         Objective objective) {
  w.validate();
  if (ce_terms.empty()) throw InvalidInput("joint_loss: no CE terms");
  LossBreakdown out;
  out.rec = rec.item();
  for (const auto& t : ce_terms) out.ce_per_level.push_back(t.item());
  for (const auto& t : kl_terms) out.kl_per_level.push_back(t.item());
  out.weights = w;
  out.ce_level_weights.assign(ce_terms.size(), 1.0);

  Tensor ce_sum;
  if (objective == Objective::baseline) {
    std::fill(out.ce_level_weights.begin(), out.ce_level_weights.end() - 1, 0.0);
    ce_sum = ce_terms.back();
  } else {
    ce_sum = sum_all(ce_terms);
  }
  if (objective != Objective::hsd) out.weights.gamma = 1.0;

  const LossWeights& eff = out.weights;
  Tensor total = ad::add(ad::scale(rec, eff.alpha), ad::scale(ce_sum, eff.beta * eff.gamma));
  if (objective == Objective::hsd && !kl_terms.empty()) {
    total = ad::add(total, ad::scale(sum_all(kl_terms), eff.beta * (1.0 - eff.gamma)));
  }
  out.total = total.item();
  out.total_tensor = std::move(total);
  return out;
}

LossBreakdown joint_loss(const Tensor& rec, const LevelOutputs& outs,
                         const std::vector<std::size_t>& labels, const LossWeights& w,
                         Objective objective, const DistillConfig& distill) {
  const auto ce = dsn_loss(outs, labels);
  std::vector<Tensor> kl;
  if (outs.levels() >= 2) kl = hsd_kl(outs, distill).per_level;
  return joint_loss(rec, ce.per_level, kl, w, objective);
}

std::vector<std::size_t> predict(const LevelOutputs& outs, PredictMode mode, std::size_t level) {
  if (outs.levels() == 0) throw InvalidInput("predict: no levels");
  switch (mode) {
    case PredictMode::teacher:
      return argmax_rows(outs.logits.back());
    case PredictMode::level:
      if (level >= outs.levels()) throw InvalidInput("predict: level out of range");
      return argmax_rows(outs.logits[level]);
    case PredictMode::mean_ensemble: {
      const Tensor& first = outs.logits.front();
      std::vector<double> avg(first.size(), 0.0);
      for (const auto& logits : outs.logits) {
        const Tensor p = ad::softmax(ad::detach(logits));
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += p[i];
      }
      const double inv = 1.0 / static_cast<double>(outs.levels());
      for (auto& v : avg) v *= inv;
      return argmax_rows(Tensor::constant(first.shape(), std::move(avg)));
    }
  }
  throw InvalidInput("predict: unknown mode");
}

std::vector<std::size_t> predict_parts(const SegOutputs& outs, std::size_t level) {
  if (level >= outs.levels()) throw InvalidInput("predict_parts: level out of range");
  return argmax_rows(outs.point_logits[level]);
}

}  // namespace scatterhsd::downstream
