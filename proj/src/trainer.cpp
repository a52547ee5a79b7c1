#include "scatterhsd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/parallel.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::trainer {

using ad::Tensor;

namespace {

Tensor mean_of(const std::vector<Tensor>& terms) {
  Tensor acc = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
  return ad::scale(acc, 1.0 / static_cast<double>(terms.size()));
}

std::vector<std::size_t> evenly_spaced(std::size_t total, std::size_t count) {
  count = std::min(count, total);
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i * total / count;
  return out;
}

bool has_parts(const Sample& s) { return !s.gt_parts.empty(); }

std::vector<const Sample*> usable(const std::vector<Sample>& samples, Mode mode) {
  std::vector<const Sample*> out;
  for (const auto& s : samples) {
    if (mode == Mode::classify || has_parts(s)) out.push_back(&s);
  }
  return out;
}

// Part labels of the reconstruction, transferred from the nearest target point.
std::vector<std::size_t> transfer_parts(const Tensor& pred, const Sample& s) {
  const auto map = geometry::nearest_map_flat({pred.data().begin(), pred.data().end()},
                                              {s.gt.data().begin(), s.gt.data().end()});
  std::vector<std::size_t> out(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = s.gt_parts[map[i]];
  return out;
}


// Forward pass of both streams on a batch; returns the loss breakdown.
downstream::LossBreakdown batch_loss(const Model& model, const std::vector<const Sample*>& batch,
                                     const std::vector<std::size_t>& view_of, const TrainConfig& cfg) {
  std::vector<Tensor> recs, clouds;
  std::vector<std::size_t> labels;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Sample& s = *batch[b];
    const Tensor pred = model.up().forward(s.views[view_of[b]]);
    recs.push_back(upstream::rec_loss(pred, s.gt));
    const bool sever = cfg.detach_reconstruction || cfg.stage == Stage::downstream_only;
    clouds.push_back(sever ? ad::detach(pred) : pred);
    if (cfg.mode == Mode::classify) {
      labels.push_back(static_cast<std::size_t>(s.class_id));
    } else {
      const auto parts = transfer_parts(pred, s);
      labels.insert(labels.end(), parts.begin(), parts.end());
    }
  }
  const Tensor rec = mean_of(recs);

  if (cfg.stage == Stage::upstream_only) {
    downstream::LossBreakdown lb;
    lb.rec = rec.item();
    lb.weights = {cfg.weights.alpha, 0.0, cfg.weights.gamma};
    lb.total_tensor = ad::scale(rec, cfg.weights.alpha);
    lb.total = lb.total_tensor.item();
    return lb;
  }
  if (cfg.mode == Mode::classify) {
    const auto outs = model.down().forward(clouds);
    return downstream::joint_loss(rec, outs, labels, cfg.weights, cfg.objective, cfg.distill);
  }
  const auto seg = model.down().forward_segment(clouds);
  std::vector<Tensor> ce;
  for (const auto& logits : seg.point_logits) ce.push_back(downstream::cross_entropy(logits, labels));
  std::vector<Tensor> kl;
  if (seg.levels() >= 2) kl = downstream::hsd_kl(seg.shape_codes, cfg.distill).per_level;
  return downstream::joint_loss(rec, ce, kl, cfg.weights, cfg.objective);
}

std::vector<std::string> frozen_prefixes(Stage stage) {
  switch (stage) {
    case Stage::joint:
      return {};
    case Stage::upstream_only:
      return {"down."};
    case Stage::downstream_only:
      return {"up."};
  }
  return {};
}

std::vector<infoplane::MITrace> trace(const Model& model, const std::vector<const Sample*>& batch,
                                      std::size_t epoch, std::size_t bins) {
  std::vector<Tensor> clouds;
  std::vector<std::size_t> labels;
  for (const Sample* s : batch) {
    clouds.push_back(ad::detach(model.up().forward(s->views.front())));
    labels.push_back(static_cast<std::size_t>(s->class_id));
  }
  return infoplane::trace_epoch(epoch, model.down().forward(clouds), labels, bins);
}

}  // namespace

ModelConfig desk_scale_model(std::size_t classes, std::size_t part_classes) {
  ModelConfig m;
  m.upstream.encoder_widths = {32, 64};
  m.upstream.decoder_hidden = 64;
  m.upstream.split_hidden = 32;
  m.upstream.coarse_points = 128;
  m.upstream.split_ratios = {1, 1, 2};
  m.upstream.target_points = 256;
  m.hfe.levels = 3;
  m.hfe.k_per_level = {8, 16, 24};
  m.hfe.sample_fractions = {0.25, 0.125, 0.0625};
  m.hfe.level_widths = {32, 48, 64};
  m.hfe.head_dim = 32;
  m.hfe.classes = classes;
  m.hfe.part_classes = part_classes;
  m.hfe.seg_hidden = 32;
  return m;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidInput("train: epochs must be >= 1");
  if (batch_size < 1) throw InvalidInput("train: batch_size must be >= 1");
  if (views < 1) throw InvalidInput("train: views must be >= 1");
  if (!(lr_init > 0.0)) throw InvalidInput("train: lr_init must be positive");
  if (decay_every < 1) throw InvalidInput("train: decay_every must be >= 1");
  weights.validate();
}

double learning_rate(const TrainConfig& cfg, std::size_t epoch) {
  switch (cfg.schedule) {
    case Schedule::step_decay:
      return cfg.lr_init * std::pow(cfg.decay_factor, static_cast<double>(epoch / cfg.decay_every));
    case Schedule::cosine: {
      const double lo = cfg.lr_init * cfg.cosine_min_factor;
      const double span = static_cast<double>(std::max<std::size_t>(cfg.epochs, 1));
      const double t = static_cast<double>(std::min(epoch, cfg.epochs)) / span;
      return lo + 0.5 * (cfg.lr_init - lo) * (1.0 + std::cos(std::numbers::pi * t));
    }
  }
  return cfg.lr_init;
}

Model::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      up_([&] {
        Rng rng(mix_seed(seed, 0x75));
        return upstream::Upstream(cfg_.upstream, params_, rng);
      }()),
      down_([&] {
        Rng rng(mix_seed(seed, 0x64));
        return downstream::Downstream(cfg_.hfe, params_, rng);
      }()) {
  if (cfg_.hfe.min_points() > cfg_.upstream.target_points) {
    throw InvalidInput("model: the reconstruction has fewer points than the largest k");
  }
}

Dataset prepare(const corpus::DatasetSplit& split, const scatter::ScatterConfig& scatter,
                std::size_t target_points, std::size_t views, std::size_t classes) {
  scatter.validate();
  auto build = [&](const std::vector<corpus::ShapeSpec>& specs, bool is_train) {
    std::vector<Sample> out(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) {
      const auto& spec = specs[i];
      const PointCloud dense = corpus::gen_shape(spec, scatter.source_size);
      const PointCloud gt = dense.select(geometry::fps(dense, target_points, 0));
      Sample s;
      s.class_id = spec.class_id;
      s.spec_seed = spec.rng_seed;
      s.gt = upstream::to_tensor(gt);
      if (gt.labels) {
        for (int p : *gt.labels) s.gt_parts.push_back(static_cast<std::size_t>(p));
      }
      scatter::ScatterConfig sc = scatter;
      sc.rng_seed = mix_seed(scatter.rng_seed, mix_seed(spec.rng_seed, is_train ? 1 : 2));
      for (const auto& v : scatter::multi_view(dense, sc, is_train ? views : 1)) {
        s.views.push_back(upstream::to_tensor(v));
      }
      out[i] = std::move(s);
    });
    return out;
  };
  Dataset data;
  data.train = build(split.train, true);
  data.test = build(split.test, false);
  data.classes = classes;
  return data;
}

TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  const auto pool = usable(data.train, cfg.mode);
  if (pool.empty()) throw InvalidInput("train: no usable training samples");
  for (const Sample* s : pool) {
    if (s->views.size() < std::min<std::size_t>(cfg.views, 1)) throw InvalidInput("train: sample without views");
  }
  std::vector<const Sample*> trace_batch;
  for (std::size_t i : evenly_spaced(pool.size(), cfg.trace_batch)) trace_batch.push_back(pool[i]);

  ad::Adam adam(cfg.adam);
  const auto frozen = frozen_prefixes(cfg.stage);
  TrainResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    Rng rng(mix_seed(cfg.seed, 0x1000 + epoch));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Sample*> batch;
      std::vector<std::size_t> view_of;
      for (std::size_t i = start; i < end; ++i) {
        const Sample* s = pool[order[i]];
        batch.push_back(s);
        view_of.push_back(rng.below(std::min(cfg.views, s->views.size())));
      }
      const auto last_good = checkpoint::capture(model.params());
      try {
        model.params().zero_grad();
        const auto lb = batch_loss(model, batch, view_of, cfg);
        ad::backward(lb.total_tensor);
        adam.step(model.params(), lr, frozen);
        for (const auto& [name, t] : model.params().entries()) {
          for (double v : t.data()) {
            if (!std::isfinite(v)) throw NumericsError("parameter '" + name + "' became non-finite");
          }
        }
        StepLog log{step, epoch, lb.rec, lb.ce_per_level, lb.kl_per_level, lb.total, lr,
                    lb.identity_residual()};
        if (on_step) on_step(log, model);
        result.steps.push_back(std::move(log));
      } catch (const NumericsError&) {
        checkpoint::restore(last_good, model.params());
        throw;
      }
      ++step;
    }
    if (cfg.mode == Mode::classify && cfg.stage != Stage::upstream_only && !trace_batch.empty()) {
      auto t = trace(model, trace_batch, epoch, cfg.mi_bins);
      result.traces.insert(result.traces.end(), t.begin(), t.end());
    }
    if (cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0 && cfg.stage != Stage::upstream_only &&
        cfg.mode == Mode::classify && !data.test.empty()) {
      const auto report = evaluate(model, data.test, data.classes, cfg.mode);
      std::vector<const Sample*> test_ptrs;
      for (const auto& s : data.test) test_ptrs.push_back(&s);
      const auto t = trace(model, test_ptrs, epoch, cfg.mi_bins);
      for (std::size_t l = 0; l < report.per_level.size(); ++l) {
        result.level_metrics.push_back(
            {epoch, l + 1, report.per_level[l].oa, report.per_level[l].macc, t[l].ce, t[l].kl_gap_to_teacher});
      }
    }
  }
  result.checkpoint = checkpoint::capture(model.params());
  result.checkpoint_hash = checkpoint::content_hash(result.checkpoint);
  return result;
}

TrainResult train_two_stage(Model& model, const Dataset& data, const TrainConfig& cfg) {
  TrainConfig up = cfg;
  up.stage = Stage::upstream_only;
  TrainResult first = train(model, data, up);
  TrainConfig down = cfg;
  down.stage = Stage::downstream_only;
  down.seed = mix_seed(cfg.seed, 0x2);
  TrainResult second = train(model, data, down);
  for (auto& s : second.steps) s.step += first.steps.size();
  first.steps.insert(first.steps.end(), second.steps.begin(), second.steps.end());
  second.steps = std::move(first.steps);
  return second;
}

double overall_accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth) {
  if (pred.size() != truth.size() || truth.empty()) throw InvalidInput("accuracy: size mismatch or empty");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double mean_class_accuracy(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth,
                           std::size_t classes, std::vector<std::size_t>* excluded) {
  if (pred.size() != truth.size() || truth.empty()) throw InvalidInput("accuracy: size mismatch or empty");
  std::vector<std::size_t> total(classes, 0), hit(classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= classes) throw InvalidInput("accuracy: label out of range");
    ++total[truth[i]];
    hit[truth[i]] += pred[i] == truth[i];
  }
  double acc = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (total[c] == 0) {
      if (excluded) excluded->push_back(c);
      continue;
    }
    acc += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
    ++present;
  }
  return acc / static_cast<double>(present);
}

std::vector<double> part_ious(const std::vector<std::size_t>& pred, const std::vector<std::size_t>& truth,
                              std::size_t parts) {
  if (pred.size() != truth.size()) throw InvalidInput("iou: size mismatch");
  std::vector<double> out(parts, 1.0);
  for (std::size_t p = 0; p < parts; ++p) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const bool a = pred[i] == p;
      const bool b = truth[i] == p;
      inter += a && b;
      uni += a || b;
    }
    if (uni > 0) out[p] = static_cast<double>(inter) / static_cast<double>(uni);
  }
  return out;
}

double uniform_random_miou(const std::vector<std::size_t>& truth, std::size_t parts) {
  if (truth.empty() || parts < 2) throw InvalidInput("uniform_random_miou: need points and >= 2 parts");
  std::vector<double> frac(parts, 0.0);
  for (auto t : truth) frac.at(t) += 1.0;
  double acc = 0.0;
  for (double& f : frac) {
    f /= static_cast<double>(truth.size());
    acc += f / (1.0 + static_cast<double>(parts - 1) * f);
  }
  return acc / static_cast<double>(parts);
}

EvalReport evaluate(const Model& model, const std::vector<Sample>& samples, std::size_t classes, Mode mode,
                    downstream::PredictMode head) {
  const auto pool = usable(samples, mode);
  if (pool.empty()) throw InvalidInput("evaluate: no usable samples");
  const std::size_t levels = model.config().hfe.levels;
  const std::size_t parts = model.config().hfe.part_classes;

  struct PerSample {
    double cd = 0.0;
    std::vector<std::size_t> level_pred;  // classify: one per level
    std::size_t head_pred = 0;
    std::vector<double> ious;  // segment: per part
    double random_miou = 0.0;
  };
  std::vector<PerSample> per(pool.size());
  parallel_for(pool.size(), [&](std::size_t i) {
    const Sample& s = *pool[i];
    const Tensor pred = ad::detach(model.up().forward(s.views.front()));
    PerSample r;
    r.cd = geometry::chamfer(upstream::to_cloud(pred), upstream::to_cloud(s.gt)) * 1000.0;
    if (mode == Mode::classify) {
      const auto outs = model.down().forward({pred});
      for (std::size_t l = 0; l < levels; ++l) {
        r.level_pred.push_back(downstream::predict(outs, downstream::PredictMode::level, l).front());
      }
      r.head_pred = downstream::predict(outs, head, levels - 1).front();
    } else {
      const auto seg = model.down().forward_segment({pred});
      const auto truth = transfer_parts(pred, s);
      r.ious = part_ious(downstream::predict_parts(seg, levels - 1), truth, parts);
      r.random_miou = uniform_random_miou(truth, parts);
    }
    per[i] = std::move(r);
  });

  EvalReport report;
  report.samples = pool.size();
  for (const auto& r : per) report.cd_x1000 += r.cd;
  report.cd_x1000 /= static_cast<double>(pool.size());

  if (mode == Mode::classify) {
    std::vector<std::size_t> truth, head_pred;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      truth.push_back(static_cast<std::size_t>(pool[i]->class_id));
      head_pred.push_back(per[i].head_pred);
    }
    std::vector<std::size_t> excluded;
    report.oa = overall_accuracy(head_pred, truth);
    report.macc = mean_class_accuracy(head_pred, truth, classes, &excluded);
    for (auto c : excluded) {
      report.warnings.push_back("class " + std::to_string(c) + " absent from the test set; excluded from mAcc");
    }
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<std::size_t> lp;
      for (const auto& r : per) lp.push_back(r.level_pred[l]);
      report.per_level.push_back({overall_accuracy(lp, truth), mean_class_accuracy(lp, truth, classes)});
    }
  } else {
    std::vector<double> class_iou(parts, 0.0);
    for (const auto& r : per) {
      double inst = 0.0;
      for (std::size_t p = 0; p < parts; ++p) {
        inst += r.ious[p];
        class_iou[p] += r.ious[p];
      }
      report.miou += inst / static_cast<double>(parts);
      report.random_miou += r.random_miou;
    }
    const double n = static_cast<double>(pool.size());
    report.miou /= n;
    report.random_miou /= n;
    for (double v : class_iou) report.ciou += v / n;
    report.ciou /= static_cast<double>(parts);
  }
  return report;
}

std::string_view suite_name(Suite s) {
  switch (s) {
    case Suite::baseline:
      return "baseline";
    case Suite::dsn:
      return "dsn";
    case Suite::scl:
      return "scl";
    case Suite::full_hsd:
      return "full_hsd";
  }
  return "?";
}

void apply_suite(Suite suite, ModelConfig& model, TrainConfig& train) {
  switch (suite) {
    case Suite::baseline:
      train.objective = downstream::Objective::baseline;
      break;
    case Suite::dsn:
      train.objective = downstream::Objective::hsd;
      train.weights.gamma = 1.0;
      break;
    case Suite::scl: {
      train.objective = downstream::Objective::hsd;
      const auto width = model.hfe.level_widths.back();
      std::fill(model.hfe.level_widths.begin(), model.hfe.level_widths.end(), width);
      break;
    }
    case Suite::full_hsd:
      train.objective = downstream::Objective::hsd;
      break;
  }
}

std::vector<AblationRow> ablate(const std::vector<Suite>& suites, const std::vector<std::uint64_t>& seeds,
                                const Dataset& data, const ModelConfig& model, const TrainConfig& train_cfg) {
  std::vector<AblationRow> rows;
  for (Suite suite : suites) {
    for (auto seed : seeds) {
      ModelConfig mc = model;
      TrainConfig tc = train_cfg;
      apply_suite(suite, mc, tc);
      tc.seed = seed;
      Model m(mc, seed);
      auto result = train(m, data, tc);
      const auto report = evaluate(m, data.test, data.classes, Mode::classify);
      rows.push_back({suite, seed, report.per_level, report.oa, report.cd_x1000, std::move(result.traces)});
    }
  }
  return rows;
}

void write_steps_csv(std::ostream& out, const std::vector<StepLog>& steps) {
  const std::size_t levels = steps.empty() ? 0 : steps.front().ce.size();
  out << "step,epoch,rec";
  for (std::size_t l = 0; l < levels; ++l) out << ",ce" << l + 1;
  for (std::size_t l = 0; l + 1 < levels; ++l) out << ",kl" << l + 1;
  out << ",total,lr\n";
  out.precision(17);
  for (const auto& s : steps) {
    out << s.step << ',' << s.epoch << ',' << s.rec;
    for (std::size_t l = 0; l < levels; ++l) out << ',' << (l < s.ce.size() ? s.ce[l] : 0.0);
    for (std::size_t l = 0; l + 1 < levels; ++l) out << ',' << (l < s.kl.size() ? s.kl[l] : 0.0);
    out << ',' << s.total << ',' << s.lr << '\n';
  }
}

void write_traces_csv(std::ostream& out, const std::vector<infoplane::MITrace>& traces) {
  out << "epoch,level,i_xz,i_yz,kl_gap,ce\n";
  out.precision(17);
  for (const auto& t : traces) {
    out << t.epoch << ',' << t.level << ',' << t.i_xz << ',' << t.i_yz << ',' << t.kl_gap_to_teacher << ','
        << t.ce << '\n';
  }
}

void write_level_metrics_csv(std::ostream& out, const std::vector<LevelMetrics>& rows) {
  out << "epoch,level,OA,mAcc,CE,KL-gap\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.epoch << ',' << r.level << ',' << r.oa << ',' << r.macc << ',' << r.ce << ',' << r.kl_gap << '\n';
  }
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  const std::size_t levels = rows.empty() ? 0 : rows.front().per_level.size();
  out << "suite,seed";
  for (std::size_t l = 0; l < levels; ++l) out << ",level" << l + 1 << "_oa,level" << l + 1 << "_macc";
  out << ",cd_x1000\n";
  out.precision(6);
  out << std::fixed;
  auto emit = [&](std::string_view suite, const std::string& seed, const std::vector<LevelEval>& lv, double cd) {
    out << suite << ',' << seed;
    for (const auto& e : lv) out << ',' << 100.0 * e.oa << ',' << 100.0 * e.macc;
    out << ',' << cd << '\n';
  };
  for (const auto& r : rows) emit(suite_name(r.suite), std::to_string(r.seed), r.per_level, r.cd_x1000);
  for (Suite s : {Suite::baseline, Suite::dsn, Suite::scl, Suite::full_hsd}) {
    std::vector<LevelEval> mean(levels);
    double cd = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.suite != s) continue;
      for (std::size_t l = 0; l < levels; ++l) {
        mean[l].oa += r.per_level[l].oa;
        mean[l].macc += r.per_level[l].macc;
      }
      cd += r.cd_x1000;
      ++n;
    }
    if (n == 0) continue;
    for (auto& e : mean) {
      e.oa /= static_cast<double>(n);
      e.macc /= static_cast<double>(n);
    }
    emit(suite_name(s), "mean", mean, cd / static_cast<double>(n));
  }
}

}  // namespace scatterhsd::trainer
