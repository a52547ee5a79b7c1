#include "scatterhsd/upstream.hpp"

#include <numeric>

#include "scatterhsd/error.hpp"
#include "scatterhsd/geometry.hpp"
#include "scatterhsd/random.hpp"

namespace scatterhsd::upstream {

using ad::Tensor;

void UpstreamConfig::validate() const {
  if (encoder_widths.empty()) throw InvalidInput("upstream: encoder_widths must not be empty");
  for (auto w : encoder_widths) {
    if (w == 0) throw InvalidInput("upstream: zero encoder width");
  }
  if (coarse_points == 0 || decoder_hidden == 0 || split_hidden == 0) {
    throw InvalidInput("upstream: sizes must be positive");
  }
  std::size_t total = coarse_points;
  for (auto r : split_ratios) {
    if (r == 0) throw InvalidInput("upstream: split ratios must be >= 1");
    total *= r;
  }
  if (total != target_points) {
    throw InvalidInput("upstream: coarse_points * prod(split_ratios) = " + std::to_string(total) +
                       " but target_points = " + std::to_string(target_points));
  }
  if (!(offset_bound > 0.0)) throw InvalidInput("upstream: offset_bound must be positive");
}

Upstream::Upstream(UpstreamConfig cfg, ad::ParameterSet& params, Rng& rng, std::string prefix)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::size_t in = 3;
  for (std::size_t i = 0; i < cfg_.encoder_widths.size(); ++i) {
    const auto w = cfg_.encoder_widths[i];
    const auto name = prefix + "enc" + std::to_string(i);
    encoder_.push_back({params.add_weight(name + ".w", in, w, rng), params.add_bias(name + ".b", w)});
    in = w;
  }
  const auto code = cfg_.code_size();
  dec_hidden_ = {params.add_weight(prefix + "dec.hidden.w", code, cfg_.decoder_hidden, rng),
                 params.add_bias(prefix + "dec.hidden.b", cfg_.decoder_hidden)};
  dec_out_ = {params.add_weight(prefix + "dec.coarse.w", cfg_.decoder_hidden, cfg_.coarse_points * 3, rng),
              params.add_bias(prefix + "dec.coarse.b", cfg_.coarse_points * 3)};
  for (std::size_t s = 0; s < cfg_.split_ratios.size(); ++s) {
    const auto name = prefix + "split" + std::to_string(s);
    const auto r = cfg_.split_ratios[s];
    stages_.push_back({r,
                       {params.add_weight(name + ".hidden.w", 3 + code, cfg_.split_hidden, rng),
                        params.add_bias(name + ".hidden.b", cfg_.split_hidden)},
                       {params.add_weight(name + ".offset.w", cfg_.split_hidden, 3 * r, rng),
                        params.add_bias(name + ".offset.b", 3 * r)}});
  }
}

Tensor Upstream::encode(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != 3) throw ShapeError("encode: expected points[N, 3]");
  if (x.dim(0) < kMinInputPoints) {
    throw InvalidInput("encode: need at least " + std::to_string(kMinInputPoints) + " points, got " +
                       std::to_string(x.dim(0)));
  }
  Tensor h = x;
  for (const auto& layer : encoder_) {
    h = ad::relu(ad::linear(h, layer.w, layer.b));
  }
  return ad::max_over_set(h, 0);
}

Tensor Upstream::decode_coarse(const Tensor& code) const {
  if (code.rank() != 1 || code.dim(0) != cfg_.code_size()) {
    throw ShapeError("decode: expected code[" + std::to_string(cfg_.code_size()) + "], got " +
                     ad::shape_string(code.shape()));
  }
  const Tensor row = ad::reshape(code, {1, cfg_.code_size()});
  const Tensor h = ad::relu(ad::linear(row, dec_hidden_.w, dec_hidden_.b));
  return ad::reshape(ad::linear(h, dec_out_.w, dec_out_.b), {cfg_.coarse_points, 3});
}

Tensor Upstream::decode(const Tensor& code) const {
  Tensor pts = decode_coarse(code);
  const Tensor row = ad::reshape(code, {1, cfg_.code_size()});
  for (const auto& stage : stages_) {
    const std::size_t n = pts.dim(0);
    const Tensor code_rows = ad::gather(row, std::vector<std::size_t>(n, 0));
    const Tensor feat = ad::concat({pts, code_rows}, 1);
    const Tensor h = ad::relu(ad::linear(feat, stage.hidden.w, stage.hidden.b));
    const Tensor off = ad::scale(ad::tanh(ad::linear(h, stage.offset.w, stage.offset.b)), cfg_.offset_bound);
    std::vector<std::size_t> parent(n * stage.ratio);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i / stage.ratio;
    pts = ad::add(ad::gather(pts, parent), ad::reshape(off, {n * stage.ratio, 3}));
  }
  return pts;
}

Tensor rec_loss(const Tensor& pred, const Tensor& gt) {
  if (pred.rank() != 2 || pred.dim(1) != 3 || gt.rank() != 2 || gt.dim(1) != 3) {
    throw ShapeError("rec_loss: expected points[N, 3] and points[M, 3]");
  }
  if (pred.dim(0) == 0 || gt.dim(0) == 0) throw InvalidInput("rec_loss: empty point set");
  const std::vector<double> p(pred.data().begin(), pred.data().end());
  const std::vector<double> q(gt.data().begin(), gt.data().end());
  const auto pred_to_gt = geometry::nearest_map_flat(p, q);
  const auto gt_to_pred = geometry::nearest_map_flat(q, p);
  const Tensor d1 = ad::sub(pred, ad::gather(gt, pred_to_gt));
  const Tensor d2 = ad::sub(ad::gather(pred, gt_to_pred), gt);
  const Tensor forward = ad::scale(ad::sum(ad::mul(d1, d1)), 1.0 / static_cast<double>(pred.dim(0)));
  const Tensor backward = ad::scale(ad::sum(ad::mul(d2, d2)), 1.0 / static_cast<double>(gt.dim(0)));
  return ad::add(forward, backward);
}

Tensor rec_loss(const Tensor& pred, const PointCloud& gt) { return rec_loss(pred, to_tensor(gt)); }

Tensor to_tensor(const PointCloud& cloud) {
  return Tensor::constant({cloud.size(), 3}, geometry::to_flat(cloud));
}

PointCloud to_cloud(const Tensor& points) {
  if (points.rank() != 2 || points.dim(1) != 3) throw ShapeError("to_cloud: expected points[N, 3]");
  return geometry::from_flat({points.data().begin(), points.data().end()});
}

}  // namespace scatterhsd::upstream
