#include "scatterhsd/infoplane.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scatterhsd/error.hpp"

namespace scatterhsd::infoplane {
namespace {

// H = ln n - (1/n) sum c ln c over the symbol counts.
template <class Map>
double entropy_from_counts(const Map& counts, std::size_t n) {
  double acc = 0.0;
  for (const auto& [_, c] : counts) {
    const double cd = static_cast<double>(c);
    acc += cd * std::log(cd);
  }
  const double nd = static_cast<double>(n);
  return std::log(nd) - acc / nd;
}

}  // namespace

std::vector<Code> bin_activations(const std::vector<double>& z, std::size_t batch, std::size_t dim,
                                  std::size_t bins) {
  if (bins < 2) throw InvalidInput("bin_activations: need at least 2 bins");
  if (z.size() != batch * dim) throw InvalidInput("bin_activations: buffer is not [batch, dim]");
  std::vector<Code> codes(batch, Code(dim, 0));
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = z[d], hi = z[d];
    for (std::size_t i = 1; i < batch; ++i) {
      lo = std::min(lo, z[i * dim + d]);
      hi = std::max(hi, z[i * dim + d]);
    }
    if (!(hi > lo)) continue;
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < batch; ++i) {
      auto b = static_cast<std::size_t>((z[i * dim + d] - lo) / width);
      codes[i][d] = static_cast<std::uint16_t>(std::min(b, bins - 1));
    }
  }
  return codes;
}

template <class T>
double entropy(const std::vector<T>& symbols) {
  if (symbols.empty()) throw InvalidInput("entropy: no samples");
  std::map<T, std::size_t> counts;
  for (const auto& s : symbols) ++counts[s];
  return entropy_from_counts(counts, symbols.size());
}

template double entropy<std::size_t>(const std::vector<std::size_t>&);
template double entropy<Code>(const std::vector<Code>&);

double mutual_information(const std::vector<Code>& codes, const std::vector<std::size_t>& conditioner) {
  if (codes.empty()) throw InvalidInput("mutual_information: no samples");
  if (codes.size() != conditioner.size()) {
    throw InvalidInput("mutual_information: one conditioner value per sample required");
  }
  const std::size_t n = codes.size();
  std::map<std::size_t, std::map<Code, std::size_t>> by_condition;
  for (std::size_t i = 0; i < n; ++i) ++by_condition[conditioner[i]][codes[i]];

  double h_cond = 0.0;
  for (const auto& [_, counts] : by_condition) {
    std::size_t nc = 0;
    for (const auto& [__, c] : counts) nc += c;
    h_cond += static_cast<double>(nc) / static_cast<double>(n) * entropy_from_counts(counts, nc);
  }
  return entropy(codes) - h_cond;
}

std::vector<MITrace> trace_epoch(std::size_t epoch, const downstream::LevelOutputs& outs,
                                 const std::vector<std::size_t>& labels, std::size_t bins) {
  const std::size_t levels = outs.levels();
  if (levels == 0) throw InvalidInput("trace_epoch: no levels");
  const std::size_t batch = outs.logits.front().dim(0);
  if (labels.size() != batch) throw InvalidInput("trace_epoch: one label per sample required");

  std::vector<std::size_t> ids(batch);
  for (std::size_t i = 0; i < batch; ++i) ids[i] = i;

  std::vector<MITrace> out;
  for (std::size_t l = 0; l < levels; ++l) {
    const ad::Tensor& z = outs.aligned_features[l];
    const auto codes = bin_activations({z.data().begin(), z.data().end()}, batch, z.dim(1), bins);
    MITrace t;
    t.epoch = epoch;
    t.level = l + 1;
    t.i_xz = mutual_information(codes, ids);
    t.i_yz = mutual_information(codes, labels);
    t.ce = downstream::cross_entropy(ad::detach(outs.logits[l]), labels).item();
    if (l + 1 < levels) {
      t.kl_gap_to_teacher =
          downstream::kl_to_teacher(ad::detach(outs.logits.back()), ad::detach(outs.logits[l])).item();
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace scatterhsd::infoplane
