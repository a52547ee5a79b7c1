#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scatterhsd/downstream.hpp"

namespace scatterhsd::infoplane {

/// One discretised sample: the bin index of every activation dimension.
using Code = std::vector<std::uint16_t>;

/// Equal-width binning of z[batch, dim] over the per-dimension observed range.
/// A dimension whose min equals its max maps every sample to bin 0.
std::vector<Code> bin_activations(const std::vector<double>& z, std::size_t batch, std::size_t dim,
                                  std::size_t bins);

/// Plug-in entropy (nats) of the empirical distribution of `symbols`.
template <class T>
double entropy(const std::vector<T>& symbols);

/// Plug-in I(Z; C) = H(Z) - H(Z | C) in nats; `conditioner` holds one id per sample
/// (sample ids for I(X;Z), class labels for I(Y;Z)).
double mutual_information(const std::vector<Code>& codes, const std::vector<std::size_t>& conditioner);

/// One point of the information plane for one level at one epoch.
struct MITrace {
  std::size_t epoch = 0;
  std::size_t level = 0;  // 1-based, the teacher is the last level
  double i_xz = 0.0;
  double i_yz = 0.0;
  double kl_gap_to_teacher = 0.0;  // 0 for the teacher itself
  double ce = 0.0;
};

inline constexpr std::size_t kDefaultBins = 6;

/// Information-plane estimates for every level from one evaluation pass.
std::vector<MITrace> trace_epoch(std::size_t epoch, const downstream::LevelOutputs& outs,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t bins = kDefaultBins);

}  // namespace scatterhsd::infoplane
