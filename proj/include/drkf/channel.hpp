#pragma once

#include <cstdint>
#include <map>
#include <utility>

#include "drkf/types.hpp"

namespace drkf {

/// Per-link bounds on the channel noise: Upsilon bounds the outer product of
/// the vector noise on transmitted estimates, D envelopes the symmetric
/// matrix noise on transmitted bound matrices. These are filter knowledge,
/// distinct from whatever the simulated channel actually does.
///
/// Self-links carry no channel: a node's own pair is locally available, so
/// (i, i) bounds are zero unless explicitly overridden.
class ChannelBounds {
 public:
  /// Same bounds on every inter-node link (the common configuration).
  static ChannelBounds uniform(int n, Matrix upsilon, Matrix d);
  static ChannelBounds zero(int n);

  void set_link(int to, int from, Matrix upsilon, Matrix d);

  const Matrix& upsilon(int to, int from) const;
  const Matrix& d(int to, int from) const;
  int n() const { return n_; }

 private:
  explicit ChannelBounds(int n) : n_(n), zero_(Matrix::Zero(n, n)) {}

  int n_;
  Matrix zero_;
  Matrix default_upsilon_;
  Matrix default_d_;
  std::map<std::pair<int, int>, Matrix> upsilon_;
  std::map<std::pair<int, int>, Matrix> d_;
};

/// paper-literal: sample with the configured entry half-widths, no
/// enforcement against the bounds (worst-case corners may exceed them).
/// bound-respecting: derive half-widths from the bounds so the envelopes
/// hold by construction, and resample/scale any stray violation.
enum class ChannelMode { kPaperLiteral, kBoundRespecting };

/// Entry half-widths of the uniform channel noise, used in paper-literal
/// mode. Vector noise entries are U[-vector_halfwidth, +vector_halfwidth];
/// matrix noise is sampled on the upper triangle and mirrored.
struct LinkNoiseSpec {
  double vector_halfwidth = 1.0;
  double matrix_halfwidth = 1.0;
};

/// Per-link noise source. Streams are derived from (seed, i, j, k), so
/// sensor-parallel execution is reproducible regardless of scheduling.
class LinkNoiseSampler {
 public:
  LinkNoiseSampler(const ChannelBounds& bounds, ChannelMode mode,
                   LinkNoiseSpec spec, std::uint64_t seed);

  Vector sample_vector_noise(int to, int from, int k);
  Matrix sample_matrix_noise(int to, int from, int k);

  /// Samples that had to be deterministically scaled into their bound after
  /// exhausting the resampling budget (bound-respecting mode only).
  long clip_events() const { return clip_events_; }

  ChannelMode mode() const { return mode_; }

 private:
  const ChannelBounds* bounds_;
  ChannelMode mode_;
  LinkNoiseSpec spec_;
  std::uint64_t seed_;
  long clip_events_ = 0;
  static constexpr int kMaxResample = 10;
};

/// Applies channel noise to a transmitted pair: additive vector noise on the
/// estimate, symmetric matrix noise on the bound matrix. The corrupted bound
/// matrix may be indefinite until the receiver inflates it.
EstimatePair corrupt(const EstimatePair& sent, int to, int from,
                     LinkNoiseSampler& sampler, int k);

/// Receive-side inflation: adds the link's D and Upsilon bounds to the
/// received bound matrix, restoring a consistent (and PD) pair. Throws when
/// the inflated matrix is not PD, naming the link.
EstimatePair inflate(const EstimatePair& received, int to, int from,
                     const ChannelBounds& bounds);

}  // namespace drkf
