#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pga/tensor.hpp"

namespace pga {

enum class Split { Train, Query, Gallery };

struct Sample {
  Tensor image;
  int identity = 0;
  int camera = 0;
  Split split = Split::Train;
};

/// Seeded stand-in for a re-identification corpus.
///
/// Each identity gets a template of horizontal color bands with a faint
/// texture. A sample is its identity's template circularly shifted by up to
/// `max_shift` pixels, plus Gaussian noise whose level depends on the camera,
/// and with probability `occlusion_prob` a zeroed square patch.
struct DatasetConfig {
  std::uint64_t seed = 0;
  std::size_t identities = 8;
  std::size_t per_id = 20;
  std::size_t channels = 3;
  std::size_t height = 16;
  std::size_t width = 8;
  std::size_t max_shift = 2;
  double noise_cam0 = 0.6;
  double noise_cam1 = 0.9;
  double occlusion_prob = 0.2;
  std::size_t occlusion_size = 4;

  void validate() const;
};

struct SynthDataset {
  DatasetConfig config;
  std::vector<Tensor> templates;
  std::vector<Sample> samples;

  std::vector<std::size_t> indices(Split split) const;
};

/// Per identity: 60% train, 10% query (at least 1), 30% gallery (at least 2),
/// with cameras alternating so every query has a cross-camera gallery match.
SynthDataset make_synth_dataset(const DatasetConfig& config);

}  // namespace pga
