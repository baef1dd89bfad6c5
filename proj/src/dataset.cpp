#include "pga/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace pga {

void DatasetConfig::validate() const {
  if (identities < 2) throw std::invalid_argument("dataset needs at least 2 identities");
  if (per_id < 4) throw std::invalid_argument("dataset needs at least 4 samples per identity");
  if (channels == 0 || height == 0 || width == 0) throw std::invalid_argument("image extents must be positive");
  if (noise_cam0 < 0.0 || noise_cam1 < 0.0) throw std::invalid_argument("noise levels must be >= 0");
  if (occlusion_prob < 0.0 || occlusion_prob > 1.0) throw std::invalid_argument("occlusion_prob must lie in [0, 1]");
}

std::vector<std::size_t> SynthDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

namespace {

struct Palette {
  std::vector<std::vector<double>> bands;
  std::vector<double> stripe;
};

Palette make_palette(const DatasetConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> color(-1.5, 1.5);
  std::uniform_int_distribution<int> band_count(3, 4);
  Palette p;
  p.bands.resize(static_cast<std::size_t>(band_count(rng)));
  for (auto& rgb : p.bands) {
    rgb.resize(cfg.channels);
    for (auto& v : rgb) v = color(rng);
  }
  p.stripe.resize(cfg.channels);
  for (auto& v : p.stripe) v = color(rng);
  return p;
}

Tensor make_template(const DatasetConfig& cfg, const Palette& palette, std::mt19937_64& rng) {
  const std::size_t c = cfg.channels, h = cfg.height, w = cfg.width;
  std::normal_distribution<double> texture(0.0, 0.25);

  // bands with random boundaries, like head/torso/legs regions
  const std::size_t bands = palette.bands.size();
  std::vector<std::size_t> cuts{0};
  for (std::size_t b = 1; b < bands; ++b) {
    const std::size_t lo = cuts.back() + 1;
    const std::size_t hi = h > bands - b ? h - (bands - b) : lo;
    std::uniform_int_distribution<std::size_t> pick(std::min(lo, hi), std::max(lo, hi));
    cuts.push_back(std::min(pick(rng), h));
  }
  cuts.push_back(h);

  Tensor t({c, h, w});
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t row = cuts[b]; row < cuts[b + 1]; ++row) {
      for (std::size_t col = 0; col < w; ++col) {
        for (std::size_t ch = 0; ch < c; ++ch) t.at(ch, row, col) = palette.bands[b][ch];
      }
    }
  }
  // vertical stripe in one band gives left/right structure
  std::uniform_int_distribution<std::size_t> pick_band(0, bands - 1);
  std::uniform_int_distribution<std::size_t> pick_col(0, w - 1);
  const std::size_t sb = pick_band(rng), scol = pick_col(rng);
  for (std::size_t row = cuts[sb]; row < cuts[sb + 1]; ++row) {
    for (std::size_t ch = 0; ch < c; ++ch) t.at(ch, row, scol) = palette.stripe[ch];
  }
  for (auto& v : t.data()) v += texture(rng);
  return t;
}

Tensor make_sample(const DatasetConfig& cfg, const Tensor& tmpl, int camera, std::mt19937_64& rng) {
  const std::size_t c = cfg.channels, h = cfg.height, w = cfg.width;
  const auto ms = static_cast<long>(cfg.max_shift);
  std::uniform_int_distribution<long> shift(-ms, ms);
  const long dy = shift(rng), dx = shift(rng);
  std::normal_distribution<double> noise(0.0, camera == 0 ? cfg.noise_cam0 : cfg.noise_cam1);
  const auto sh = static_cast<long>(h), sw = static_cast<long>(w);

  Tensor out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (long row = 0; row < sh; ++row) {
      for (long col = 0; col < sw; ++col) {
        const auto sr = static_cast<std::size_t>(((row - dy) % sh + sh) % sh);
        const auto sc = static_cast<std::size_t>(((col - dx) % sw + sw) % sw);
        out.at(ch, static_cast<std::size_t>(row), static_cast<std::size_t>(col)) = tmpl.at(ch, sr, sc) + noise(rng);
      }
    }
  }

  std::bernoulli_distribution occlude(cfg.occlusion_prob);
  if (occlude(rng) && cfg.occlusion_size > 0) {
    const std::size_t ph = std::min(cfg.occlusion_size, h), pw = std::min(cfg.occlusion_size, w);
    std::uniform_int_distribution<std::size_t> r0(0, h - ph), c0(0, w - pw);
    const std::size_t top = r0(rng), left = c0(rng);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t row = top; row < top + ph; ++row) {
        for (std::size_t col = left; col < left + pw; ++col) out.at(ch, row, col) = 0.0;
      }
    }
  }
  return out;
}

}  // namespace

SynthDataset make_synth_dataset(const DatasetConfig& config) {
  config.validate();
  SynthDataset ds;
  ds.config = config;
  std::mt19937_64 rng(config.seed);
  for (std::size_t id = 0; id < config.identities; ++id) {
    const Palette palette = make_palette(config, rng);
    ds.templates.push_back(make_template(config, palette, rng));
  }

  const std::size_t n_query = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.1 * config.per_id)));
  const std::size_t n_gallery = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(0.3 * config.per_id)));
  const std::size_t n_train = config.per_id - n_query - n_gallery;

  for (std::size_t id = 0; id < config.identities; ++id) {
    for (std::size_t k = 0; k < config.per_id; ++k) {
      Sample s;
      s.identity = static_cast<int>(id);
      if (k < n_train) {
        s.split = Split::Train;
        s.camera = static_cast<int>(k % 2);
      } else if (k < n_train + n_query) {
        s.split = Split::Query;
        s.camera = static_cast<int>((k - n_train) % 2);
      } else {
        // gallery alternates starting opposite to the first query camera
        s.split = Split::Gallery;
        s.camera = static_cast<int>((k - n_train - n_query + 1) % 2);
      }
      s.image = make_sample(config, ds.templates[id], s.camera, rng);
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace pga
