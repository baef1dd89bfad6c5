#include "pga/losses.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pga/ops.hpp"

namespace pga {

void LossConfig::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(margin >= 0.0)) throw std::invalid_argument("margin must be >= 0");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw std::invalid_argument("smoothing must lie in [0, 1)");
}

namespace {

void check_label(int label, std::size_t classes) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw std::out_of_range("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
  }
}

std::vector<std::int64_t> to_vec(std::span<const int> labels) { return {labels.begin(), labels.end()}; }

}  // namespace

Var id_loss(Var logits, std::span<const int> labels, double smoothing) {
  Tape& t = *logits.tape;
  const Tensor& z = t.value(logits);
  if (z.rank() != 1 && z.rank() != 2) throw ShapeError("id_loss expects (B, K) or (K) logits, got " + shape_str(z.shape()));
  const std::size_t rows = z.rank() == 2 ? z.dim(0) : 1;
  const std::size_t k = z.rank() == 2 ? z.dim(1) : z.dim(0);
  if (labels.size() != rows) throw ShapeError("id_loss: " + std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw std::invalid_argument("smoothing must lie in [0, 1)");
  for (int y : labels) check_label(y, k);

  Tensor probs({rows, k});
  double total = 0.0;
  const double off = smoothing / static_cast<double>(k);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* zr = z.raw() + r * k;
    const double mx = *std::max_element(zr, zr + k);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += std::exp(zr[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < k; ++j) {
      const double logp = zr[j] - lse;
      probs.at(r, j) = std::exp(logp);
      const double q = (static_cast<int>(j) == labels[r] ? 1.0 - smoothing : 0.0) + off;
      total -= q * logp;
    }
  }
  total /= static_cast<double>(rows);

  const std::size_t iz = logits.id;
  auto ys = to_vec(labels);
  return t.record("id_loss", {iz}, Tensor::scalar(total), [iz, probs, ys, smoothing, off, rows, k](Tape& tape, const Tensor& g) {
    Tensor& buf = tape.grad_buffer(iz);
    const double scale = g[0] / static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < k; ++j) {
        const double q = (static_cast<std::int64_t>(j) == ys[r] ? 1.0 - smoothing : 0.0) + off;
        buf[r * k + j] += scale * (probs.at(r, j) - q);
      }
    }
  });
}

Var triplet_loss(Var embeddings, std::span<const int> labels, double margin) {
  Tape& t = *embeddings.tape;
  const Tensor& e = t.value(embeddings);
  if (e.rank() != 2) throw ShapeError("triplet_loss expects (B, C) embeddings, got " + shape_str(e.shape()));
  const std::size_t b = e.dim(0), c = e.dim(1);
  if (labels.size() != b) throw ShapeError("triplet_loss: label count differs from batch size");

  Tensor dist({b, b});
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < c; ++d) {
        const double diff = e.at(i, d) - e.at(j, d);
        s += diff * diff;
      }
      dist.at(i, j) = dist.at(j, i) = std::sqrt(s);
    }
  }

  struct Active {
    std::size_t anchor, pos, neg;
  };
  std::vector<Active> active;
  std::size_t valid = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    std::size_t pos = b, neg = b;
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i]) {
        if (pos == b || dist.at(i, j) > dist.at(i, pos)) pos = j;
      } else if (neg == b || dist.at(i, j) < dist.at(i, neg)) {
        neg = j;
      }
    }
    if (pos == b || neg == b) continue;
    ++valid;
    const double term = margin + dist.at(i, pos) - dist.at(i, neg);
    if (term > 0.0) {
      total += term;
      active.push_back({i, pos, neg});
    }
  }
  if (valid == 0) throw std::invalid_argument("triplet_loss: no anchor has both a positive and a negative");
  total /= static_cast<double>(valid);

  const std::size_t ie = embeddings.id;
  return t.record("triplet_loss", {ie}, Tensor::scalar(total), [ie, dist, active, valid, c](Tape& tape, const Tensor& g) {
    const Tensor& e = tape.value(ie);
    Tensor& buf = tape.grad_buffer(ie);
    const double w = g[0] / static_cast<double>(valid);
    // d|e_i - e_j| / de_i = (e_i - e_j) / |e_i - e_j|; zero at coincident points
    auto push = [&](std::size_t i, std::size_t j, double coeff) {
      const double d = dist.at(i, j);
      if (d == 0.0) return;
      for (std::size_t k = 0; k < c; ++k) {
        const double u = coeff * (e.at(i, k) - e.at(j, k)) / d;
        buf.at(i, k) += u;
        buf.at(j, k) -= u;
      }
    };
    for (const Active& a : active) {
      push(a.anchor, a.pos, w);
      push(a.anchor, a.neg, -w);
    }
  });
}

Var center_loss(Var embeddings, Var centers, std::span<const int> labels) {
  if (embeddings.tape != centers.tape) throw std::invalid_argument("operands live on different tapes");
  Tape& t = *embeddings.tape;
  const Tensor& e = t.value(embeddings);
  const Tensor& cv = t.value(centers);
  if (e.rank() != 2 || cv.rank() != 2 || e.dim(1) != cv.dim(1)) {
    throw ShapeError("center_loss: embeddings " + shape_str(e.shape()) + ", centers " + shape_str(cv.shape()));
  }
  const std::size_t b = e.dim(0), c = e.dim(1);
  if (labels.size() != b) throw ShapeError("center_loss: label count differs from batch size");
  for (int y : labels) check_label(y, cv.dim(0));

  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t d = 0; d < c; ++d) {
      const double diff = e.at(i, d) - cv.at(static_cast<std::size_t>(labels[i]), d);
      total += diff * diff;
    }
  }
  total *= 0.5 / static_cast<double>(b);

  const std::size_t ie = embeddings.id, ic = centers.id;
  auto ys = to_vec(labels);
  return t.record("center_loss", {ie, ic}, Tensor::scalar(total), [ie, ic, ys, b, c](Tape& tape, const Tensor& g) {
    const Tensor& e = tape.value(ie);
    const Tensor& cv = tape.value(ic);
    const double w = g[0] / static_cast<double>(b);
    const bool ge = tape.requires_grad(ie), gc = tape.requires_grad(ic);
    Tensor* be = ge ? &tape.grad_buffer(ie) : nullptr;
    Tensor* bc = gc ? &tape.grad_buffer(ic) : nullptr;
    for (std::size_t i = 0; i < b; ++i) {
      const auto y = static_cast<std::size_t>(ys[i]);
      for (std::size_t d = 0; d < c; ++d) {
        const double u = w * (e.at(i, d) - cv.at(y, d));
        if (be) be->at(i, d) += u;
        if (bc) bc->at(y, d) -= u;
      }
    }
  });
}

LossTerms total_loss(Var logits, Var embeddings, Var centers, std::span<const int> labels, const LossConfig& cfg) {
  cfg.validate();
  LossTerms terms;
  terms.id = id_loss(logits, labels, cfg.smoothing);
  terms.triplet = triplet_loss(embeddings, labels, cfg.margin);
  terms.center = center_loss(embeddings, centers, labels);
  terms.total = add(add(terms.id, terms.triplet), scale(terms.center, cfg.beta));
  return terms;
}

}  // namespace pga
