#include <algorithm>
#include <cmath>

#include "framekit/classifier.hpp"
#include "framekit/error.hpp"

namespace framekit::classifier {

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    total += out[i];
  }
  for (auto& p : out) p /= total;
}

double softmax_objective(const Matrix<double>& weights, const std::vector<SparseVector>& xs,
                         const std::vector<std::size_t>& ys, std::span<const std::size_t> batch,
                         double l2, Matrix<double>* gradient) {
  const std::size_t num_labels = weights.rows();
  const std::size_t bias = weights.cols() - 1;
  if (gradient) *gradient = Matrix<double>(weights.rows(), weights.cols());
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "empty batch");
  }

  std::vector<double> logits(num_labels);
  std::vector<double> probs(num_labels);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto i : batch) {
    const auto& x = xs[i];
    for (std::size_t c = 0; c < num_labels; ++c) {
      double z = weights(c, bias);
      for (std::size_t t = 0; t < x.ids.size(); ++t) z += weights(c, x.ids[t]) * x.values[t];
      logits[c] = z;
    }
    softmax(logits, probs);
    // log p_y computed from logits to stay finite when p_y underflows.
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    for (const double z : logits) sum_exp += std::exp(z - max_logit);
    loss -= (logits[ys[i]] - max_logit - std::log(sum_exp)) * scale;

    if (gradient) {
      for (std::size_t c = 0; c < num_labels; ++c) {
        const double residual = (probs[c] - (c == ys[i] ? 1.0 : 0.0)) * scale;
        (*gradient)(c, bias) += residual;
        for (std::size_t t = 0; t < x.ids.size(); ++t) {
          (*gradient)(c, x.ids[t]) += residual * x.values[t];
        }
      }
    }
  }

  double penalty = 0.0;
  for (std::size_t c = 0; c < num_labels; ++c) {
    for (std::size_t j = 0; j < bias; ++j) {
      const double w = weights(c, j);
      penalty += w * w;
      if (gradient) (*gradient)(c, j) += l2 * w;
    }
  }
  return loss + 0.5 * l2 * penalty;
}

}  // namespace framekit::classifier
