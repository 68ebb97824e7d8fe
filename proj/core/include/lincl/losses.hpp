#pragma once

#include <cstdint>

#include "lincl/tensor.hpp"

namespace lincl {

enum class LossKind : std::uint8_t { mse = 0, sce = 1 };

const char* loss_kind_name(LossKind kind);

struct LossGrad {
    double value = 0.0;
    Tensor grad;  // d loss / d model output
};

Tensor softmax(const Tensor& logits);

// Softmax cross-entropy: -log softmax(logits)[label].
LossGrad sce_loss(const Tensor& logits, int label);

// 0.5 * || alpha * onehot(label) - output ||^2. Non-saturating quadratic
// replacement for cross-entropy; alpha scales the one-hot target.
LossGrad mse_loss(const Tensor& output, int label, double alpha);

LossGrad eval_loss(LossKind kind, const Tensor& output, int label, double alpha);

}  // namespace lincl
