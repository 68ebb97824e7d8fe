#include "lincl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lincl/errors.hpp"

namespace lincl {

const char* loss_kind_name(LossKind kind) { return kind == LossKind::mse ? "mse" : "sce"; }

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 1) throw DimensionError("softmax expects a rank-1 tensor");
    const double m = *std::max_element(logits.data(), logits.data() + logits.size());
    Tensor p = logits;
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(p[i] - m);
        z += p[i];
    }
    p *= 1.0 / z;
    return p;
}

LossGrad sce_loss(const Tensor& logits, int label) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw DimensionError("sce_loss expects a rank-1 tensor with >= 2 classes");
    }
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
        throw ValidationError("sce_loss label out of range: " + std::to_string(label));
    }
    const double m = *std::max_element(logits.data(), logits.data() + logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) z += std::exp(logits[i] - m);
    LossGrad out;
    out.value = -(logits[label] - m) + std::log(z);
    out.grad = softmax(logits);
    out.grad[label] -= 1.0;
    return out;
}

LossGrad mse_loss(const Tensor& output, int label, double alpha) {
    if (output.rank() != 1 || output.size() < 1) {
        throw DimensionError("mse_loss expects a rank-1 tensor");
    }
    if (label < 0 || static_cast<std::size_t>(label) >= output.size()) {
        throw ValidationError("mse_loss label out of range: " + std::to_string(label));
    }
    if (!(alpha > 0.0)) throw ValidationError("mse_loss alpha must be positive");
    LossGrad out;
    out.grad = output;
    out.grad[label] -= alpha;  // grad = output - alpha * onehot
    out.value = 0.5 * out.grad.dot(out.grad);
    return out;
}

LossGrad eval_loss(LossKind kind, const Tensor& output, int label, double alpha) {
    return kind == LossKind::mse ? mse_loss(output, label, alpha) : sce_loss(output, label);
}

}  // namespace lincl
