#include "lincl/optim.hpp"

#include <cmath>

#include "lincl/errors.hpp"

namespace lincl {

OptimizerState::OptimizerState(OptimizerConfig config, const ParameterVector& params)
    : config_(config), slot1_(params.size(), 0.0) {
    if (config_.kind == OptimizerKind::adam) slot2_.assign(params.size(), 0.0);
}

void OptimizerState::step(ParameterVector& params, const ParameterVector& grads) {
    if (params.size() != slot1_.size() || grads.size() != slot1_.size()) {
        throw UsageError("optimizer state does not match parameter vector size");
    }
    if (!grads.all_finite()) {
        throw NumericError("optimizer step received a non-finite gradient");
    }
    const OptimizerConfig& c = config_;
    if (c.weight_decay != 0.0) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            params[i] -= c.learning_rate * c.weight_decay * params[i];
        }
    }
    ++step_;
    if (c.kind == OptimizerKind::sgd_momentum) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            slot1_[i] = c.momentum * slot1_[i] + grads[i];
            params[i] -= c.learning_rate * slot1_[i];
        }
    } else {
        const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grads[i];
            slot1_[i] = c.beta1 * slot1_[i] + (1.0 - c.beta1) * g;
            slot2_[i] = c.beta2 * slot2_[i] + (1.0 - c.beta2) * g * g;
            const double mhat = slot1_[i] / bc1;
            const double vhat = slot2_[i] / bc2;
            params[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
        }
    }
}

}  // namespace lincl
