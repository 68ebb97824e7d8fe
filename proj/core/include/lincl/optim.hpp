#pragma once

#include <cstdint>
#include <vector>

#include "lincl/params.hpp"

namespace lincl {

enum class OptimizerKind : std::uint8_t { sgd_momentum = 0, adam = 1 };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-4;
    double momentum = 0.9;      // sgd_momentum
    double beta1 = 0.9;         // adam
    double beta2 = 0.999;       // adam
    double epsilon = 1e-8;      // adam
    double weight_decay = 1e-5;  // decoupled, applied as p -= lr * wd * p
};

// Slots mirror the parameter vector they were created for.
class OptimizerState {
public:
    OptimizerState() = default;
    OptimizerState(OptimizerConfig config, const ParameterVector& params);

    const OptimizerConfig& config() const { return config_; }
    std::size_t step_count() const { return step_; }

    // In-place update of `params` from `grads`. A non-finite gradient throws
    // NumericError and leaves both state and params untouched.
    void step(ParameterVector& params, const ParameterVector& grads);

private:
    OptimizerConfig config_;
    std::vector<double> slot1_;  // momentum buffer / first moment
    std::vector<double> slot2_;  // second moment (adam)
    std::size_t step_ = 0;
};

}  // namespace lincl
