#pragma once

#include <map>

#include "lincl/model.hpp"

namespace lincl {

// Paired hidden state and directional-derivative state carried through the
// JVP-augmented forward pass.
struct DualTensor {
    Tensor value;
    Tensor tangent;
};

struct AugCache {
    ForwardCache value_cache;  // value stream == frozen base forward
    DualTensor feature;
    bool valid = false;
};

// First-order expansion of a frozen base network around its pre-trained
// parameters. The trainable state is the parameter delta of every base
// layer plus, per head, a delta on top of a fixed head linearization point.
//
// Logits for task t:
//     f(x) = (W0_t + dW_t) . value(x) + W0_t . tangent(x) + b0_t + db_t
// where tangent(x) is the JVP of the base features along the delta. The
// cross term dW_t . tangent is dropped exactly as for every other layer,
// which keeps f jointly linear in all trainable parameters - the property
// that makes the MSE training objective an exact quadratic.
//
// W0_t is fixed at head creation (random by default so the tangent reaches
// the logits and the feature delta keeps learning); class-incremental
// expansion appends all-zero rows to both W0_t and dW_t.
class LinearizedModel : public TaskModel {
public:
    LinearizedModel(Network base, Mode mode);

    Mode mode() const override { return mode_; }
    std::size_t feature_dim() const override { return feature_dim_; }
    std::size_t input_size() const override { return shape_product(base_.input_shape); }

    // Feature-level dual state (g(x; psi0), J psi).
    DualTensor augmented_forward(const Tensor& x, AugCache* cache = nullptr) const;

    Tensor predict(const Tensor& x, int task) const override;
    Tensor feature(const Tensor& x) const override;
    SampleGrad backprop(const Tensor& x, int task,
                        const std::function<Tensor(const Tensor&)>& dlogits_fn) const override;

    ParameterVector trainable(int task) const override;
    void set_trainable(int task, const ParameterVector& v) override;
    std::vector<ParamKey> penalized_keys(int task) const override;
    std::vector<DenseSegmentInfo> penalized_dense(int task) const override;

    bool has_head(int task) const override;
    std::size_t head_width(int task) const override;
    void add_head(int task, std::size_t classes, Rng* rng, double scale) override;
    void expand_head(int task, std::size_t extra) override;

    struct Head {
        Tensor base_w;  // [C x F] linearization point, frozen
        Tensor base_b;  // [C]
        Tensor dw;      // [C x F] trainable delta
        Tensor db;      // [C]
    };

    const Network& base() const { return base_; }
    const ParameterVector& delta() const { return delta_; }
    void set_delta(const ParameterVector& delta);
    const std::map<int, Head>& heads() const { return heads_; }
    Head& head(int task);
    const Head& head(int task) const;

private:
    Network base_;
    Mode mode_;
    std::size_t feature_dim_ = 0;
    ParameterVector delta_;  // zero right after construction
    std::map<int, Head> heads_;

    Tensor head_logits(const Head& h, const DualTensor& feat) const;
};

}  // namespace lincl
