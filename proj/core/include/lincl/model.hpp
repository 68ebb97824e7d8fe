#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "lincl/network.hpp"
#include "lincl/params.hpp"
#include "lincl/rng.hpp"
#include "lincl/tensor.hpp"

namespace lincl {

// Head wiring across an incremental stream:
//   data_il  - one shared head, regularized together with the features
//   task_il  - one head per task, heads excluded from the penalty
//   class_il - one growing head, regularized, expanded at task boundaries
enum class Mode : std::uint8_t { data_il = 0, task_il = 1, class_il = 2 };

const char* mode_name(Mode mode);

inline int head_for(Mode mode, int task) { return mode == Mode::task_il ? task : 0; }

struct DenseSegmentInfo {
    int layer_id = 0;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
};

struct SampleGrad {
    Tensor logits;
    ParameterVector grads;               // layout matches trainable(task)
    std::vector<LayerStatSample> stats;  // dense segments among the trainable set
};

// Common surface of the two trainable model families (plain network and
// linearized network). `task` always refers to the stream task index; the
// implementation maps it onto a head via the wiring mode.
class TaskModel {
public:
    virtual ~TaskModel() = default;

    virtual Mode mode() const = 0;
    virtual std::size_t feature_dim() const = 0;
    virtual std::size_t input_size() const = 0;

    virtual Tensor predict(const Tensor& x, int task) const = 0;
    // Representation used by nearest-neighbour probing (pre-head).
    virtual Tensor feature(const Tensor& x) const = 0;

    // One forward/backward round trip for a single sample. `dlogits_fn`
    // receives the logits and returns the gradient to backpropagate.
    virtual SampleGrad backprop(const Tensor& x, int task,
                                const std::function<Tensor(const Tensor&)>& dlogits_fn) const = 0;

    virtual ParameterVector trainable(int task) const = 0;
    virtual void set_trainable(int task, const ParameterVector& v) = 0;

    // Segments covered by the quadratic penalty under the wiring mode.
    virtual std::vector<ParamKey> penalized_keys(int task) const = 0;
    virtual std::vector<DenseSegmentInfo> penalized_dense(int task) const = 0;

    virtual bool has_head(int task) const = 0;
    virtual std::size_t head_width(int task) const = 0;
    // scale <= 0 creates an all-zero head.
    virtual void add_head(int task, std::size_t classes, Rng* rng, double scale) = 0;
    virtual void expand_head(int task, std::size_t extra) = 0;
};

// Ordinary nonlinear network with per-mode heads; the softmax cross-entropy
// baseline lives here.
class NonlinearModel : public TaskModel {
public:
    NonlinearModel(Network feature_net, Mode mode);

    Mode mode() const override { return mode_; }
    std::size_t feature_dim() const override { return feature_dim_; }
    std::size_t input_size() const override { return shape_product(net_.input_shape); }

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

    const Network& net() const { return net_; }
    Network& net() { return net_; }

    struct Head {
        Tensor w;  // [C x F]
        Tensor b;  // [C]
    };
    const std::map<int, Head>& heads() const { return heads_; }

private:
    Network net_;
    Mode mode_;
    std::size_t feature_dim_ = 0;
    std::map<int, Head> heads_;

    const Head& head_at(int task) const;
};

}  // namespace lincl
