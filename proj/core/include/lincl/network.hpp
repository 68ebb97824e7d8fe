#pragma once

#include <vector>

#include "lincl/layers.hpp"
#include "lincl/params.hpp"
#include "lincl/rng.hpp"
#include "lincl/tensor.hpp"

namespace lincl {

// Plain feed-forward network. Layer l's parameters live in `params` under
// ParamKey{l, weight|bias}.
struct Network {
    std::vector<std::size_t> input_shape;
    std::vector<LayerSpec> layers;
    ParameterVector params;

    // Validates layer composition and He-initializes weights (biases zero).
    static Network make(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers,
                        Rng& rng);
    // Same topology, parameters left at zero.
    static Network make_zeroed(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers);

    std::vector<std::size_t> output_shape() const;
    std::size_t output_size() const;
    std::size_t param_count() const { return params.size(); }

    // Per-layer input shapes (size layers.size() + 1; last entry is the
    // output shape).
    std::vector<std::vector<std::size_t>> shape_chain() const;
};

struct ForwardCache {
    std::vector<Tensor> inputs;                    // value entering each layer
    std::vector<std::vector<std::size_t>> pool_idx;  // filled for max_pool layers
    Tensor output;
    bool valid = false;
};

Tensor net_forward(const Network& net, const Tensor& x, ForwardCache* cache = nullptr);

// Per-sample K-FAC statistics of a dense layer: `a` is the layer input
// activation, `g` the gradient at the pre-activation output.
struct LayerStatSample {
    int layer = 0;
    Tensor a;
    Tensor g;
};

struct NetBackward {
    ParameterVector grads;  // layout mirrors net.params
    Tensor dinput;
    std::vector<LayerStatSample> stats;  // dense layers only
};

NetBackward net_backward(const Network& net, const ForwardCache& cache, const Tensor& dout,
                         bool want_stats = false);

}  // namespace lincl
