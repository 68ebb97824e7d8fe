#include "lincl/network.hpp"

#include <cmath>
#include <string>

#include "lincl/errors.hpp"

namespace lincl {

namespace {

ParameterVector build_params(const std::vector<std::size_t>& input_shape,
                             const std::vector<LayerSpec>& layers) {
    ParameterVector params;
    std::vector<std::size_t> shape = input_shape;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layer_has_params(layers[l].kind)) {
            params.add_segment({static_cast<int>(l), ParamRole::weight},
                               layer_weight_shape(layers[l], shape));
            params.add_segment({static_cast<int>(l), ParamRole::bias},
                               layer_bias_shape(layers[l], shape));
        }
        shape = layer_output_shape(layers[l], shape);
    }
    return params;
}

}  // namespace

Network Network::make_zeroed(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers) {
    Network net;
    net.input_shape = std::move(input_shape);
    net.layers = std::move(layers);
    net.params = build_params(net.input_shape, net.layers);
    return net;
}

Network Network::make(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers,
                      Rng& rng) {
    Network net = make_zeroed(std::move(input_shape), std::move(layers));
    for (const Segment& seg : net.params.segments()) {
        if (seg.key.role != ParamRole::weight) continue;  // biases stay zero
        const std::size_t fan_in = seg.shape[1];
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        net.params.set(seg.key, rng.normal_tensor(seg.shape, 0.0, stddev));
    }
    return net;
}

std::vector<std::vector<std::size_t>> Network::shape_chain() const {
    std::vector<std::vector<std::size_t>> chain;
    chain.push_back(input_shape);
    for (const LayerSpec& spec : layers) {
        chain.push_back(layer_output_shape(spec, chain.back()));
    }
    return chain;
}

std::vector<std::size_t> Network::output_shape() const { return shape_chain().back(); }

std::size_t Network::output_size() const { return shape_product(output_shape()); }

Tensor net_forward(const Network& net, const Tensor& x, ForwardCache* cache) {
    if (x.shape() != net.input_shape) {
        throw DimensionError("network input shape mismatch: got " + x.shape_str());
    }
    if (cache) {
        cache->inputs.clear();
        cache->pool_idx.assign(net.layers.size(), {});
        cache->valid = false;
    }
    Tensor cur = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const LayerSpec& spec = net.layers[l];
        if (cache) cache->inputs.push_back(cur);
        switch (spec.kind) {
            case LayerKind::dense:
                cur = dense_apply(net.params.get({static_cast<int>(l), ParamRole::weight}),
                                  net.params.get({static_cast<int>(l), ParamRole::bias}), cur, true);
                break;
            case LayerKind::conv2d:
                cur = conv2d_apply(spec, net.params.get({static_cast<int>(l), ParamRole::weight}),
                                   net.params.get({static_cast<int>(l), ParamRole::bias}), cur, true);
                break;
            case LayerKind::relu:
                cur = slope_gate(cur, cur, 0.0);
                break;
            case LayerKind::leaky_relu:
                cur = slope_gate(cur, cur, spec.negative_slope);
                break;
            case LayerKind::max_pool: {
                auto idx = max_pool_indices(cur, spec.window, spec.stride);
                Tensor pooled = gather_indices(cur, idx, layer_output_shape(spec, cur.shape()));
                if (cache) cache->pool_idx[l] = std::move(idx);
                cur = std::move(pooled);
                break;
            }
            case LayerKind::avg_pool:
                cur = avg_pool_apply(cur, spec.window, spec.stride);
                break;
            case LayerKind::flatten:
                cur = cur.flattened();
                break;
            case LayerKind::identity:
                break;
        }
    }
    if (cache) {
        cache->output = cur;
        cache->valid = true;
    }
    return cur;
}

NetBackward net_backward(const Network& net, const ForwardCache& cache, const Tensor& dout,
                         bool want_stats) {
    if (!cache.valid || cache.inputs.size() != net.layers.size()) {
        throw UsageError("net_backward: cache does not match a completed forward pass");
    }
    NetBackward out;
    out.grads = net.params.zeros_like();
    Tensor g = dout;
    for (std::size_t i = net.layers.size(); i-- > 0;) {
        const LayerSpec& spec = net.layers[i];
        const Tensor& x = cache.inputs[i];
        switch (spec.kind) {
            case LayerKind::dense: {
                if (want_stats) {
                    out.stats.push_back({static_cast<int>(i), x, g});
                }
                Tensor dw, db, dx;
                dense_backward(net.params.get({static_cast<int>(i), ParamRole::weight}), x, g, dw,
                               db, dx);
                out.grads.set({static_cast<int>(i), ParamRole::weight}, dw);
                out.grads.set({static_cast<int>(i), ParamRole::bias}, db);
                g = std::move(dx);
                break;
            }
            case LayerKind::conv2d: {
                Tensor dw, db, dx;
                conv2d_backward(spec, net.params.get({static_cast<int>(i), ParamRole::weight}), x,
                                g, dw, db, dx);
                out.grads.set({static_cast<int>(i), ParamRole::weight}, dw);
                out.grads.set({static_cast<int>(i), ParamRole::bias}, db);
                g = std::move(dx);
                break;
            }
            case LayerKind::relu:
                g = slope_gate(x, g, 0.0);
                break;
            case LayerKind::leaky_relu:
                g = slope_gate(x, g, spec.negative_slope);
                break;
            case LayerKind::max_pool:
                g = scatter_indices(g, cache.pool_idx[i], x.shape());
                break;
            case LayerKind::avg_pool:
                g = avg_pool_backward(g, x.shape(), spec.window, spec.stride);
                break;
            case LayerKind::flatten:
                g = g.reshaped(x.shape());
                break;
            case LayerKind::identity:
                break;
        }
    }
    out.dinput = std::move(g);
    return out;
}

}  // namespace lincl
