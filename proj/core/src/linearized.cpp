#include "lincl/linearized.hpp"

#include <string>

#include "lincl/errors.hpp"
#include "lincl/linalg.hpp"

namespace lincl {

LinearizedModel::LinearizedModel(Network base, Mode mode)
    : base_(std::move(base)), mode_(mode), delta_(base_.params.zeros_like()) {
    const auto out = base_.output_shape();
    if (out.size() != 1) {
        throw DimensionError("base network must end with a rank-1 feature output (add flatten)");
    }
    feature_dim_ = out[0];
}

void LinearizedModel::set_delta(const ParameterVector& delta) {
    if (!delta_.same_layout(delta)) throw UsageError("delta layout does not mirror the base network");
    delta_ = delta;
}

LinearizedModel::Head& LinearizedModel::head(int task) {
    auto it = heads_.find(head_for(mode_, task));
    if (it == heads_.end()) throw LookupError("no head for task " + std::to_string(task));
    return it->second;
}

const LinearizedModel::Head& LinearizedModel::head(int task) const {
    auto it = heads_.find(head_for(mode_, task));
    if (it == heads_.end()) throw LookupError("no head for task " + std::to_string(task));
    return it->second;
}

DualTensor LinearizedModel::augmented_forward(const Tensor& x, AugCache* cache) const {
    if (x.shape() != base_.input_shape) {
        throw DimensionError("augmented_forward input shape mismatch: got " + x.shape_str());
    }
    if (cache) {
        cache->value_cache.inputs.clear();
        cache->value_cache.pool_idx.assign(base_.layers.size(), {});
        cache->value_cache.valid = false;
        cache->valid = false;
    }
    Tensor value = x;
    Tensor tangent(x.shape());  // zero-filled tangent enters the first layer
    for (std::size_t l = 0; l < base_.layers.size(); ++l) {
        const LayerSpec& spec = base_.layers[l];
        const ParamKey wkey{static_cast<int>(l), ParamRole::weight};
        const ParamKey bkey{static_cast<int>(l), ParamRole::bias};
        if (cache) cache->value_cache.inputs.push_back(value);
        switch (spec.kind) {
            case LayerKind::dense: {
                const Tensor w = base_.params.get(wkey);
                Tensor t_next = dense_apply(delta_.get(wkey), delta_.get(bkey), value, true);
                t_next += dense_apply(w, Tensor{}, tangent, false);
                value = dense_apply(w, base_.params.get(bkey), value, true);
                tangent = std::move(t_next);
                break;
            }
            case LayerKind::conv2d: {
                const Tensor w = base_.params.get(wkey);
                Tensor t_next = conv2d_apply(spec, delta_.get(wkey), delta_.get(bkey), value, true);
                t_next += conv2d_apply(spec, w, Tensor{}, tangent, false);
                value = conv2d_apply(spec, w, base_.params.get(bkey), value, true);
                tangent = std::move(t_next);
                break;
            }
            case LayerKind::relu:
                // Gating comes from the value stream for both streams.
                tangent = slope_gate(value, tangent, 0.0);
                value = slope_gate(value, value, 0.0);
                break;
            case LayerKind::leaky_relu:
                tangent = slope_gate(value, tangent, spec.negative_slope);
                value = slope_gate(value, value, spec.negative_slope);
                break;
            case LayerKind::max_pool: {
                // Pooling indices from the value stream, gathered for both.
                auto idx = max_pool_indices(value, spec.window, spec.stride);
                const auto out_shape = layer_output_shape(spec, value.shape());
                tangent = gather_indices(tangent, idx, out_shape);
                value = gather_indices(value, idx, out_shape);
                if (cache) cache->value_cache.pool_idx[l] = std::move(idx);
                break;
            }
            case LayerKind::avg_pool:
                tangent = avg_pool_apply(tangent, spec.window, spec.stride);
                value = avg_pool_apply(value, spec.window, spec.stride);
                break;
            case LayerKind::flatten:
                tangent = tangent.flattened();
                value = value.flattened();
                break;
            case LayerKind::identity:
                break;
        }
    }
    DualTensor out{value, tangent};
    if (cache) {
        cache->value_cache.output = out.value;
        cache->value_cache.valid = true;
        cache->feature = out;
        cache->valid = true;
    }
    return out;
}

Tensor LinearizedModel::head_logits(const Head& h, const DualTensor& feat) const {
    // (W0 + dW) v + W0 t + b0 + db; dW never sees the tangent.
    Tensor logits = dense_apply(h.base_w, h.base_b, feat.value, true);
    logits += dense_apply(h.dw, h.db, feat.value, true);
    logits += dense_apply(h.base_w, Tensor{}, feat.tangent, false);
    return logits;
}

Tensor LinearizedModel::predict(const Tensor& x, int task) const {
    const Head& h = head(task);
    return head_logits(h, augmented_forward(x));
}

Tensor LinearizedModel::feature(const Tensor& x) const {
    const DualTensor feat = augmented_forward(x);
    return feat.value + feat.tangent;
}

SampleGrad LinearizedModel::backprop(const Tensor& x, int task,
                                     const std::function<Tensor(const Tensor&)>& dlogits_fn) const {
    const int head_id = head_for(mode_, task);
    const Head& h = head(task);

    AugCache cache;
    const DualTensor feat = augmented_forward(x, &cache);
    SampleGrad out;
    out.logits = head_logits(h, feat);
    const Tensor dlogits = dlogits_fn(out.logits);
    if (dlogits.size() != out.logits.size()) {
        throw DimensionError("dlogits size does not match logits");
    }

    // Head deltas act on the value feature only.
    const Tensor d_dw = outer(dlogits, feat.value);
    const Tensor& d_db = dlogits;

    // The only trainable path below the head is the tangent stream, entered
    // through the frozen head point W0. Its reverse pass is structurally the
    // plain backward of the base network over value-stream activations.
    const Tensor dtangent = matvec_t(h.base_w, dlogits);
    NetBackward nb = net_backward(base_, cache.value_cache, dtangent, /*want_stats=*/true);

    out.grads = nb.grads;  // delta-segment gradients, same layout as delta_
    out.grads.add_segment({head_layer_id(head_id), ParamRole::weight}, d_dw);
    out.grads.add_segment({head_layer_id(head_id), ParamRole::bias}, d_db);
    out.stats = std::move(nb.stats);
    out.stats.push_back({head_layer_id(head_id), feat.value, dlogits});
    return out;
}

ParameterVector LinearizedModel::trainable(int task) const {
    const int head_id = head_for(mode_, task);
    const Head& h = head(task);
    ParameterVector v = delta_;
    v.add_segment({head_layer_id(head_id), ParamRole::weight}, h.dw);
    v.add_segment({head_layer_id(head_id), ParamRole::bias}, h.db);
    return v;
}

void LinearizedModel::set_trainable(int task, const ParameterVector& v) {
    const int head_id = head_for(mode_, task);
    Head& h = heads_.at(head_id);
    for (const Segment& seg : delta_.segments()) {
        delta_.set(seg.key, v.get(seg.key));
    }
    h.dw = v.get({head_layer_id(head_id), ParamRole::weight});
    h.db = v.get({head_layer_id(head_id), ParamRole::bias});
}

std::vector<ParamKey> LinearizedModel::penalized_keys(int task) const {
    std::vector<ParamKey> keys;
    for (const Segment& seg : delta_.segments()) keys.push_back(seg.key);
    if (mode_ != Mode::task_il) {
        const int head_id = head_for(mode_, task);
        keys.push_back({head_layer_id(head_id), ParamRole::weight});
        keys.push_back({head_layer_id(head_id), ParamRole::bias});
    }
    return keys;
}

std::vector<DenseSegmentInfo> LinearizedModel::penalized_dense(int task) const {
    std::vector<DenseSegmentInfo> out;
    const auto chain = base_.shape_chain();
    for (std::size_t l = 0; l < base_.layers.size(); ++l) {
        if (base_.layers[l].kind == LayerKind::dense) {
            out.push_back({static_cast<int>(l), chain[l][0], base_.layers[l].units});
        }
    }
    if (mode_ != Mode::task_il) {
        const int head_id = head_for(mode_, task);
        out.push_back({head_layer_id(head_id), feature_dim_, head_width(task)});
    }
    return out;
}

bool LinearizedModel::has_head(int task) const {
    return heads_.count(head_for(mode_, task)) != 0;
}

std::size_t LinearizedModel::head_width(int task) const { return head(task).base_w.rows(); }

void LinearizedModel::add_head(int task, std::size_t classes, Rng* rng, double scale) {
    const int head_id = head_for(mode_, task);
    if (heads_.count(head_id)) throw UsageError("head already exists for task " + std::to_string(task));
    Head h;
    h.base_w = (rng && scale > 0.0) ? rng->normal_tensor({classes, feature_dim_}, 0.0, scale)
                                    : Tensor({classes, feature_dim_});
    h.base_b = Tensor({classes});
    h.dw = Tensor({classes, feature_dim_});
    h.db = Tensor({classes});
    heads_[head_id] = std::move(h);
}

void LinearizedModel::expand_head(int task, std::size_t extra) {
    if (extra == 0) return;
    const int head_id = head_for(mode_, task);
    auto it = heads_.find(head_id);
    if (it == heads_.end()) throw UsageError("expand_head: no head for task " + std::to_string(task));
    Head& h = it->second;
    const std::size_t old_c = h.base_w.rows();
    const std::size_t new_c = old_c + extra;
    // Appended units start with zero weights and biases in both the
    // linearization point and the delta.
    auto grow_mat = [&](const Tensor& m) {
        Tensor out({new_c, feature_dim_});
        for (std::size_t i = 0; i < old_c * feature_dim_; ++i) out[i] = m[i];
        return out;
    };
    auto grow_vec = [&](const Tensor& v) {
        Tensor out({new_c});
        for (std::size_t i = 0; i < old_c; ++i) out[i] = v[i];
        return out;
    };
    h.base_w = grow_mat(h.base_w);
    h.dw = grow_mat(h.dw);
    h.base_b = grow_vec(h.base_b);
    h.db = grow_vec(h.db);
}

}  // namespace lincl
