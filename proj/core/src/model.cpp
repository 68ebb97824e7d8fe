#include "lincl/model.hpp"

#include <string>

#include "lincl/errors.hpp"
#include "lincl/linalg.hpp"

namespace lincl {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::data_il: return "data_il";
        case Mode::task_il: return "task_il";
        case Mode::class_il: return "class_il";
    }
    return "?";
}

NonlinearModel::NonlinearModel(Network feature_net, Mode mode)
    : net_(std::move(feature_net)), mode_(mode) {
    const auto out = net_.output_shape();
    if (out.size() != 1) {
        throw DimensionError("feature network must end with a rank-1 output (add flatten)");
    }
    feature_dim_ = out[0];
}

const NonlinearModel::Head& NonlinearModel::head_at(int task) const {
    auto it = heads_.find(head_for(mode_, task));
    if (it == heads_.end()) {
        throw LookupError("no head for task " + std::to_string(task));
    }
    return it->second;
}

Tensor NonlinearModel::predict(const Tensor& x, int task) const {
    const Head& h = head_at(task);
    return dense_apply(h.w, h.b, net_forward(net_, x), true);
}

Tensor NonlinearModel::feature(const Tensor& x) const { return net_forward(net_, x); }

SampleGrad NonlinearModel::backprop(const Tensor& x, int task,
                                    const std::function<Tensor(const Tensor&)>& dlogits_fn) const {
    const int head_id = head_for(mode_, task);
    const Head& h = head_at(task);

    ForwardCache cache;
    const Tensor feat = net_forward(net_, x, &cache);
    SampleGrad out;
    out.logits = dense_apply(h.w, h.b, feat, true);
    const Tensor dlogits = dlogits_fn(out.logits);
    if (dlogits.size() != out.logits.size()) {
        throw DimensionError("dlogits size does not match logits");
    }

    Tensor dw, db, dfeat;
    dense_backward(h.w, feat, dlogits, dw, db, dfeat);
    NetBackward nb = net_backward(net_, cache, dfeat, /*want_stats=*/true);

    out.grads = nb.grads;
    out.grads.add_segment({head_layer_id(head_id), ParamRole::weight}, dw);
    out.grads.add_segment({head_layer_id(head_id), ParamRole::bias}, db);
    out.stats = std::move(nb.stats);
    out.stats.push_back({head_layer_id(head_id), feat, dlogits});
    return out;
}

ParameterVector NonlinearModel::trainable(int task) const {
    const int head_id = head_for(mode_, task);
    const Head& h = head_at(task);
    ParameterVector v = net_.params;
    v.add_segment({head_layer_id(head_id), ParamRole::weight}, h.w);
    v.add_segment({head_layer_id(head_id), ParamRole::bias}, h.b);
    return v;
}

void NonlinearModel::set_trainable(int task, const ParameterVector& v) {
    const int head_id = head_for(mode_, task);
    Head& h = heads_.at(head_id);
    for (const Segment& seg : net_.params.segments()) {
        net_.params.set(seg.key, v.get(seg.key));
    }
    h.w = v.get({head_layer_id(head_id), ParamRole::weight});
    h.b = v.get({head_layer_id(head_id), ParamRole::bias});
}

std::vector<ParamKey> NonlinearModel::penalized_keys(int task) const {
    std::vector<ParamKey> keys;
    for (const Segment& seg : net_.params.segments()) keys.push_back(seg.key);
    if (mode_ != Mode::task_il) {
        const int head_id = head_for(mode_, task);
        keys.push_back({head_layer_id(head_id), ParamRole::weight});
        keys.push_back({head_layer_id(head_id), ParamRole::bias});
    }
    return keys;
}

std::vector<DenseSegmentInfo> NonlinearModel::penalized_dense(int task) const {
    std::vector<DenseSegmentInfo> out;
    const auto chain = net_.shape_chain();
    for (std::size_t l = 0; l < net_.layers.size(); ++l) {
        if (net_.layers[l].kind == LayerKind::dense) {
            out.push_back({static_cast<int>(l), chain[l][0], net_.layers[l].units});
        }
    }
    if (mode_ != Mode::task_il) {
        const int head_id = head_for(mode_, task);
        out.push_back({head_layer_id(head_id), feature_dim_, head_width(task)});
    }
    return out;
}

bool NonlinearModel::has_head(int task) const {
    return heads_.count(head_for(mode_, task)) != 0;
}

std::size_t NonlinearModel::head_width(int task) const { return head_at(task).w.rows(); }

void NonlinearModel::add_head(int task, std::size_t classes, Rng* rng, double scale) {
    const int head_id = head_for(mode_, task);
    if (heads_.count(head_id)) throw UsageError("head already exists for task " + std::to_string(task));
    Head h;
    h.w = (rng && scale > 0.0) ? rng->normal_tensor({classes, feature_dim_}, 0.0, scale)
                               : Tensor({classes, feature_dim_});
    h.b = Tensor({classes});
    heads_[head_id] = std::move(h);
}

void NonlinearModel::expand_head(int task, std::size_t extra) {
    if (extra == 0) return;
    const int head_id = head_for(mode_, task);
    auto it = heads_.find(head_id);
    if (it == heads_.end()) throw UsageError("expand_head: no head for task " + std::to_string(task));
    Head& h = it->second;
    const std::size_t old_c = h.w.rows();
    Tensor w({old_c + extra, feature_dim_});
    for (std::size_t i = 0; i < old_c * feature_dim_; ++i) w[i] = h.w[i];
    Tensor b({old_c + extra});
    for (std::size_t i = 0; i < old_c; ++i) b[i] = h.b[i];
    h.w = std::move(w);
    h.b = std::move(b);
}

}  // namespace lincl
