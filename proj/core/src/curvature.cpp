#include "lincl/curvature.hpp"

#include <cmath>
#include <string>

#include "lincl/errors.hpp"
#include "lincl/linalg.hpp"

namespace lincl {

CurvatureKind curvature_kind_from(const std::string& name) {
    if (name == "none") return CurvatureKind::none;
    if (name == "diagonal") return CurvatureKind::diagonal;
    if (name == "kfac") return CurvatureKind::kfac;
    if (name == "tkfac") return CurvatureKind::tkfac;
    if (name == "exact") return CurvatureKind::exact;
    throw ValidationError("unknown curvature kind: " + name);
}

const char* curvature_kind_name(CurvatureKind kind) {
    switch (kind) {
        case CurvatureKind::none: return "none";
        case CurvatureKind::diagonal: return "diagonal";
        case CurvatureKind::kfac: return "kfac";
        case CurvatureKind::tkfac: return "tkfac";
        case CurvatureKind::exact: return "exact";
    }
    return "?";
}

Tensor append_one(const Tensor& a) {
    Tensor out({a.size() + 1});
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
    out[a.size()] = 1.0;
    return out;
}

double trace_of(const Tensor& m) {
    if (m.rank() != 2 || m.rows() != m.cols()) throw DimensionError("trace needs a square matrix");
    double acc = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) acc += m.at(i, i);
    return acc;
}

Tensor sampled_loss_dlogits(LossKind loss, const Tensor& logits, Rng& rng) {
    if (loss == LossKind::mse) {
        // Unit-variance Gaussian model around the output: the log-likelihood
        // gradient at a sampled target is the residual itself.
        return rng.normal_tensor(logits.shape());
    }
    const Tensor p = softmax(logits);
    double u = rng.uniform();
    std::size_t y = p.size() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        u -= p[i];
        if (u < 0.0) {
            y = i;
            break;
        }
    }
    Tensor g = p;
    g[y] -= 1.0;
    return g;
}

namespace {

void require_data(const LabeledSet& data, const char* what) {
    if (data.size() == 0) throw ValidationError(std::string(what) + ": empty dataset");
}

// Shared per-sample loop over (input, sampled label) pairs.
template <typename Fn>
void for_each_fisher_sample(const TaskModel& model, const LabeledSet& data, int task,
                            LossKind loss, Rng& rng, std::size_t samples_per_input, Fn&& fn) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tensor x = data.sample(i);
        for (std::size_t s = 0; s < samples_per_input; ++s) {
            SampleGrad sg = model.backprop(
                x, task, [&](const Tensor& logits) { return sampled_loss_dlogits(loss, logits, rng); });
            fn(sg);
        }
    }
}

}  // namespace

DiagonalCurvature estimate_fisher_diagonal(const TaskModel& model, const LabeledSet& data,
                                           int task, LossKind loss, Rng& rng,
                                           std::size_t samples_per_input) {
    require_data(data, "estimate_fisher_diagonal");
    if (samples_per_input == 0) throw ValidationError("samples_per_input must be >= 1");
    const auto keys = model.penalized_keys(task);
    DiagonalCurvature out;
    out.diag = model.trainable(task).subset(keys).zeros_like();
    std::size_t count = 0;
    for_each_fisher_sample(model, data, task, loss, rng, samples_per_input, [&](SampleGrad& sg) {
        const ParameterVector pg = sg.grads.subset(keys);
        for (std::size_t j = 0; j < pg.size(); ++j) out.diag[j] += pg[j] * pg[j];
        ++count;
    });
    out.diag.scale(1.0 / static_cast<double>(count));
    return out;
}

KfacEstimate estimate_kfac(const TaskModel& model, const LabeledSet& data, int task, LossKind loss,
                           Rng& rng, std::size_t samples_per_input) {
    require_data(data, "estimate_kfac");
    const auto dense = model.penalized_dense(task);
    if (dense.empty()) throw UsageError("estimate_kfac: model has no dense penalized layers");

    KfacEstimate est;
    for (const DenseSegmentInfo& d : dense) {
        KroneckerBlock b;
        b.layer_id = d.layer_id;
        b.A = Tensor({d.in_dim + 1, d.in_dim + 1});
        b.G = Tensor({d.out_dim, d.out_dim});
        est.blocks.push_back(std::move(b));
    }
    // Non-dense penalized segments (conv layers) fall back to diagonal Fisher.
    std::vector<ParamKey> diag_keys;
    for (ParamKey k : model.penalized_keys(task)) {
        bool covered = false;
        for (const DenseSegmentInfo& d : dense) {
            if (d.layer_id == k.layer) {
                covered = true;
                break;
            }
        }
        if (!covered) diag_keys.push_back(k);
    }
    if (!diag_keys.empty()) est.diag = model.trainable(task).subset(diag_keys).zeros_like();

    std::size_t count = 0;
    for_each_fisher_sample(model, data, task, loss, rng, samples_per_input, [&](SampleGrad& sg) {
        for (const LayerStatSample& st : sg.stats) {
            for (KroneckerBlock& b : est.blocks) {
                if (b.layer_id != st.layer) continue;
                const Tensor a1 = append_one(st.a);
                for (std::size_t i = 0; i < a1.size(); ++i)
                    for (std::size_t j = 0; j < a1.size(); ++j) b.A.at(i, j) += a1[i] * a1[j];
                for (std::size_t i = 0; i < st.g.size(); ++i)
                    for (std::size_t j = 0; j < st.g.size(); ++j) b.G.at(i, j) += st.g[i] * st.g[j];
                b.tau += a1.dot(a1) * st.g.dot(st.g);
                ++b.sample_count;
            }
        }
        if (!diag_keys.empty()) {
            const ParameterVector pg = sg.grads.subset(diag_keys);
            for (std::size_t j = 0; j < pg.size(); ++j) est.diag[j] += pg[j] * pg[j];
        }
        ++count;
    });
    const double inv = 1.0 / static_cast<double>(count);
    for (KroneckerBlock& b : est.blocks) {
        b.A *= inv;
        b.G *= inv;
        b.tau *= inv;
    }
    est.diag.scale(inv);
    return est;
}

KroneckerBlock tkfac_rescale(KroneckerBlock block) {
    const double denom = trace_of(block.A) * trace_of(block.G);
    if (denom <= 0.0) {
        block.degenerate = true;
        return block;  // kept unscaled
    }
    block.G *= block.tau / denom;
    return block;
}

Tensor softmax_hessian_analytic(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw DimensionError("softmax_hessian_analytic expects >= 2 logits");
    }
    const Tensor p = softmax(logits);
    Tensor h({p.size(), p.size()});
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            h.at(i, j) = (i == j ? p[i] : 0.0) - p[i] * p[j];
        }
    }
    return h;
}

Tensor exact_fim(const TaskModel& model, const LabeledSet& data, int task, LossKind loss, Rng& rng,
                 std::size_t samples_per_input, std::size_t cap, FimEstimator estimator) {
    require_data(data, "exact_fim");
    const auto keys = model.penalized_keys(task);
    const ParameterVector probe = model.trainable(task).subset(keys);
    const std::size_t p = probe.size();
    if (p > cap) {
        throw CapacityError("exact_fim: " + std::to_string(p) + " parameters exceed cap " +
                            std::to_string(cap));
    }
    Tensor fim({p, p});
    std::size_t count = 0;
    if (estimator == FimEstimator::sampled) {
        for_each_fisher_sample(model, data, task, loss, rng, samples_per_input, [&](SampleGrad& sg) {
            const ParameterVector g = sg.grads.subset(keys);
            for (std::size_t i = 0; i < p; ++i) {
                const double gi = g[i];
                if (gi == 0.0) continue;
                for (std::size_t j = 0; j < p; ++j) fim.at(i, j) += gi * g[j];
            }
            ++count;
        });
    } else {
        // Closed-form label expectation: J^T J for MSE, J^T (diag(p)-pp^T) J
        // for SCE, with J assembled from one backprop per logit.
        for (std::size_t n = 0; n < data.size(); ++n) {
            const Tensor x = data.sample(n);
            const Tensor logits = model.predict(x, task);
            const std::size_t c = logits.size();
            Tensor jac({c, p});
            for (std::size_t row = 0; row < c; ++row) {
                SampleGrad sg = model.backprop(x, task, [&](const Tensor& lg) {
                    Tensor e(lg.shape());
                    e[row] = 1.0;
                    return e;
                });
                const ParameterVector g = sg.grads.subset(keys);
                for (std::size_t j = 0; j < p; ++j) jac.at(row, j) = g[j];
            }
            const Tensor inner =
                loss == LossKind::mse ? identity(c) : softmax_hessian_analytic(logits);
            fim += matmul(transpose(jac), matmul(inner, jac));
            ++count;
        }
    }
    fim *= 1.0 / static_cast<double>(count);
    return fim;
}

CurvatureStore estimate_curvature(CurvatureKind kind, const TaskModel& model,
                                  const LabeledSet& data, int task, LossKind loss, Rng& rng,
                                  std::size_t samples_per_input, std::size_t exact_cap,
                                  FimEstimator estimator) {
    CurvatureStore store;
    store.kind = kind;
    store.task_count = 1;
    store.reference = model.trainable(task).subset(model.penalized_keys(task));
    switch (kind) {
        case CurvatureKind::none:
            throw UsageError("estimate_curvature: kind 'none' has nothing to estimate");
        case CurvatureKind::diagonal:
            store.diag = estimate_fisher_diagonal(model, data, task, loss, rng, samples_per_input).diag;
            break;
        case CurvatureKind::kfac:
        case CurvatureKind::tkfac: {
            KfacEstimate est = estimate_kfac(model, data, task, loss, rng, samples_per_input);
            if (kind == CurvatureKind::tkfac) {
                for (KroneckerBlock& b : est.blocks) b = tkfac_rescale(std::move(b));
            }
            store.blocks = std::move(est.blocks);
            store.diag = std::move(est.diag);
            break;
        }
        case CurvatureKind::exact:
            store.full = exact_fim(model, data, task, loss, rng, samples_per_input, exact_cap, estimator);
            break;
    }
    return store;
}

CurvatureStore accumulate(CurvatureStore store, CurvatureStore estimate, std::size_t t) {
    if (t == 0) throw UsageError("accumulate: task index t starts at 1");
    if (t == 1 || store.empty()) {
        estimate.task_count = 1;
        return estimate;
    }
    if (store.kind != estimate.kind) {
        throw UsageError("accumulate: curvature kind mismatch");
    }
    const double w_old = static_cast<double>(t - 1) / static_cast<double>(t);
    const double w_new = 1.0 / static_cast<double>(t);
    switch (store.kind) {
        case CurvatureKind::none:
            break;
        case CurvatureKind::diagonal:
            store.diag.scale(w_old);
            store.diag.axpy(w_new, estimate.diag);
            break;
        case CurvatureKind::kfac:
        case CurvatureKind::tkfac: {
            if (store.blocks.size() != estimate.blocks.size()) {
                throw UsageError("accumulate: block count mismatch");
            }
            for (std::size_t i = 0; i < store.blocks.size(); ++i) {
                KroneckerBlock& b = store.blocks[i];
                const KroneckerBlock& e = estimate.blocks[i];
                if (b.layer_id != e.layer_id || !b.A.same_shape(e.A) || !b.G.same_shape(e.G)) {
                    throw UsageError("accumulate: block layout mismatch (expand the store first?)");
                }
                b.A *= w_old;
                b.A.axpy(w_new, e.A);
                b.G *= w_old;
                b.G.axpy(w_new, e.G);
                b.tau = w_old * b.tau + w_new * e.tau;
                b.sample_count += e.sample_count;
                b.degenerate = b.degenerate || e.degenerate;
            }
            if (store.diag.size() > 0 || estimate.diag.size() > 0) {
                store.diag.scale(w_old);
                store.diag.axpy(w_new, estimate.diag);
            }
            break;
        }
        case CurvatureKind::exact:
            if (!store.full.same_shape(estimate.full)) {
                throw UsageError("accumulate: exact Hessian shape mismatch");
            }
            store.full *= w_old;
            store.full.axpy(w_new, estimate.full);
            break;
    }
    store.reference = std::move(estimate.reference);
    store.task_count = t;
    return store;
}

namespace {

// [dW | db] as one [out x (in+1)] matrix, matching the homogeneous A.
Tensor join_bias_column(const Tensor& w, const Tensor& b) {
    const std::size_t out = w.rows(), in = w.cols();
    Tensor m({out, in + 1});
    for (std::size_t i = 0; i < out; ++i) {
        for (std::size_t j = 0; j < in; ++j) m.at(i, j) = w.at(i, j);
        m.at(i, in) = b[i];
    }
    return m;
}

}  // namespace

PenaltyResult penalty(const CurvatureStore& store, const ParameterVector& theta) {
    if (store.empty()) throw UsageError("penalty: curvature store is empty");
    if (!theta.same_layout(store.reference)) {
        throw UsageError("penalty: theta layout does not match the stored reference");
    }
    ParameterVector delta = theta;
    delta.axpy(-1.0, store.reference);

    PenaltyResult out;
    out.grad = theta.zeros_like();
    switch (store.kind) {
        case CurvatureKind::none:
            break;
        case CurvatureKind::diagonal: {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                out.value += 0.5 * store.diag[i] * delta[i] * delta[i];
                out.grad[i] = store.diag[i] * delta[i];
            }
            break;
        }
        case CurvatureKind::kfac:
        case CurvatureKind::tkfac: {
            for (const KroneckerBlock& b : store.blocks) {
                const ParamKey wkey{b.layer_id, ParamRole::weight};
                const ParamKey bkey{b.layer_id, ParamRole::bias};
                const Tensor dwb = join_bias_column(delta.get(wkey), delta.get(bkey));
                out.value += 0.5 * kron_quadratic_form(dwb, b.A, b.G);
                const Tensor g = kron_quadratic_grad(dwb, b.A, b.G);
                const std::size_t in = dwb.cols() - 1;
                Tensor gw({g.rows(), in}), gb({g.rows()});
                for (std::size_t i = 0; i < g.rows(); ++i) {
                    for (std::size_t j = 0; j < in; ++j) gw.at(i, j) = g.at(i, j);
                    gb[i] = g.at(i, in);
                }
                out.grad.set(wkey, gw);
                out.grad.set(bkey, gb);
            }
            for (const Segment& seg : store.diag.segments()) {
                const Tensor d = store.diag.get(seg.key);
                const Tensor dv = delta.get(seg.key);
                Tensor g(dv.shape());
                for (std::size_t i = 0; i < dv.size(); ++i) {
                    out.value += 0.5 * d[i] * dv[i] * dv[i];
                    g[i] = d[i] * dv[i];
                }
                out.grad.set(seg.key, g);
            }
            break;
        }
        case CurvatureKind::exact: {
            const std::size_t p = delta.size();
            if (store.full.rank() != 2 || store.full.rows() != p) {
                throw UsageError("penalty: exact Hessian does not match theta size");
            }
            for (std::size_t i = 0; i < p; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < p; ++j) acc += store.full.at(i, j) * delta[j];
                out.grad[i] = acc;
                out.value += 0.5 * delta[i] * acc;
            }
            break;
        }
    }
    return out;
}

CurvatureStore expand_classifier_curvature(CurvatureStore store, int head_layer_id,
                                           std::size_t old_out, std::size_t new_out,
                                           LossKind loss) {
    if (loss != LossKind::mse) {
        throw UsageError("classifier curvature expansion is defined for MSE training only");
    }
    if (new_out < old_out) throw UsageError("expand_classifier_curvature: cannot shrink");
    if (store.kind != CurvatureKind::kfac && store.kind != CurvatureKind::tkfac) {
        throw UsageError("classifier curvature expansion needs a Kronecker-factored head block");
    }
    if (new_out == old_out) return store;

    bool found = false;
    for (KroneckerBlock& b : store.blocks) {
        if (b.layer_id != head_layer_id) continue;
        found = true;
        if (b.G.rows() != old_out) {
            throw UsageError("expand_classifier_curvature: stored head width mismatch");
        }
        // New units: G gets unit diagonal entries (the exact MSE output
        // Hessian for a zero-initialized unit is E[zz^T] x I); A is reused
        // unchanged, so no data pass is needed.
        Tensor g({new_out, new_out});
        for (std::size_t i = 0; i < old_out; ++i)
            for (std::size_t j = 0; j < old_out; ++j) g.at(i, j) = b.G.at(i, j);
        for (std::size_t i = old_out; i < new_out; ++i) g.at(i, i) = 1.0;
        b.G = std::move(g);
        b.tau += trace_of(b.A) * static_cast<double>(new_out - old_out);
    }
    if (!found) throw UsageError("expand_classifier_curvature: no head block in store");

    // Reference grows with zeros on the appended rows (appended units are
    // created at zero).
    ParameterVector new_ref;
    const std::size_t feat = [&] {
        const Segment& s = store.reference.segment({head_layer_id, ParamRole::weight});
        return s.shape[1];
    }();
    for (const Segment& seg : store.reference.segments()) {
        if (seg.key.layer == head_layer_id && seg.key.role == ParamRole::weight) {
            Tensor w({new_out, feat});
            const Tensor old_w = store.reference.get(seg.key);
            for (std::size_t i = 0; i < old_out * feat; ++i) w[i] = old_w[i];
            new_ref.add_segment(seg.key, w);
        } else if (seg.key.layer == head_layer_id && seg.key.role == ParamRole::bias) {
            Tensor b({new_out});
            const Tensor old_b = store.reference.get(seg.key);
            for (std::size_t i = 0; i < old_out; ++i) b[i] = old_b[i];
            new_ref.add_segment(seg.key, b);
        } else {
            new_ref.add_segment(seg.key, store.reference.get(seg.key));
        }
    }
    store.reference = std::move(new_ref);
    return store;
}

}  // namespace lincl
