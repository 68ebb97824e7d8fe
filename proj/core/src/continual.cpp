#include "lincl/continual.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "lincl/errors.hpp"
#include "lincl/linalg.hpp"

namespace lincl {

void reservoir_update(ReplayBuffer& buf, ReplayItem item, Rng& rng) {
    if (buf.capacity == 0) {
        ++buf.seen;
        return;
    }
    if (buf.slots.size() < buf.capacity) {
        buf.slots.push_back(std::move(item));
    } else {
        const std::size_t k = rng.uniform_index(buf.seen + 1);
        if (k < buf.capacity) buf.slots[k] = std::move(item);
    }
    ++buf.seen;
}

AccBwt compute_acc_bwt(const MetricsMatrix& m) {
    if (m.tasks == 0) throw UsageError("compute_acc_bwt: empty matrix");
    const std::size_t last = m.tasks - 1;
    AccBwt out;
    double acc = 0.0;
    for (std::size_t j = 0; j < m.tasks; ++j) acc += m.at(last, j);
    out.acc = acc / static_cast<double>(m.tasks);
    if (m.tasks >= 2) {
        double bwt = 0.0;
        for (std::size_t j = 0; j < last; ++j) bwt += m.at(last, j) - m.at(j, j);
        out.bwt = bwt / static_cast<double>(last);
    }
    return out;
}

namespace {

std::size_t argmax_index(const Tensor& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

struct RegTerms {
    bool penalty_active = false;
    bool replay_active = false;
};

RegTerms regularizer_terms(const TaskModel& model, const CurvatureStore& store, std::size_t t,
                           const ReplayBuffer& buf, const TrainConfig& cfg) {
    RegTerms r;
    if (t <= 1) return r;
    const bool is_class_il = model.mode() == Mode::class_il;
    const double lambda = is_class_il ? cfg.lambda_mix : 1.0;
    if (cfg.curvature != CurvatureKind::none && lambda > 0.0) {
        if (store.empty()) {
            throw UsageError("train_task: curvature store required at task " + std::to_string(t));
        }
        r.penalty_active = true;
    }
    if (is_class_il && cfg.lambda_mix < 1.0 && !buf.slots.empty()) r.replay_active = true;
    return r;
}

}  // namespace

TaskLog train_task(TaskModel& model, const CurvatureStore& store, const TaskBatch& task,
                   std::size_t t, const ReplayBuffer& buf, const TrainConfig& cfg, Rng& rng,
                   double task_weight) {
    if (t == 0) throw UsageError("train_task: task index t starts at 1");
    if (task.data.size() == 0) throw ValidationError("train_task: empty task batch");
    const RegTerms reg = regularizer_terms(model, store, t, buf, cfg);
    const bool has_reg = reg.penalty_active || reg.replay_active;
    const double w_data = has_reg ? 1.0 / static_cast<double>(t) : 1.0;
    const double w_reg = has_reg ? static_cast<double>(t - 1) / static_cast<double>(t) : 0.0;
    const double lambda = model.mode() == Mode::class_il ? cfg.lambda_mix : 1.0;

    const auto pen_keys = model.penalized_keys(task.task_id);
    ParameterVector theta = model.trainable(task.task_id);
    OptimizerState opt(cfg.optimizer, theta);

    TaskLog log;
    log.task_id = task.task_id;

    std::vector<std::size_t> order(task.data.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, task.data.size()));

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_data = 0.0, epoch_obj = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(start + batch, order.size());
            const double inv_bs = 1.0 / static_cast<double>(stop - start);

            ParameterVector grads = theta.zeros_like();
            double data_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                const Tensor x = task.data.data.sample(order[i]);
                const int label = task.data.labels[order[i]];
                double sample_loss = 0.0;
                SampleGrad sg = model.backprop(x, task.task_id, [&](const Tensor& logits) {
                    LossGrad lg = eval_loss(cfg.loss, logits, label, cfg.alpha);
                    sample_loss = lg.value;
                    lg.grad *= task_weight;
                    return lg.grad;
                });
                data_loss += task_weight * sample_loss;
                grads.axpy(inv_bs, sg.grads);
            }
            data_loss *= inv_bs;
            if (!std::isfinite(data_loss)) {
                throw NumericError("train_task: non-finite loss at task " +
                                   std::to_string(task.task_id) + ", epoch " +
                                   std::to_string(epoch));
            }

            double objective = w_data * data_loss;
            grads.scale(w_data);

            if (reg.penalty_active) {
                const ParameterVector sub = theta.subset(pen_keys);
                const PenaltyResult pen = penalty(store, sub);
                objective += w_reg * lambda * pen.value;
                grads.axpy_by_key(w_reg * lambda, pen.grad);
            }
            if (reg.replay_active) {
                const std::size_t rb = std::max<std::size_t>(
                    1, std::min(cfg.replay_batch, buf.slots.size()));
                const double inv_rb = 1.0 / static_cast<double>(rb);
                double replay_loss = 0.0;
                ParameterVector rgrads = theta.zeros_like();
                for (std::size_t r = 0; r < rb; ++r) {
                    const ReplayItem& item = buf.slots[rng.uniform_index(buf.slots.size())];
                    double sample_loss = 0.0;
                    SampleGrad sg = model.backprop(item.input, task.task_id, [&](const Tensor& logits) {
                        LossGrad lg = eval_loss(cfg.loss, logits, item.label, cfg.alpha);
                        sample_loss = lg.value;
                        return lg.grad;
                    });
                    replay_loss += sample_loss;
                    rgrads.axpy(inv_rb, sg.grads);
                }
                replay_loss *= inv_rb;
                objective += w_reg * (1.0 - lambda) * replay_loss;
                grads.axpy(w_reg * (1.0 - lambda), rgrads);
            }

            opt.step(theta, grads);
            model.set_trainable(task.task_id, theta);
            epoch_data += data_loss;
            epoch_obj += objective;
            ++batches;
        }
        log.epoch_data_loss.push_back(epoch_data / static_cast<double>(batches));
        log.epoch_objective.push_back(epoch_obj / static_cast<double>(batches));
    }
    return log;
}

double evaluate_accuracy(const TaskModel& model, const TaskBatch& test, Mode mode) {
    if (test.data.size() == 0) throw ValidationError("evaluate_accuracy: empty test split");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < test.data.size(); ++i) {
        const Tensor logits = model.predict(test.data.sample(i), test.task_id);
        (void)mode;  // head routing is already encoded in the model's mode
        if (static_cast<int>(argmax_index(logits)) == test.data.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.data.size());
}

double knn_probe(const TaskModel& model, const LabeledSet& train, const LabeledSet& test,
                 std::size_t k) {
    if (k == 0) throw ValidationError("knn_probe: k must be >= 1");
    if (train.size() == 0) throw ValidationError("knn_probe: empty reference set");
    std::vector<Tensor> ref;
    ref.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) ref.push_back(model.feature(train.sample(i)));

    const std::size_t kk = std::min(k, train.size());
    std::size_t hits = 0;
    std::vector<std::pair<double, std::size_t>> dist(train.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const Tensor f = model.feature(test.sample(i));
        for (std::size_t j = 0; j < train.size(); ++j) {
            Tensor d = ref[j];
            d -= f;
            dist[j] = {d.dot(d), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
        int best_label = -1;
        std::size_t best_votes = 0;
        std::map<int, std::size_t> votes;
        for (std::size_t n = 0; n < kk; ++n) votes[train.labels[dist[n].second]]++;
        for (const auto& [label, count] : votes) {
            if (count > best_votes) {  // map order breaks vote ties by smallest label
                best_votes = count;
                best_label = label;
            }
        }
        if (best_label == test.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(test.size());
}

ScenarioResult run_scenario(const Scenario& scenario, TaskModel& model, const EngineConfig& cfg,
                            Rng& rng) {
    validate_scenario(scenario);
    const std::size_t t_count = scenario.size();
    ScenarioResult result;
    result.matrix = MetricsMatrix(t_count);
    result.buffer.capacity = cfg.buffer_capacity;

    const double head_scale = cfg.head_init_scale > 0.0
                                  ? cfg.head_init_scale
                                  : 1.0 / std::sqrt(static_cast<double>(model.feature_dim()));

    LabeledSet probe_train, probe_test;
    if (cfg.probe) {
        for (std::size_t i = 0; i < t_count; ++i) {
            probe_train = concat(probe_train, scenario.tasks[i].data);
            probe_test = concat(probe_test, scenario.tests[i].data);
        }
    }

    if (scenario.mode == Mode::data_il && !model.has_head(0)) {
        model.add_head(0, scenario.total_classes, &rng, head_scale);
    }

    for (std::size_t t = 1; t <= t_count; ++t) {
        const TaskBatch& task = scenario.tasks[t - 1];
        const std::size_t classes_t = scenario.class_sets[t - 1].size();

        if (scenario.mode == Mode::task_il) {
            model.add_head(task.task_id, classes_t, &rng, head_scale);
        } else if (scenario.mode == Mode::class_il) {
            if (!model.has_head(0)) {
                model.add_head(0, classes_t, &rng, head_scale);
            } else {
                const std::size_t old_width = model.head_width(0);
                model.expand_head(0, classes_t);
                if (!result.store.empty() && cfg.train.curvature != CurvatureKind::none &&
                    cfg.train.lambda_mix > 0.0) {
                    result.store = expand_classifier_curvature(
                        std::move(result.store), head_layer_id(0), old_width,
                        old_width + classes_t, cfg.train.loss);
                }
            }
        }

        const double weight =
            t - 1 < scenario.task_weights.size() ? scenario.task_weights[t - 1] : 1.0;
        result.logs.push_back(
            train_task(model, result.store, task, t, result.buffer, cfg.train, rng, weight));

        if (cfg.train.curvature != CurvatureKind::none) {
            CurvatureStore est = estimate_curvature(
                cfg.train.curvature, model, task.data, task.task_id, cfg.train.loss, rng,
                cfg.train.samples_per_input, cfg.train.exact_cap, cfg.train.fim_estimator);
            result.store = accumulate(std::move(result.store), std::move(est), t);
        }

        for (std::size_t i = 0; i < task.data.size(); ++i) {
            reservoir_update(result.buffer,
                             {task.data.sample(i), task.data.labels[i], task.task_id}, rng);
        }

        for (std::size_t j = 0; j < t; ++j) {
            result.matrix.at(t - 1, j) = evaluate_accuracy(model, scenario.tests[j], scenario.mode);
        }

        if (cfg.probe) {
            result.probe_accuracy.push_back(knn_probe(model, probe_train, probe_test, cfg.probe_k));
        }
        if (cfg.trace_lambda_max) {
            Tensor fim = exact_fim(model, task.data, task.task_id, cfg.train.loss, rng,
                                   cfg.train.samples_per_input, cfg.train.exact_cap);
            result.lambda_max_trace.push_back(max_eigenvalue(fim, rng));
        }
    }
    result.metrics = compute_acc_bwt(result.matrix);
    return result;
}

}  // namespace lincl
