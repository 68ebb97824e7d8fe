#pragma once

#include <optional>
#include <vector>

#include "lincl/curvature.hpp"
#include "lincl/optim.hpp"
#include "lincl/scenario.hpp"

namespace lincl {

struct ReplayItem {
    Tensor input;
    int label = 0;    // global label
    int task_id = 0;
};

struct ReplayBuffer {
    std::size_t capacity = 0;
    std::vector<ReplayItem> slots;
    std::size_t seen = 0;  // stream items offered so far
};

// Classic reservoir sampling: a capacity-k buffer holds a uniform random
// k-subset of the stream at every point.
void reservoir_update(ReplayBuffer& buf, ReplayItem item, Rng& rng);

// R[i][j] = accuracy on task j's test split after training task i (j <= i).
struct MetricsMatrix {
    std::size_t tasks = 0;
    std::vector<double> cells;  // row-major, unfilled cells stay 0

    MetricsMatrix() = default;
    explicit MetricsMatrix(std::size_t t) : tasks(t), cells(t * t, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return cells[i * tasks + j]; }
    double at(std::size_t i, std::size_t j) const { return cells[i * tasks + j]; }
};

struct AccBwt {
    double acc = 0.0;
    std::optional<double> bwt;  // absent for single-task streams
};

AccBwt compute_acc_bwt(const MetricsMatrix& m);

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    OptimizerConfig optimizer;
    LossKind loss = LossKind::mse;
    double alpha = 15.0;
    CurvatureKind curvature = CurvatureKind::tkfac;
    double lambda_mix = 0.5;        // class-IL: penalty vs replay weight
    std::size_t replay_batch = 32;  // class-IL replay minibatch size
    std::size_t samples_per_input = 1;
    std::size_t exact_cap = 5000;
    FimEstimator fim_estimator = FimEstimator::sampled;
};

struct TaskLog {
    int task_id = 0;
    std::vector<double> epoch_data_loss;
    std::vector<double> epoch_objective;
};

// One task of the sequential objective
//     L = (1/t) L_data + ((t-1)/t) R,
// where R is the quadratic penalty (data-/task-IL) or the lambda-mixed
// penalty + replay term (class-IL). t == 1, and any configuration without a
// regularizer, reduces to plain fine-tuning with full weight.
TaskLog train_task(TaskModel& model, const CurvatureStore& store, const TaskBatch& task,
                   std::size_t t, const ReplayBuffer& buf, const TrainConfig& cfg, Rng& rng,
                   double task_weight = 1.0);

double evaluate_accuracy(const TaskModel& model, const TaskBatch& test, Mode mode);

// Majority vote over the k nearest training features (Euclidean); distance
// ties resolve by training index, vote ties by smallest class label.
double knn_probe(const TaskModel& model, const LabeledSet& train, const LabeledSet& test,
                 std::size_t k);

struct EngineConfig {
    TrainConfig train;
    std::size_t buffer_capacity = 500;
    double head_init_scale = -1.0;  // <= 0: 1/sqrt(feature_dim)
    bool probe = false;
    std::size_t probe_k = 5;
    bool trace_lambda_max = false;  // records max FIM eigenvalue after each task
};

struct ScenarioResult {
    MetricsMatrix matrix;
    AccBwt metrics;
    std::vector<TaskLog> logs;
    std::vector<double> probe_accuracy;    // per task when probing is enabled
    std::vector<double> lambda_max_trace;  // per task when tracing is enabled
    CurvatureStore store;
    ReplayBuffer buffer;
};

ScenarioResult run_scenario(const Scenario& scenario, TaskModel& model, const EngineConfig& cfg,
                            Rng& rng);

}  // namespace lincl
