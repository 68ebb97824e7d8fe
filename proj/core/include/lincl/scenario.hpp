#pragma once

#include <vector>

#include "lincl/dataset.hpp"
#include "lincl/model.hpp"

namespace lincl {

struct TaskBatch {
    LabeledSet data;
    int task_id = 0;
};

// Sequential task stream plus the matching test splits. For task-/class-
// incremental streams the class sets are pairwise disjoint; data-incremental
// tasks share one label space.
struct Scenario {
    Mode mode = Mode::data_il;
    std::vector<TaskBatch> tasks;
    std::vector<TaskBatch> tests;
    std::vector<double> task_weights;            // lambda_t, default 1
    std::vector<std::vector<int>> class_sets;    // global class ids per task
    std::size_t total_classes = 0;

    std::size_t size() const { return tasks.size(); }
};

struct StreamConfig {
    DatasetKind kind = DatasetKind::blobs;
    std::size_t classes = 5;
    std::size_t tasks = 10;
    std::size_t samples_per_task = 200;
    std::size_t test_samples_per_task = 200;
    double noise = 0.15;
    // data-IL only: concentration of each task's class mixture (0 = uniform;
    // larger values focus every task on a rotating subset of classes) and a
    // per-task input rotation in radians.
    double skew = 0.0;
    double drift = 0.0;
};

Scenario build_scenario(Mode mode, const StreamConfig& cfg, Rng& rng);

void validate_scenario(const Scenario& scenario);

}  // namespace lincl
