#include "lincl/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "lincl/errors.hpp"

namespace lincl {

namespace {

LabeledSet draw_mixture(DatasetKind kind, std::size_t classes, std::size_t samples,
                        double noise, const std::vector<double>& class_weights, Rng& rng) {
    LabeledSet set;
    set.inputs = Tensor({samples, 2});
    set.labels.resize(samples);
    double total = 0.0;
    for (double w : class_weights) total += w;
    for (std::size_t i = 0; i < samples; ++i) {
        double u = rng.uniform() * total;
        std::size_t cls = classes - 1;
        for (std::size_t c = 0; c < classes; ++c) {
            u -= class_weights[c];
            if (u < 0.0) {
                cls = c;
                break;
            }
        }
        const Tensor p = synth_point(kind, classes, cls, rng.uniform(), noise, rng);
        set.inputs.at(i, 0) = p[0];
        set.inputs.at(i, 1) = p[1];
        set.labels[i] = static_cast<int>(cls);
    }
    return set;
}

// Samples restricted to one task's class set; labels either global or local
// to the set.
LabeledSet draw_subset(DatasetKind kind, std::size_t classes, std::size_t samples, double noise,
                       const std::vector<int>& class_set, bool local_labels, Rng& rng) {
    LabeledSet set;
    set.inputs = Tensor({samples, 2});
    set.labels.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t pick = i % class_set.size();
        const std::size_t cls = static_cast<std::size_t>(class_set[pick]);
        const Tensor p = synth_point(kind, classes, cls, rng.uniform(), noise, rng);
        set.inputs.at(i, 0) = p[0];
        set.inputs.at(i, 1) = p[1];
        set.labels[i] = local_labels ? static_cast<int>(pick) : static_cast<int>(cls);
    }
    return set;
}

}  // namespace

Scenario build_scenario(Mode mode, const StreamConfig& cfg, Rng& rng) {
    if (cfg.classes < 2) throw ValidationError("stream needs at least 2 classes");
    if (cfg.tasks == 0) throw ValidationError("stream needs at least 1 task");
    if (cfg.samples_per_task == 0 || cfg.test_samples_per_task == 0) {
        throw ValidationError("stream needs nonempty train and test splits");
    }

    Scenario s;
    s.mode = mode;
    s.total_classes = cfg.classes;
    s.task_weights.assign(cfg.tasks, 1.0);

    if (mode == Mode::data_il) {
        const double t_count = static_cast<double>(cfg.tasks);
        for (std::size_t t = 0; t < cfg.tasks; ++t) {
            std::vector<double> weights(cfg.classes, 1.0);
            if (cfg.skew > 0.0) {
                for (std::size_t c = 0; c < cfg.classes; ++c) {
                    const double phase = 2.0 * std::numbers::pi *
                                         (static_cast<double>(c) / static_cast<double>(cfg.classes) -
                                          static_cast<double>(t) / t_count);
                    weights[c] = std::exp(cfg.skew * std::cos(phase));
                }
            }
            LabeledSet train = draw_mixture(cfg.kind, cfg.classes, cfg.samples_per_task, cfg.noise,
                                            weights, rng);
            LabeledSet test = draw_mixture(cfg.kind, cfg.classes, cfg.test_samples_per_task,
                                           cfg.noise, weights, rng);
            if (cfg.drift != 0.0) {
                const double angle = cfg.drift * static_cast<double>(t);
                train = rotate2d(train, angle);
                test = rotate2d(test, angle);
            }
            s.tasks.push_back({std::move(train), static_cast<int>(t)});
            s.tests.push_back({std::move(test), static_cast<int>(t)});
            std::vector<int> all(cfg.classes);
            for (std::size_t c = 0; c < cfg.classes; ++c) all[c] = static_cast<int>(c);
            s.class_sets.push_back(std::move(all));
        }
        return s;
    }

    // Disjoint consecutive class groups for task-/class-incremental streams.
    if (cfg.classes < cfg.tasks) {
        throw ValidationError("disjoint streams need classes >= tasks");
    }
    const std::size_t base = cfg.classes / cfg.tasks;
    const std::size_t extra = cfg.classes % cfg.tasks;
    std::size_t next_class = 0;
    const bool local = mode == Mode::task_il;
    for (std::size_t t = 0; t < cfg.tasks; ++t) {
        const std::size_t count = base + (t < extra ? 1 : 0);
        std::vector<int> set(count);
        for (std::size_t i = 0; i < count; ++i) set[i] = static_cast<int>(next_class++);
        LabeledSet train = draw_subset(cfg.kind, cfg.classes, cfg.samples_per_task, cfg.noise, set,
                                       local, rng);
        LabeledSet test = draw_subset(cfg.kind, cfg.classes, cfg.test_samples_per_task, cfg.noise,
                                      set, local, rng);
        s.tasks.push_back({std::move(train), static_cast<int>(t)});
        s.tests.push_back({std::move(test), static_cast<int>(t)});
        s.class_sets.push_back(std::move(set));
    }
    return s;
}

void validate_scenario(const Scenario& scenario) {
    if (scenario.tasks.size() != scenario.tests.size()) {
        throw ValidationError("scenario train/test task counts differ");
    }
    if (scenario.mode != Mode::data_il) {
        std::set<int> seen;
        for (const auto& cs : scenario.class_sets) {
            for (int c : cs) {
                if (!seen.insert(c).second) {
                    throw ValidationError("disjoint stream has overlapping class sets (class " +
                                          std::to_string(c) + ")");
                }
            }
        }
    }
    for (const TaskBatch& t : scenario.tasks) {
        if (t.data.size() == 0) throw ValidationError("empty task batch");
    }
}

}  // namespace lincl
