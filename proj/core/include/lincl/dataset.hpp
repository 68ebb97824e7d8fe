#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lincl/rng.hpp"
#include "lincl/tensor.hpp"

namespace lincl {

struct LabeledSet {
    Tensor inputs;            // [N x ...]
    std::vector<int> labels;  // length N

    std::size_t size() const { return labels.size(); }
    Tensor sample(std::size_t i) const { return slice0(inputs, i); }
};

enum class DatasetKind : std::uint8_t { blobs = 0, spirals = 1, rings = 2 };

DatasetKind dataset_kind_from(const std::string& name);
const char* dataset_kind_name(DatasetKind kind);

// One 2-D point of class `cls`. `u` in [0,1) positions the point along the
// class's structure (angle / arm / ring position); noise adds an isotropic
// Gaussian perturbation drawn from `rng`.
Tensor synth_point(DatasetKind kind, std::size_t classes, std::size_t cls, double u, double noise,
                   Rng& rng);

// Deterministic synthetic 2-D classification set. Samples are assigned to
// classes round-robin, so `samples` is the total count.
LabeledSet generate_dataset(DatasetKind kind, std::size_t classes, std::size_t samples,
                            double noise, Rng& rng);

// In-place 2-D rotation of every sample (inputs must be [N x 2]).
LabeledSet rotate2d(const LabeledSet& set, double angle_radians);

LabeledSet concat(const LabeledSet& a, const LabeledSet& b);

// CSV: one row per sample, feature columns then an integer label column.
// A non-numeric first row is treated as a header and skipped.
LabeledSet load_csv(const std::string& path);
void save_csv(const std::string& path, const LabeledSet& set, bool header = true);

}  // namespace lincl
