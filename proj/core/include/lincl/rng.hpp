#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lincl/tensor.hpp"

namespace lincl {

// Deterministic random source. The raw stream is std::mt19937_64, whose
// output sequence is pinned by the C++ standard, and every derived
// transform (uniform double, normal, index) is implemented here explicitly
// instead of going through std::*_distribution, so identical seeds give
// bit-identical streams on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) via rejection sampling.
    std::size_t uniform_index(std::size_t n);

    // Standard normal via Box-Muller (no cached spare; two uniforms per draw).
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    Tensor normal_tensor(std::vector<std::size_t> shape, double mean = 0.0, double stddev = 1.0);
    Tensor uniform_tensor(std::vector<std::size_t> shape, double lo = 0.0, double hi = 1.0);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[uniform_index(i)]);
        }
    }

    // Deterministically derive an independent child stream.
    Rng split() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 gen_;
};

}  // namespace lincl
