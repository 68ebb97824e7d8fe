#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "lincl/tensor.hpp"

namespace lincl {

enum class ParamRole : std::uint8_t { weight = 0, bias = 1 };

// Identifies one parameter tensor. Base network layers use their layer
// index (>= 0); classifier heads use negative ids, see head_layer_id().
struct ParamKey {
    int layer = 0;
    ParamRole role = ParamRole::weight;

    auto operator<=>(const ParamKey&) const = default;
};

inline int head_layer_id(int task) { return -(task + 1); }
inline bool is_head_layer(int layer) { return layer < 0; }
inline int head_task_of(int layer) { return -layer - 1; }

std::string to_string(const ParamKey& key);

struct Segment {
    ParamKey key;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t length = 0;
};

// Ordered collection of named parameter tensors stored in one flat array.
// pack/unpack round-trips are bit-exact; segment order is the layout.
class ParameterVector {
public:
    ParameterVector() = default;

    void add_segment(ParamKey key, std::vector<std::size_t> shape);
    void add_segment(ParamKey key, const Tensor& value);

    bool has(ParamKey key) const;
    const Segment& segment(ParamKey key) const;
    const std::vector<Segment>& segments() const { return segments_; }

    Tensor get(ParamKey key) const;
    void set(ParamKey key, const Tensor& value);
    void add_to(ParamKey key, const Tensor& value, double scale = 1.0);

    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    bool same_layout(const ParameterVector& other) const;

    void fill(double v);
    void scale(double s);
    // this += s * other; layouts must match exactly.
    void axpy(double s, const ParameterVector& other);
    // this += s * other for every key of `other` present in this vector.
    void axpy_by_key(double s, const ParameterVector& other);
    double dot(const ParameterVector& other) const;
    double norm2() const;
    double max_abs() const;
    bool all_finite() const;

    // New vector holding only the listed keys, in the given order.
    ParameterVector subset(const std::vector<ParamKey>& keys) const;
    // Copy values for this vector's keys out of `other`.
    void load_by_key(const ParameterVector& other);

    ParameterVector zeros_like() const;

    Tensor as_tensor() const { return Tensor({data_.size()}, data_); }
    void from_flat(const std::vector<double>& flat);

private:
    std::vector<Segment> segments_;
    std::vector<double> data_;

    const Segment* find(ParamKey key) const;
};

}  // namespace lincl
