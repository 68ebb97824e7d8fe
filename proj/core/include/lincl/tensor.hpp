#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace lincl {

// Dense n-dimensional array of 64-bit floats, row-major. The single value
// carrier used throughout the library. Plain value semantics: copying a
// Tensor copies its storage.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor full(std::vector<std::size_t> shape, double value);
    static Tensor vec(std::initializer_list<double> values);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D accessors; bounds are the caller's responsibility.
    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    std::size_t rows() const;  // rank-2 only
    std::size_t cols() const;

    Tensor reshaped(std::vector<std::size_t> new_shape) const;
    Tensor flattened() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double s);
    Tensor operator+(const Tensor& other) const;
    Tensor operator-(const Tensor& other) const;
    Tensor operator*(double s) const;

    // this += s * other
    void axpy(double s, const Tensor& other);

    double dot(const Tensor& other) const;
    double norm2() const;          // Euclidean / Frobenius
    double max_abs() const;
    double sum() const;
    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Extract the i-th slice along axis 0, e.g. sample i of an [N x ...] batch.
Tensor slice0(const Tensor& t, std::size_t i);

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace lincl
