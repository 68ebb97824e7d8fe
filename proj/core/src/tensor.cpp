#include "lincl/tensor.hpp"

#include <cmath>
#include <sstream>

#include "lincl/errors.hpp"

namespace lincl {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
    for (std::size_t d : shape_) {
        if (d == 0) throw DimensionError("tensor extents must be positive");
    }
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw DimensionError("tensor data length does not match shape " + shape_str());
    }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
    Tensor t(std::move(shape));
    for (double& v : t.data_) v = value;
    return t;
}

Tensor Tensor::vec(std::initializer_list<double> values) {
    return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged matrix initializer");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw DimensionError("axis out of range");
    return shape_[axis];
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw DimensionError("rows() requires a rank-2 tensor, got " + shape_str());
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw DimensionError("cols() requires a rank-2 tensor, got " + shape_str());
    return shape_[1];
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (shape_product(new_shape) != data_.size()) {
        throw DimensionError("reshape size mismatch");
    }
    return Tensor(std::move(new_shape), data_);
}

Tensor Tensor::flattened() const { return reshaped({data_.size()}); }

Tensor& Tensor::operator+=(const Tensor& other) {
    if (!same_shape(other)) throw DimensionError("operator+= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (!same_shape(other)) throw DimensionError("operator-= shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Tensor Tensor::operator+(const Tensor& other) const {
    Tensor out = *this;
    out += other;
    return out;
}

Tensor Tensor::operator-(const Tensor& other) const {
    Tensor out = *this;
    out -= other;
    return out;
}

Tensor Tensor::operator*(double s) const {
    Tensor out = *this;
    out *= s;
    return out;
}

void Tensor::axpy(double s, const Tensor& other) {
    if (!same_shape(other)) throw DimensionError("axpy shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

double Tensor::dot(const Tensor& other) const {
    if (data_.size() != other.data_.size()) throw DimensionError("dot length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * other.data_[i];
    return acc;
}

double Tensor::norm2() const { return std::sqrt(dot(*this)); }

double Tensor::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Tensor::sum() const {
    double acc = 0.0;
    for (double v : data_) acc += v;
    return acc;
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << "x";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

Tensor slice0(const Tensor& t, std::size_t i) {
    if (t.rank() < 1) throw DimensionError("slice0 requires rank >= 1");
    if (i >= t.dim(0)) throw DimensionError("slice0 index out of range");
    std::vector<std::size_t> sub(t.shape().begin() + 1, t.shape().end());
    if (sub.empty()) sub.push_back(1);
    const std::size_t stride = shape_product(sub);
    std::vector<double> data(t.data() + i * stride, t.data() + (i + 1) * stride);
    return Tensor(std::move(sub), std::move(data));
}

}  // namespace lincl
