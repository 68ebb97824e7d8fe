#include "lincl/params.hpp"

#include <algorithm>
#include <cmath>

#include "lincl/errors.hpp"

namespace lincl {

std::string to_string(const ParamKey& key) {
    std::string name = is_head_layer(key.layer)
                           ? "head" + std::to_string(head_task_of(key.layer))
                           : "layer" + std::to_string(key.layer);
    return name + (key.role == ParamRole::weight ? ".weight" : ".bias");
}

const Segment* ParameterVector::find(ParamKey key) const {
    for (const Segment& s : segments_) {
        if (s.key == key) return &s;
    }
    return nullptr;
}

void ParameterVector::add_segment(ParamKey key, std::vector<std::size_t> shape) {
    if (find(key)) throw UsageError("duplicate parameter segment " + to_string(key));
    Segment s;
    s.key = key;
    s.shape = std::move(shape);
    s.offset = data_.size();
    s.length = shape_product(s.shape);
    segments_.push_back(std::move(s));
    data_.resize(data_.size() + segments_.back().length, 0.0);
}

void ParameterVector::add_segment(ParamKey key, const Tensor& value) {
    add_segment(key, value.shape());
    set(key, value);
}

bool ParameterVector::has(ParamKey key) const { return find(key) != nullptr; }

const Segment& ParameterVector::segment(ParamKey key) const {
    const Segment* s = find(key);
    if (!s) throw LookupError("no parameter segment " + to_string(key));
    return *s;
}

Tensor ParameterVector::get(ParamKey key) const {
    const Segment& s = segment(key);
    std::vector<double> out(data_.begin() + s.offset, data_.begin() + s.offset + s.length);
    return Tensor(s.shape, std::move(out));
}

void ParameterVector::set(ParamKey key, const Tensor& value) {
    const Segment& s = segment(key);
    if (value.size() != s.length) throw DimensionError("segment size mismatch for " + to_string(key));
    std::copy(value.data(), value.data() + s.length, data_.begin() + s.offset);
}

void ParameterVector::add_to(ParamKey key, const Tensor& value, double scale) {
    const Segment& s = segment(key);
    if (value.size() != s.length) throw DimensionError("segment size mismatch for " + to_string(key));
    for (std::size_t i = 0; i < s.length; ++i) data_[s.offset + i] += scale * value[i];
}

bool ParameterVector::same_layout(const ParameterVector& other) const {
    if (segments_.size() != other.segments_.size()) return false;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].key != other.segments_[i].key) return false;
        if (segments_[i].shape != other.segments_[i].shape) return false;
    }
    return true;
}

void ParameterVector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void ParameterVector::scale(double s) {
    for (double& v : data_) v *= s;
}

void ParameterVector::axpy(double s, const ParameterVector& other) {
    if (!same_layout(other)) throw UsageError("parameter vector layout mismatch in axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

void ParameterVector::axpy_by_key(double s, const ParameterVector& other) {
    for (const Segment& os : other.segments_) {
        const Segment* mine = find(os.key);
        if (!mine) continue;
        if (mine->length != os.length) {
            throw DimensionError("segment size mismatch for " + to_string(os.key));
        }
        for (std::size_t i = 0; i < os.length; ++i) {
            data_[mine->offset + i] += s * other.data_[os.offset + i];
        }
    }
}

double ParameterVector::dot(const ParameterVector& other) const {
    if (data_.size() != other.data_.size()) throw DimensionError("parameter vector length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * other.data_[i];
    return acc;
}

double ParameterVector::norm2() const { return std::sqrt(dot(*this)); }

double ParameterVector::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

bool ParameterVector::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

ParameterVector ParameterVector::subset(const std::vector<ParamKey>& keys) const {
    ParameterVector out;
    for (ParamKey k : keys) out.add_segment(k, get(k));
    return out;
}

void ParameterVector::load_by_key(const ParameterVector& other) {
    for (const Segment& s : segments_) {
        set(s.key, other.get(s.key));
    }
}

ParameterVector ParameterVector::zeros_like() const {
    ParameterVector out = *this;
    out.fill(0.0);
    return out;
}

void ParameterVector::from_flat(const std::vector<double>& flat) {
    if (flat.size() != data_.size()) throw DimensionError("flat data length mismatch");
    data_ = flat;
}

}  // namespace lincl
