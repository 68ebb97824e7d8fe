#pragma once

#include <cstdint>
#include <vector>

#include "lincl/tensor.hpp"

namespace lincl {

enum class LayerKind : std::uint8_t {
    dense = 0,
    conv2d = 1,
    relu = 2,
    leaky_relu = 3,
    max_pool = 4,
    avg_pool = 5,
    flatten = 6,
    identity = 7,
};

const char* layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::identity;
    std::size_t units = 0;         // dense
    std::size_t out_channels = 0;  // conv2d
    std::size_t kernel = 0;        // conv2d
    std::size_t stride = 1;        // conv2d / pools
    std::size_t padding = 0;       // conv2d
    std::size_t window = 0;        // pools
    double negative_slope = 0.01;  // leaky_relu

    static LayerSpec dense(std::size_t units);
    static LayerSpec conv2d(std::size_t out_channels, std::size_t kernel, std::size_t stride = 1,
                            std::size_t padding = 0);
    static LayerSpec relu();
    static LayerSpec leaky_relu(double negative_slope = 0.01);
    static LayerSpec max_pool(std::size_t window, std::size_t stride = 0);  // stride 0 -> window
    static LayerSpec avg_pool(std::size_t window, std::size_t stride = 0);
    static LayerSpec flatten();
    static LayerSpec identity();
};

bool layer_has_params(LayerKind kind);

// Shape of the layer output given its input shape; throws DimensionError
// when the layer cannot consume the input.
std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape);

// Parameter shapes for parametric layers ({} for the rest).
std::vector<std::size_t> layer_weight_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape);
std::vector<std::size_t> layer_bias_shape(const LayerSpec& spec,
                                          const std::vector<std::size_t>& in_shape);

// ---- kernels -------------------------------------------------------------
// Free functions so the plain forward pass, the reverse pass and the
// JVP-augmented pass all share one implementation per layer type.

Tensor dense_apply(const Tensor& w, const Tensor& b, const Tensor& x, bool use_bias);
void dense_backward(const Tensor& w, const Tensor& x, const Tensor& g, Tensor& dw, Tensor& db,
                    Tensor& dx);

// Patch extraction: x [C x H x W] -> columns [C*k*k x L] with L output
// positions. col2im scatters back (adjoint of im2col).
Tensor im2col(const Tensor& x, std::size_t kernel, std::size_t stride, std::size_t padding);
Tensor col2im(const Tensor& cols, const std::vector<std::size_t>& x_shape, std::size_t kernel,
              std::size_t stride, std::size_t padding);

Tensor conv2d_apply(const LayerSpec& spec, const Tensor& w, const Tensor& b, const Tensor& x,
                    bool use_bias);
void conv2d_backward(const LayerSpec& spec, const Tensor& w, const Tensor& x, const Tensor& g,
                     Tensor& dw, Tensor& db, Tensor& dx);

// Slope-gated elementwise map: out[i] = t[i] if gate[i] > 0 else slope*t[i].
// With gate == t this is the (Leaky)ReLU forward; with the layer input as
// gate it propagates both backward gradients and JVP tangents.
Tensor slope_gate(const Tensor& gate, const Tensor& t, double slope);

std::vector<std::size_t> max_pool_indices(const Tensor& x, std::size_t window, std::size_t stride);
Tensor gather_indices(const Tensor& x, const std::vector<std::size_t>& idx,
                      const std::vector<std::size_t>& out_shape);
Tensor scatter_indices(const Tensor& g, const std::vector<std::size_t>& idx,
                       const std::vector<std::size_t>& x_shape);

Tensor avg_pool_apply(const Tensor& x, std::size_t window, std::size_t stride);
Tensor avg_pool_backward(const Tensor& g, const std::vector<std::size_t>& x_shape,
                         std::size_t window, std::size_t stride);

}  // namespace lincl
