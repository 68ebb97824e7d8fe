#include "lincl/layers.hpp"

#include <string>

#include "lincl/errors.hpp"
#include "lincl/linalg.hpp"

namespace lincl {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::leaky_relu: return "leaky_relu";
        case LayerKind::max_pool: return "max_pool";
        case LayerKind::avg_pool: return "avg_pool";
        case LayerKind::flatten: return "flatten";
        case LayerKind::identity: return "identity";
    }
    return "?";
}

LayerSpec LayerSpec::dense(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.units = units;
    return s;
}

LayerSpec LayerSpec::conv2d(std::size_t out_channels, std::size_t kernel, std::size_t stride,
                            std::size_t padding) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec LayerSpec::leaky_relu(double negative_slope) {
    LayerSpec s;
    s.kind = LayerKind::leaky_relu;
    s.negative_slope = negative_slope;
    return s;
}

LayerSpec LayerSpec::max_pool(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::max_pool;
    s.window = window;
    s.stride = stride == 0 ? window : stride;
    return s;
}

LayerSpec LayerSpec::avg_pool(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::avg_pool;
    s.window = window;
    s.stride = stride == 0 ? window : stride;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

LayerSpec LayerSpec::identity() {
    LayerSpec s;
    s.kind = LayerKind::identity;
    return s;
}

bool layer_has_params(LayerKind kind) {
    return kind == LayerKind::dense || kind == LayerKind::conv2d;
}

namespace {

std::size_t conv_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                        std::size_t padding, const char* what) {
    if (in + 2 * padding < kernel) {
        throw DimensionError(std::string(what) + ": kernel larger than padded input");
    }
    return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace

std::vector<std::size_t> layer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape) {
    switch (spec.kind) {
        case LayerKind::dense:
            if (in_shape.size() != 1) {
                throw DimensionError("dense layer expects a rank-1 input (insert flatten)");
            }
            if (spec.units == 0) throw DimensionError("dense layer needs units > 0");
            return {spec.units};
        case LayerKind::conv2d: {
            if (in_shape.size() != 3) throw DimensionError("conv2d expects [C x H x W] input");
            if (spec.out_channels == 0 || spec.kernel == 0 || spec.stride == 0) {
                throw DimensionError("conv2d needs out_channels, kernel, stride > 0");
            }
            const std::size_t ho = conv_extent(in_shape[1], spec.kernel, spec.stride, spec.padding, "conv2d");
            const std::size_t wo = conv_extent(in_shape[2], spec.kernel, spec.stride, spec.padding, "conv2d");
            return {spec.out_channels, ho, wo};
        }
        case LayerKind::relu:
        case LayerKind::leaky_relu:
        case LayerKind::identity:
            return in_shape;
        case LayerKind::max_pool:
        case LayerKind::avg_pool: {
            if (in_shape.size() != 3) throw DimensionError("pool expects [C x H x W] input");
            if (spec.window == 0 || spec.stride == 0) throw DimensionError("pool needs window, stride > 0");
            const std::size_t ho = conv_extent(in_shape[1], spec.window, spec.stride, 0, "pool");
            const std::size_t wo = conv_extent(in_shape[2], spec.window, spec.stride, 0, "pool");
            return {in_shape[0], ho, wo};
        }
        case LayerKind::flatten:
            return {shape_product(in_shape)};
    }
    throw DimensionError("unknown layer kind");
}

std::vector<std::size_t> layer_weight_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in_shape) {
    switch (spec.kind) {
        case LayerKind::dense: return {spec.units, in_shape[0]};
        case LayerKind::conv2d:
            return {spec.out_channels, in_shape[0] * spec.kernel * spec.kernel};
        default: return {};
    }
}

std::vector<std::size_t> layer_bias_shape(const LayerSpec& spec,
                                          const std::vector<std::size_t>& in_shape) {
    switch (spec.kind) {
        case LayerKind::dense: return {spec.units};
        case LayerKind::conv2d: return {spec.out_channels};
        default: (void)in_shape; return {};
    }
}

Tensor dense_apply(const Tensor& w, const Tensor& b, const Tensor& x, bool use_bias) {
    Tensor out = matvec(w, x);
    if (use_bias) out += b;
    return out;
}

void dense_backward(const Tensor& w, const Tensor& x, const Tensor& g, Tensor& dw, Tensor& db,
                    Tensor& dx) {
    dw = outer(g, x);
    db = g;
    dx = matvec_t(w, g);
}

Tensor im2col(const Tensor& x, std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (x.rank() != 3) throw DimensionError("im2col expects [C x H x W]");
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t ho = conv_extent(h, kernel, stride, padding, "im2col");
    const std::size_t wo = conv_extent(w, kernel, stride, padding, "im2col");
    Tensor cols({c * kernel * kernel, ho * wo});
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t ki = 0; ki < kernel; ++ki) {
            for (std::size_t kj = 0; kj < kernel; ++kj) {
                const std::size_t row = (ci * kernel + ki) * kernel + kj;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    const long iy = static_cast<long>(oy * stride + ki) - static_cast<long>(padding);
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const long ix = static_cast<long>(ox * stride + kj) - static_cast<long>(padding);
                        double v = 0.0;
                        if (iy >= 0 && iy < static_cast<long>(h) && ix >= 0 && ix < static_cast<long>(w)) {
                            v = x[(ci * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
                        }
                        cols.at(row, oy * wo + ox) = v;
                    }
                }
            }
        }
    }
    return cols;
}

Tensor col2im(const Tensor& cols, const std::vector<std::size_t>& x_shape, std::size_t kernel,
              std::size_t stride, std::size_t padding) {
    const std::size_t c = x_shape[0], h = x_shape[1], w = x_shape[2];
    const std::size_t ho = conv_extent(h, kernel, stride, padding, "col2im");
    const std::size_t wo = conv_extent(w, kernel, stride, padding, "col2im");
    Tensor x(x_shape);
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t ki = 0; ki < kernel; ++ki) {
            for (std::size_t kj = 0; kj < kernel; ++kj) {
                const std::size_t row = (ci * kernel + ki) * kernel + kj;
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    const long iy = static_cast<long>(oy * stride + ki) - static_cast<long>(padding);
                    if (iy < 0 || iy >= static_cast<long>(h)) continue;
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const long ix = static_cast<long>(ox * stride + kj) - static_cast<long>(padding);
                        if (ix < 0 || ix >= static_cast<long>(w)) continue;
                        x[(ci * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)] +=
                            cols.at(row, oy * wo + ox);
                    }
                }
            }
        }
    }
    return x;
}

Tensor conv2d_apply(const LayerSpec& spec, const Tensor& w, const Tensor& b, const Tensor& x,
                    bool use_bias) {
    const auto out_shape = layer_output_shape(spec, x.shape());
    const Tensor cols = im2col(x, spec.kernel, spec.stride, spec.padding);
    Tensor out_mat = matmul(w, cols);  // [O x L]
    if (use_bias) {
        const std::size_t l = out_mat.cols();
        for (std::size_t o = 0; o < out_mat.rows(); ++o) {
            for (std::size_t j = 0; j < l; ++j) out_mat.at(o, j) += b[o];
        }
    }
    return out_mat.reshaped(out_shape);
}

void conv2d_backward(const LayerSpec& spec, const Tensor& w, const Tensor& x, const Tensor& g,
                     Tensor& dw, Tensor& db, Tensor& dx) {
    const Tensor cols = im2col(x, spec.kernel, spec.stride, spec.padding);
    const std::size_t o = spec.out_channels;
    const std::size_t l = cols.cols();
    const Tensor g_mat = g.reshaped({o, l});
    dw = matmul(g_mat, transpose(cols));
    db = Tensor({o});
    for (std::size_t oi = 0; oi < o; ++oi) {
        double acc = 0.0;
        for (std::size_t j = 0; j < l; ++j) acc += g_mat.at(oi, j);
        db[oi] = acc;
    }
    const Tensor dcols = matmul(transpose(w), g_mat);
    dx = col2im(dcols, x.shape(), spec.kernel, spec.stride, spec.padding);
}

Tensor slope_gate(const Tensor& gate, const Tensor& t, double slope) {
    if (!gate.same_shape(t)) throw DimensionError("slope_gate shape mismatch");
    Tensor out = t;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(gate[i] > 0.0)) out[i] *= slope;
    }
    return out;
}

std::vector<std::size_t> max_pool_indices(const Tensor& x, std::size_t window, std::size_t stride) {
    if (x.rank() != 3) throw DimensionError("max_pool expects [C x H x W]");
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t ho = conv_extent(h, window, stride, 0, "max_pool");
    const std::size_t wo = conv_extent(w, window, stride, 0, "max_pool");
    std::vector<std::size_t> idx(c * ho * wo);
    std::size_t out_pos = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
                std::size_t best = (ci * h + oy * stride) * w + ox * stride;
                double best_v = x[best];
                for (std::size_t ki = 0; ki < window; ++ki) {
                    for (std::size_t kj = 0; kj < window; ++kj) {
                        const std::size_t pos = (ci * h + oy * stride + ki) * w + ox * stride + kj;
                        if (x[pos] > best_v) {
                            best_v = x[pos];
                            best = pos;
                        }
                    }
                }
                idx[out_pos++] = best;
            }
        }
    }
    return idx;
}

Tensor gather_indices(const Tensor& x, const std::vector<std::size_t>& idx,
                      const std::vector<std::size_t>& out_shape) {
    Tensor out(out_shape);
    if (out.size() != idx.size()) throw DimensionError("gather index count mismatch");
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
    return out;
}

Tensor scatter_indices(const Tensor& g, const std::vector<std::size_t>& idx,
                       const std::vector<std::size_t>& x_shape) {
    Tensor out(x_shape);
    if (g.size() != idx.size()) throw DimensionError("scatter index count mismatch");
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] += g[i];
    return out;
}

Tensor avg_pool_apply(const Tensor& x, std::size_t window, std::size_t stride) {
    if (x.rank() != 3) throw DimensionError("avg_pool expects [C x H x W]");
    const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t ho = conv_extent(h, window, stride, 0, "avg_pool");
    const std::size_t wo = conv_extent(w, window, stride, 0, "avg_pool");
    Tensor out({c, ho, wo});
    const double inv = 1.0 / static_cast<double>(window * window);
    std::size_t out_pos = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
                double acc = 0.0;
                for (std::size_t ki = 0; ki < window; ++ki) {
                    for (std::size_t kj = 0; kj < window; ++kj) {
                        acc += x[(ci * h + oy * stride + ki) * w + ox * stride + kj];
                    }
                }
                out[out_pos++] = acc * inv;
            }
        }
    }
    return out;
}

Tensor avg_pool_backward(const Tensor& g, const std::vector<std::size_t>& x_shape,
                         std::size_t window, std::size_t stride) {
    const std::size_t c = x_shape[0], h = x_shape[1], w = x_shape[2];
    const std::size_t ho = conv_extent(h, window, stride, 0, "avg_pool");
    const std::size_t wo = conv_extent(w, window, stride, 0, "avg_pool");
    Tensor dx(x_shape);
    const double inv = 1.0 / static_cast<double>(window * window);
    std::size_t g_pos = 0;
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
                const double gv = g[g_pos++] * inv;
                for (std::size_t ki = 0; ki < window; ++ki) {
                    for (std::size_t kj = 0; kj < window; ++kj) {
                        dx[(ci * h + oy * stride + ki) * w + ox * stride + kj] += gv;
                    }
                }
            }
        }
    }
    return dx;
}

}  // namespace lincl
