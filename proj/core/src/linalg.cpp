#include "lincl/linalg.hpp"

#include <cmath>
#include <string>

#include "lincl/errors.hpp"

namespace lincl {

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul requires rank-2 tensors");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul inner extents differ: " + a.shape_str() + " * " + b.shape_str());
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a.at(i, p);
            if (aip == 0.0) continue;
            const double* brow = b.data() + p * n;
            double* orow = out.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
    }
    return out;
}

Tensor transpose(const Tensor& m) {
    if (m.rank() != 2) throw DimensionError("transpose requires a rank-2 tensor");
    Tensor out({m.cols(), m.rows()});
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out.at(j, i) = m.at(i, j);
    return out;
}

Tensor identity(std::size_t n) {
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) out.at(i, i) = 1.0;
    return out;
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1) throw DimensionError("matvec requires matrix and vector");
    if (m.cols() != v.size()) {
        throw DimensionError("matvec extents differ: " + m.shape_str() + " * " + v.shape_str());
    }
    Tensor out({m.rows()});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.data() + i * m.cols();
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Tensor matvec_t(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1) throw DimensionError("matvec_t requires matrix and vector");
    if (m.rows() != v.size()) {
        throw DimensionError("matvec_t extents differ: " + m.shape_str() + "^T * " + v.shape_str());
    }
    Tensor out({m.cols()});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.data() + i * m.cols();
        const double vi = v[i];
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j] * vi;
    }
    return out;
}

Tensor outer(const Tensor& u, const Tensor& v) {
    if (u.rank() != 1 || v.rank() != 1) throw DimensionError("outer requires vectors");
    Tensor out({u.size(), v.size()});
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out.at(i, j) = u[i] * v[j];
    return out;
}

Tensor kron(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw DimensionError("kron requires rank-2 tensors");
    const std::size_t p = a.rows(), q = a.cols(), r = b.rows(), s = b.cols();
    Tensor out({p * r, q * s});
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            const double aij = a.at(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < r; ++k) {
                for (std::size_t l = 0; l < s; ++l) {
                    out.at(i * r + k, j * s + l) = aij * b.at(k, l);
                }
            }
        }
    }
    return out;
}

void require_symmetric(const Tensor& m, double tol, const char* what) {
    if (m.rank() != 2 || m.rows() != m.cols()) {
        throw DimensionError(std::string(what) + ": expected a square matrix, got " + m.shape_str());
    }
    const double scale = std::max(m.max_abs(), 1.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            if (std::fabs(m.at(i, j) - m.at(j, i)) > tol * scale) {
                throw ValidationError(std::string(what) + ": matrix is not symmetric");
            }
        }
    }
}

double kron_quadratic_form(const Tensor& dW, const Tensor& A, const Tensor& G) {
    if (dW.rank() != 2) throw DimensionError("kron_quadratic_form requires rank-2 dW");
    const std::size_t out_dim = dW.rows(), in_dim = dW.cols();
    if (A.rank() != 2 || A.rows() != in_dim || A.cols() != in_dim) {
        throw DimensionError("kron_quadratic_form: A must be " + std::to_string(in_dim) + " square");
    }
    if (G.rank() != 2 || G.rows() != out_dim || G.cols() != out_dim) {
        throw DimensionError("kron_quadratic_form: G must be " + std::to_string(out_dim) + " square");
    }
    require_symmetric(A, 1e-10, "kron_quadratic_form A");
    require_symmetric(G, 1e-10, "kron_quadratic_form G");
    // trace(dW^T G dW A) = sum_ij (G dW)_ij (dW A)_ij
    const Tensor gw = matmul(G, dW);
    const Tensor wa = matmul(dW, A);
    return gw.dot(wa);
}

Tensor kron_quadratic_grad(const Tensor& dW, const Tensor& A, const Tensor& G) {
    return matmul(G, matmul(dW, A));
}

double max_eigenvalue(const Tensor& m, Rng& rng, std::size_t iters, double tol) {
    require_symmetric(m, 1e-10, "max_eigenvalue");
    const std::size_t n = m.rows();
    if (m.max_abs() == 0.0) return 0.0;

    Tensor v = rng.normal_tensor({n});
    double nv = v.norm2();
    if (nv == 0.0) v = Tensor::full({n}, 1.0), nv = v.norm2();
    v *= 1.0 / nv;

    double lambda = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        Tensor w = matvec(m, v);
        const double nw = w.norm2();
        if (nw < 1e-300) return 0.0;  // v in the (numerical) null space
        w *= 1.0 / nw;
        const double next = w.dot(matvec(m, w));
        v = std::move(w);
        if (it > 0 && std::fabs(next - lambda) <= tol * std::max(std::fabs(next), 1e-300)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

Tensor finite_difference_directional(const std::function<Tensor(const Tensor&)>& f,
                                     const Tensor& x, const Tensor& v, double h) {
    if (!x.same_shape(v)) throw DimensionError("finite difference: direction shape mismatch");
    if (!(h > 0.0)) throw ValidationError("finite difference: step must be positive");
    Tensor xp = x;
    xp.axpy(h, v);
    Tensor xm = x;
    xm.axpy(-h, v);
    Tensor fp = f(xp);
    const Tensor fm = f(xm);
    if (!fp.all_finite() || !fm.all_finite()) {
        throw NumericError("finite difference: function returned non-finite values");
    }
    fp -= fm;
    fp *= 1.0 / (2.0 * h);
    return fp;
}

}  // namespace lincl
