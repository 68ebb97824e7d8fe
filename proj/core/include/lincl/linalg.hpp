#pragma once

#include <functional>

#include "lincl/rng.hpp"
#include "lincl/tensor.hpp"

namespace lincl {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& m);
Tensor identity(std::size_t n);

// Matrix-vector product: m [r x c] times v [c] -> [r].
Tensor matvec(const Tensor& m, const Tensor& v);
// m^T v: m [r x c], v [r] -> [c].
Tensor matvec_t(const Tensor& m, const Tensor& v);
// Outer product u v^T.
Tensor outer(const Tensor& u, const Tensor& v);

Tensor kron(const Tensor& a, const Tensor& b);

// Relative asymmetry |m - m^T|_max / max(|m|_max, 1); throws ValidationError
// above `tol`.
void require_symmetric(const Tensor& m, double tol, const char* what);

// vec(dW)^T (A x G) vec(dW) with column-stacking vec, evaluated as
// trace(dW^T G dW A) without materializing the Kronecker product.
// Convention: per-sample gradients vec(g a^T) = a x g, so the layer Fisher
// block is A x G with A = E[a a^T] (input side) and G = E[g g^T] (output
// side). A and G must be symmetric within 1e-10.
double kron_quadratic_form(const Tensor& dW, const Tensor& A, const Tensor& G);

// Gradient of 0.5 * kron_quadratic_form w.r.t. dW, i.e. G dW A.
Tensor kron_quadratic_grad(const Tensor& dW, const Tensor& A, const Tensor& G);

// Dominant eigenvalue of a symmetric PSD matrix by power iteration with
// Rayleigh-quotient stopping. Zero matrix returns 0.
double max_eigenvalue(const Tensor& m, Rng& rng, std::size_t iters = 5000, double tol = 1e-12);

// Central difference (f(x + h v) - f(x - h v)) / (2h). The JVP test oracle.
Tensor finite_difference_directional(const std::function<Tensor(const Tensor&)>& f,
                                     const Tensor& x, const Tensor& v, double h);

}  // namespace lincl
