#pragma once

#include <cstdint>
#include <vector>

#include "lincl/dataset.hpp"
#include "lincl/losses.hpp"
#include "lincl/model.hpp"
#include "lincl/params.hpp"
#include "lincl/rng.hpp"
#include "lincl/tensor.hpp"

namespace lincl {

enum class CurvatureKind : std::uint8_t { none = 0, diagonal = 1, kfac = 2, tkfac = 3, exact = 4 };

CurvatureKind curvature_kind_from(const std::string& name);
const char* curvature_kind_name(CurvatureKind kind);

// How Fisher expectations over the label distribution are taken: `sampled`
// draws labels from the model distribution (Monte Carlo), `analytic` takes
// the label expectation in closed form (Gauss-Newton for MSE, softmax
// Hessian for SCE) and is deterministic.
enum class FimEstimator : std::uint8_t { sampled = 0, analytic = 1 };

struct DiagonalCurvature {
    ParameterVector diag;  // nonnegative, over the penalized segments
};

// Per-layer Kronecker-factored Fisher block. A is the second moment of the
// layer input with an appended homogeneous 1 (covers weight and bias
// jointly), G the second moment of the pre-activation gradient, tau a
// Monte-Carlo estimate of the block trace used by the trace-corrected
// variant.
struct KroneckerBlock {
    int layer_id = 0;
    Tensor A;  // [(in+1) x (in+1)]
    Tensor G;  // [out x out]
    double tau = 0.0;
    std::size_t sample_count = 0;
    bool degenerate = false;  // set when a trace correction was impossible
};

struct CurvatureStore {
    CurvatureKind kind = CurvatureKind::none;
    std::vector<KroneckerBlock> blocks;  // kfac / tkfac dense layers
    ParameterVector diag;  // diagonal kind; for kfac also the non-dense remainder
    Tensor full;           // exact kind, [P x P]
    ParameterVector reference;  // parameters the penalty pulls towards
    std::size_t task_count = 0;

    bool empty() const { return kind == CurvatureKind::none || task_count == 0; }
};

struct PenaltyResult {
    double value = 0.0;
    ParameterVector grad;  // layout matches the evaluated theta
};

// Appends the homogeneous coordinate: [a; 1].
Tensor append_one(const Tensor& a);
double trace_of(const Tensor& m);

// Gradient to backpropagate for one Fisher sample of the given loss family.
Tensor sampled_loss_dlogits(LossKind loss, const Tensor& logits, Rng& rng);

DiagonalCurvature estimate_fisher_diagonal(const TaskModel& model, const LabeledSet& data,
                                           int task, LossKind loss, Rng& rng,
                                           std::size_t samples_per_input = 1);

struct KfacEstimate {
    std::vector<KroneckerBlock> blocks;
    ParameterVector diag;  // non-dense penalized segments (e.g. conv), diagonal Fisher
};

KfacEstimate estimate_kfac(const TaskModel& model, const LabeledSet& data, int task, LossKind loss,
                           Rng& rng, std::size_t samples_per_input = 1);

// Scales the implied matrix so that trace(A x G) equals tau exactly (the
// correction lands on G). A zero factor trace flags the block degenerate
// and leaves it unscaled.
KroneckerBlock tkfac_rescale(KroneckerBlock block);

// Explicit Fisher over the penalized parameters; P above `cap` throws
// CapacityError.
Tensor exact_fim(const TaskModel& model, const LabeledSet& data, int task, LossKind loss, Rng& rng,
                 std::size_t samples_per_input = 1, std::size_t cap = 5000,
                 FimEstimator estimator = FimEstimator::sampled);

// diag(p) - p p^T at p = softmax(logits).
Tensor softmax_hessian_analytic(const Tensor& logits);

// Single-task estimate wrapped in a store (reference = current parameters).
CurvatureStore estimate_curvature(CurvatureKind kind, const TaskModel& model,
                                  const LabeledSet& data, int task, LossKind loss, Rng& rng,
                                  std::size_t samples_per_input = 1, std::size_t exact_cap = 5000,
                                  FimEstimator estimator = FimEstimator::sampled);

// Running (t-1):t convex combination of factors; t == 1 adopts the estimate.
// The reference is replaced by the estimate's (current) parameters.
CurvatureStore accumulate(CurvatureStore store, CurvatureStore estimate, std::size_t t);

// 0.5 (theta - ref)^T H (theta - ref) and its gradient H (theta - ref),
// with Kronecker blocks evaluated factor-wise (never materialized).
PenaltyResult penalty(const CurvatureStore& store, const ParameterVector& theta);

// Class-incremental classifier growth: embeds the head block's G into the
// enlarged output dimension with unit curvature on the appended units and
// zero-extends the reference. Uses no data; valid for MSE training only.
CurvatureStore expand_classifier_curvature(CurvatureStore store, int head_layer_id,
                                           std::size_t old_out, std::size_t new_out,
                                           LossKind loss);

}  // namespace lincl
