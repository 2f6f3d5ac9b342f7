#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fast2/corpus.hpp"

namespace fast2 {

struct SvmExample {
    std::span<const SparseMatrix::Entry> features;
    bool positive;
    /// Per-example box constraint, i.e. C times the example's class weight.
    double cost;
};

struct SvmOptions {
    /// Stop once the relative change of the dual objective over one epoch falls below this.
    double tolerance = 1e-6;
    std::size_t max_epochs = 1000;
    /// Seeds the per-epoch visiting order; fixed so a fit depends only on its inputs.
    std::uint64_t order_seed = 0x5eed;
};

struct SvmSolution {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t epochs = 0;
    bool converged = false;
    /// Dual objective 1/2 |w|^2 + 1/2 b^2 - sum(alpha) after each epoch; non-increasing.
    std::vector<double> objective_trace;
    /// Dual variables, one per example.
    std::vector<double> alpha;
};

/// L2-regularized hinge-loss linear SVM,
///   min 1/2 (|w|^2 + b^2) + sum_i cost_i * max(0, 1 - y_i (w.x_i + b)),
/// solved by dual coordinate descent with shrinking. Each epoch visits the
/// active examples in an order drawn from a private engine seeded with
/// `order_seed`, so results are reproducible. The bias is the weight of a
/// constant feature 1, hence regularized along with w.
SvmSolution solve_linear_svm(std::span<const SvmExample> examples, std::size_t dimension, SvmOptions options = {});

/// Primal objective of `solution` on `examples`.
double svm_primal_objective(std::span<const SvmExample> examples, const SvmSolution& solution);

}  // namespace fast2
