#include "fast2/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fast2 {

namespace {

double margin_of(const SvmExample& ex, std::span<const double> w, double bias)
{
    return dot(ex.features, w) + bias;
}

}  // namespace

SvmSolution solve_linear_svm(std::span<const SvmExample> examples, std::size_t dimension, SvmOptions options)
{
    SvmSolution sol;
    sol.weights.assign(dimension, 0.0);
    const std::size_t n = examples.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 1.0;  // constant bias feature
        for (const auto& e : examples[i].features) {
            sq += e.value * e.value;
        }
        diag[i] = sq;
    }

    // Shrinking: examples pinned at a bound whose gradient pushes further out
    // are skipped until the active set looks converged, then everything is
    // revisited; the stopping test only counts on a full pass.
    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) {
        active[i] = i;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    double upper_old = inf;
    double lower_old = -inf;
    double objective = 0.0;  // dual objective at alpha = 0
    double previous = 0.0;
    bool have_previous = false;
    std::mt19937_64 order_rng(options.order_seed);
    for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
        // Fisher-Yates with a solver-local engine: a fresh but reproducible
        // visiting order every epoch.
        for (std::size_t k = active.size(); k > 1; --k) {
            // Multiply-shift draw in [0, k); the bias is below k / 2^64.
            const auto pick = static_cast<std::size_t>((static_cast<unsigned __int128>(order_rng()) * k) >> 64);
            std::swap(active[k - 1], active[pick]);
        }
        const bool full_pass = active.size() == n;
        double upper = -inf;
        double lower = inf;
        std::size_t kept = 0;
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t i = active[k];
            const auto& ex = examples[i];
            const double y = ex.positive ? 1.0 : -1.0;
            const double grad = y * margin_of(ex, sol.weights, sol.bias) - 1.0;
            double projected = grad;
            if (alpha[i] <= 0.0) {
                if (grad > upper_old) {
                    continue;
                }
                projected = std::min(grad, 0.0);
            } else if (alpha[i] >= ex.cost) {
                if (grad < lower_old) {
                    continue;
                }
                projected = std::max(grad, 0.0);
            }
            active[kept++] = i;
            upper = std::max(upper, projected);
            lower = std::min(lower, projected);
            if (projected == 0.0) {
                continue;
            }
            const double updated = std::clamp(alpha[i] - grad / diag[i], 0.0, ex.cost);
            const double delta = updated - alpha[i];
            const double step = delta * y;
            alpha[i] = updated;
            // Exact change of the dual along this coordinate; never positive
            // because `updated` minimizes the one-dimensional quadratic on the box.
            objective += std::min(0.0, grad * delta + 0.5 * diag[i] * delta * delta);
            if (step != 0.0) {
                for (const auto& e : ex.features) {
                    sol.weights[e.column] += step * e.value;
                }
                sol.bias += step;
            }
        }
        active.resize(kept);
        sol.objective_trace.push_back(objective);
        sol.epochs = epoch + 1;

        const double max_violation = kept == 0 ? 0.0 : std::max(std::abs(upper), std::abs(lower));
        const bool settled =
            max_violation == 0.0 ||
            (have_previous && std::abs(previous - objective) <= options.tolerance * std::max(std::abs(previous), 1e-12));
        previous = objective;
        have_previous = true;
        if (settled) {
            if (full_pass && active.size() == n) {
                sol.converged = true;
                break;
            }
            active.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                active[i] = i;
            }
            upper_old = inf;
            lower_old = -inf;
            continue;
        }
        upper_old = upper > 0.0 ? upper : inf;
        lower_old = lower < 0.0 ? lower : -inf;
    }
    sol.alpha = std::move(alpha);
    return sol;
}

double svm_primal_objective(std::span<const SvmExample> examples, const SvmSolution& solution)
{
    double value = 0.5 * solution.bias * solution.bias;
    for (double v : solution.weights) {
        value += 0.5 * v * v;
    }
    for (const auto& ex : examples) {
        const double y = ex.positive ? 1.0 : -1.0;
        value += ex.cost * std::max(0.0, 1.0 - y * margin_of(ex, solution.weights, solution.bias));
    }
    return value;
}

}  // namespace fast2
