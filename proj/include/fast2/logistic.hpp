#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace fast2 {

/// One-covariate logistic regression P(y=1 | x) = sigmoid(slope * x + intercept).
struct LogisticModel {
    double slope = 0.0;
    double intercept = 0.0;

    double probability(double x) const;
};

double sigmoid(double z);

/// Penalized negative log-likelihood
///   (slope^2 + intercept^2) / (2 c) + sum_i [log(1 + e^{z_i}) - y_i z_i],
/// with larger c meaning a weaker penalty. Both coefficients are penalized.
struct LogisticProblem {
    std::span<const double> x;
    std::span<const double> y;  // 0 or 1
    double c = 1.0;
};

double logistic_objective(const LogisticProblem& problem, const LogisticModel& at);
/// Gradient with respect to (slope, intercept).
std::array<double, 2> logistic_gradient(const LogisticProblem& problem, const LogisticModel& at);

struct LogisticFitReport {
    LogisticModel model;
    std::size_t iterations = 0;
    bool converged = false;
    /// model.probability(x[i]) for every i, from the last pass over the data.
    std::vector<double> probabilities;
};

/// Damped Newton iterations from `start` (the origin by default); deterministic.
LogisticFitReport fit_logistic(const LogisticProblem& problem, std::size_t max_iterations = 100,
                               LogisticModel start = {});

}  // namespace fast2
