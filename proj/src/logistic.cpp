#include "fast2/logistic.hpp"

#include <cmath>

#include "fast2/errors.hpp"

namespace fast2 {

double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double LogisticModel::probability(double x) const
{
    return sigmoid(slope * x + intercept);
}

namespace {

// log(1 + e^z) without overflow.
double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

void check(const LogisticProblem& p)
{
    if (!(p.c > 0.0) || !std::isfinite(p.c)) {
        throw UndefinedError("logistic regularization strength must be positive and finite");
    }
    if (p.x.size() != p.y.size()) {
        throw Error("logistic regression: x and y differ in length");
    }
}

}  // namespace

double logistic_objective(const LogisticProblem& problem, const LogisticModel& at)
{
    check(problem);
    double value = (at.slope * at.slope + at.intercept * at.intercept) / (2.0 * problem.c);
    for (std::size_t i = 0; i < problem.x.size(); ++i) {
        const double z = at.slope * problem.x[i] + at.intercept;
        value += softplus(z) - problem.y[i] * z;
    }
    return value;
}

std::array<double, 2> logistic_gradient(const LogisticProblem& problem, const LogisticModel& at)
{
    check(problem);
    std::array<double, 2> g{at.slope / problem.c, at.intercept / problem.c};
    for (std::size_t i = 0; i < problem.x.size(); ++i) {
        const double r = sigmoid(at.slope * problem.x[i] + at.intercept) - problem.y[i];
        g[0] += r * problem.x[i];
        g[1] += r;
    }
    return g;
}

namespace {

/// Gradient and Hessian of the objective at one point, from a single pass.
struct Derivatives {
    double g0 = 0.0, g1 = 0.0;
    double h00 = 0.0, h01 = 0.0, h11 = 0.0;
};

Derivatives derivatives(const LogisticProblem& problem, const LogisticModel& at, double inv_c,
                        std::vector<double>& probabilities)
{
    Derivatives d{at.slope * inv_c, at.intercept * inv_c, inv_c, 0.0, inv_c};
    for (std::size_t i = 0; i < problem.x.size(); ++i) {
        const double x = problem.x[i];
        const double p = at.probability(x);
        probabilities[i] = p;
        const double r = p - problem.y[i];
        const double w = p * (1.0 - p);
        d.g0 += r * x;
        d.g1 += r;
        d.h00 += w * x * x;
        d.h01 += w * x;
        d.h11 += w;
    }
    return d;
}

}  // namespace

LogisticFitReport fit_logistic(const LogisticProblem& problem, std::size_t max_iterations, LogisticModel start)
{
    check(problem);
    LogisticFitReport report;
    report.model = start;
    LogisticModel& m = report.model;
    const double inv_c = 1.0 / problem.c;
    const double scale = 1.0 + static_cast<double>(problem.x.size());
    std::vector<double>& p_here = report.probabilities;
    p_here.resize(problem.x.size());
    std::vector<double> p_there(problem.x.size());
    auto here = derivatives(problem, m, inv_c, p_here);

    for (std::size_t it = 0; it < max_iterations; ++it) {
        report.iterations = it + 1;
        if (std::hypot(here.g0, here.g1) <= 1e-10 * scale) {
            report.converged = true;
            break;
        }
        const double det = here.h00 * here.h11 - here.h01 * here.h01;
        const double d0 = -(here.h11 * here.g0 - here.h01 * here.g1) / det;
        const double d1 = -(here.h00 * here.g1 - here.h01 * here.g0) / det;

        // By convexity f(m) >= f(c) + g(c).(m - c), so a full step whose end
        // point still slopes downhill along d cannot raise the objective.
        LogisticModel candidate{m.slope + d0, m.intercept + d1};
        auto there = derivatives(problem, candidate, inv_c, p_there);
        double step = 1.0;
        if (there.g0 * d0 + there.g1 * d1 > 0.0) {
            // Overshoot: backtrack on the objective itself.
            const double objective = logistic_objective(problem, m);
            const double slope_dir = here.g0 * d0 + here.g1 * d1;
            double next = objective;
            for (int tries = 0; tries < 60; ++tries) {
                candidate = {m.slope + step * d0, m.intercept + step * d1};
                next = logistic_objective(problem, candidate);
                if (next <= objective + 1e-4 * step * slope_dir) {
                    break;
                }
                step *= 0.5;
            }
            if (!(next <= objective)) {
                report.converged = true;
                break;
            }
            if (step != 1.0) {
                there = derivatives(problem, candidate, inv_c, p_there);
            }
        }
        const bool tiny = std::abs(step * d0) <= 1e-14 * (1.0 + std::abs(m.slope)) &&
                          std::abs(step * d1) <= 1e-14 * (1.0 + std::abs(m.intercept));
        m = candidate;
        here = there;
        p_here.swap(p_there);
        if (tiny) {
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace fast2
