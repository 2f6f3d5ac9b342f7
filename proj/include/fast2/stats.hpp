#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fast2/learner.hpp"

namespace fast2 {

/// Linear-interpolation percentile, q in [0, 100]. Throws UndefinedError on an empty sample.
double percentile(std::span<const double> sample, double q);
double median(std::span<const double> sample);
/// 75th minus 25th percentile.
double iqr(std::span<const double> sample);

/// (#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|).
double cliffs_delta(std::span<const double> a, std::span<const double> b);

/// |delta| below this is a negligible effect.
inline constexpr double kNegligibleDelta = 0.147;

/// Two-sided bootstrap test of the median difference. Both samples are shifted
/// to the pooled median (the null hypothesis) and resampled with replacement;
/// the p-value is the share of resampled |median difference| at least as large
/// as the observed one. Significant iff p < 1 - confidence.
bool bootstrap_significant(std::span<const double> a, std::span<const double> b, Rng& rng, double confidence = 0.99,
                           std::size_t resamples = 1000);

struct Group {
    std::string name;
    std::vector<double> sample;
};

struct RankedGroup {
    std::size_t rank;
    std::string name;
    double median;
    double iqr;
    std::size_t size;
};

/// Scott-Knott clustering: groups sorted by median (ascending, ties by name),
/// recursively split where the size-weighted between-cluster sum of squares of
/// medians peaks, keeping a split only when the two sides differ by both the
/// bootstrap test and a non-negligible Cliff's delta. Clusters get ranks 1..k
/// in ascending median order. Output is in ascending median order.
std::vector<RankedGroup> scott_knott(std::vector<Group> groups, Rng& rng, double confidence = 0.99,
                                     std::size_t resamples = 1000);

}  // namespace fast2
