#include "fast2/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fast2/errors.hpp"

namespace fast2 {

double percentile(std::span<const double> sample, double q)
{
    if (sample.empty()) {
        throw UndefinedError("percentile of an empty sample");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double median(std::span<const double> sample)
{
    return percentile(sample, 50.0);
}

double iqr(std::span<const double> sample)
{
    return percentile(sample, 75.0) - percentile(sample, 25.0);
}

double cliffs_delta(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw UndefinedError("Cliff's delta needs two non-empty samples");
    }
    long long more = 0;
    long long less = 0;
    for (double x : a) {
        for (double y : b) {
            more += x > y ? 1 : 0;
            less += x < y ? 1 : 0;
        }
    }
    return static_cast<double>(more - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace {

double median_in_place(std::vector<double>& v)
{
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double upper = *mid;
    if (n % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), mid);
    return (lower + upper) / 2.0;
}

}  // namespace

bool bootstrap_significant(std::span<const double> a, std::span<const double> b, Rng& rng, double confidence,
                           std::size_t resamples)
{
    if (a.empty() || b.empty()) {
        throw UndefinedError("bootstrap test needs two non-empty samples");
    }
    const double ma = median(a);
    const double mb = median(b);
    const double observed = std::abs(ma - mb);
    if (observed == 0.0) {
        return false;
    }
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const double center = median(pooled);

    std::vector<double> a0(a.size());
    std::vector<double> b0(b.size());
    std::transform(a.begin(), a.end(), a0.begin(), [&](double x) { return x - ma + center; });
    std::transform(b.begin(), b.end(), b0.begin(), [&](double x) { return x - mb + center; });

    std::uniform_int_distribution<std::size_t> pick_a(0, a0.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b0.size() - 1);
    std::vector<double> ra(a0.size());
    std::vector<double> rb(b0.size());
    std::size_t extreme = 0;
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto& x : ra) {
            x = a0[pick_a(rng)];
        }
        for (auto& x : rb) {
            x = b0[pick_b(rng)];
        }
        if (std::abs(median_in_place(ra) - median_in_place(rb)) >= observed - 1e-12) {
            ++extreme;
        }
    }
    const double p = static_cast<double>(extreme) / static_cast<double>(resamples);
    return p < 1.0 - confidence;
}

std::vector<RankedGroup> scott_knott(std::vector<Group> groups, Rng& rng, double confidence, std::size_t resamples)
{
    if (groups.empty()) {
        return {};
    }
    for (const auto& g : groups) {
        if (g.sample.empty()) {
            throw UndefinedError("Scott-Knott group '" + g.name + "' has no observations");
        }
    }
    std::vector<double> medians;
    {
        std::vector<std::pair<double, std::size_t>> order;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            order.emplace_back(median(groups[i].sample), i);
        }
        std::sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
            if (x.first != y.first) {
                return x.first < y.first;
            }
            return groups[x.second].name < groups[y.second].name;
        });
        std::vector<Group> sorted;
        for (const auto& [m, i] : order) {
            sorted.push_back(std::move(groups[i]));
            medians.push_back(m);
        }
        groups = std::move(sorted);
    }

    auto pooled = [&](std::size_t lo, std::size_t hi) {
        std::vector<double> out;
        for (std::size_t i = lo; i < hi; ++i) {
            out.insert(out.end(), groups[i].sample.begin(), groups[i].sample.end());
        }
        return out;
    };
    auto weighted_mean = [&](std::size_t lo, std::size_t hi, double& weight) {
        double sum = 0.0;
        weight = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto n = static_cast<double>(groups[i].sample.size());
            sum += n * medians[i];
            weight += n;
        }
        return sum / weight;
    };

    std::vector<std::size_t> cluster_start;
    std::function<void(std::size_t, std::size_t)> divide = [&](std::size_t lo, std::size_t hi) {
        std::size_t cut = 0;
        if (hi - lo > 1) {
            double total_weight = 0.0;
            const double mu = weighted_mean(lo, hi, total_weight);
            double best = -1.0;
            for (std::size_t c = lo + 1; c < hi; ++c) {
                double wl = 0.0;
                double wr = 0.0;
                const double ml = weighted_mean(lo, c, wl);
                const double mr = weighted_mean(c, hi, wr);
                const double score = wl * (ml - mu) * (ml - mu) + wr * (mr - mu) * (mr - mu);
                if (score > best + 1e-12) {
                    best = score;
                    cut = c;
                }
            }
            if (cut != 0) {
                const auto left = pooled(lo, cut);
                const auto right = pooled(cut, hi);
                const bool differs = std::abs(cliffs_delta(left, right)) >= kNegligibleDelta &&
                                     bootstrap_significant(left, right, rng, confidence, resamples);
                if (!differs) {
                    cut = 0;
                }
            }
        }
        if (cut == 0) {
            cluster_start.push_back(lo);
            return;
        }
        divide(lo, cut);
        divide(cut, hi);
    };
    divide(0, groups.size());

    std::vector<RankedGroup> out;
    std::size_t rank = 0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (std::find(cluster_start.begin(), cluster_start.end(), i) != cluster_start.end()) {
            ++rank;
        }
        out.push_back({rank, groups[i].name, medians[i], iqr(groups[i].sample), groups[i].sample.size()});
    }
    return out;
}

}  // namespace fast2
