#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "caevpr/dvec.hpp"
#include "caevpr/ground_truth.hpp"
#include "caevpr/retrieval.hpp"

namespace caevpr {

/// Fraction of queries with a ground-truth reference among their first K
/// matches, for each K. Queries whose ground-truth set is empty are left out
/// of the denominator. Throws DataError for queries missing from `gt`.
std::map<int, double> recall_at_k(std::span<const MatchResult> matches, const GroundTruth& gt,
                                  std::span<const int> ks);

struct PrPoint {
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Thresholds each query's top-1 similarity: a query is accepted when its
/// similarity >= t. Accepted and correct is TP, accepted and incorrect is
/// FP, rejected with a nonempty ground-truth set is FN. Precision is 1 when
/// nothing is accepted; recall is 0 when tp + fn is 0. `thresholds` must be
/// ascending.
std::vector<PrPoint> pr_curve(std::span<const MatchResult> matches, const GroundTruth& gt,
                              std::span<const double> thresholds);

// `count` evenly spaced values over the observed top-1 similarity range,
// plus -inf and +inf.
std::vector<double> default_thresholds(std::span<const MatchResult> matches, int count = 256);

/// sum_n (R_n - R_{n-1}) * P_n with R_0 = 0. Points must be ordered by
/// non-decreasing recall (DataError otherwise).
double average_precision(std::span<const PrPoint> points);

// PR points from highest to lowest threshold, which is non-decreasing recall.
std::vector<PrPoint> by_increasing_recall(std::span<const PrPoint> points);

struct Histogram {
    std::vector<double> edges;  // bins + 1 values over [0, 2]
    std::vector<std::size_t> counts;
    std::vector<double> values;
    double mean = 0.0;
};

struct L2Report {
    Histogram l2_true;
    Histogram l2_false;
    double mean_gap = 0.0;  // mean(false) - mean(true)
};

/// Per query: distance to the nearest ground-truth reference (true) and to
/// the nearest other reference (false).
L2Report l2_distributions(const DescriptorSet& queries, const DescriptorSet& references,
                          const GroundTruth& gt, int bins);

}  // namespace caevpr
