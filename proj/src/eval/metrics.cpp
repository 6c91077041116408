#include "caevpr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "caevpr/error.hpp"

namespace caevpr {

namespace {

const std::set<std::string>& gt_set(const GroundTruth& gt, const std::string& query) {
    const auto* s = gt.find(query);
    if (!s) throw DataError("query '" + query + "' has no ground-truth entry");
    return *s;
}

void check_known_queries(std::span<const MatchResult> matches, const GroundTruth& gt) {
    std::string missing;
    for (const auto& m : matches) {
        if (gt.find(m.query_id)) continue;
        if (!missing.empty()) missing += ",";
        missing += m.query_id;
    }
    if (!missing.empty()) throw DataError("queries missing from ground truth: " + missing);
}

Histogram make_histogram(std::vector<double> values, int bins) {
    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = 2.0 * i / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    double sum = 0.0;
    for (double v : values) {
        // Unit vectors are at most 2 apart; rounding may land a hair above.
        const int bin = std::clamp(static_cast<int>(std::floor(v / 2.0 * bins)), 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
        sum += v;
    }
    h.mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    h.values = std::move(values);
    return h;
}

}  // namespace

std::map<int, double> recall_at_k(std::span<const MatchResult> matches, const GroundTruth& gt,
                                  std::span<const int> ks) {
    check_known_queries(matches, gt);
    std::map<int, double> out;
    for (int k : ks) {
        if (k < 1) throw ConfigError("recall K must be >= 1, got " + std::to_string(k));
        std::size_t hits = 0;
        std::size_t total = 0;
        for (const auto& m : matches) {
            const auto& valid = gt_set(gt, m.query_id);
            if (valid.empty()) continue;
            ++total;
            const std::size_t depth = std::min(m.ranked.size(), static_cast<std::size_t>(k));
            for (std::size_t r = 0; r < depth; ++r) {
                if (valid.contains(m.ranked[r].reference_id)) {
                    ++hits;
                    break;
                }
            }
        }
        if (total == 0) throw DataError("no query has a nonempty ground-truth set");
        out[k] = static_cast<double>(hits) / static_cast<double>(total);
    }
    return out;
}

std::vector<PrPoint> pr_curve(std::span<const MatchResult> matches, const GroundTruth& gt,
                              std::span<const double> thresholds) {
    if (matches.empty()) throw DataError("pr_curve: no matches");
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ConfigError("pr_curve: thresholds must be ascending");
    check_known_queries(matches, gt);

    struct Top1 {
        double similarity;
        bool correct;
        bool has_gt;
    };
    std::vector<Top1> top;
    top.reserve(matches.size());
    for (const auto& m : matches) {
        if (m.ranked.empty()) throw DataError("pr_curve: query '" + m.query_id + "' has no match");
        const auto& valid = gt_set(gt, m.query_id);
        top.push_back({m.ranked.front().similarity, valid.contains(m.ranked.front().reference_id),
                       !valid.empty()});
    }

    std::vector<PrPoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        PrPoint p;
        p.threshold = t;
        for (const auto& q : top) {
            if (q.similarity >= t) {
                (q.correct ? p.tp : p.fp) += 1;
            } else if (q.has_gt) {
                ++p.fn;
            }
        }
        p.precision = p.tp + p.fp > 0 ? static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp) : 1.0;
        p.recall = p.tp + p.fn > 0 ? static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn) : 0.0;
        out.push_back(p);
    }
    return out;
}

std::vector<double> default_thresholds(std::span<const MatchResult> matches, int count) {
    if (count < 1) throw ConfigError("threshold count must be >= 1");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& m : matches) {
        if (m.ranked.empty()) continue;
        lo = std::min(lo, static_cast<double>(m.ranked.front().similarity));
        hi = std::max(hi, static_cast<double>(m.ranked.front().similarity));
    }
    std::vector<double> out{-std::numeric_limits<double>::infinity()};
    if (lo <= hi) {
        if (count == 1 || lo == hi) {
            out.push_back(lo);
        } else {
            for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
            out.back() = hi;
        }
    }
    out.push_back(std::numeric_limits<double>::infinity());
    return out;
}

double average_precision(std::span<const PrPoint> points) {
    double ap = 0.0;
    double prev = 0.0;
    for (const auto& p : points) {
        if (p.recall < prev)
            throw DataError("average_precision: recall must be non-decreasing");
        ap += (p.recall - prev) * p.precision;
        prev = p.recall;
    }
    return ap;
}

std::vector<PrPoint> by_increasing_recall(std::span<const PrPoint> points) {
    std::vector<PrPoint> out(points.begin(), points.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const PrPoint& a, const PrPoint& b) { return a.threshold > b.threshold; });
    return out;
}

L2Report l2_distributions(const DescriptorSet& queries, const DescriptorSet& references,
                          const GroundTruth& gt, int bins) {
    if (bins < 1) throw ConfigError("histogram bins must be >= 1");
    if (queries.dim() != references.dim())
        throw DimensionError("query descriptors have dim " + std::to_string(queries.dim()) +
                             ", references have dim " + std::to_string(references.dim()));

    std::vector<double> true_d;
    std::vector<double> false_d;
    std::string unknown_refs;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& valid = gt_set(gt, queries.ids()[qi]);
        for (const auto& r : valid) {
            if (references.find(r)) continue;
            if (!unknown_refs.empty()) unknown_refs += ",";
            unknown_refs += r;
        }
        const auto q = queries.vector(qi);
        double best_true = std::numeric_limits<double>::infinity();
        double best_false = std::numeric_limits<double>::infinity();
        for (std::size_t ri = 0; ri < references.size(); ++ri) {
            const double d = l2_distance(q, references.vector(ri));
            double& best = valid.contains(references.ids()[ri]) ? best_true : best_false;
            best = std::min(best, d);
        }
        if (std::isfinite(best_true)) true_d.push_back(best_true);
        if (std::isfinite(best_false)) false_d.push_back(best_false);
    }
    if (!unknown_refs.empty())
        throw DataError("ground-truth references missing from reference set: " + unknown_refs);
    if (true_d.empty()) throw DataError("l2_distributions: no query has a ground-truth reference");
    if (false_d.empty()) throw DataError("l2_distributions: no false-match distances");

    L2Report rep;
    rep.l2_true = make_histogram(std::move(true_d), bins);
    rep.l2_false = make_histogram(std::move(false_d), bins);
    rep.mean_gap = rep.l2_false.mean - rep.l2_true.mean;
    return rep;
}

}  // namespace caevpr
