#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "caevpr/metrics.hpp"

namespace caevpr {

struct EvalReport {
    std::map<int, double> recall_at;
    double ap = 0.0;
    std::vector<PrPoint> pr_curve;  // ascending threshold
    std::optional<L2Report> l2;
    std::size_t num_queries = 0;
    std::size_t num_queries_with_gt = 0;
};

struct EvalOptions {
    std::vector<int> ks{1, 5, 10};
    int thresholds = 256;
    int bins = 50;
};

// Recall@K, PR curve and AP from ranked matches; L2 histograms when the
// descriptor sets are given.
EvalReport evaluate(std::span<const MatchResult> matches, const GroundTruth& gt,
                    const EvalOptions& opts, const DescriptorSet* queries = nullptr,
                    const DescriptorSet* references = nullptr);

std::string report_json(const EvalReport& report);
std::string pr_curve_csv(const EvalReport& report);
std::string l2_hist_csv(const L2Report& l2);

// Writes report.json, pr_curve.csv and (with L2 data) l2_hist.csv.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace caevpr
