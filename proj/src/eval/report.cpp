#include "caevpr/report.hpp"

#include <cstdio>
#include <limits>

#include <json.hpp>

#include "caevpr/binary_io.hpp"
#include "caevpr/error.hpp"

namespace caevpr {

namespace {

std::string num(double v) {
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    if (v == -std::numeric_limits<double>::infinity()) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json histogram_json(const Histogram& h) {
    nlohmann::ordered_json j;
    j["count"] = h.values.size();
    j["mean"] = h.mean;
    j["bin_edges"] = h.edges;
    j["counts"] = h.counts;
    return j;
}

}  // namespace

EvalReport evaluate(std::span<const MatchResult> matches, const GroundTruth& gt,
                    const EvalOptions& opts, const DescriptorSet* queries,
                    const DescriptorSet* references) {
    EvalReport rep;
    rep.num_queries = matches.size();
    for (const auto& m : matches) {
        const auto* s = gt.find(m.query_id);
        if (s && !s->empty()) ++rep.num_queries_with_gt;
    }
    rep.recall_at = recall_at_k(matches, gt, opts.ks);
    rep.pr_curve = pr_curve(matches, gt, default_thresholds(matches, opts.thresholds));
    rep.ap = average_precision(by_increasing_recall(rep.pr_curve));
    if (queries && references) rep.l2 = l2_distributions(*queries, *references, gt, opts.bins);
    return rep;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["num_queries"] = report.num_queries;
    j["num_queries_with_gt"] = report.num_queries_with_gt;
    nlohmann::ordered_json recall;
    for (const auto& [k, v] : report.recall_at) recall[std::to_string(k)] = v;
    j["recall_at"] = recall;
    j["ap"] = report.ap;
    j["pr_protocol"] =
        "top-1 similarity thresholded; precision reported as 1 when nothing is accepted";
    j["pr_points"] = report.pr_curve.size();
    if (report.l2) {
        j["l2_true"] = histogram_json(report.l2->l2_true);
        j["l2_false"] = histogram_json(report.l2->l2_false);
        j["mean_gap"] = report.l2->mean_gap;
    }
    return j.dump(2) + "\n";
}

std::string pr_curve_csv(const EvalReport& report) {
    std::string out = "threshold,precision,recall,tp,fp,fn\n";
    for (const auto& p : report.pr_curve) {
        out += num(p.threshold) + "," + num(p.precision) + "," + num(p.recall) + "," +
               std::to_string(p.tp) + "," + std::to_string(p.fp) + "," + std::to_string(p.fn) + "\n";
    }
    return out;
}

std::string l2_hist_csv(const L2Report& l2) {
    std::string out = "bin_lo,bin_hi,true_count,false_count\n";
    const auto& e = l2.l2_true.edges;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) {
        out += num(e[i]) + "," + num(e[i + 1]) + "," + std::to_string(l2.l2_true.counts[i]) + "," +
               std::to_string(l2.l2_false.counts[i]) + "\n";
    }
    return out;
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_text_file(dir / "report.json", report_json(report));
    write_text_file(dir / "pr_curve.csv", pr_curve_csv(report));
    if (report.l2) write_text_file(dir / "l2_hist.csv", l2_hist_csv(*report.l2));
}

}  // namespace caevpr
