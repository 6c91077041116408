#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "caevpr/error.hpp"
#include "caevpr/metrics.hpp"
#include "caevpr/ops.hpp"
#include "caevpr/report.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

using namespace caevpr;
using namespace caevpr::testing;

namespace {

PrPoint point(double recall, double precision) {
    PrPoint p;
    p.recall = recall;
    p.precision = precision;
    return p;
}

MatchResult top1(const std::string& q, const std::string& r, float sim) { return {q, {{r, sim}}}; }

}  // namespace

TEST(AveragePrecision, TwoPointCurve) {
    const std::vector<PrPoint> pts{point(0.5, 1.0), point(1.0, 0.5)};
    EXPECT_EQ(average_precision(pts), 0.75);
}

TEST(AveragePrecision, SinglePerfectPoint) {
    const std::vector<PrPoint> pts{point(1.0, 1.0)};
    EXPECT_EQ(average_precision(pts), 1.0);
}

TEST(AveragePrecision, ZeroPrecision) {
    const std::vector<PrPoint> pts{point(0.3, 0.0), point(1.0, 0.0)};
    EXPECT_EQ(average_precision(pts), 0.0);
}

TEST(AveragePrecision, DecreasingRecallRejected) {
    const std::vector<PrPoint> pts{point(0.5, 1.0), point(0.4, 1.0)};
    EXPECT_THROW(average_precision(pts), DataError);
}

TEST(Recall, HandFixture) {
    const HandFixture f = hand_fixture();
    const int ks[] = {1, 5, 10};
    const auto r = recall_at_k(f.matches, f.gt, ks);
    EXPECT_EQ(r.at(1), kFixtureRecall1);
    EXPECT_EQ(r.at(5), kFixtureRecall5);
    EXPECT_EQ(r.at(10), kFixtureRecall10);
}

TEST(Recall, RankFourCountsFromFive) {
    GroundTruth gt;
    gt.valid["q"] = {"hit"};
    MatchResult m{"q", {{"a", 0.9f}, {"b", 0.8f}, {"c", 0.7f}, {"hit", 0.6f}, {"d", 0.5f}}};
    const int ks[] = {1, 3, 4, 5};
    const std::vector<MatchResult> ms{m};
    const auto r = recall_at_k(ms, gt, ks);
    EXPECT_EQ(r.at(1), 0.0);
    EXPECT_EQ(r.at(3), 0.0);
    EXPECT_EQ(r.at(4), 1.0);
    EXPECT_EQ(r.at(5), 1.0);
}

TEST(Recall, MonotoneInK) {
    const HandFixture f = hand_fixture();
    std::vector<int> ks(10);
    std::iota(ks.begin(), ks.end(), 1);
    const auto r = recall_at_k(f.matches, f.gt, ks);
    for (int k = 2; k <= 10; ++k) EXPECT_GE(r.at(k), r.at(k - 1));
}

TEST(Recall, UnknownQueryRejected) {
    const HandFixture f = hand_fixture();
    std::vector<MatchResult> ms = f.matches;
    ms.push_back(top1("stranger", "r0", 0.5f));
    const int ks[] = {1};
    try {
        recall_at_k(ms, f.gt, ks);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("stranger"), std::string::npos);
    }
}

TEST(PrCurve, HandFixtureCounts) {
    const HandFixture f = hand_fixture();
    const auto tallies = fixture_pr_tallies();
    std::vector<double> ts;
    for (const auto& t : tallies) ts.push_back(t.threshold);
    const auto pr = pr_curve(f.matches, f.gt, ts);
    ASSERT_EQ(pr.size(), tallies.size());
    for (std::size_t i = 0; i < pr.size(); ++i) {
        EXPECT_EQ(pr[i].tp, tallies[i].tp) << "t=" << ts[i];
        EXPECT_EQ(pr[i].fp, tallies[i].fp) << "t=" << ts[i];
        EXPECT_EQ(pr[i].fn, tallies[i].fn) << "t=" << ts[i];
    }
    EXPECT_EQ(pr[1].precision, 2.0 / 6.0);
    EXPECT_EQ(pr[1].recall, 2.0 / 5.0);
    EXPECT_EQ(pr[3].precision, 1.0);
    EXPECT_EQ(pr[3].recall, 0.0);
    EXPECT_NEAR(average_precision(by_increasing_recall(pr)), fixture_ap(), 1e-15);
}

TEST(PrCurve, SixPairsThreeThresholds) {
    // q0..q5 top-1 similarities .9 .8 .7 .6 .5 .4; q1 and q4 wrong.
    GroundTruth gt;
    std::vector<MatchResult> ms;
    const float sims[] = {0.9f, 0.8f, 0.7f, 0.6f, 0.5f, 0.4f};
    for (int i = 0; i < 6; ++i) {
        const std::string q = "q" + std::to_string(i);
        gt.valid[q] = {"r" + std::to_string(i)};
        const bool wrong = i == 1 || i == 4;
        ms.push_back(top1(q, wrong ? "x" : "r" + std::to_string(i), sims[i]));
    }
    const double ts[] = {0.45, 0.65, 0.85};
    const auto pr = pr_curve(ms, gt, ts);
    // t=.45: accept q0..q4 -> tp 3 fp 2 fn 1
    EXPECT_EQ(pr[0].tp, 3u);
    EXPECT_EQ(pr[0].fp, 2u);
    EXPECT_EQ(pr[0].fn, 1u);
    // t=.65: accept q0..q2 -> tp 2 fp 1 fn 3
    EXPECT_EQ(pr[1].tp, 2u);
    EXPECT_EQ(pr[1].fp, 1u);
    EXPECT_EQ(pr[1].fn, 3u);
    // t=.85: accept q0 -> tp 1 fp 0 fn 5
    EXPECT_EQ(pr[2].tp, 1u);
    EXPECT_EQ(pr[2].fp, 0u);
    EXPECT_EQ(pr[2].fn, 5u);
}

TEST(PrCurve, ExtremeThresholds) {
    std::vector<MatchResult> all_correct;
    GroundTruth gt;
    for (int i = 0; i < 4; ++i) {
        all_correct.push_back(top1("q" + std::to_string(i), "r", 0.5f + 0.1f * i));
        gt.valid["q" + std::to_string(i)] = {"r"};
    }
    const double ts[] = {-1.0, 2.0};
    const auto pr = pr_curve(all_correct, gt, ts);
    EXPECT_EQ(pr[0].precision, 1.0);
    EXPECT_EQ(pr[0].recall, 1.0);
    EXPECT_EQ(pr[1].tp + pr[1].fp, 0u);
    EXPECT_EQ(pr[1].precision, 1.0);
    EXPECT_EQ(pr[1].recall, 0.0);
}

TEST(PrCurve, CountsMonotoneAndApBounded) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MatchResult> ms;
        GroundTruth gt;
        for (int i = 0; i < 40; ++i) {
            const std::string q = "q" + std::to_string(i);
            if (coin(rng)) gt.valid[q] = {"r"};
            else gt.valid[q];
            ms.push_back(top1(q, coin(rng) ? "r" : "x", u(rng)));
        }
        const auto ts = default_thresholds(ms, 64);
        const auto pr = pr_curve(ms, gt, ts);
        for (std::size_t i = 1; i < pr.size(); ++i) {
            EXPECT_LE(pr[i].tp, pr[i - 1].tp);
            EXPECT_GE(pr[i].fn, pr[i - 1].fn);
        }
        const double ap = average_precision(by_increasing_recall(pr));
        EXPECT_GE(ap, 0.0);
        EXPECT_LE(ap, 1.0);
    }
}

TEST(PrCurve, Errors) {
    const GroundTruth gt;
    EXPECT_THROW(pr_curve({}, gt, std::vector<double>{0.0}), DataError);
    const HandFixture f = hand_fixture();
    EXPECT_THROW(pr_curve(f.matches, f.gt, std::vector<double>{0.5, 0.1}), ConfigError);
}

TEST(Thresholds, DefaultGrid) {
    const HandFixture f = hand_fixture();
    const auto ts = default_thresholds(f.matches);
    ASSERT_EQ(ts.size(), 258u);
    EXPECT_EQ(ts.front(), -std::numeric_limits<double>::infinity());
    EXPECT_EQ(ts.back(), std::numeric_limits<double>::infinity());
    EXPECT_EQ(ts[1], 0.375);
    EXPECT_EQ(ts[256], 0.9375);
    EXPECT_TRUE(std::is_sorted(ts.begin(), ts.end()));
}

TEST(L2Distributions, MatchesNaiveOracle) {
    std::mt19937_64 rng(8);
    std::normal_distribution<float> n(0.0f, 1.0f);
    auto unit = [&] {
        std::vector<float> v(12);
        for (float& x : v) x = n(rng);
        return l2_normalize(v);
    };
    DescriptorSet refs(12), queries(12);
    for (int i = 0; i < 20; ++i) refs.add("r" + std::to_string(i), unit());
    GroundTruth gt;
    for (int i = 0; i < 20; ++i) {
        queries.add("q" + std::to_string(i), unit());
        auto& s = gt.valid["q" + std::to_string(i)];
        if (i % 5 != 4) s = {"r" + std::to_string(i), "r" + std::to_string((i + 7) % 20)};
    }
    const L2Report rep = l2_distributions(queries, refs, gt, 20);

    double true_sum = 0.0, false_sum = 0.0;
    int true_n = 0, false_n = 0;
    for (int i = 0; i < 20; ++i) {
        const auto& valid = gt.valid["q" + std::to_string(i)];
        double bt = 1e9, bf = 1e9;
        for (int r = 0; r < 20; ++r) {
            double acc = 0.0;
            for (int k = 0; k < 12; ++k) {
                const double d = static_cast<double>(queries.vector(static_cast<std::size_t>(i))[static_cast<std::size_t>(k)]) -
                                 refs.vector(static_cast<std::size_t>(r))[static_cast<std::size_t>(k)];
                acc += d * d;
            }
            const double dist = std::sqrt(acc);
            if (valid.contains("r" + std::to_string(r))) bt = std::min(bt, dist);
            else bf = std::min(bf, dist);
        }
        if (bt < 1e9) true_sum += bt, ++true_n;
        false_sum += bf, ++false_n;
    }
    EXPECT_EQ(rep.l2_true.values.size(), static_cast<std::size_t>(true_n));
    EXPECT_EQ(rep.l2_false.values.size(), static_cast<std::size_t>(false_n));
    EXPECT_NEAR(rep.l2_true.mean, true_sum / true_n, 1e-6);
    EXPECT_NEAR(rep.l2_false.mean, false_sum / false_n, 1e-6);
    EXPECT_NEAR(rep.mean_gap, false_sum / false_n - true_sum / true_n, 1e-6);
    std::size_t counted = 0;
    for (auto c : rep.l2_true.counts) counted += c;
    EXPECT_EQ(counted, rep.l2_true.values.size());
    for (double v : rep.l2_false.values) EXPECT_LE(v, 2.0);
    EXPECT_EQ(rep.l2_true.edges.size(), 21u);
    EXPECT_EQ(rep.l2_true.edges.back(), 2.0);
}

TEST(L2Distributions, IdenticalQueryHasZeroTrueDistance) {
    DescriptorSet refs(2), queries(2);
    refs.add("a", std::vector<float>{1, 0});
    refs.add("b", std::vector<float>{0, 1});
    queries.add("q", std::vector<float>{1, 0});
    GroundTruth gt;
    gt.valid["q"] = {"a"};
    const L2Report rep = l2_distributions(queries, refs, gt, 10);
    EXPECT_EQ(rep.l2_true.values, std::vector<double>{0.0});
    EXPECT_EQ(rep.l2_true.counts[0], 1u);
    EXPECT_NEAR(rep.l2_false.values[0], std::sqrt(2.0), 1e-7);
}

TEST(L2Distributions, AllEmptyGroundTruthRejected) {
    DescriptorSet refs(2), queries(2);
    refs.add("a", std::vector<float>{1, 0});
    queries.add("q", std::vector<float>{1, 0});
    GroundTruth gt;
    gt.valid["q"];
    EXPECT_THROW(l2_distributions(queries, refs, gt, 10), DataError);
}

TEST(Report, JsonAndCsvContent) {
    const HandFixture f = hand_fixture();
    const EvalReport rep = evaluate(f.matches, f.gt, {});
    EXPECT_EQ(rep.recall_at.at(1), kFixtureRecall1);
    EXPECT_EQ(rep.num_queries, 10u);
    EXPECT_EQ(rep.num_queries_with_gt, 9u);
    const std::string json = report_json(rep);
    EXPECT_NE(json.find("\"recall_at\""), std::string::npos);
    EXPECT_NE(json.find("\"ap\""), std::string::npos);
    const std::string csv = pr_curve_csv(rep);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "threshold,precision,recall,tp,fp,fn");
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rep.pr_curve.size() + 1);
}

TEST(Report, PerfectMatches) {
    GroundTruth gt;
    std::vector<MatchResult> ms;
    for (int i = 0; i < 5; ++i) {
        const std::string q = "q" + std::to_string(i);
        gt.valid[q] = {"r" + std::to_string(i)};
        ms.push_back(top1(q, "r" + std::to_string(i), 0.9f - 0.1f * i));
    }
    EvalOptions opts;
    opts.ks = {1};
    const EvalReport rep = evaluate(ms, gt, opts);
    EXPECT_EQ(rep.recall_at.at(1), 1.0);
    EXPECT_EQ(rep.ap, 1.0);
}
