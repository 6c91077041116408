#pragma once

// Ten-query retrieval fixture with hand-tallied metrics.
//
//   query  top-1 sim  first correct rank  ground truth
//   q0     0.9375     1                   {r0}
//   q1     0.875      1                   {r1}
//   q2     0.8125     2                   {r2}
//   q3     0.75       4                   {r3}
//   q4     0.6875     5                   {r4}
//   q5     0.625      7                   {r5}
//   q6     0.5625     10                  {r6}
//   q7     0.5        absent              {r7}
//   q8     0.4375     1 (via r18)         {r8, r18}
//   q9     0.375      -                   {} (excluded from recall)
//
// Similarities are multiples of 1/128, exact in float and double.

#include <string>
#include <vector>

#include "caevpr/ground_truth.hpp"
#include "caevpr/metrics.hpp"
#include "caevpr/retrieval.hpp"

namespace caevpr::testing {

struct HandFixture {
    std::vector<MatchResult> matches;
    GroundTruth gt;
};

inline HandFixture hand_fixture() {
    struct Row {
        const char* correct;
        int rank;  // 0 when absent
        float top;
        std::vector<const char*> gt;
    };
    const Row rows[10] = {
        {"r0", 1, 0.9375f, {"r0"}},  {"r1", 1, 0.875f, {"r1"}},   {"r2", 2, 0.8125f, {"r2"}},
        {"r3", 4, 0.75f, {"r3"}},    {"r4", 5, 0.6875f, {"r4"}},  {"r5", 7, 0.625f, {"r5"}},
        {"r6", 10, 0.5625f, {"r6"}}, {"r7", 0, 0.5f, {"r7"}},     {"r18", 1, 0.4375f, {"r8", "r18"}},
        {"r3", 1, 0.375f, {}},
    };
    HandFixture f;
    for (int q = 0; q < 10; ++q) {
        const Row& row = rows[q];
        MatchResult m;
        m.query_id = "q" + std::to_string(q);
        for (int k = 0; k < 10; ++k) {
            const std::string id = (k + 1 == row.rank) ? row.correct : "n" + std::to_string(k);
            m.ranked.push_back({id, row.top - static_cast<float>(k) / 128.0f});
        }
        f.matches.push_back(m);
        auto& set = f.gt.valid[m.query_id];
        for (const char* r : row.gt) set.insert(r);
    }
    return f;
}

// Hand tallies.
inline constexpr double kFixtureRecall1 = 3.0 / 9.0;
inline constexpr double kFixtureRecall5 = 6.0 / 9.0;
inline constexpr double kFixtureRecall10 = 8.0 / 9.0;

struct PrTally {
    double threshold;
    std::size_t tp, fp, fn;
};

// Ascending thresholds.
inline std::vector<PrTally> fixture_pr_tallies() {
    return {{0.375, 3, 7, 0}, {0.625, 2, 4, 3}, {0.875, 2, 0, 7}, {0.95, 0, 0, 9}};
}

// Recall/precision pairs of those tallies, highest threshold first:
// (0, 1), (2/9, 1), (2/5, 1/3), (1, 3/10).
inline double fixture_ap() {
    return (2.0 / 9.0) * 1.0 + (2.0 / 5.0 - 2.0 / 9.0) * (1.0 / 3.0) + (1.0 - 2.0 / 5.0) * 0.3;
}

// A threshold grid fine enough to separate every top-1 similarity accepts the
// n most similar queries for each n. Tallies (recall, precision):
//   n=1 (1/9, 1)    n=2 (2/9, 1)     n=3 (2/8, 2/3)   n=4 (2/7, 2/4)
//   n=5 (2/6, 2/5)  n=6 (2/5, 2/6)   n=7 (2/4, 2/7)   n=8 (2/3, 2/8)
//   n=9 (1, 3/9)    n=10 (1, 3/10)
// giving AP = 1819/3780.
inline constexpr double kFixtureDenseGridAp = 1819.0 / 3780.0;

}  // namespace caevpr::testing
