#include "caevpr/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "caevpr/error.hpp"
#include "caevpr/parallel.hpp"

namespace caevpr {

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
    return acc;
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

std::vector<MatchResult> topk(const DescriptorSet& queries, const DescriptorSet& references, int k) {
    if (references.empty()) throw DataError("reference set is empty");
    if (queries.dim() != references.dim())
        throw DimensionError("query descriptors have dim " + std::to_string(queries.dim()) +
                             ", references have dim " + std::to_string(references.dim()));
    if (k < 1 || static_cast<std::size_t>(k) > references.size())
        throw ConfigError("K must be in [1, " + std::to_string(references.size()) + "], got " +
                          std::to_string(k));

    const std::size_t kk = static_cast<std::size_t>(k);
    std::vector<MatchResult> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t qi) {
        const auto q = queries.vector(qi);
        std::vector<double> sims(references.size());
        for (std::size_t r = 0; r < references.size(); ++r) sims[r] = dot(q, references.vector(r));
        std::vector<std::size_t> idx(references.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
                          });
        MatchResult& m = out[qi];
        m.query_id = queries.ids()[qi];
        m.ranked.reserve(kk);
        for (std::size_t i = 0; i < kk; ++i)
            m.ranked.push_back({references.ids()[idx[i]], static_cast<float>(sims[idx[i]])});
    });
    return out;
}

std::string format_matches(std::span<const MatchResult> matches) {
    std::string out = "query_id,rank,reference_id,similarity\n";
    char buf[64];
    for (const auto& m : matches) {
        for (std::size_t r = 0; r < m.ranked.size(); ++r) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(m.ranked[r].similarity));
            out += m.query_id + "," + std::to_string(r + 1) + "," + m.ranked[r].reference_id + "," + buf + "\n";
        }
    }
    return out;
}

std::vector<MatchResult> parse_matches(std::string_view csv) {
    std::vector<MatchResult> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < csv.size()) {
        auto nl = csv.find('\n', start);
        if (nl == std::string_view::npos) nl = csv.size();
        std::string_view line = csv.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (line_no == 1 && line.starts_with("query_id,")) continue;

        std::vector<std::string_view> f;
        std::size_t p = 0;
        while (true) {
            const auto c = line.find(',', p);
            f.push_back(line.substr(p, c - p));
            if (c == std::string_view::npos) break;
            p = c + 1;
        }
        const auto bad = [&](const std::string& why) {
            return FormatError("matches line " + std::to_string(line_no) + ": " + why);
        };
        if (f.size() != 4 || f[0].empty() || f[2].empty())
            throw bad("expected query_id,rank,reference_id,similarity");
        std::size_t rank = 0;
        auto [rp, rec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), rank);
        if (rec != std::errc() || rp != f[1].data() + f[1].size()) throw bad("invalid rank");
        float sim = 0.0f;
        auto [sp, sec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), sim);
        if (sec != std::errc() || sp != f[3].data() + f[3].size() || !std::isfinite(sim))
            throw bad("invalid similarity");

        if (rank == 1) {
            out.push_back({std::string(f[0]), {}});
        } else if (out.empty() || out.back().query_id != f[0] || out.back().ranked.size() + 1 != rank) {
            throw bad("ranks for a query must be consecutive starting at 1");
        }
        out.back().ranked.push_back({std::string(f[2]), sim});
    }
    return out;
}

}  // namespace caevpr
