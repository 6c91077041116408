#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "caevpr/dvec.hpp"

namespace caevpr {

struct Match {
    std::string reference_id;
    float similarity = 0.0f;  // cosine, i.e. dot product of unit vectors
};

// Ranked by non-increasing similarity; equal similarities keep reference
// insertion order.
struct MatchResult {
    std::string query_id;
    std::vector<Match> ranked;
};

double dot(std::span<const float> a, std::span<const float> b);
double l2_distance(std::span<const float> a, std::span<const float> b);

/// Exact top-K references for every query by cosine similarity, in query
/// order. Throws DimensionError on dim mismatch, DataError on an empty
/// reference set, ConfigError unless 1 <= K <= reference count.
std::vector<MatchResult> topk(const DescriptorSet& queries, const DescriptorSet& references, int k);

// CSV rows `query_id,rank,reference_id,similarity`, rank starting at 1.
std::string format_matches(std::span<const MatchResult> matches);
std::vector<MatchResult> parse_matches(std::string_view csv);

}  // namespace caevpr
