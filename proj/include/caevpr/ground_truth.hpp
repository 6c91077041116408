#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace caevpr {

struct Pose {
    std::string id;
    double x = 0.0;  // meters
    double y = 0.0;
};

// Planar metric poses; ids unique, coordinates finite.
class PoseTable {
public:
    void add(std::string id, double x, double y);
    const std::vector<Pose>& rows() const { return rows_; }
    const Pose* find(const std::string& id) const;
    std::size_t size() const { return rows_.size(); }

private:
    std::vector<Pose> rows_;
    std::map<std::string, std::size_t> index_;
};

struct ManifestRow {
    std::string image_id;
    std::optional<double> x;
    std::optional<double> y;
    std::optional<std::string> timestamp;
};

/// Ordered dataset membership. CSV rows are `image_id[,x,y[,timestamp]]`;
/// an optional `image_id,...` header line, blank lines and `#` comments are
/// skipped. Row order defines frame indices.
struct Manifest {
    std::vector<ManifestRow> rows;

    std::vector<std::string> ids() const;
    // Throws DataError listing every id without a pose.
    PoseTable poses() const;
};

Manifest parse_manifest(std::string_view text);
Manifest read_manifest(const std::filesystem::path& path);

enum class GtProtocol { radius, frame_window, pair_list };

std::string_view to_string(GtProtocol p);

/// query id -> ids of the references that count as correct matches.
struct GroundTruth {
    GtProtocol protocol = GtProtocol::pair_list;
    double radius_m = 0.0;
    int window = 0;
    std::map<std::string, std::set<std::string>> valid;

    const std::set<std::string>* find(const std::string& query) const;
};

// Reference valid iff its Euclidean distance to the query is <= radius_m.
GroundTruth build_ground_truth_radius(const PoseTable& queries, const PoseTable& references,
                                      double radius_m);
// Same, for the queries in `query_ids`; throws DataError listing ids that
// have no pose.
GroundTruth build_ground_truth_radius(const std::vector<std::string>& query_ids,
                                      const PoseTable& query_poses, const PoseTable& references,
                                      double radius_m);

// Aligned traverses: reference j valid for query i iff |i - j| <= window.
// Ids are the decimal frame indices.
GroundTruth build_ground_truth_frames(int query_count, int window);
GroundTruth build_ground_truth_frames(const std::vector<std::string>& query_ids,
                                      const std::vector<std::string>& reference_ids, int window);

/// Parses `query_id,ref_id` rows. An empty ref_id declares a query with no
/// valid reference. Queries listed in `declared_queries` but absent from the
/// rows get empty sets. Duplicate rows are dropped with a note appended to
/// `warnings`.
GroundTruth parse_pair_list(std::string_view text,
                            const std::vector<std::string>* declared_queries = nullptr,
                            std::vector<std::string>* warnings = nullptr);
GroundTruth load_pair_list(const std::filesystem::path& path,
                           const std::vector<std::string>* declared_queries = nullptr,
                           std::vector<std::string>* warnings = nullptr);

// Inverse of parse_pair_list; queries with empty sets are written as `q,`.
std::string format_ground_truth(const GroundTruth& gt);
void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);

}  // namespace caevpr
