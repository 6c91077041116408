#include "caevpr/ground_truth.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "caevpr/binary_io.hpp"
#include "caevpr/error.hpp"

namespace caevpr {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

// Calls fn(line_number, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_row(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const std::string_view line =
            trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        ++line_no;
        if (!line.empty() && line.front() != '#') fn(line_no, split_fields(line));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
}

double parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw FormatError("line " + std::to_string(line_no) + ": invalid number '" + std::string(s) +
                          "'");
    return v;
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ",";
        out += id;
    }
    return out;
}

}  // namespace

void PoseTable::add(std::string id, double x, double y) {
    if (id.empty()) throw DataError("pose id must not be empty");
    if (!std::isfinite(x) || !std::isfinite(y))
        throw DataError("pose '" + id + "' has non-finite coordinates");
    if (index_.contains(id)) throw DataError("duplicate pose id '" + id + "'");
    index_.emplace(id, rows_.size());
    rows_.push_back({std::move(id), x, y});
}

const Pose* PoseTable::find(const std::string& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<std::string> Manifest::ids() const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.image_id);
    return out;
}

PoseTable Manifest::poses() const {
    PoseTable table;
    std::vector<std::string> missing;
    for (const auto& r : rows) {
        if (r.x && r.y)
            table.add(r.image_id, *r.x, *r.y);
        else
            missing.push_back(r.image_id);
    }
    if (!missing.empty()) throw DataError("missing pose for ids: " + join_ids(missing));
    return table;
}

Manifest parse_manifest(std::string_view text) {
    Manifest m;
    std::map<std::string, std::size_t, std::less<>> seen;
    bool first = true;
    for_each_row(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const bool header = first && f[0] == "image_id";
        first = false;
        if (header) return;
        if (f[0].empty() || f.size() == 2 || f.size() > 4)
            throw FormatError("manifest line " + std::to_string(line_no) +
                              ": expected image_id[,x,y[,timestamp]]");
        if (seen.contains(f[0]))
            throw FormatError("manifest line " + std::to_string(line_no) + ": duplicate id '" +
                              std::string(f[0]) + "'");
        seen.emplace(std::string(f[0]), line_no);
        ManifestRow row{std::string(f[0]), std::nullopt, std::nullopt, std::nullopt};
        if (f.size() >= 3 && !(f[1].empty() && f[2].empty())) {
            row.x = parse_double(f[1], line_no);
            row.y = parse_double(f[2], line_no);
        }
        if (f.size() == 4 && !f[3].empty()) row.timestamp = std::string(f[3]);
        m.rows.push_back(std::move(row));
    });
    return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_text_file(path));
}

std::string_view to_string(GtProtocol p) {
    switch (p) {
        case GtProtocol::radius: return "radius";
        case GtProtocol::frame_window: return "frames";
        case GtProtocol::pair_list: return "pairs";
    }
    return "unknown";
}

const std::set<std::string>* GroundTruth::find(const std::string& query) const {
    const auto it = valid.find(query);
    return it == valid.end() ? nullptr : &it->second;
}

GroundTruth build_ground_truth_radius(const PoseTable& queries, const PoseTable& references,
                                      double radius_m) {
    std::vector<std::string> ids;
    for (const auto& q : queries.rows()) ids.push_back(q.id);
    return build_ground_truth_radius(ids, queries, references, radius_m);
}

GroundTruth build_ground_truth_radius(const std::vector<std::string>& query_ids,
                                      const PoseTable& query_poses, const PoseTable& references,
                                      double radius_m) {
    if (!(radius_m > 0.0) || !std::isfinite(radius_m))
        throw ConfigError("radius must be > 0, got " + std::to_string(radius_m));
    std::vector<std::string> missing;
    for (const auto& id : query_ids)
        if (!query_poses.find(id)) missing.push_back(id);
    if (!missing.empty()) throw DataError("missing pose for query ids: " + join_ids(missing));

    GroundTruth gt;
    gt.protocol = GtProtocol::radius;
    gt.radius_m = radius_m;
    for (const auto& id : query_ids) {
        const Pose& q = *query_poses.find(id);
        auto& set = gt.valid[id];
        for (const auto& r : references.rows()) {
            // Inclusive boundary.
            if (std::hypot(q.x - r.x, q.y - r.y) <= radius_m) set.insert(r.id);
        }
    }
    return gt;
}

GroundTruth build_ground_truth_frames(int query_count, int window) {
    if (query_count < 0) throw ConfigError("query count must be >= 0");
    std::vector<std::string> ids;
    for (int i = 0; i < query_count; ++i) ids.push_back(std::to_string(i));
    return build_ground_truth_frames(ids, ids, window);
}

GroundTruth build_ground_truth_frames(const std::vector<std::string>& query_ids,
                                      const std::vector<std::string>& reference_ids, int window) {
    if (window < 0) throw ConfigError("frame window must be >= 0, got " + std::to_string(window));
    if (query_ids.size() != reference_ids.size())
        throw DataError("frame-window ground truth needs aligned traverses: " +
                        std::to_string(query_ids.size()) + " queries vs " +
                        std::to_string(reference_ids.size()) + " references");
    GroundTruth gt;
    gt.protocol = GtProtocol::frame_window;
    gt.window = window;
    const long long n = static_cast<long long>(query_ids.size());
    for (long long i = 0; i < n; ++i) {
        auto& set = gt.valid[query_ids[static_cast<std::size_t>(i)]];
        for (long long j = std::max(0LL, i - window); j <= std::min(n - 1, i + window); ++j)
            set.insert(reference_ids[static_cast<std::size_t>(j)]);
    }
    return gt;
}

GroundTruth parse_pair_list(std::string_view text, const std::vector<std::string>* declared_queries,
                            std::vector<std::string>* warnings) {
    GroundTruth gt;
    gt.protocol = GtProtocol::pair_list;
    bool first = true;
    for_each_row(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const bool header = first && f.size() == 2 && f[0] == "query_id" && f[1] == "ref_id";
        first = false;
        if (header) return;
        if (f.size() != 2 || f[0].empty())
            throw FormatError("pair list line " + std::to_string(line_no) +
                              ": expected query_id,ref_id");
        auto& set = gt.valid[std::string(f[0])];
        if (f[1].empty()) return;
        if (!set.insert(std::string(f[1])).second && warnings)
            warnings->push_back("line " + std::to_string(line_no) + ": duplicate pair " +
                                std::string(f[0]) + "," + std::string(f[1]) + " ignored");
    });
    if (declared_queries)
        for (const auto& q : *declared_queries) gt.valid.try_emplace(q);
    return gt;
}

GroundTruth load_pair_list(const std::filesystem::path& path,
                           const std::vector<std::string>* declared_queries,
                           std::vector<std::string>* warnings) {
    return parse_pair_list(read_text_file(path), declared_queries, warnings);
}

std::string format_ground_truth(const GroundTruth& gt) {
    std::ostringstream out;
    out << "# protocol=" << to_string(gt.protocol);
    if (gt.protocol == GtProtocol::radius) out << " radius_m=" << gt.radius_m;
    if (gt.protocol == GtProtocol::frame_window) out << " window=" << gt.window;
    out << "\nquery_id,ref_id\n";
    for (const auto& [q, refs] : gt.valid) {
        if (refs.empty()) out << q << ",\n";
        for (const auto& r : refs) out << q << "," << r << "\n";
    }
    return out.str();
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
    write_text_file(path, format_ground_truth(gt));
}

}  // namespace caevpr
