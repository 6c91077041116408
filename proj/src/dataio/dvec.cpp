#include "caevpr/dvec.hpp"

#include <cmath>

#include "caevpr/error.hpp"

namespace caevpr {

DescriptorSet::DescriptorSet(std::uint32_t dim, FlattenOrder order, std::uint64_t model_checksum)
    : dim_(dim), order_(order), checksum_(model_checksum) {
    if (dim == 0) throw DimensionError("descriptor dim must be > 0");
}

void DescriptorSet::add(std::string id, std::span<const float> vec) {
    if (id.empty()) throw DataError("descriptor id must not be empty");
    if (vec.size() != dim_)
        throw DimensionError("descriptor '" + id + "' has length " + std::to_string(vec.size()) +
                             ", expected " + std::to_string(dim_));
    double sq = 0.0;
    for (float x : vec) sq += static_cast<double>(x) * x;
    const double norm = std::sqrt(sq);
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance))
        throw DataError("descriptor '" + id + "' is not unit-norm (norm " + std::to_string(norm) + ")");
    if (index_.contains(id)) throw DataError("duplicate descriptor id '" + id + "'");
    index_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    data_.insert(data_.end(), vec.begin(), vec.end());
}

std::span<const float> DescriptorSet::vector(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::optional<std::size_t> DescriptorSet::find(const std::string& id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Bytes serialize_dvec(const DescriptorSet& set) {
    ByteWriter w;
    w.raw("DVEC");
    w.u16(kDvecVersion);
    w.u32(set.dim());
    w.u32(static_cast<std::uint32_t>(set.size()));
    w.u8(static_cast<std::uint8_t>(set.order()));
    w.u64(set.model_checksum());
    for (std::size_t i = 0; i < set.size(); ++i) {
        w.short_string(set.ids()[i]);
        w.f32s(set.vector(i));
    }
    return w.take();
}

DescriptorSet parse_dvec(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "DVEC header");
    if (r.raw(4) != "DVEC") throw FormatError("not a DVEC file (bad magic)");
    const std::uint16_t version = r.u16();
    if (version != kDvecVersion)
        throw FormatError("unsupported DVEC version " + std::to_string(version));
    const std::uint32_t dim = r.u32();
    const std::uint32_t count = r.u32();
    const std::uint8_t order = r.u8();
    const std::uint64_t checksum = r.u64();
    if (dim == 0 || dim > 1u << 28) throw FormatError("invalid DVEC dim " + std::to_string(dim));
    if (order != static_cast<std::uint8_t>(FlattenOrder::channel_major))
        throw FormatError("unknown DVEC flatten-order tag " + std::to_string(order));
    DescriptorSet set(dim, static_cast<FlattenOrder>(order), checksum);
    std::vector<float> vec(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        r.set_context("DVEC record " + std::to_string(i));
        std::string id = r.short_string();
        r.f32s(vec);
        try {
            set.add(std::move(id), vec);
        } catch (const Error& e) {
            throw FormatError("DVEC record " + std::to_string(i) + ": " + e.what());
        }
    }
    r.set_context("DVEC");
    r.expect_end();
    return set;
}

void write_dvec(const std::filesystem::path& path, const DescriptorSet& set) {
    write_file(path, serialize_dvec(set));
}

DescriptorSet read_dvec(const std::filesystem::path& path) { return parse_dvec(read_file(path)); }

}  // namespace caevpr
