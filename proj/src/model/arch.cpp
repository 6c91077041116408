#include "caevpr/arch.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "caevpr/error.hpp"

namespace caevpr {

std::string_view to_string(Backbone b) {
    switch (b) {
        case Backbone::vgg16: return "vgg16";
        case Backbone::alexnet: return "alexnet";
        case Backbone::custom: return "custom";
    }
    return "unknown";
}

Backbone parse_backbone(std::string_view name) {
    if (name == "vgg16") return Backbone::vgg16;
    if (name == "alexnet") return Backbone::alexnet;
    if (name == "custom") return Backbone::custom;
    throw ConfigError("unknown backbone '" + std::string(name) + "' (expected vgg16|alexnet|custom)");
}

std::string FeatureDims::str() const {
    return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
}

std::array<BlockGeometry, 3> ArchSpec::canonical_blocks(Backbone backbone) {
    switch (backbone) {
        case Backbone::vgg16: return {{{4, 4, {1, 1}}, {7, 5, {2, 2}}, {5, 3, {2, 2}}}};
        case Backbone::alexnet: return {{{4, 4, {1, 1}}, {5, 3, {2, 2}}, {5, 3, {2, 2}}}};
        case Backbone::custom: break;
    }
    throw ArchitectureError("custom backbone has no canonical block geometry");
}

FeatureDims ArchSpec::canonical_input(Backbone backbone) {
    // conv5 maps of a 640x480 image.
    switch (backbone) {
        case Backbone::vgg16: return {512, 30, 40};
        case Backbone::alexnet: return {256, 28, 38};
        case Backbone::custom: break;
    }
    throw ArchitectureError("custom backbone has no canonical input dims");
}

ArchSpec ArchSpec::canonical(Backbone backbone, int d3, int d1, int d2) {
    ArchSpec spec;
    spec.backbone = backbone;
    spec.input = canonical_input(backbone);
    spec.d1 = d1;
    spec.d2 = d2;
    spec.d3 = d3;
    spec.blocks = canonical_blocks(backbone);
    return spec;
}

bool ArchSpec::canonical_d3() const {
    for (int v : {8, 16, 32, 64, 128, 256, 512})
        if (d3 == v) return true;
    return false;
}

std::array<FeatureDims, 3> ArchSpec::encoder_dims() const {
    std::array<FeatureDims, 3> out{};
    const std::array<int, 3> channels = encoder_channels();
    int h = input.h;
    int w = input.w;
    for (std::size_t i = 0; i < 3; ++i) {
        const BlockGeometry& b = blocks[i];
        if (b.kh < 1 || b.kw < 1 || b.stride.h < 1 || b.stride.w < 1)
            throw ArchitectureError("encoder block " + std::to_string(i + 1) +
                                    ": kernel and stride must be >= 1");
        if (b.kh > h || b.kw > w)
            throw ArchitectureError("encoder block " + std::to_string(i + 1) + ": kernel " +
                                    std::to_string(b.kh) + "x" + std::to_string(b.kw) +
                                    " does not fit " + std::to_string(h) + "x" + std::to_string(w) +
                                    " input");
        h = conv_out_extent(h, b.kh, b.stride.h);
        w = conv_out_extent(w, b.kw, b.stride.w);
        out[i] = {channels[i], h, w};
    }
    return out;
}

void ArchSpec::validate() const {
    if (input.c < 1 || input.h < 1 || input.w < 1)
        throw ArchitectureError("input dims must be positive, got " + input.str());
    if (d1 < 1 || d2 < 1 || d3 < 1) throw ArchitectureError("d1, d2, d3 must be >= 1");
    if (backbone != Backbone::custom) {
        if (blocks != canonical_blocks(backbone))
            throw ArchitectureError(std::string(to_string(backbone)) +
                                    " requires its canonical block geometry");
        if (input.c != canonical_input(backbone).c)
            throw ArchitectureError(std::string(to_string(backbone)) + " feature maps have " +
                                    std::to_string(canonical_input(backbone).c) +
                                    " channels, got " + std::to_string(input.c));
    }
    const auto enc = encoder_dims();
    // The mirrored decoder must land exactly back on each encoder input.
    for (int i = 2; i >= 0; --i) {
        const BlockGeometry& b = blocks[static_cast<std::size_t>(i)];
        const FeatureDims& from = enc[static_cast<std::size_t>(i)];
        const FeatureDims to = i == 0 ? input : enc[static_cast<std::size_t>(i - 1)];
        const int h = deconv_out_extent(from.h, b.kh, b.stride.h);
        const int w = deconv_out_extent(from.w, b.kw, b.stride.w);
        if (h != to.h || w != to.w)
            throw ArchitectureError("decoder block mirroring encoder block " +
                                    std::to_string(i + 1) + " yields " + std::to_string(h) + "x" +
                                    std::to_string(w) + ", expected " + std::to_string(to.h) +
                                    "x" + std::to_string(to.w));
    }
}

namespace {

int parse_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("malformed block list '" + std::string(whole) + "'");
    return v;
}

std::pair<int, int> parse_pair(std::string_view s, std::string_view whole) {
    const auto x = s.find('x');
    if (x == std::string_view::npos) {
        const int v = parse_int(s, whole);
        return {v, v};
    }
    return {parse_int(s.substr(0, x), whole), parse_int(s.substr(x + 1), whole)};
}

}  // namespace

std::array<BlockGeometry, 3> parse_blocks(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        parts.push_back(text.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (parts.size() != 3)
        throw ConfigError("block list needs 3 entries, got '" + std::string(text) + "'");
    std::array<BlockGeometry, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto slash = parts[i].find('/');
        if (slash == std::string_view::npos)
            throw ConfigError("block '" + std::string(parts[i]) + "' is missing '/stride'");
        const auto [kh, kw] = parse_pair(parts[i].substr(0, slash), text);
        const auto [sh, sw] = parse_pair(parts[i].substr(slash + 1), text);
        out[i] = {kh, kw, {sh, sw}};
    }
    return out;
}

}  // namespace caevpr
