#pragma once

// Little-endian byte encoding shared by the FMAP, DVEC and checkpoint
// formats.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace caevpr {

using Bytes = std::vector<std::uint8_t>;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f32s(std::span<const float> v);
    void raw(std::string_view bytes);
    // u16 length prefix followed by the bytes.
    void short_string(std::string_view s);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

// Every read is bounds-checked; running past the end throws FormatError
// that names `context`.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string context)
        : data_(data), context_(std::move(context)) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    void f32s(std::span<float> out);
    std::string raw(std::size_t n);
    std::string short_string();

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }
    void set_context(std::string context) { context_ = std::move(context); }
    // Throws FormatError unless every byte was consumed.
    void expect_end() const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string context_;
};

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace caevpr
