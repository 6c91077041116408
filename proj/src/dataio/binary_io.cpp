#include "caevpr/binary_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "caevpr/error.hpp"

namespace caevpr {

namespace {

template <typename T>
void put_le(Bytes& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

}  // namespace

void ByteWriter::u16(std::uint16_t v) { put_le(out_, v); }
void ByteWriter::u32(std::uint32_t v) { put_le(out_, v); }
void ByteWriter::u64(std::uint64_t v) { put_le(out_, v); }
void ByteWriter::f32(float v) { put_le(out_, std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f32s(std::span<const float> v) {
    out_.reserve(out_.size() + v.size() * 4);
    for (float x : v) f32(x);
}

void ByteWriter::raw(std::string_view bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

void ByteWriter::short_string(std::string_view s) {
    if (s.size() > 0xFFFF) throw FormatError("string longer than 65535 bytes cannot be encoded");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
}

void ByteReader::need(std::size_t n) const {
    if (remaining() < n)
        throw FormatError(context_ + ": truncated (needed " + std::to_string(n) + " bytes at offset " +
                          std::to_string(pos_) + ", " + std::to_string(remaining()) + " left)");
}

std::uint8_t ByteReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    const auto v = get_le<std::uint16_t>(data_.data() + pos_);
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    const auto v = get_le<std::uint32_t>(data_.data() + pos_);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    const auto v = get_le<std::uint64_t>(data_.data() + pos_);
    pos_ += 8;
    return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

void ByteReader::f32s(std::span<float> out) {
    need(out.size() * 4);
    const std::uint8_t* p = data_.data() + pos_;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
    pos_ += out.size() * 4;
}

std::string ByteReader::raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
}

std::string ByteReader::short_string() { return raw(u16()); }

void ByteReader::expect_end() const {
    if (remaining() != 0)
        throw FormatError(context_ + ": " + std::to_string(remaining()) + " trailing bytes");
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
    const Bytes b = read_file(path);
    return std::string(b.begin(), b.end());
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace caevpr
