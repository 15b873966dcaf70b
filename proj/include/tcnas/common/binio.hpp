#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "tcnas/common/error.hpp"

namespace tcnas {

// Little-endian append-only buffer used by the FLOWSET and checkpoint writers.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f32(float v) { raw(&v, 4); }
    void bytes(const void* p, size_t n) { raw(p, n); }
    void str(const std::string& s) { raw(s.data(), s.size()); }

    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    void raw(const void* p, size_t n) {
        // host is little-endian on every supported target
        const auto* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<uint8_t> buf_;
};

// Little-endian cursor over a byte span. Short reads throw an Error whose code
// is chosen by the caller (pcap wants TruncatedHeader, FLOWSET ShapeMismatch).
class ByteReader {
public:
    ByteReader(std::span<const uint8_t> data, std::string short_read_code)
        : data_(data), code_(std::move(short_read_code)) {}

    size_t remaining() const { return data_.size() - pos_; }
    size_t pos() const { return pos_; }
    bool done() const { return pos_ == data_.size(); }

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return load<uint16_t>(); }
    uint32_t u32() { return load<uint32_t>(); }
    uint64_t u64() { return load<uint64_t>(); }
    float f32() {
        float v;
        std::memcpy(&v, take(4).data(), 4);
        return v;
    }

    std::span<const uint8_t> take(size_t n) {
        if (remaining() < n)
            fail(code_, "need " + std::to_string(n) + " bytes at offset " +
                            std::to_string(pos_) + ", have " + std::to_string(remaining()));
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    template <class T>
    T load() {
        T v;
        std::memcpy(&v, take(sizeof(T)).data(), sizeof(T));
        return v;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    std::string code_;
};

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

} // namespace tcnas
