#pragma once

#include "poa/error.hpp"

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poa {

using Payload = std::vector<uint8_t>;

/// Serializer with the fixed wire layout: little-endian fixed-width
/// integers, IEEE-754 binary64 doubles, strings and arrays prefixed
/// with a u32 count.
class Writer {
public:
    Writer() = default;
    explicit Writer(size_t reserve) { buf_.reserve(reserve); }

    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) { put_le(v); }
    void u32(uint32_t v) { put_le(v); }
    void u64(uint64_t v) { put_le(v); }
    void i8(int8_t v) { u8(static_cast<uint8_t>(v)); }
    void i16(int16_t v) { u16(static_cast<uint16_t>(v)); }
    void i32(int32_t v) { u32(static_cast<uint32_t>(v)); }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void boolean(bool v) { u8(v ? 1 : 0); }

    void f64(double v) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }

    void str(std::string_view s) {
        check_count(s.size());
        u32(static_cast<uint32_t>(s.size()));
        append(reinterpret_cast<const uint8_t*>(s.data()), s.size());
    }

    void bytes(std::span<const uint8_t> b) {
        check_count(b.size());
        u32(static_cast<uint32_t>(b.size()));
        append(b.data(), b.size());
    }

    /// Raw append, no count prefix. For payload bodies whose length is
    /// framed elsewhere.
    void raw(std::span<const uint8_t> b) { append(b.data(), b.size()); }

    const Payload& data() const { return buf_; }
    Payload take() { return std::move(buf_); }
    size_t size() const { return buf_.size(); }

private:
    template <typename T>
    void put_le(T v) {
        for (size_t i = 0; i < sizeof(T); ++i)
            buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }

    void append(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }

    static void check_count(size_t n) {
        if (n > UINT32_MAX)
            raise(ErrorCode::SchemaMismatch, "count exceeds u32");
    }

    Payload buf_;
};

/// Deserializer over a borrowed buffer. Underruns throw SchemaMismatch.
class Reader {
public:
    explicit Reader(std::span<const uint8_t> data) : data_(data) {}
    explicit Reader(const Payload& p) : data_(p.data(), p.size()) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return get_le<uint16_t>(); }
    uint32_t u32() { return get_le<uint32_t>(); }
    uint64_t u64() { return get_le<uint64_t>(); }
    int8_t i8() { return static_cast<int8_t>(u8()); }
    int16_t i16() { return static_cast<int16_t>(u16()); }
    int32_t i32() { return static_cast<int32_t>(u32()); }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    bool boolean() { return u8() != 0; }

    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        uint32_t n = u32();
        auto s = take(n);
        return std::string(reinterpret_cast<const char*>(s.data()), s.size());
    }

    Payload bytes() {
        uint32_t n = u32();
        auto s = take(n);
        return Payload(s.begin(), s.end());
    }

    /// Remaining bytes without a count prefix.
    Payload rest() {
        auto s = take(remaining());
        return Payload(s.begin(), s.end());
    }

    size_t remaining() const { return data_.size() - pos_; }
    bool at_end() const { return pos_ == data_.size(); }

    void expect_end() const {
        if (!at_end())
            raise(ErrorCode::SchemaMismatch, "trailing bytes in payload");
    }

private:
    std::span<const uint8_t> take(size_t n) {
        if (remaining() < n)
            raise(ErrorCode::SchemaMismatch, "payload underrun");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
    T get_le() {
        auto s = take(sizeof(T));
        T v = 0;
        for (size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
        return v;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

} // namespace poa
