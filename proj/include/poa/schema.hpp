#pragma once

#include "poa/bytes.hpp"
#include "poa/handle.hpp"

#include <string>
#include <type_traits>
#include <vector>

namespace poa {

/// Closed set of wire types. Everything a method signature may carry is
/// one of these scalars, or a length-prefixed list of one.
enum class FieldKind : uint8_t {
    U8 = 1,
    U16 = 2,
    U32 = 3,
    U64 = 4,
    I8 = 5,
    I16 = 6,
    I32 = 7,
    I64 = 8,
    F64 = 9,
    Bool = 10,
    String = 11,
    Bytes = 12,
    Handle = 13,
};

struct TypeDesc {
    FieldKind kind;
    bool is_list = false;

    bool operator==(const TypeDesc&) const = default;
    std::string name() const;
};

using TypeList = std::vector<TypeDesc>;

std::string type_list_name(const TypeList& tl);

// ---- C++ type -> TypeDesc mapping ------------------------------------

template <typename T>
struct WireType; // unsupported types fail to instantiate

template <> struct WireType<uint8_t> {
    static constexpr FieldKind kind = FieldKind::U8;
    static void write(Writer& w, uint8_t v) { w.u8(v); }
    static uint8_t read(Reader& r) { return r.u8(); }
};
template <> struct WireType<uint16_t> {
    static constexpr FieldKind kind = FieldKind::U16;
    static void write(Writer& w, uint16_t v) { w.u16(v); }
    static uint16_t read(Reader& r) { return r.u16(); }
};
template <> struct WireType<uint32_t> {
    static constexpr FieldKind kind = FieldKind::U32;
    static void write(Writer& w, uint32_t v) { w.u32(v); }
    static uint32_t read(Reader& r) { return r.u32(); }
};
template <> struct WireType<uint64_t> {
    static constexpr FieldKind kind = FieldKind::U64;
    static void write(Writer& w, uint64_t v) { w.u64(v); }
    static uint64_t read(Reader& r) { return r.u64(); }
};
template <> struct WireType<int8_t> {
    static constexpr FieldKind kind = FieldKind::I8;
    static void write(Writer& w, int8_t v) { w.i8(v); }
    static int8_t read(Reader& r) { return r.i8(); }
};
template <> struct WireType<int16_t> {
    static constexpr FieldKind kind = FieldKind::I16;
    static void write(Writer& w, int16_t v) { w.i16(v); }
    static int16_t read(Reader& r) { return r.i16(); }
};
template <> struct WireType<int32_t> {
    static constexpr FieldKind kind = FieldKind::I32;
    static void write(Writer& w, int32_t v) { w.i32(v); }
    static int32_t read(Reader& r) { return r.i32(); }
};
template <> struct WireType<int64_t> {
    static constexpr FieldKind kind = FieldKind::I64;
    static void write(Writer& w, int64_t v) { w.i64(v); }
    static int64_t read(Reader& r) { return r.i64(); }
};
template <> struct WireType<double> {
    static constexpr FieldKind kind = FieldKind::F64;
    static void write(Writer& w, double v) { w.f64(v); }
    static double read(Reader& r) { return r.f64(); }
};
template <> struct WireType<bool> {
    static constexpr FieldKind kind = FieldKind::Bool;
    static void write(Writer& w, bool v) { w.boolean(v); }
    static bool read(Reader& r) { return r.boolean(); }
};
template <> struct WireType<std::string> {
    static constexpr FieldKind kind = FieldKind::String;
    static void write(Writer& w, const std::string& v) { w.str(v); }
    static std::string read(Reader& r) { return r.str(); }
};
template <> struct WireType<Payload> {
    static constexpr FieldKind kind = FieldKind::Bytes;
    static void write(Writer& w, const Payload& v) { w.bytes(v); }
    static Payload read(Reader& r) { return r.bytes(); }
};
template <> struct WireType<RemoteHandle> {
    static constexpr FieldKind kind = FieldKind::Handle;
    static void write(Writer& w, const RemoteHandle& v) { v.serialize(w); }
    static RemoteHandle read(Reader& r) { return RemoteHandle::deserialize(r); }
};

template <typename T>
concept WireScalar = requires { WireType<T>::kind; };

template <typename T>
struct FieldOf {
    static_assert(WireScalar<T>, "type not representable on the wire");
    static constexpr TypeDesc desc() { return {WireType<T>::kind, false}; }
    static void write(Writer& w, const T& v) { WireType<T>::write(w, v); }
    static T read(Reader& r) { return WireType<T>::read(r); }
};

// Payload is itself a std::vector<uint8_t>; keep it as Bytes, not list-of-u8.
template <typename E>
    requires(WireScalar<E> && !std::is_same_v<std::vector<E>, Payload>)
struct FieldOf<std::vector<E>> {
    static constexpr TypeDesc desc() { return {WireType<E>::kind, true}; }
    static void write(Writer& w, const std::vector<E>& v) {
        w.u32(static_cast<uint32_t>(v.size()));
        for (const auto& e : v)
            WireType<E>::write(w, e);
    }
    static std::vector<E> read(Reader& r) {
        uint32_t n = r.u32();
        std::vector<E> v;
        v.reserve(n);
        for (uint32_t i = 0; i < n; ++i)
            v.push_back(WireType<E>::read(r));
        return v;
    }
};

template <typename T>
concept WireField = requires { FieldOf<std::remove_cvref_t<T>>::desc(); };

template <typename... Ts>
TypeList schema_of() {
    return TypeList{FieldOf<std::remove_cvref_t<Ts>>::desc()...};
}

/// Encode a tuple of values per their schema (no per-field tags; the
/// schema is the contract).
template <typename... Ts>
Payload encode_fields(const Ts&... vs) {
    Writer w;
    (FieldOf<std::remove_cvref_t<Ts>>::write(w, vs), ...);
    return w.take();
}

} // namespace poa
