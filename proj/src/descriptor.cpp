#include "poa/descriptor.hpp"

#include "poa/error.hpp"

#include <set>

namespace poa {

std::string TypeDesc::name() const {
    const char* base = "?";
    switch (kind) {
    case FieldKind::U8: base = "u8"; break;
    case FieldKind::U16: base = "u16"; break;
    case FieldKind::U32: base = "u32"; break;
    case FieldKind::U64: base = "u64"; break;
    case FieldKind::I8: base = "i8"; break;
    case FieldKind::I16: base = "i16"; break;
    case FieldKind::I32: base = "i32"; break;
    case FieldKind::I64: base = "i64"; break;
    case FieldKind::F64: base = "f64"; break;
    case FieldKind::Bool: base = "bool"; break;
    case FieldKind::String: base = "string"; break;
    case FieldKind::Bytes: base = "bytes"; break;
    case FieldKind::Handle: base = "handle"; break;
    }
    return is_list ? std::string("list<") + base + ">" : base;
}

std::string type_list_name(const TypeList& tl) {
    std::string s = "(";
    for (size_t i = 0; i < tl.size(); ++i) {
        if (i)
            s += ", ";
        s += tl[i].name();
    }
    return s + ")";
}

const MethodDesc* InterfaceDescriptor::find(std::string_view method_name) const {
    for (const auto& m : methods_)
        if (m.name == method_name)
            return &m;
    return nullptr;
}

const MethodDesc* InterfaceDescriptor::find(uint16_t code) const {
    for (const auto& m : methods_)
        if (m.command_code == code)
            return &m;
    return nullptr;
}

namespace {

void write_type_list(Writer& w, const TypeList& tl) {
    w.u32(static_cast<uint32_t>(tl.size()));
    for (const auto& t : tl) {
        w.u8(static_cast<uint8_t>(t.kind));
        w.boolean(t.is_list);
    }
}

TypeList read_type_list(Reader& r) {
    uint32_t n = r.u32();
    TypeList tl;
    tl.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        auto kind = static_cast<FieldKind>(r.u8());
        bool is_list = r.boolean();
        if (static_cast<uint8_t>(kind) < 1 ||
            static_cast<uint8_t>(kind) > static_cast<uint8_t>(FieldKind::Handle))
            raise(ErrorCode::UnsupportedSchemaType, "unknown field kind");
        tl.push_back({kind, is_list});
    }
    return tl;
}

bool valid_type(const TypeDesc& t) {
    auto k = static_cast<uint8_t>(t.kind);
    if (k < 1 || k > static_cast<uint8_t>(FieldKind::Handle))
        return false;
    // lists of bytes/string/handle are allowed; list-of-list is not
    // representable in TypeDesc, so nothing further to reject.
    return true;
}

} // namespace

void InterfaceDescriptor::serialize(Writer& w) const {
    w.str(name_);
    write_type_list(w, ctor_params_);
    w.u32(static_cast<uint32_t>(methods_.size()));
    for (const auto& m : methods_) {
        w.str(m.name);
        w.u16(m.command_code);
        write_type_list(w, m.params);
        write_type_list(w, m.results);
    }
}

InterfaceDescriptor InterfaceDescriptor::deserialize(Reader& r) {
    InterfaceDescriptor d;
    d.name_ = r.str();
    d.ctor_params_ = read_type_list(r);
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        MethodDesc m;
        m.name = r.str();
        m.command_code = r.u16();
        m.params = read_type_list(r);
        m.results = read_type_list(r);
        d.methods_.push_back(std::move(m));
    }
    return d;
}

StubTables generate_stubs(const InterfaceDescriptor& d) {
    StubTables t;
    std::set<std::string> names;
    uint16_t expected = cmd::kFirstMethod;
    for (const auto& m : d.methods()) {
        if (m.command_code != expected)
            raise(ErrorCode::DuplicateCommandCode,
                  d.name() + "." + m.name + ": command codes must be dense from 0");
        if (m.command_code >= cmd::kReservedBase)
            raise(ErrorCode::DuplicateCommandCode,
                  d.name() + "." + m.name + ": code collides with reserved block");
        if (!names.insert(m.name).second)
            raise(ErrorCode::DuplicateCommandCode,
                  d.name() + ": duplicate method name " + m.name);
        for (const auto& t2 : m.params)
            if (!valid_type(t2))
                raise(ErrorCode::UnsupportedSchemaType, d.name() + "." + m.name);
        for (const auto& t2 : m.results)
            if (!valid_type(t2))
                raise(ErrorCode::UnsupportedSchemaType, d.name() + "." + m.name);
        t.client[m.name] = ClientStub{m.command_code, m.params, m.results};
        t.server[m.command_code] = ServerStub{m.name, m.params, m.results};
        ++expected;
    }
    for (const auto& t2 : d.constructor_params())
        if (!valid_type(t2))
            raise(ErrorCode::UnsupportedSchemaType, d.name() + " constructor");
    return t;
}

} // namespace poa
