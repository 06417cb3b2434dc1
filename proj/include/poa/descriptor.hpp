#pragma once

#include "poa/schema.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poa {

/// Reserved command codes. 0/1 mirror the generated-enum ordering of the
/// interface itself (constructor, destructor); the 0xFFxx block carries
/// runtime services shared by every hosted object and may not be used by
/// interface methods.
namespace cmd {
inline constexpr uint16_t kConstructor = 0;
inline constexpr uint16_t kDestructor = 1;
inline constexpr uint16_t kFirstMethod = 2;

inline constexpr uint16_t kReservedBase = 0xFF00;
inline constexpr uint16_t kSetProcessGroup = 0xFF00; // queued
inline constexpr uint16_t kMemberBarrier = 0xFF01;   // queued
inline constexpr uint16_t kPersist = 0xFF02;         // queued
inline constexpr uint16_t kGroupInfo = 0xFF03;       // queued
inline constexpr uint16_t kBarrierNotify = 0xFF10;   // inline (control plane)
inline constexpr uint16_t kBarrierRelease = 0xFF11;  // inline (control plane)
inline constexpr uint16_t kPing = 0xFF20;            // inline
} // namespace cmd

struct MethodDesc {
    std::string name;
    uint16_t command_code = 0;
    TypeList params;
    TypeList results; // empty = void
};

/// Single source of truth for one remote interface: method names, dense
/// command codes, and parameter/result schemas. Client and server stubs
/// are both derived from it, so they cannot drift.
class InterfaceDescriptor {
public:
    InterfaceDescriptor() = default;
    explicit InterfaceDescriptor(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    template <typename... Params>
    InterfaceDescriptor& constructor() {
        ctor_params_ = schema_of<Params...>();
        return *this;
    }

    /// Methods get codes 2, 3, ... in declaration order (0 and 1 are the
    /// implicit constructor/destructor entries).
    template <typename Ret, typename... Params>
    InterfaceDescriptor& method(std::string name) {
        MethodDesc m;
        m.name = std::move(name);
        m.command_code = static_cast<uint16_t>(cmd::kFirstMethod + methods_.size());
        m.params = schema_of<Params...>();
        if constexpr (!std::is_void_v<Ret>)
            m.results = schema_of<Ret>();
        methods_.push_back(std::move(m));
        return *this;
    }

    const TypeList& constructor_params() const { return ctor_params_; }
    const std::vector<MethodDesc>& methods() const { return methods_; }

    const MethodDesc* find(std::string_view method_name) const;
    const MethodDesc* find(uint16_t code) const;

    void serialize(Writer& w) const;
    static InterfaceDescriptor deserialize(Reader& r);

private:
    std::string name_;
    TypeList ctor_params_;
    std::vector<MethodDesc> methods_;
};

/// Client-side stub slot: how one method travels.
struct ClientStub {
    uint16_t command_code;
    TypeList params;
    TypeList results;
};

/// Server-side stub slot: what a frame with this code must decode to.
struct ServerStub {
    std::string method_name;
    TypeList params;
    TypeList results;
};

/// Dispatch tables generated from one descriptor. Validates the
/// descriptor invariants: codes dense from 0, names unique, schemas
/// drawn from the supported kinds.
struct StubTables {
    std::map<std::string, ClientStub, std::less<>> client; // by method name
    std::map<uint16_t, ServerStub> server;                 // by command code
};

StubTables generate_stubs(const InterfaceDescriptor& d);

} // namespace poa
