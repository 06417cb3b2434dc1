#pragma once

#include "poa/bytes.hpp"

#include <compare>
#include <cstdint>
#include <string>

namespace poa {

/// Network location of a live process plus its run-unique identity.
struct ProcessAddress {
    std::string host;
    uint16_t port = 0;
    uint64_t instance_id = 0;

    auto operator<=>(const ProcessAddress&) const = default;
    std::string endpoint() const { return host + ":" + std::to_string(port); }
};

/// Network-addressable reference to an object living in another process.
/// Copyable value; all interaction goes through invocation. Equal
/// (address, interface, generation) means the same live object.
struct RemoteHandle {
    ProcessAddress address;
    std::string interface_name;
    uint64_t generation = 0;

    auto operator<=>(const RemoteHandle&) const = default;

    void serialize(Writer& w) const {
        w.str(address.host);
        w.u16(address.port);
        w.u64(address.instance_id);
        w.str(interface_name);
        w.u64(generation);
    }

    static RemoteHandle deserialize(Reader& r) {
        RemoteHandle h;
        h.address.host = r.str();
        h.address.port = r.u16();
        h.address.instance_id = r.u64();
        h.interface_name = r.str();
        h.generation = r.u64();
        return h;
    }
};

/// URI-form persistent name: poa://<host>:<port>/<InterfaceName>/<instance_id>
/// where host:port is the managing agent (stable across re-spawns).
struct SymbolicAddress {
    std::string agent_host;
    uint16_t agent_port = 0;
    std::string interface_name;
    uint64_t instance_id = 0;

    auto operator<=>(const SymbolicAddress&) const = default;

    std::string format() const;
    /// Parse the URI grammar; throws UnknownAddress on malformed input.
    static SymbolicAddress parse(const std::string& uri);
};

} // namespace poa
