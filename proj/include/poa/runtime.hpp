#pragma once

#include "poa/agent.hpp"

#include <map>

namespace poa {

// ---- remote object lifecycle and group operations ---------------------
// These are free functions over RemoteHandle; typed method invocation
// lives in client.hpp (call / call_detached).

/// Run the remote destructor and terminate the process. Queued commands
/// drain first. Destroying an already dead process succeeds (idempotent).
void destroy(const RemoteHandle& h);

/// Install a group view in the member (deep copy: the handle list
/// travels serialized inside the frame and is owned by the member).
void set_process_group(const RemoteHandle& member, uint32_t my_id,
                       uint32_t group_size, const std::vector<RemoteHandle>& members);
CompletionToken set_process_group_detached(const RemoteHandle& member, uint32_t my_id,
                                           uint32_t group_size,
                                           const std::vector<RemoteHandle>& members);

/// Master-side convenience: make every member run a barrier and wait for
/// all of them (the members still synchronize among themselves).
void group_barrier(const std::vector<RemoteHandle>& members);

/// Fetch a member's own view (test/diagnostic support).
ProcessGroupView fetch_group_view(const RemoteHandle& member);

/// Write the object's state to its agent's registry; returns the stable
/// symbolic address.
SymbolicAddress persist(const RemoteHandle& h);

/// Turn a symbolic address back into a live handle, re-spawning the
/// process from registry state (with a bumped generation) if needed.
RemoteHandle resolve(const SymbolicAddress& addr);
RemoteHandle resolve(const std::string& uri);

/// Liveness probe, served inline even while a method runs.
void ping(const RemoteHandle& h);

/// Client-side directory of cluster agents, so spawns can say "host" and
/// have it route through that host's agent.
class Cluster {
public:
    void add_agent(const std::string& name, const std::string& host, uint16_t port);
    AgentClient agent(const std::string& name) const;
    std::vector<std::string> agent_names() const;
    size_t size() const { return agents_.size(); }

    /// Spawn with constructor arguments checked against the descriptor.
    template <typename... Args>
    RemoteHandle spawn(const std::string& agent_name, const InterfaceDescriptor& d,
                       const Args&... args) const {
        if (schema_of<Args...>() != d.constructor_params())
            raise(ErrorCode::SchemaMismatch,
                  d.name() + " constructor expects " +
                      type_list_name(d.constructor_params()));
        return agent(agent_name).spawn(d.name(), encode_fields(args...));
    }

    template <typename... Args>
    CompletionToken spawn_detached(const std::string& agent_name,
                                   const InterfaceDescriptor& d,
                                   const Args&... args) const {
        if (schema_of<Args...>() != d.constructor_params())
            raise(ErrorCode::SchemaMismatch,
                  d.name() + " constructor expects " +
                      type_list_name(d.constructor_params()));
        return agent(agent_name).spawn_detached(d.name(), encode_fields(args...));
    }

private:
    std::map<std::string, std::pair<std::string, uint16_t>> agents_;
};

} // namespace poa
