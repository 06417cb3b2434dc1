#include "poa/runtime.hpp"

namespace poa {

void destroy(const RemoteHandle& h) {
    try {
        invoke_raw(h, cmd::kDestructor, {});
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConnectionLost &&
            e.code() != ErrorCode::HostUnreachable)
            throw;
        // already dead: destroying twice is defined to succeed
    }
    ConnectionCache::instance().evict(h.address.host, h.address.port);
}

namespace {
Payload encode_group(uint32_t my_id, uint32_t group_size,
                     const std::vector<RemoteHandle>& members) {
    if (members.size() != group_size)
        raise(ErrorCode::SchemaMismatch, "member list size != group size");
    if (my_id >= group_size)
        raise(ErrorCode::SchemaMismatch, "member id out of range");
    Writer w;
    w.u32(my_id);
    w.u32(group_size);
    FieldOf<std::vector<RemoteHandle>>::write(w, members);
    return w.take();
}
} // namespace

void set_process_group(const RemoteHandle& member, uint32_t my_id,
                       uint32_t group_size, const std::vector<RemoteHandle>& members) {
    invoke_raw(member, cmd::kSetProcessGroup, encode_group(my_id, group_size, members));
}

CompletionToken set_process_group_detached(const RemoteHandle& member, uint32_t my_id,
                                           uint32_t group_size,
                                           const std::vector<RemoteHandle>& members) {
    return invoke_detached_raw(member, cmd::kSetProcessGroup,
                               encode_group(my_id, group_size, members));
}

void group_barrier(const std::vector<RemoteHandle>& members) {
    std::vector<CompletionToken> tokens;
    tokens.reserve(members.size());
    for (const auto& m : members)
        tokens.push_back(invoke_detached_raw(m, cmd::kMemberBarrier, {}));
    for (auto& t : tokens)
        t.await();
}

ProcessGroupView fetch_group_view(const RemoteHandle& member) {
    Payload out = invoke_raw(member, cmd::kGroupInfo, {});
    Reader r(out);
    ProcessGroupView v;
    v.my_id = r.u32();
    v.group_size = r.u32();
    v.members = FieldOf<std::vector<RemoteHandle>>::read(r);
    r.expect_end();
    return v;
}

SymbolicAddress persist(const RemoteHandle& h) {
    Payload out = invoke_raw(h, cmd::kPersist, {});
    return SymbolicAddress::parse(decode_result<std::string>(out));
}

RemoteHandle resolve(const SymbolicAddress& addr) {
    AgentClient agent(addr.agent_host, addr.agent_port);
    return agent.resolve(addr.interface_name, addr.instance_id);
}

RemoteHandle resolve(const std::string& uri) {
    return resolve(SymbolicAddress::parse(uri));
}

void ping(const RemoteHandle& h) { invoke_raw(h, cmd::kPing, {}); }

void Cluster::add_agent(const std::string& name, const std::string& host,
                        uint16_t port) {
    agents_[name] = {host, port};
}

AgentClient Cluster::agent(const std::string& name) const {
    auto it = agents_.find(name);
    if (it == agents_.end()) {
        // accept "host:port" literals so ad-hoc agents are reachable
        auto colon = name.rfind(':');
        if (colon != std::string::npos) {
            try {
                uint16_t port =
                    static_cast<uint16_t>(std::stoul(name.substr(colon + 1)));
                return AgentClient(name.substr(0, colon), port);
            } catch (const std::exception&) {
            }
        }
        raise(ErrorCode::HostUnreachable, "no agent named " + name);
    }
    return AgentClient(it->second.first, it->second.second);
}

std::vector<std::string> Cluster::agent_names() const {
    std::vector<std::string> out;
    for (const auto& [name, ep] : agents_)
        out.push_back(name);
    return out;
}

} // namespace poa
