#pragma once

#include "poa/object_server.hpp"
#include "poa/registry.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

namespace poa {

/// What a spawned process knows about itself, handed over by the agent
/// through the spawn spec file.
struct WorkerIdentity {
    std::string interface_name;
    uint64_t instance_id = 0;
    uint64_t generation = 1;
    std::string agent_host;
    uint16_t agent_port = 0;
    std::filesystem::path data_dir;
    std::filesystem::path log_dir;
};

/// Per-process context visible to the hosted object implementation.
class WorkerEnv {
public:
    explicit WorkerEnv(WorkerIdentity id) : identity_(std::move(id)) {}

    const WorkerIdentity& identity() const { return identity_; }

    /// Group/barrier context; valid once the server is running, which is
    /// before any method can execute.
    GroupContext& group() {
        if (!server_)
            raise(ErrorCode::MemberLost, "worker group context not attached");
        return server_->group();
    }

    SymbolicAddress symbolic() const {
        return SymbolicAddress{identity_.agent_host, identity_.agent_port,
                               identity_.interface_name, identity_.instance_id};
    }

    Registry registry() const { return Registry(identity_.data_dir); }

    void attach(ObjectServer* s) { server_ = s; }

private:
    WorkerIdentity identity_;
    ObjectServer* server_ = nullptr;
};

/// Builds the hosted object: decode constructor args (or stored state
/// when restore is set), return the bound dispatch table.
using ServiceFactory =
    std::function<ServiceBinding(WorkerEnv& env, Reader& args, bool restore)>;

/// Catalog of interfaces this executable can host. Workers and test
/// binaries register at static-init or early in main.
class LocalInterfaceRegistry {
public:
    struct Entry {
        InterfaceDescriptor descriptor;
        ServiceFactory factory;
    };

    static void add(InterfaceDescriptor descriptor, ServiceFactory factory);
    static const Entry* find(const std::string& interface_name);
    static std::vector<std::string> names();
};

// ---- spawn spec file: agent -> worker handoff -------------------------

struct SpawnSpec {
    WorkerIdentity identity;
    bool restore = false;
    Payload args; // ctor args, or registry state when restore
    uint64_t ticket = 0;
    uint16_t report_port = 0; // one-shot report listener on agent_host
};

void write_spawn_spec(const std::filesystem::path& path, const SpawnSpec& spec);
SpawnSpec read_spawn_spec(const std::filesystem::path& path);

struct SpawnReport {
    uint64_t ticket = 0;
    bool ok = false;
    uint16_t port = 0;
    uint64_t instance_id = 0;
    std::string message;
};

void send_spawn_report(const std::string& host, uint16_t port, const SpawnReport& r);
SpawnReport recv_spawn_report(TcpSocket& s);

/// Entry point for spawned processes: `exe --poa-worker <specfile>`.
/// Hosts the object until its destructor command arrives. Returns the
/// process exit code.
int worker_main(int argc, char** argv);

} // namespace poa
