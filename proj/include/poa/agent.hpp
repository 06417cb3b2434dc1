#pragma once

#include "poa/client.hpp"
#include "poa/registry.hpp"
#include "poa/worker.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

namespace poa {

/// Interface the agent serves. Clients spawn/resolve/kill through it;
/// freshly launched workers report back through the side channel in the
/// spawn spec, not through this interface.
const InterfaceDescriptor& agent_descriptor();

/// Per-host process launcher and registrar. Workers are OS child
/// processes; "spawn on host X" from anywhere in the cluster lands here.
///
/// Unlike hosted objects, the agent executes commands per connection
/// (one handler thread each): a spawn blocks its own connection while
/// the child constructs, and other clients keep being served.
class AgentServer {
public:
    struct Config {
        std::string advertised_host = "localhost";
        uint16_t port = 0; // 0 = ephemeral
        std::filesystem::path data_dir;
        int spawn_timeout_ms = 30000;
    };

    explicit AgentServer(Config config);
    ~AgentServer();

    AgentServer(const AgentServer&) = delete;
    AgentServer& operator=(const AgentServer&) = delete;

    uint16_t port() const { return port_; }
    const Config& config() const { return config_; }

    /// Serve until shutdown() arrives. run() blocks; start() backgrounds.
    void run();
    void start();
    void request_stop();
    bool stopped() const { return stopping_.load(); }

    /// Local (in-process) operations, also exposed as remote methods.
    void register_executable(const std::string& interface_name,
                             const std::string& exe_path);
    RemoteHandle spawn(const std::string& interface_name, const Payload& ctor_args);
    RemoteHandle resolve(const std::string& interface_name, uint64_t instance_id);
    bool kill_instance(uint64_t instance_id);
    uint32_t kill_by_interface(const std::string& interface_name);
    std::vector<uint64_t> live_instances(const std::string& interface_name) const;
    int64_t instance_pid(uint64_t instance_id) const;

private:
    struct Child {
        pid_t pid = 0;
        std::string interface_name;
        uint16_t port = 0;
        uint64_t generation = 1;
    };

    void serve_connection(TcpSocket socket);
    Payload dispatch(const CallFrame& f);
    RemoteHandle do_spawn(const std::string& exe, const std::string& interface_name,
                          uint64_t instance_id, uint64_t generation, bool restore,
                          const Payload& args);
    void reap_loop();
    uint64_t next_instance_id();
    void load_catalog();
    void save_catalog() const;

    Config config_;
    TcpListener listener_;
    uint16_t port_ = 0;
    Registry registry_;

    mutable std::mutex mu_;
    std::map<std::string, std::string> catalog_; // interface -> executable
    std::map<uint64_t, Child> live_;
    uint64_t next_seq_ = 0;

    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::thread reaper_;
    std::vector<std::thread> conn_threads_;
    std::mutex threads_mu_;
};

/// Client-side stub for one agent.
class AgentClient {
public:
    AgentClient(std::string host, uint16_t port);

    const RemoteHandle& handle() const { return handle_; }
    std::string host() const { return handle_.address.host; }
    uint16_t port() const { return handle_.address.port; }

    RemoteHandle spawn(const std::string& interface_name, Payload ctor_args);
    CompletionToken spawn_detached(const std::string& interface_name, Payload ctor_args);
    static RemoteHandle decode_spawned(const Payload& completion);

    void register_executable(const std::string& interface_name, const std::string& exe);
    RemoteHandle resolve(const std::string& interface_name, uint64_t instance_id);
    bool kill_instance(uint64_t instance_id);
    uint32_t kill_by_interface(const std::string& interface_name);
    std::vector<uint64_t> live_instances(const std::string& interface_name);
    int64_t instance_pid(uint64_t instance_id);
    void ping();
    void shutdown();

private:
    RemoteHandle handle_;
};

} // namespace poa
