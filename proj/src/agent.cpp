#include "poa/agent.hpp"

#include <nlohmann/json.hpp>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>

namespace poa {

using nlohmann::json;

const InterfaceDescriptor& agent_descriptor() {
    static const InterfaceDescriptor d = [] {
        InterfaceDescriptor d("ClusterAgent");
        d.method<RemoteHandle, std::string, Payload>("spawn");
        d.method<void, std::string, std::string>("register_executable");
        d.method<RemoteHandle, std::string, uint64_t>("resolve");
        d.method<bool, uint64_t>("kill_instance");
        d.method<uint32_t, std::string>("kill_by_interface");
        d.method<std::vector<uint64_t>, std::string>("live_instances");
        d.method<int64_t, uint64_t>("instance_pid");
        d.method<void>("shutdown");
        return d;
    }();
    return d;
}

AgentServer::AgentServer(Config config)
    : config_(std::move(config)),
      listener_(TcpListener::listen(config_.port)),
      port_(listener_.port()),
      registry_(config_.data_dir) {
    std::filesystem::create_directories(config_.data_dir);
    load_catalog();
    reaper_ = std::thread([this] { reap_loop(); });
}

AgentServer::~AgentServer() {
    request_stop();
    if (acceptor_.joinable())
        acceptor_.join();
    if (reaper_.joinable())
        reaper_.join();
    std::lock_guard lk(threads_mu_);
    for (auto& t : conn_threads_)
        if (t.joinable())
            t.join();
}

void AgentServer::run() {
    for (;;) {
        TcpSocket s = listener_.accept();
        if (!s.valid())
            return;
        std::lock_guard lk(threads_mu_);
        conn_threads_.emplace_back(
            [this, sock = std::move(s)]() mutable { serve_connection(std::move(sock)); });
    }
}

void AgentServer::start() {
    acceptor_ = std::thread([this] { run(); });
}

void AgentServer::request_stop() {
    if (stopping_.exchange(true))
        return;
    // kill remaining children; graceful teardown happens before shutdown
    std::vector<pid_t> pids;
    {
        std::lock_guard lk(mu_);
        for (auto& [id, c] : live_)
            pids.push_back(c.pid);
        live_.clear();
    }
    for (pid_t pid : pids) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, nullptr, 0);
    }
    listener_.close();
}

void AgentServer::serve_connection(TcpSocket socket) {
    try {
        for (;;) {
            auto frame = recv_call(socket);
            if (!frame)
                return;
            if (frame->command_code == cmd::kPing) {
                send_reply(socket, {frame->correlation_id, ReplyStatus::Ok, {}});
                continue;
            }
            if (frame->mode == CompletionMode::Detached)
                send_reply(socket, {frame->correlation_id, ReplyStatus::Ok, {}});

            ReplyFrame reply;
            reply.correlation_id = frame->correlation_id;
            bool is_shutdown = false;
            try {
                const MethodDesc* m = agent_descriptor().find(frame->command_code);
                if (m && m->name == "shutdown")
                    is_shutdown = true;
                reply.payload = dispatch(*frame);
                reply.status = ReplyStatus::Ok;
            } catch (const Error& e) {
                reply.status = ReplyStatus::Exception;
                reply.payload = encode_error_payload(e.code(), e.what());
            } catch (const std::exception& e) {
                reply.status = ReplyStatus::Exception;
                reply.payload = encode_error_payload(ErrorCode::RemoteException, e.what());
            }
            send_reply(socket, reply);
            if (is_shutdown && reply.status == ReplyStatus::Ok) {
                request_stop();
                return;
            }
        }
    } catch (const Error&) {
        // dropped connection
    }
}

Payload AgentServer::dispatch(const CallFrame& f) {
    const MethodDesc* m = agent_descriptor().find(f.command_code);
    if (!m)
        raise(ErrorCode::SchemaMismatch,
              "agent: unknown command " + std::to_string(f.command_code));
    Reader r(f.payload);

    if (m->name == "spawn") {
        std::string iface = r.str();
        Payload args = r.bytes();
        r.expect_end();
        RemoteHandle h = spawn(iface, args);
        Writer w;
        h.serialize(w);
        return w.take();
    }
    if (m->name == "register_executable") {
        std::string iface = r.str();
        std::string exe = r.str();
        r.expect_end();
        register_executable(iface, exe);
        return {};
    }
    if (m->name == "resolve") {
        std::string iface = r.str();
        uint64_t id = r.u64();
        r.expect_end();
        RemoteHandle h = resolve(iface, id);
        Writer w;
        h.serialize(w);
        return w.take();
    }
    if (m->name == "kill_instance") {
        uint64_t id = r.u64();
        r.expect_end();
        return encode_fields(kill_instance(id));
    }
    if (m->name == "kill_by_interface") {
        std::string iface = r.str();
        r.expect_end();
        return encode_fields(kill_by_interface(iface));
    }
    if (m->name == "live_instances") {
        std::string iface = r.str();
        r.expect_end();
        return encode_fields(live_instances(iface));
    }
    if (m->name == "instance_pid") {
        uint64_t id = r.u64();
        r.expect_end();
        return encode_fields(instance_pid(id));
    }
    if (m->name == "shutdown") {
        r.expect_end();
        return {};
    }
    raise(ErrorCode::SchemaMismatch, "agent: unhandled method " + m->name);
}

void AgentServer::register_executable(const std::string& interface_name,
                                      const std::string& exe_path) {
    std::lock_guard lk(mu_);
    catalog_[interface_name] = exe_path;
    save_catalog();
}

uint64_t AgentServer::next_instance_id() {
    // unique within a cluster run: agent pid in the high bits
    std::lock_guard lk(mu_);
    return (static_cast<uint64_t>(::getpid()) << 32) | ++next_seq_;
}

RemoteHandle AgentServer::spawn(const std::string& interface_name,
                                const Payload& ctor_args) {
    std::string exe;
    {
        std::lock_guard lk(mu_);
        auto it = catalog_.find(interface_name);
        if (it == catalog_.end())
            raise(ErrorCode::UnknownInterface,
                  interface_name + " not in agent catalog");
        exe = it->second;
    }
    uint64_t id = next_instance_id();
    return do_spawn(exe, interface_name, id, 1, false, ctor_args);
}

RemoteHandle AgentServer::do_spawn(const std::string& exe,
                                   const std::string& interface_name,
                                   uint64_t instance_id, uint64_t generation,
                                   bool restore, const Payload& args) {
    TcpListener report = TcpListener::listen(0);

    SpawnSpec spec;
    spec.identity.interface_name = interface_name;
    spec.identity.instance_id = instance_id;
    spec.identity.generation = generation;
    spec.identity.agent_host = config_.advertised_host;
    spec.identity.agent_port = port_;
    spec.identity.data_dir = config_.data_dir;
    spec.identity.log_dir = config_.data_dir / "logs";
    spec.restore = restore;
    spec.args = args;
    spec.ticket = instance_id;
    spec.report_port = report.port();

    auto spec_path =
        config_.data_dir / "spawn" / (std::to_string(instance_id) + ".spec");
    write_spawn_spec(spec_path, spec);

    pid_t pid = ::fork();
    if (pid < 0)
        raise(ErrorCode::SpawnFailed, "fork failed");
    if (pid == 0) {
        ::execl(exe.c_str(), exe.c_str(), "--poa-worker", spec_path.c_str(),
                static_cast<char*>(nullptr));
        std::_Exit(127); // exec failed
    }

    // Wait for the child's construction report, watching for early death.
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::milliseconds(config_.spawn_timeout_ms);
    for (;;) {
        if (wait_readable(report.fd(), 100))
            break;
        int status = 0;
        pid_t done = ::waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            std::filesystem::remove(spec_path);
            raise(ErrorCode::SpawnFailed,
                  interface_name + " worker exited before reporting (status " +
                      std::to_string(status) + ")");
        }
        if (std::chrono::steady_clock::now() > deadline) {
            ::kill(pid, SIGKILL);
            ::waitpid(pid, nullptr, 0);
            std::filesystem::remove(spec_path);
            raise(ErrorCode::SpawnFailed, interface_name + " spawn timed out");
        }
    }

    TcpSocket conn = report.accept();
    SpawnReport rep = recv_spawn_report(conn);
    if (!rep.ok) {
        ::waitpid(pid, nullptr, 0);
        raise(ErrorCode::ConstructorFailed, rep.message);
    }

    {
        std::lock_guard lk(mu_);
        live_[instance_id] = Child{pid, interface_name, rep.port, generation};
    }

    RemoteHandle h;
    h.address.host = config_.advertised_host;
    h.address.port = rep.port;
    h.address.instance_id = instance_id;
    h.interface_name = interface_name;
    h.generation = generation;
    return h;
}

RemoteHandle AgentServer::resolve(const std::string& interface_name,
                                  uint64_t instance_id) {
    {
        std::lock_guard lk(mu_);
        auto it = live_.find(instance_id);
        if (it != live_.end() && it->second.interface_name == interface_name) {
            RemoteHandle h;
            h.address.host = config_.advertised_host;
            h.address.port = it->second.port;
            h.address.instance_id = instance_id;
            h.interface_name = interface_name;
            h.generation = it->second.generation;
            return h;
        }
    }
    auto rec = registry_.load(interface_name, instance_id);
    if (!rec)
        raise(ErrorCode::UnknownAddress,
              interface_name + "/" + std::to_string(instance_id) + " not registered");

    std::string exe;
    {
        std::lock_guard lk(mu_);
        auto it = catalog_.find(interface_name);
        if (it == catalog_.end())
            raise(ErrorCode::UnknownInterface,
                  interface_name + " not in agent catalog");
        exe = it->second;
    }

    uint64_t generation = rec->generation + 1;
    RemoteHandle h =
        do_spawn(exe, interface_name, instance_id, generation, true, rec->state);
    rec->generation = generation;
    registry_.store(*rec);
    return h;
}

bool AgentServer::kill_instance(uint64_t instance_id) {
    pid_t pid = 0;
    {
        std::lock_guard lk(mu_);
        auto it = live_.find(instance_id);
        if (it == live_.end())
            return false;
        pid = it->second.pid;
        live_.erase(it);
    }
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    return true;
}

uint32_t AgentServer::kill_by_interface(const std::string& interface_name) {
    std::vector<uint64_t> ids;
    {
        std::lock_guard lk(mu_);
        for (auto& [id, c] : live_)
            if (c.interface_name == interface_name)
                ids.push_back(id);
    }
    uint32_t killed = 0;
    for (uint64_t id : ids)
        if (kill_instance(id))
            ++killed;
    return killed;
}

std::vector<uint64_t> AgentServer::live_instances(const std::string& interface_name) const {
    std::lock_guard lk(mu_);
    std::vector<uint64_t> out;
    for (const auto& [id, c] : live_)
        if (interface_name.empty() || c.interface_name == interface_name)
            out.push_back(id);
    return out;
}

int64_t AgentServer::instance_pid(uint64_t instance_id) const {
    std::lock_guard lk(mu_);
    auto it = live_.find(instance_id);
    return it == live_.end() ? -1 : static_cast<int64_t>(it->second.pid);
}

void AgentServer::reap_loop() {
    while (!stopping_.load()) {
        int status = 0;
        pid_t pid = ::waitpid(-1, &status, WNOHANG);
        if (pid > 0) {
            std::lock_guard lk(mu_);
            for (auto it = live_.begin(); it != live_.end(); ++it) {
                if (it->second.pid == pid) {
                    live_.erase(it);
                    break;
                }
            }
            continue;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

void AgentServer::load_catalog() {
    auto path = config_.data_dir / "catalog.json";
    std::ifstream in(path);
    if (!in)
        return;
    try {
        json j = json::parse(in);
        std::lock_guard lk(mu_);
        for (auto& [iface, exe] : j.items())
            catalog_[iface] = exe.get<std::string>();
    } catch (const json::exception&) {
        // ignore a broken catalog; registrations will rebuild it
    }
}

void AgentServer::save_catalog() const {
    json j = json::object();
    for (const auto& [iface, exe] : catalog_)
        j[iface] = exe;
    auto path = config_.data_dir / "catalog.json";
    std::ofstream out(path, std::ios::trunc);
    out << j.dump(2) << "\n";
}

// ---- AgentClient -------------------------------------------------------

AgentClient::AgentClient(std::string host, uint16_t port) {
    handle_.address.host = std::move(host);
    handle_.address.port = port;
    handle_.interface_name = "ClusterAgent";
}

RemoteHandle AgentClient::spawn(const std::string& interface_name, Payload ctor_args) {
    return call<RemoteHandle>(agent_descriptor(), handle_, "spawn", interface_name,
                              ctor_args);
}

CompletionToken AgentClient::spawn_detached(const std::string& interface_name,
                                            Payload ctor_args) {
    return call_detached(agent_descriptor(), handle_, "spawn", interface_name,
                         ctor_args);
}

RemoteHandle AgentClient::decode_spawned(const Payload& completion) {
    return decode_result<RemoteHandle>(completion);
}

void AgentClient::register_executable(const std::string& interface_name,
                                      const std::string& exe) {
    call<void>(agent_descriptor(), handle_, "register_executable", interface_name, exe);
}

RemoteHandle AgentClient::resolve(const std::string& interface_name,
                                  uint64_t instance_id) {
    return call<RemoteHandle>(agent_descriptor(), handle_, "resolve", interface_name,
                              instance_id);
}

bool AgentClient::kill_instance(uint64_t instance_id) {
    return call<bool>(agent_descriptor(), handle_, "kill_instance", instance_id);
}

uint32_t AgentClient::kill_by_interface(const std::string& interface_name) {
    return call<uint32_t>(agent_descriptor(), handle_, "kill_by_interface",
                          interface_name);
}

std::vector<uint64_t> AgentClient::live_instances(const std::string& interface_name) {
    return call<std::vector<uint64_t>>(agent_descriptor(), handle_, "live_instances",
                                       interface_name);
}

int64_t AgentClient::instance_pid(uint64_t instance_id) {
    return call<int64_t>(agent_descriptor(), handle_, "instance_pid", instance_id);
}

void AgentClient::ping() { invoke_raw(handle_, cmd::kPing, {}); }

void AgentClient::shutdown() {
    try {
        call<void>(agent_descriptor(), handle_, "shutdown");
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ConnectionLost)
            throw;
    }
    ConnectionCache::instance().evict(handle_.address.host, handle_.address.port);
}

} // namespace poa
