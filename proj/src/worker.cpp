#include "poa/worker.hpp"

#include <fstream>
#include <map>

namespace poa {

namespace {

std::map<std::string, LocalInterfaceRegistry::Entry>& local_interfaces() {
    static std::map<std::string, LocalInterfaceRegistry::Entry> m;
    return m;
}

constexpr uint8_t kSpecMagic[4] = {'P', 'O', 'A', 'S'};
constexpr uint8_t kReportMagic[4] = {'P', 'O', 'A', 'W'};

} // namespace

void LocalInterfaceRegistry::add(InterfaceDescriptor descriptor, ServiceFactory factory) {
    std::string name = descriptor.name();
    local_interfaces()[name] = Entry{std::move(descriptor), std::move(factory)};
}

const LocalInterfaceRegistry::Entry* LocalInterfaceRegistry::find(const std::string& n) {
    auto it = local_interfaces().find(n);
    return it == local_interfaces().end() ? nullptr : &it->second;
}

std::vector<std::string> LocalInterfaceRegistry::names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : local_interfaces())
        out.push_back(k);
    return out;
}

void write_spawn_spec(const std::filesystem::path& path, const SpawnSpec& spec) {
    Writer w;
    w.raw(std::span<const uint8_t>(kSpecMagic, 4));
    w.str(spec.identity.interface_name);
    w.u64(spec.identity.instance_id);
    w.u64(spec.identity.generation);
    w.str(spec.identity.agent_host);
    w.u16(spec.identity.agent_port);
    w.str(spec.identity.data_dir.string());
    w.str(spec.identity.log_dir.string());
    w.boolean(spec.restore);
    w.bytes(spec.args);
    w.u64(spec.ticket);
    w.u16(spec.report_port);

    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(ErrorCode::IoFailure, "cannot write spawn spec " + path.string());
    out.write(reinterpret_cast<const char*>(w.data().data()),
              static_cast<std::streamsize>(w.size()));
}

SpawnSpec read_spawn_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(ErrorCode::IoFailure, "cannot read spawn spec " + path.string());
    Payload raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(raw);
    for (auto m : kSpecMagic)
        if (r.u8() != m)
            raise(ErrorCode::SchemaMismatch, "bad spawn spec magic");
    SpawnSpec s;
    s.identity.interface_name = r.str();
    s.identity.instance_id = r.u64();
    s.identity.generation = r.u64();
    s.identity.agent_host = r.str();
    s.identity.agent_port = r.u16();
    s.identity.data_dir = r.str();
    s.identity.log_dir = r.str();
    s.restore = r.boolean();
    s.args = r.bytes();
    s.ticket = r.u64();
    s.report_port = r.u16();
    r.expect_end();
    return s;
}

void send_spawn_report(const std::string& host, uint16_t port, const SpawnReport& rep) {
    TcpSocket s = TcpSocket::connect(host, port);
    Writer body;
    body.u64(rep.ticket);
    body.boolean(rep.ok);
    body.u16(rep.port);
    body.u64(rep.instance_id);
    body.str(rep.message);

    Writer frame;
    frame.raw(std::span<const uint8_t>(kReportMagic, 4));
    frame.u32(static_cast<uint32_t>(body.size()));
    frame.raw(body.data());
    s.send_all(frame.data().data(), frame.size());
}

SpawnReport recv_spawn_report(TcpSocket& s) {
    uint8_t head[8];
    if (!s.recv_all(head, sizeof(head)))
        raise(ErrorCode::SpawnFailed, "empty spawn report");
    for (int i = 0; i < 4; ++i)
        if (head[i] != kReportMagic[i])
            raise(ErrorCode::SpawnFailed, "bad spawn report magic");
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len |= static_cast<uint32_t>(head[4 + i]) << (8 * i);
    if (len > (1u << 20))
        raise(ErrorCode::SpawnFailed, "oversized spawn report");
    Payload body(len);
    if (!s.recv_all(body.data(), len))
        raise(ErrorCode::SpawnFailed, "truncated spawn report");
    Reader r(body);
    SpawnReport rep;
    rep.ticket = r.u64();
    rep.ok = r.boolean();
    rep.port = r.u16();
    rep.instance_id = r.u64();
    rep.message = r.str();
    r.expect_end();
    return rep;
}

int worker_main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s --poa-worker <specfile>\n", argv[0]);
        return 2;
    }
    SpawnSpec spec;
    try {
        spec = read_spawn_spec(argv[2]);
        std::filesystem::remove(argv[2]);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "worker: %s\n", e.what());
        return 2;
    }

    auto report_failure = [&](const std::string& message) {
        try {
            SpawnReport rep;
            rep.ticket = spec.ticket;
            rep.ok = false;
            rep.instance_id = spec.identity.instance_id;
            rep.message = message;
            send_spawn_report(spec.identity.agent_host, spec.report_port, rep);
        } catch (const std::exception&) {
            // agent's poll timeout covers a lost report
        }
    };

    const auto* entry = LocalInterfaceRegistry::find(spec.identity.interface_name);
    if (entry == nullptr) {
        report_failure("executable does not host interface " +
                       spec.identity.interface_name);
        return 1;
    }

    WorkerEnv env(spec.identity);
    ServiceBinding binding;
    try {
        Reader args(spec.args);
        binding = entry->factory(env, args, spec.restore);
    } catch (const std::exception& e) {
        report_failure(e.what());
        return 1;
    }

    try {
        TcpListener listener = TcpListener::listen(0);
        ObjectServer::Options opt;
        ObjectServer server(std::move(listener), std::move(binding), std::move(opt));
        env.attach(&server);
        server.set_persist_hook([&env, &server]() -> std::string {
            if (!server.binding().has_save_state())
                raise(ErrorCode::RemoteException,
                      env.identity().interface_name + " has no state serialization");
            RegistryRecord rec;
            rec.interface_name = env.identity().interface_name;
            rec.instance_id = env.identity().instance_id;
            rec.generation = env.identity().generation;
            rec.state = server.binding().save_state();
            env.registry().store(rec);
            return env.symbolic().format();
        });

        SpawnReport rep;
        rep.ticket = spec.ticket;
        rep.ok = true;
        rep.port = server.port();
        rep.instance_id = spec.identity.instance_id;
        send_spawn_report(spec.identity.agent_host, spec.report_port, rep);

        server.run();
        return 0;
    } catch (const std::exception& e) {
        report_failure(e.what());
        return 1;
    }
}

} // namespace poa
