#pragma once

#include "poa/descriptor.hpp"
#include "poa/handle.hpp"
#include "poa/wire.hpp"

#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

namespace poa {

/// Awaitable result of a detached invocation. The call is already in the
/// server's queue when the token exists; await() blocks until the remote
/// method body finished and yields its result (or rethrows its error).
class CompletionToken {
public:
    CompletionToken() = default;
    explicit CompletionToken(std::shared_future<Payload> f) : fut_(std::move(f)) {}

    Payload await() {
        if (!fut_.valid())
            raise(ErrorCode::ConnectionLost, "empty completion token");
        return fut_.get();
    }

    bool valid() const { return fut_.valid(); }

private:
    std::shared_future<Payload> fut_;
};

/// One cached TCP connection to a server process. Thread-safe: frames
/// are serialized by a send lock, replies are routed to waiting callers
/// by correlation id from a dedicated receiver thread.
///
/// A sync call produces one reply frame (the completion). A detached
/// call produces two with the same correlation id: first the enqueue
/// acknowledgment, then the completion.
class Connection {
public:
    Connection(const std::string& host, uint16_t port);
    ~Connection();

    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    /// Blocks until the remote method completed; returns result payload.
    Payload invoke(uint16_t command_code, Payload args);

    /// Blocks only until the frame is accepted into the server's queue.
    CompletionToken invoke_detached(uint16_t command_code, Payload args);

    bool alive() const;
    std::string endpoint() const { return host_ + ":" + std::to_string(port_); }

private:
    struct Pending {
        CompletionMode mode;
        bool ack_seen = false;
        std::promise<void> ack;
        std::promise<Payload> completion;
        std::shared_future<Payload> completion_future;
    };

    uint64_t send_frame(uint16_t code, CompletionMode mode, Payload args,
                        std::shared_ptr<Pending>& out);
    void receiver_loop();
    void fail_all(const Error& err);

    std::string host_;
    uint16_t port_;
    TcpSocket socket_;
    std::mutex send_mu_;
    std::mutex map_mu_;
    std::unordered_map<uint64_t, std::shared_ptr<Pending>> pending_;
    uint64_t next_correlation_ = 1;
    bool dead_ = false;
    mutable std::mutex state_mu_;
    std::thread receiver_;
};

/// Per-process cache of connections, keyed by server endpoint. A handle
/// always reuses the cached connection, so all calls from this process
/// to one server flow through a single FIFO issue stream.
class ConnectionCache {
public:
    static ConnectionCache& instance();

    std::shared_ptr<Connection> get(const std::string& host, uint16_t port);
    /// Drop a dead connection so the next use reconnects.
    void evict(const std::string& host, uint16_t port);
    void clear();

private:
    std::mutex mu_;
    std::unordered_map<std::string, std::shared_ptr<Connection>> by_endpoint_;
};

// ---- invocation entry points used by stubs and the runtime facade ----

Payload invoke_raw(const RemoteHandle& h, uint16_t code, Payload args);
CompletionToken invoke_detached_raw(const RemoteHandle& h, uint16_t code, Payload args);

/// Typed sync call checked against the interface descriptor.
template <typename Ret = void, typename... Args>
Ret call(const InterfaceDescriptor& d, const RemoteHandle& h,
         std::string_view method, const Args&... args) {
    const MethodDesc* m = d.find(method);
    if (!m)
        raise(ErrorCode::SchemaMismatch,
              d.name() + " has no method " + std::string(method));
    if (schema_of<Args...>() != m->params)
        raise(ErrorCode::SchemaMismatch,
              d.name() + "." + m->name + " expects " + type_list_name(m->params));
    Payload out = invoke_raw(h, m->command_code, encode_fields(args...));
    if constexpr (std::is_void_v<Ret>) {
        (void)out;
    } else {
        if (schema_of<Ret>() != m->results)
            raise(ErrorCode::SchemaMismatch, d.name() + "." + m->name + " result");
        Reader r(out);
        Ret v = FieldOf<std::remove_cvref_t<Ret>>::read(r);
        r.expect_end();
        return v;
    }
}

template <typename... Args>
CompletionToken call_detached(const InterfaceDescriptor& d, const RemoteHandle& h,
                              std::string_view method, const Args&... args) {
    const MethodDesc* m = d.find(method);
    if (!m)
        raise(ErrorCode::SchemaMismatch,
              d.name() + " has no method " + std::string(method));
    if (schema_of<Args...>() != m->params)
        raise(ErrorCode::SchemaMismatch,
              d.name() + "." + m->name + " expects " + type_list_name(m->params));
    return invoke_detached_raw(h, m->command_code, encode_fields(args...));
}

/// Decode a completion payload as a typed result.
template <typename Ret>
Ret decode_result(const Payload& p) {
    Reader r(p);
    Ret v = FieldOf<std::remove_cvref_t<Ret>>::read(r);
    r.expect_end();
    return v;
}

} // namespace poa
