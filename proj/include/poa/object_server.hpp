#pragma once

#include "poa/group.hpp"
#include "poa/service.hpp"
#include "poa/wire.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace poa {

/// Hosts one object behind the framed protocol.
///
/// Every queued command executes on a single executor thread, one method
/// at a time, in per-connection FIFO order. Network accept and enqueue
/// run concurrently with execution. Barrier control frames and pings are
/// handled directly on the reader threads so they progress while the
/// executor is blocked (e.g. inside a barrier).
///
/// A detached frame is acknowledged as soon as it holds a queue slot;
/// its completion reply follows after execution. The queue is bounded,
/// so acknowledgment is the client's backpressure signal.
class ObjectServer {
public:
    struct Options {
        size_t queue_capacity = 1024;
        /// persist hook: write registry state, return the symbolic address.
        std::function<std::string()> persist;
        /// called after the destructor command drained and replied.
        std::function<void()> on_destroyed;
    };

    ObjectServer(TcpListener listener, ServiceBinding binding, Options options);
    ObjectServer(TcpListener listener, ServiceBinding binding)
        : ObjectServer(std::move(listener), std::move(binding), Options{}) {}
    ~ObjectServer();

    ObjectServer(const ObjectServer&) = delete;
    ObjectServer& operator=(const ObjectServer&) = delete;

    uint16_t port() const { return port_; }
    GroupContext& group() { return group_; }
    ServiceBinding& binding() { return binding_; }

    /// Install the persistence hook after construction (the hook usually
    /// needs the server's own binding). Must happen before clients know
    /// the port, i.e. before the spawn report goes out.
    void set_persist_hook(std::function<std::string()> persist) {
        options_.persist = std::move(persist);
    }

    /// Run the executor until the destructor command or stop(). Call on
    /// the thread that should execute methods (worker main thread).
    void run();

    /// Start the executor on an internal thread (in-process servers).
    void start();

    /// External shutdown without a destructor command.
    void stop();

    bool destroyed() const { return destroyed_.load(); }

private:
    struct Conn {
        TcpSocket socket;
        std::mutex write_mu;
        std::atomic<bool> open{true};

        void reply(const ReplyFrame& f);
    };

    struct Queued {
        CallFrame frame;
        std::shared_ptr<Conn> conn;
    };

    void accept_loop();
    void reader_loop(std::shared_ptr<Conn> conn);
    bool handle_inline(const CallFrame& f, Conn& conn);
    void enqueue(CallFrame f, std::shared_ptr<Conn> conn);
    void executor_loop();
    Payload execute(const CallFrame& f);
    void drain_queue();

    TcpListener listener_;
    uint16_t port_;
    ServiceBinding binding_;
    Options options_;
    GroupContext group_;

    std::mutex queue_mu_;
    std::condition_variable queue_not_full_;
    std::condition_variable queue_not_empty_;
    std::deque<Queued> queue_;
    bool stopping_ = false;

    std::atomic<bool> destroyed_{false};
    std::thread acceptor_;
    std::thread executor_thread_;
    std::mutex conns_mu_;
    std::vector<std::shared_ptr<Conn>> conns_;
    std::vector<std::thread> readers_;
};

} // namespace poa
