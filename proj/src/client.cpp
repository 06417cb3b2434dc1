#include "poa/client.hpp"

namespace poa {

Connection::Connection(const std::string& host, uint16_t port)
    : host_(host), port_(port), socket_(TcpSocket::connect(host, port)) {
    receiver_ = std::thread([this] { receiver_loop(); });
}

Connection::~Connection() {
    socket_.shutdown_both();
    if (receiver_.joinable())
        receiver_.join();
}

bool Connection::alive() const {
    std::lock_guard lk(state_mu_);
    return !dead_;
}

uint64_t Connection::send_frame(uint16_t code, CompletionMode mode, Payload args,
                                std::shared_ptr<Pending>& out) {
    auto p = std::make_shared<Pending>();
    p->mode = mode;
    p->completion_future = p->completion.get_future().share();

    uint64_t corr;
    {
        std::lock_guard lk(map_mu_);
        {
            std::lock_guard slk(state_mu_);
            if (dead_)
                raise(ErrorCode::ConnectionLost, "connection to " + endpoint() + " is down");
        }
        corr = next_correlation_++;
        pending_.emplace(corr, p);
    }

    CallFrame f;
    f.correlation_id = corr;
    f.command_code = code;
    f.mode = mode;
    f.payload = std::move(args);
    try {
        std::lock_guard lk(send_mu_);
        send_call(socket_, f);
    } catch (const Error& e) {
        fail_all(e);
        throw;
    }
    out = p;
    return corr;
}

Payload Connection::invoke(uint16_t code, Payload args) {
    std::shared_ptr<Pending> p;
    send_frame(code, CompletionMode::Sync, std::move(args), p);
    return p->completion_future.get();
}

CompletionToken Connection::invoke_detached(uint16_t code, Payload args) {
    std::shared_ptr<Pending> p;
    send_frame(code, CompletionMode::Detached, std::move(args), p);
    p->ack.get_future().get(); // backpressure: wait for enqueue
    return CompletionToken(p->completion_future);
}

void Connection::receiver_loop() {
    try {
        for (;;) {
            auto reply = recv_reply(socket_);
            if (!reply)
                break; // clean EOF
            std::shared_ptr<Pending> p;
            bool is_ack = false;
            {
                std::lock_guard lk(map_mu_);
                auto it = pending_.find(reply->correlation_id);
                if (it == pending_.end())
                    continue; // stale frame, e.g. token dropped -- impossible
                              // today since entries outlive completion
                p = it->second;
                if (p->mode == CompletionMode::Detached && !p->ack_seen &&
                    reply->status == ReplyStatus::Ok) {
                    p->ack_seen = true;
                    is_ack = true;
                } else {
                    pending_.erase(it);
                }
            }
            if (is_ack) {
                p->ack.set_value();
                continue;
            }
            if (reply->status == ReplyStatus::Ok) {
                if (p->mode == CompletionMode::Detached && !p->ack_seen)
                    p->ack.set_value(); // defensive: ok completion implies enqueued
                p->completion.set_value(std::move(reply->payload));
            } else {
                Error err(ErrorCode::RemoteException, "remote error", true);
                try {
                    throw_error_payload(reply->payload);
                } catch (const Error& e) {
                    err = e;
                }
                if (p->mode == CompletionMode::Detached && !p->ack_seen)
                    p->ack.set_exception(std::make_exception_ptr(err));
                p->completion.set_exception(std::make_exception_ptr(err));
            }
        }
    } catch (const Error&) {
        // fall through to fail_all below
    }
    fail_all(Error(ErrorCode::ConnectionLost, "connection to " + endpoint() + " closed"));
}

void Connection::fail_all(const Error& err) {
    std::unordered_map<uint64_t, std::shared_ptr<Pending>> doomed;
    {
        std::lock_guard lk(map_mu_);
        {
            std::lock_guard slk(state_mu_);
            dead_ = true;
        }
        doomed.swap(pending_);
    }
    for (auto& [corr, p] : doomed) {
        auto ep = std::make_exception_ptr(err);
        if (p->mode == CompletionMode::Detached && !p->ack_seen)
            p->ack.set_exception(ep);
        p->completion.set_exception(ep);
    }
}

ConnectionCache& ConnectionCache::instance() {
    static ConnectionCache cache;
    return cache;
}

std::shared_ptr<Connection> ConnectionCache::get(const std::string& host, uint16_t port) {
    std::string key = host + ":" + std::to_string(port);
    std::lock_guard lk(mu_);
    auto it = by_endpoint_.find(key);
    if (it != by_endpoint_.end()) {
        if (it->second->alive())
            return it->second;
        by_endpoint_.erase(it);
    }
    auto conn = std::make_shared<Connection>(host, port);
    by_endpoint_.emplace(std::move(key), conn);
    return conn;
}

void ConnectionCache::evict(const std::string& host, uint16_t port) {
    std::string key = host + ":" + std::to_string(port);
    std::lock_guard lk(mu_);
    by_endpoint_.erase(key);
}

void ConnectionCache::clear() {
    std::lock_guard lk(mu_);
    by_endpoint_.clear();
}

Payload invoke_raw(const RemoteHandle& h, uint16_t code, Payload args) {
    auto conn = ConnectionCache::instance().get(h.address.host, h.address.port);
    try {
        return conn->invoke(code, std::move(args));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConnectionLost)
            ConnectionCache::instance().evict(h.address.host, h.address.port);
        throw;
    }
}

CompletionToken invoke_detached_raw(const RemoteHandle& h, uint16_t code, Payload args) {
    auto conn = ConnectionCache::instance().get(h.address.host, h.address.port);
    try {
        return conn->invoke_detached(code, std::move(args));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConnectionLost)
            ConnectionCache::instance().evict(h.address.host, h.address.port);
        throw;
    }
}

} // namespace poa
