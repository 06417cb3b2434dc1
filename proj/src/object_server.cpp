#include "poa/object_server.hpp"

namespace poa {

void ObjectServer::Conn::reply(const ReplyFrame& f) {
    if (!open.load())
        return;
    try {
        std::lock_guard lk(write_mu);
        send_reply(socket, f);
    } catch (const Error&) {
        open.store(false);
    }
}

ObjectServer::ObjectServer(TcpListener listener, ServiceBinding binding, Options options)
    : listener_(std::move(listener)),
      port_(listener_.port()),
      binding_(std::move(binding)),
      options_(std::move(options)) {
    acceptor_ = std::thread([this] { accept_loop(); });
}

ObjectServer::~ObjectServer() {
    stop();
    if (executor_thread_.joinable())
        executor_thread_.join();
    if (acceptor_.joinable())
        acceptor_.join();
    for (auto& r : readers_)
        if (r.joinable())
            r.join();
}

void ObjectServer::accept_loop() {
    for (;;) {
        TcpSocket s = listener_.accept();
        if (!s.valid())
            return; // listener closed
        auto conn = std::make_shared<Conn>();
        conn->socket = std::move(s);
        {
            std::lock_guard lk(conns_mu_);
            conns_.push_back(conn);
            readers_.emplace_back([this, conn] { reader_loop(conn); });
        }
    }
}

void ObjectServer::reader_loop(std::shared_ptr<Conn> conn) {
    try {
        for (;;) {
            auto frame = recv_call(conn->socket);
            if (!frame)
                break;
            if (handle_inline(*frame, *conn))
                continue;
            enqueue(std::move(*frame), conn);
        }
    } catch (const Error&) {
        // connection-level failure: drop the connection, keep serving others
    }
    conn->open.store(false);
}

bool ObjectServer::handle_inline(const CallFrame& f, Conn& conn) {
    switch (f.command_code) {
    case cmd::kBarrierNotify: {
        try {
            Reader r(f.payload);
            uint64_t epoch = r.u64();
            uint32_t from = r.u32();
            r.expect_end();
            group_.on_notify(epoch, from);
            conn.reply({f.correlation_id, ReplyStatus::Ok, {}});
        } catch (const Error& e) {
            conn.reply({f.correlation_id, ReplyStatus::Exception,
                        encode_error_payload(e.code(), e.what())});
        }
        return true;
    }
    case cmd::kBarrierRelease: {
        try {
            Reader r(f.payload);
            uint64_t epoch = r.u64();
            r.expect_end();
            group_.on_release(epoch);
            conn.reply({f.correlation_id, ReplyStatus::Ok, {}});
        } catch (const Error& e) {
            conn.reply({f.correlation_id, ReplyStatus::Exception,
                        encode_error_payload(e.code(), e.what())});
        }
        return true;
    }
    case cmd::kPing:
        conn.reply({f.correlation_id, ReplyStatus::Ok, {}});
        return true;
    default:
        return false;
    }
}

void ObjectServer::enqueue(CallFrame f, std::shared_ptr<Conn> conn) {
    std::unique_lock lk(queue_mu_);
    queue_not_full_.wait(lk, [&] { return queue_.size() < options_.queue_capacity || stopping_; });
    if (stopping_) {
        lk.unlock();
        conn->reply({f.correlation_id, ReplyStatus::Exception,
                     encode_error_payload(ErrorCode::ProcessTerminating, "server stopping")});
        return;
    }
    // Acknowledge the detached frame before it becomes visible to the
    // executor; the completion reply must never precede the ack.
    if (f.mode == CompletionMode::Detached)
        conn->reply({f.correlation_id, ReplyStatus::Ok, {}});
    queue_.push_back(Queued{std::move(f), std::move(conn)});
    lk.unlock();
    queue_not_empty_.notify_one();
}

void ObjectServer::run() { executor_loop(); }

void ObjectServer::start() {
    executor_thread_ = std::thread([this] { executor_loop(); });
}

void ObjectServer::executor_loop() {
    for (;;) {
        Queued item;
        {
            std::unique_lock lk(queue_mu_);
            queue_not_empty_.wait(lk, [&] { return !queue_.empty() || stopping_; });
            if (queue_.empty() && stopping_)
                return;
            item = std::move(queue_.front());
            queue_.pop_front();
        }
        queue_not_full_.notify_one();

        const CallFrame& f = item.frame;
        if (f.command_code == cmd::kDestructor) {
            try {
                binding_.destroy_object();
                item.conn->reply({f.correlation_id, ReplyStatus::Ok, {}});
            } catch (const Error& e) {
                item.conn->reply({f.correlation_id, ReplyStatus::Exception,
                                  encode_error_payload(e.code(), e.what())});
            }
            destroyed_.store(true);
            drain_queue();
            stop();
            if (options_.on_destroyed)
                options_.on_destroyed();
            return;
        }

        ReplyFrame reply;
        reply.correlation_id = f.correlation_id;
        try {
            reply.payload = execute(f);
            reply.status = ReplyStatus::Ok;
        } catch (const Error& e) {
            reply.status = ReplyStatus::Exception;
            reply.payload = encode_error_payload(e.code(), e.what());
        } catch (const std::exception& e) {
            reply.status = ReplyStatus::Exception;
            reply.payload = encode_error_payload(ErrorCode::RemoteException, e.what());
        }
        item.conn->reply(reply);
    }
}

Payload ObjectServer::execute(const CallFrame& f) {
    switch (f.command_code) {
    case cmd::kSetProcessGroup: {
        Reader r(f.payload);
        ProcessGroupView view;
        view.my_id = r.u32();
        view.group_size = r.u32();
        view.members = FieldOf<std::vector<RemoteHandle>>::read(r);
        r.expect_end();
        if (view.members.size() != view.group_size || view.my_id >= view.group_size)
            raise(ErrorCode::SchemaMismatch, "inconsistent process group view");
        group_.set_view(std::move(view));
        return {};
    }
    case cmd::kMemberBarrier:
        Reader(f.payload).expect_end();
        group_.barrier();
        return {};
    case cmd::kGroupInfo: {
        Reader(f.payload).expect_end();
        auto view = group_.view();
        if (!view)
            raise(ErrorCode::SchemaMismatch, "process group not set");
        Writer w;
        w.u32(view->my_id);
        w.u32(view->group_size);
        FieldOf<std::vector<RemoteHandle>>::write(w, view->members);
        return w.take();
    }
    case cmd::kPersist: {
        Reader(f.payload).expect_end();
        if (!options_.persist)
            raise(ErrorCode::RemoteException, "object does not support persistence");
        return encode_fields(options_.persist());
    }
    default:
        return binding_.dispatch(f.command_code, f.payload);
    }
}

void ObjectServer::drain_queue() {
    std::deque<Queued> rest;
    {
        std::lock_guard lk(queue_mu_);
        rest.swap(queue_);
    }
    for (auto& item : rest)
        item.conn->reply({item.frame.correlation_id, ReplyStatus::Exception,
                          encode_error_payload(ErrorCode::ProcessTerminating,
                                               "object destroyed")});
}

void ObjectServer::stop() {
    {
        std::lock_guard lk(queue_mu_);
        if (stopping_)
            return;
        stopping_ = true;
    }
    queue_not_empty_.notify_all();
    queue_not_full_.notify_all();
    listener_.close();
    std::lock_guard lk(conns_mu_);
    for (auto& c : conns_) {
        c->open.store(false);
        c->socket.shutdown_both();
    }
}

} // namespace poa
