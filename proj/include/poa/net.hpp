#pragma once

#include "poa/bytes.hpp"
#include "poa/error.hpp"

#include <cstdint>
#include <string>
#include <utility>

namespace poa {

/// Thin RAII wrapper over a connected TCP socket. Blocking I/O;
/// full-buffer send/recv loops. Read/write failures throw ConnectionLost.
class TcpSocket {
public:
    TcpSocket() = default;
    explicit TcpSocket(int fd) : fd_(fd) {}
    TcpSocket(TcpSocket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    TcpSocket& operator=(TcpSocket&& o) noexcept;
    ~TcpSocket();

    TcpSocket(const TcpSocket&) = delete;
    TcpSocket& operator=(const TcpSocket&) = delete;

    /// Connect to host:port. Throws HostUnreachable on resolve/connect failure.
    static TcpSocket connect(const std::string& host, uint16_t port);

    void send_all(const uint8_t* data, size_t n);
    /// Receive exactly n bytes. Returns false on clean EOF at a message
    /// boundary (n bytes pending == 0 read so far); throws mid-message.
    bool recv_all(uint8_t* data, size_t n);

    void shutdown_both() noexcept;
    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

private:
    int fd_ = -1;
};

/// Wait until fd is readable. Returns false on timeout.
bool wait_readable(int fd, int timeout_ms);

class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& o) noexcept
        : fd_(std::exchange(o.fd_, -1)), port_(o.port_) {}
    TcpListener& operator=(TcpListener&& o) noexcept;
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    /// Bind and listen on port (0 = ephemeral). Throws PortInUse when the
    /// address is taken, IoFailure otherwise.
    static TcpListener listen(uint16_t port);

    /// Accept one connection. Returns an invalid socket once close()d.
    TcpSocket accept();

    void close() noexcept;
    uint16_t port() const { return port_; }
    bool valid() const { return fd_ >= 0; }
    int fd() const { return fd_; }

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

} // namespace poa
