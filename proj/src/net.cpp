#include "poa/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace poa {

namespace {

std::string errno_text() { return std::strerror(errno); }

void set_common_options(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

} // namespace

TcpSocket& TcpSocket::operator=(TcpSocket&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
}

TcpSocket::~TcpSocket() {
    if (fd_ >= 0)
        ::close(fd_);
}

TcpSocket TcpSocket::connect(const std::string& host, uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0)
        raise(ErrorCode::HostUnreachable,
              host + ":" + service + " (" + gai_strerror(rc) + ")");

    int fd = -1;
    int last_errno = 0;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
            break;
        last_errno = errno;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        raise(ErrorCode::HostUnreachable,
              host + ":" + service + " (" + std::strerror(last_errno) + ")");
    set_common_options(fd);
    return TcpSocket(fd);
}

void TcpSocket::send_all(const uint8_t* data, size_t n) {
    size_t off = 0;
    while (off < n) {
        ssize_t w = ::send(fd_, data + off, n - off, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::ConnectionLost, "send: " + errno_text());
        }
        off += static_cast<size_t>(w);
    }
}

bool TcpSocket::recv_all(uint8_t* data, size_t n) {
    size_t off = 0;
    while (off < n) {
        ssize_t r = ::recv(fd_, data + off, n - off, 0);
        if (r < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::ConnectionLost, "recv: " + errno_text());
        }
        if (r == 0) {
            if (off == 0)
                return false;
            raise(ErrorCode::ConnectionLost, "peer closed mid-frame");
        }
        off += static_cast<size_t>(r);
    }
    return true;
}

void TcpSocket::shutdown_both() noexcept {
    if (fd_ >= 0)
        ::shutdown(fd_, SHUT_RDWR);
}

bool wait_readable(int fd, int timeout_ms) {
    pollfd p{};
    p.fd = fd;
    p.events = POLLIN;
    for (;;) {
        int rc = ::poll(&p, 1, timeout_ms);
        if (rc < 0 && errno == EINTR)
            continue;
        return rc > 0 && (p.revents & POLLIN);
    }
}

TcpListener& TcpListener::operator=(TcpListener&& o) noexcept {
    if (this != &o) {
        close();
        fd_ = std::exchange(o.fd_, -1);
        port_ = o.port_;
    }
    return *this;
}

TcpListener::~TcpListener() { close(); }

TcpListener TcpListener::listen(uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        raise(ErrorCode::IoFailure, "socket: " + errno_text());
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int e = errno;
        ::close(fd);
        if (e == EADDRINUSE)
            raise(ErrorCode::PortInUse, "port " + std::to_string(port));
        raise(ErrorCode::IoFailure, "bind: " + std::string(std::strerror(e)));
    }
    if (::listen(fd, 128) != 0) {
        int e = errno;
        ::close(fd);
        raise(ErrorCode::IoFailure, "listen: " + std::string(std::strerror(e)));
    }

    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);

    TcpListener l;
    l.fd_ = fd;
    l.port_ = ntohs(addr.sin_port);
    return l;
}

TcpSocket TcpListener::accept() {
    for (;;) {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            set_common_options(fd);
            return TcpSocket(fd);
        }
        if (errno == EINTR)
            continue;
        return TcpSocket(); // listener closed
    }
}

void TcpListener::close() noexcept {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

} // namespace poa
