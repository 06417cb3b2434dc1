#pragma once

#include <stdexcept>
#include <string>

namespace poa {

enum class ErrorCode : uint16_t {
    None = 0,
    // transport / runtime
    ConnectionLost = 1,
    HostUnreachable = 2,
    UnknownInterface = 3,
    ConstructorFailed = 4,
    RemoteException = 5,
    SchemaMismatch = 6,
    MemberLost = 7,
    UnknownAddress = 8,
    StateCorrupt = 9,
    DuplicateCommandCode = 10,
    UnsupportedSchemaType = 11,
    SpawnFailed = 12,
    ProcessTerminating = 13,
    // pagestore
    IndexOutOfRange = 20,
    SizeMismatch = 21,
    IoFailure = 22,
    // dataplane
    Misaligned = 30,
    ServerLost = 31,
    KeyOutOfRange = 32,
    // fft
    UnsupportedLength = 40,
    // cli
    PortInUse = 50,
    UnknownPattern = 51,
    TooLargeForOracle = 52,
    BadConfig = 53,
};

const char* error_code_name(ErrorCode c);

/// Single error type for the whole runtime. Remote failures carry the
/// original code across the wire so clients can match on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, bool remote = false)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          remote_(remote) {}

    ErrorCode code() const noexcept { return code_; }
    bool remote() const noexcept { return remote_; }

private:
    ErrorCode code_;
    bool remote_;
};

[[noreturn]] inline void raise(ErrorCode code, std::string message) {
    throw Error(code, std::move(message));
}

} // namespace poa
