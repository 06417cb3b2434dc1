#pragma once

#include "poa/bytes.hpp"
#include "poa/net.hpp"

#include <cstdint>
#include <optional>

namespace poa {

/// Framed byte protocol.
///
/// Request frame:  "POA1" | u32 length | u64 correlation_id | u16 command_code
///                 | u8 completion_mode (0=SYNC, 1=DETACHED) | payload
/// Reply frame:    "POA1" | u32 length | u64 correlation_id
///                 | u8 status (0=ok, 1=exception) | payload
///
/// The length field counts every byte after itself.

inline constexpr uint8_t kWireMagic[4] = {'P', 'O', 'A', '1'};
inline constexpr uint32_t kMaxFrameBytes = 256u << 20;

enum class CompletionMode : uint8_t { Sync = 0, Detached = 1 };
enum class ReplyStatus : uint8_t { Ok = 0, Exception = 1 };

struct CallFrame {
    uint64_t correlation_id = 0;
    uint16_t command_code = 0;
    CompletionMode mode = CompletionMode::Sync;
    Payload payload;
};

struct ReplyFrame {
    uint64_t correlation_id = 0;
    ReplyStatus status = ReplyStatus::Ok;
    Payload payload;
};

Payload encode_call(const CallFrame& f);
Payload encode_reply(const ReplyFrame& f);

/// Decode from a full frame buffer (magic included). Malformed input
/// throws SchemaMismatch.
CallFrame decode_call(std::span<const uint8_t> buf);
ReplyFrame decode_reply(std::span<const uint8_t> buf);

void send_call(TcpSocket& s, const CallFrame& f);
void send_reply(TcpSocket& s, const ReplyFrame& f);

/// Read one frame off the socket. nullopt on clean EOF between frames.
std::optional<CallFrame> recv_call(TcpSocket& s);
std::optional<ReplyFrame> recv_reply(TcpSocket& s);

/// Exception payload layout: u16 error code | string message.
Payload encode_error_payload(ErrorCode code, const std::string& message);
[[noreturn]] void throw_error_payload(const Payload& p);

} // namespace poa
