#include "poa/wire.hpp"

#include <cstring>

namespace poa {

namespace {

Payload recv_frame_body(TcpSocket& s, bool& eof) {
    uint8_t head[8];
    eof = false;
    if (!s.recv_all(head, sizeof(head))) {
        eof = true;
        return {};
    }
    if (std::memcmp(head, kWireMagic, 4) != 0)
        raise(ErrorCode::SchemaMismatch, "bad frame magic");
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i)
        len |= static_cast<uint32_t>(head[4 + i]) << (8 * i);
    if (len > kMaxFrameBytes)
        raise(ErrorCode::SchemaMismatch, "frame too large");
    Payload body(len);
    if (len > 0 && !s.recv_all(body.data(), len))
        raise(ErrorCode::ConnectionLost, "peer closed mid-frame");
    return body;
}

void put_header(Writer& w, size_t body_len) {
    w.raw(std::span<const uint8_t>(kWireMagic, 4));
    w.u32(static_cast<uint32_t>(body_len));
}

} // namespace

Payload encode_call(const CallFrame& f) {
    size_t body = 8 + 2 + 1 + f.payload.size();
    Writer w(4 + 4 + body);
    put_header(w, body);
    w.u64(f.correlation_id);
    w.u16(f.command_code);
    w.u8(static_cast<uint8_t>(f.mode));
    w.raw(f.payload);
    return w.take();
}

Payload encode_reply(const ReplyFrame& f) {
    size_t body = 8 + 1 + f.payload.size();
    Writer w(4 + 4 + body);
    put_header(w, body);
    w.u64(f.correlation_id);
    w.u8(static_cast<uint8_t>(f.status));
    w.raw(f.payload);
    return w.take();
}

CallFrame decode_call(std::span<const uint8_t> buf) {
    Reader r(buf);
    uint8_t magic[4];
    for (auto& m : magic)
        m = r.u8();
    if (std::memcmp(magic, kWireMagic, 4) != 0)
        raise(ErrorCode::SchemaMismatch, "bad frame magic");
    uint32_t len = r.u32();
    if (len != r.remaining())
        raise(ErrorCode::SchemaMismatch, "frame length mismatch");
    CallFrame f;
    f.correlation_id = r.u64();
    f.command_code = r.u16();
    uint8_t mode = r.u8();
    if (mode > 1)
        raise(ErrorCode::SchemaMismatch, "bad completion mode");
    f.mode = static_cast<CompletionMode>(mode);
    f.payload = r.rest();
    return f;
}

ReplyFrame decode_reply(std::span<const uint8_t> buf) {
    Reader r(buf);
    uint8_t magic[4];
    for (auto& m : magic)
        m = r.u8();
    if (std::memcmp(magic, kWireMagic, 4) != 0)
        raise(ErrorCode::SchemaMismatch, "bad frame magic");
    uint32_t len = r.u32();
    if (len != r.remaining())
        raise(ErrorCode::SchemaMismatch, "frame length mismatch");
    ReplyFrame f;
    f.correlation_id = r.u64();
    uint8_t status = r.u8();
    if (status > 1)
        raise(ErrorCode::SchemaMismatch, "bad reply status");
    f.status = static_cast<ReplyStatus>(status);
    f.payload = r.rest();
    return f;
}

void send_call(TcpSocket& s, const CallFrame& f) {
    Payload buf = encode_call(f);
    s.send_all(buf.data(), buf.size());
}

void send_reply(TcpSocket& s, const ReplyFrame& f) {
    Payload buf = encode_reply(f);
    s.send_all(buf.data(), buf.size());
}

std::optional<CallFrame> recv_call(TcpSocket& s) {
    bool eof = false;
    Payload body = recv_frame_body(s, eof);
    if (eof)
        return std::nullopt;
    Reader r(body);
    CallFrame f;
    f.correlation_id = r.u64();
    f.command_code = r.u16();
    uint8_t mode = r.u8();
    if (mode > 1)
        raise(ErrorCode::SchemaMismatch, "bad completion mode");
    f.mode = static_cast<CompletionMode>(mode);
    f.payload = r.rest();
    return f;
}

std::optional<ReplyFrame> recv_reply(TcpSocket& s) {
    bool eof = false;
    Payload body = recv_frame_body(s, eof);
    if (eof)
        return std::nullopt;
    Reader r(body);
    ReplyFrame f;
    f.correlation_id = r.u64();
    uint8_t status = r.u8();
    if (status > 1)
        raise(ErrorCode::SchemaMismatch, "bad reply status");
    f.status = static_cast<ReplyStatus>(status);
    f.payload = r.rest();
    return f;
}

Payload encode_error_payload(ErrorCode code, const std::string& message) {
    Writer w;
    w.u16(static_cast<uint16_t>(code));
    w.str(message);
    return w.take();
}

void throw_error_payload(const Payload& p) {
    ErrorCode code = ErrorCode::RemoteException;
    std::string message = "remote error";
    try {
        Reader r(p);
        code = static_cast<ErrorCode>(r.u16());
        message = r.str();
    } catch (const Error&) {
        // keep defaults for unparseable error payloads
    }
    throw Error(code, message, /*remote=*/true);
}

} // namespace poa
