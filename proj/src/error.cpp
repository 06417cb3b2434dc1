#include "poa/error.hpp"

namespace poa {

const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::None: return "None";
    case ErrorCode::ConnectionLost: return "ConnectionLost";
    case ErrorCode::HostUnreachable: return "HostUnreachable";
    case ErrorCode::UnknownInterface: return "UnknownInterface";
    case ErrorCode::ConstructorFailed: return "ConstructorFailed";
    case ErrorCode::RemoteException: return "RemoteException";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MemberLost: return "MemberLost";
    case ErrorCode::UnknownAddress: return "UnknownAddress";
    case ErrorCode::StateCorrupt: return "StateCorrupt";
    case ErrorCode::DuplicateCommandCode: return "DuplicateCommandCode";
    case ErrorCode::UnsupportedSchemaType: return "UnsupportedSchemaType";
    case ErrorCode::SpawnFailed: return "SpawnFailed";
    case ErrorCode::ProcessTerminating: return "ProcessTerminating";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::ServerLost: return "ServerLost";
    case ErrorCode::KeyOutOfRange: return "KeyOutOfRange";
    case ErrorCode::UnsupportedLength: return "UnsupportedLength";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::UnknownPattern: return "UnknownPattern";
    case ErrorCode::TooLargeForOracle: return "TooLargeForOracle";
    case ErrorCode::BadConfig: return "BadConfig";
    }
    return "UnknownError";
}

} // namespace poa
