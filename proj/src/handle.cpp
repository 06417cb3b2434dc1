#include "poa/handle.hpp"

#include "poa/error.hpp"

#include <charconv>

namespace poa {

namespace {
constexpr std::string_view kScheme = "poa://";
}

std::string SymbolicAddress::format() const {
    return std::string(kScheme) + agent_host + ":" + std::to_string(agent_port) +
           "/" + interface_name + "/" + std::to_string(instance_id);
}

SymbolicAddress SymbolicAddress::parse(const std::string& uri) {
    auto fail = [&]() -> SymbolicAddress {
        raise(ErrorCode::UnknownAddress, "malformed symbolic address: " + uri);
    };

    std::string_view s(uri);
    if (s.substr(0, kScheme.size()) != kScheme)
        return fail();
    s.remove_prefix(kScheme.size());

    size_t slash = s.find('/');
    if (slash == std::string_view::npos)
        return fail();
    std::string_view authority = s.substr(0, slash);
    s.remove_prefix(slash + 1);

    size_t colon = authority.rfind(':');
    if (colon == std::string_view::npos || colon == 0)
        return fail();
    std::string_view host = authority.substr(0, colon);
    std::string_view port_sv = authority.substr(colon + 1);

    slash = s.find('/');
    if (slash == std::string_view::npos)
        return fail();
    std::string_view iface = s.substr(0, slash);
    std::string_view id_sv = s.substr(slash + 1);
    if (iface.empty() || id_sv.empty() || id_sv.find('/') != std::string_view::npos)
        return fail();

    SymbolicAddress a;
    a.agent_host = std::string(host);
    a.interface_name = std::string(iface);

    uint32_t port = 0;
    auto [pp, pec] = std::from_chars(port_sv.begin(), port_sv.end(), port);
    if (pec != std::errc() || pp != port_sv.end() || port > 65535)
        return fail();
    a.agent_port = static_cast<uint16_t>(port);

    auto [ip, iec] = std::from_chars(id_sv.begin(), id_sv.end(), a.instance_id);
    if (iec != std::errc() || ip != id_sv.end())
        return fail();
    return a;
}

} // namespace poa
