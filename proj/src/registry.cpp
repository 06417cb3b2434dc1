#include "poa/registry.hpp"

#include "poa/error.hpp"

#include <zlib.h>

#include <fstream>

namespace poa {

namespace {
constexpr uint8_t kRegistryMagic[4] = {'P', 'O', 'A', 'R'};

uint32_t checksum(std::span<const uint8_t> body) {
    return static_cast<uint32_t>(
        ::crc32(0L, body.data(), static_cast<uInt>(body.size())));
}
} // namespace

std::filesystem::path Registry::record_path(const std::string& interface_name,
                                            uint64_t instance_id) const {
    return root_ / "registry" / interface_name / std::to_string(instance_id);
}

void Registry::store(const RegistryRecord& rec) const {
    Writer body;
    body.str(rec.interface_name);
    body.u64(rec.instance_id);
    body.u64(rec.generation);
    body.bytes(rec.state);

    Writer file;
    file.raw(std::span<const uint8_t>(kRegistryMagic, 4));
    file.bytes(body.data());
    file.u32(checksum(body.data()));

    auto path = record_path(rec.interface_name, rec.instance_id);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            raise(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(file.data().data()),
                  static_cast<std::streamsize>(file.size()));
        if (!out)
            raise(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::optional<RegistryRecord> Registry::load(const std::string& interface_name,
                                             uint64_t instance_id) const {
    auto path = record_path(interface_name, instance_id);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    Payload raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    try {
        Reader r(raw);
        for (auto m : kRegistryMagic)
            if (r.u8() != m)
                raise(ErrorCode::StateCorrupt, "bad registry magic");
        Payload body = r.bytes();
        uint32_t crc = r.u32();
        r.expect_end();
        if (crc != checksum(body))
            raise(ErrorCode::StateCorrupt, "checksum mismatch in " + path.string());

        Reader br(body);
        RegistryRecord rec;
        rec.interface_name = br.str();
        rec.instance_id = br.u64();
        rec.generation = br.u64();
        rec.state = br.bytes();
        br.expect_end();
        if (rec.interface_name != interface_name || rec.instance_id != instance_id)
            raise(ErrorCode::StateCorrupt, "registry record identity mismatch");
        return rec;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StateCorrupt)
            throw;
        raise(ErrorCode::StateCorrupt, "unreadable registry record " + path.string());
    }
}

bool Registry::exists(const std::string& interface_name, uint64_t instance_id) const {
    return std::filesystem::exists(record_path(interface_name, instance_id));
}

void Registry::remove(const std::string& interface_name, uint64_t instance_id) const {
    std::error_code ec;
    std::filesystem::remove(record_path(interface_name, instance_id), ec);
}

} // namespace poa
