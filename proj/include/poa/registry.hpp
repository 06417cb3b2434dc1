#pragma once

#include "poa/bytes.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace poa {

/// One persistent instance as stored on disk. The record lives at
/// <data_dir>/registry/<InterfaceName>/<instance_id> and carries a CRC32
/// over the record body; a mismatch surfaces as StateCorrupt.
struct RegistryRecord {
    std::string interface_name;
    uint64_t instance_id = 0;
    uint64_t generation = 1;
    Payload state;
};

class Registry {
public:
    explicit Registry(std::filesystem::path data_dir)
        : root_(std::move(data_dir)) {}

    std::filesystem::path record_path(const std::string& interface_name,
                                      uint64_t instance_id) const;

    /// Atomic write (temp file + rename).
    void store(const RegistryRecord& rec) const;

    /// nullopt when no record exists; StateCorrupt on checksum mismatch.
    std::optional<RegistryRecord> load(const std::string& interface_name,
                                       uint64_t instance_id) const;

    bool exists(const std::string& interface_name, uint64_t instance_id) const;
    void remove(const std::string& interface_name, uint64_t instance_id) const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
};

} // namespace poa
