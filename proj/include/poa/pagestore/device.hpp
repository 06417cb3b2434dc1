#pragma once

#include "poa/descriptor.hpp"
#include "poa/pagestore/page.hpp"
#include "poa/trace.hpp"

#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>

namespace poa::pagestore {

struct DeviceConfig {
    std::string filename;
    uint64_t number_of_pages = 0;
    uint64_t page_size = 0; // derived from extents for array devices
    int n1 = 0, n2 = 0, n3 = 0;
    uint64_t cache_pages = 0; // Nc; 0 = no cache
    bool direct_io = false;
    uint32_t trace_id = 0; // server id used in trace lines
};

struct DeviceStats {
    uint64_t reads = 0;  // blocking disk reads
    uint64_t writes = 0; // disk writes
    uint64_t cache_hits = 0;
    uint64_t bytes_read = 0;
    uint64_t bytes_written = 0;
    double seconds_busy = 0.0;

    Payload encode() const;
    static DeviceStats decode(const Payload& p);
};

/// File-backed page store: a page file is the raw concatenation of pages
/// (the offset arithmetic is the format). The file is created and
/// zero-extended up front, so reads of never-written pages return zeros;
/// an existing file of the right size is reused untouched. Writes reach
/// the disk before the call returns.
class PageDevice {
public:
    PageDevice(DeviceConfig config, TraceSink* trace = nullptr);
    ~PageDevice();

    PageDevice(const PageDevice&) = delete;
    PageDevice& operator=(const PageDevice&) = delete;

    void write(const uint8_t* data, size_t n, uint64_t page_index);
    void read(uint8_t* data, size_t n, uint64_t page_index);

    Payload write_payload(const Payload& page, uint64_t page_index);
    Payload read_payload(uint64_t page_index);

    const DeviceConfig& config() const { return config_; }
    DeviceStats stats() const { return stats_; }
    void reset_stats() { stats_ = DeviceStats{}; }

protected:
    void check_index(uint64_t page_index) const;
    void raw_write(const uint8_t* data, uint64_t page_index);
    void raw_read(uint8_t* data, uint64_t page_index);
    void journal(const char* op, uint64_t page_index, bool cache_hit, double sec);
    void trace_write_line(uint64_t pages, uint64_t bytes, double sec);

    DeviceConfig config_;
    TraceSink* trace_ = nullptr;
    DeviceStats stats_;
    uint64_t exec_seq_ = 0;

private:
    int fd_ = -1;
};

/// Page device specialized to n1 x n2 x n3 complex-double array pages,
/// with in-page transposes executed next to the data. On-disk pages are
/// always stored in (n1,n2,n3) orientation; the transposed reads return
/// (n3,n2,n1)- or (n1,n3,n2)-shaped payloads and the transposed writes
/// accept them.
class ArrayPageDevice : public PageDevice {
public:
    ArrayPageDevice(DeviceConfig config, TraceSink* trace = nullptr);

    Payload read_transpose13_payload(uint64_t page_index);
    Payload read_transpose23_payload(uint64_t page_index);
    void write_transpose13_payload(const Payload& page, uint64_t page_index);
    void write_transpose23_payload(const Payload& page, uint64_t page_index);
};

/// ArrayPageDevice with a read cache of Nc pages, FIFO-evicted at exact
/// capacity. The cache is read-only: writes invalidate a cached copy of
/// the same index and are never cached themselves.
class ArrayDevice : public ArrayPageDevice {
public:
    ArrayDevice(DeviceConfig config, TraceSink* trace = nullptr);

    void read_into_cache(uint64_t page_index);
    Payload read_payload(uint64_t page_index); // cache-aware
    Payload read_transpose13_payload(uint64_t page_index);
    Payload read_transpose23_payload(uint64_t page_index);
    Payload write_payload(const Payload& page, uint64_t page_index);
    void write_transpose13_payload(const Payload& page, uint64_t page_index);
    void write_transpose23_payload(const Payload& page, uint64_t page_index);

    size_t cached_pages() const { return cache_.size(); }
    /// Flush the aggregated prefetch trace line, if one is pending.
    void flush_prefetch_trace();

private:
    Payload cached_read(uint64_t page_index, bool* hit);
    void invalidate(uint64_t page_index);

    std::deque<uint64_t> cache_order_;
    std::unordered_map<uint64_t, Payload> cache_;

    // consecutive ReadIntoCache executions aggregate into one trace line
    uint64_t prefetch_pages_ = 0;
    uint64_t prefetch_bytes_ = 0;
    double prefetch_seconds_ = 0.0;
};

// ---- interface descriptors + worker registration ----------------------

const InterfaceDescriptor& page_device_descriptor();
const InterfaceDescriptor& array_page_device_descriptor();
const InterfaceDescriptor& array_device_descriptor();

/// Register the three device interfaces with this executable's local
/// interface registry so spawned workers can host them.
void register_device_interfaces();

Payload encode_device_ctor_args(const DeviceConfig& c, bool array_device);
DeviceConfig decode_device_ctor_args(Reader& r, bool array_device);

} // namespace poa::pagestore
