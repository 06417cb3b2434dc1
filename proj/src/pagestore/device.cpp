#include "poa/pagestore/device.hpp"

#include "poa/worker.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

namespace poa::pagestore {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Payload DeviceStats::encode() const {
    Writer w;
    w.u64(reads);
    w.u64(writes);
    w.u64(cache_hits);
    w.u64(bytes_read);
    w.u64(bytes_written);
    w.f64(seconds_busy);
    return w.take();
}

DeviceStats DeviceStats::decode(const Payload& p) {
    Reader r(p);
    DeviceStats s;
    s.reads = r.u64();
    s.writes = r.u64();
    s.cache_hits = r.u64();
    s.bytes_read = r.u64();
    s.bytes_written = r.u64();
    s.seconds_busy = r.f64();
    r.expect_end();
    return s;
}

PageDevice::PageDevice(DeviceConfig config, TraceSink* trace)
    : config_(std::move(config)), trace_(trace) {
    if (config_.number_of_pages == 0 || config_.page_size == 0)
        raise(ErrorCode::SizeMismatch, "device needs pages and a page size");
    if (config_.direct_io && config_.page_size % 4096 != 0)
        raise(ErrorCode::IoFailure,
              "direct I/O requires a page size that is a multiple of 4096");

    int flags = O_RDWR | O_CREAT;
#ifdef O_DIRECT
    if (config_.direct_io)
        flags |= O_DIRECT;
#else
    if (config_.direct_io)
        raise(ErrorCode::IoFailure, "direct I/O unsupported on this platform");
#endif
    fd_ = ::open(config_.filename.c_str(), flags, 0644);
    if (fd_ < 0)
        raise(ErrorCode::IoFailure,
              "open " + config_.filename + ": " + std::strerror(errno));

    uint64_t want = config_.number_of_pages * config_.page_size;
    struct stat st{};
    if (::fstat(fd_, &st) != 0) {
        ::close(fd_);
        raise(ErrorCode::IoFailure, "fstat " + config_.filename);
    }
    // pre-extend with zeros; keep existing contents on reopen
    if (static_cast<uint64_t>(st.st_size) != want) {
        if (::ftruncate(fd_, static_cast<off_t>(want)) != 0) {
            ::close(fd_);
            raise(ErrorCode::IoFailure, "ftruncate " + config_.filename);
        }
    }
}

PageDevice::~PageDevice() {
    if (fd_ >= 0)
        ::close(fd_);
}

void PageDevice::check_index(uint64_t page_index) const {
    if (page_index >= config_.number_of_pages)
        raise(ErrorCode::IndexOutOfRange,
              "page " + std::to_string(page_index) + " of " +
                  std::to_string(config_.number_of_pages));
}

void PageDevice::raw_write(const uint8_t* data, uint64_t page_index) {
    off_t off = static_cast<off_t>(page_index * config_.page_size);
    size_t n = config_.page_size;
    size_t done = 0;
    while (done < n) {
        ssize_t w = ::pwrite(fd_, data + done, n - done, off + static_cast<off_t>(done));
        if (w < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::IoFailure, "pwrite: " + std::string(std::strerror(errno)));
        }
        done += static_cast<size_t>(w);
    }
    if (!config_.direct_io && ::fdatasync(fd_) != 0)
        raise(ErrorCode::IoFailure, "fdatasync: " + std::string(std::strerror(errno)));
}

void PageDevice::raw_read(uint8_t* data, uint64_t page_index) {
    off_t off = static_cast<off_t>(page_index * config_.page_size);
    size_t n = config_.page_size;
    size_t done = 0;
    while (done < n) {
        ssize_t r = ::pread(fd_, data + done, n - done, off + static_cast<off_t>(done));
        if (r < 0) {
            if (errno == EINTR)
                continue;
            raise(ErrorCode::IoFailure, "pread: " + std::string(std::strerror(errno)));
        }
        if (r == 0)
            raise(ErrorCode::IoFailure, "pread hit EOF inside the page file");
        done += static_cast<size_t>(r);
    }
}

void PageDevice::journal(const char* op, uint64_t page_index, bool cache_hit, double sec) {
    if (!trace_ || !trace_->enabled())
        return;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "\"dev\":%u,\"seq\":%llu,\"op\":\"%s\",\"index\":%llu,"
                  "\"cache_hit\":%s,\"sec\":%.9f",
                  config_.trace_id, static_cast<unsigned long long>(exec_seq_++), op,
                  static_cast<unsigned long long>(page_index),
                  cache_hit ? "true" : "false", sec);
    trace_->event(buf);
}

void PageDevice::trace_write_line(uint64_t pages, uint64_t bytes, double sec) {
    if (!trace_ || !trace_->enabled())
        return;
    std::string text = std::to_string(config_.trace_id) + ": ArrayDevice::write: " +
                       std::to_string(pages) + (pages == 1 ? " page, " : " pages, ") +
                       format_g(static_cast<double>(bytes) / (1 << 20)) + " MB, " +
                       format_g(sec) + " sec, " +
                       format_g(rate_mb_per_sec(bytes, sec)) + " MB/sec";
    trace_->line(text);
}

void PageDevice::write(const uint8_t* data, size_t n, uint64_t page_index) {
    check_index(page_index);
    if (n != config_.page_size)
        raise(ErrorCode::SizeMismatch,
              "page is " + std::to_string(n) + " bytes, device expects " +
                  std::to_string(config_.page_size));
    auto t0 = std::chrono::steady_clock::now();
    if (config_.direct_io) {
        // direct I/O needs an aligned source buffer
        Page aligned(config_.page_size);
        aligned.from_bytes(data, n);
        raw_write(aligned.data(), page_index);
    } else {
        raw_write(data, page_index);
    }
    double sec = seconds_since(t0);
    stats_.writes += 1;
    stats_.bytes_written += n;
    stats_.seconds_busy += sec;
    journal("write", page_index, false, sec);
    trace_write_line(1, n, sec);
}

void PageDevice::read(uint8_t* data, size_t n, uint64_t page_index) {
    check_index(page_index);
    if (n != config_.page_size)
        raise(ErrorCode::SizeMismatch,
              "buffer is " + std::to_string(n) + " bytes, device expects " +
                  std::to_string(config_.page_size));
    auto t0 = std::chrono::steady_clock::now();
    if (config_.direct_io) {
        Page aligned(config_.page_size);
        raw_read(aligned.data(), page_index);
        std::memcpy(data, aligned.data(), n);
    } else {
        raw_read(data, page_index);
    }
    double sec = seconds_since(t0);
    stats_.reads += 1;
    stats_.bytes_read += n;
    stats_.seconds_busy += sec;
    journal("read", page_index, false, sec);
}

Payload PageDevice::write_payload(const Payload& page, uint64_t page_index) {
    write(page.data(), page.size(), page_index);
    return {};
}

Payload PageDevice::read_payload(uint64_t page_index) {
    Payload out(config_.page_size);
    read(out.data(), out.size(), page_index);
    return out;
}

ArrayPageDevice::ArrayPageDevice(DeviceConfig config, TraceSink* trace)
    : PageDevice(
          [&config] {
              if (config.n1 <= 0 || config.n2 <= 0 || config.n3 <= 0)
                  raise(ErrorCode::SizeMismatch, "array device needs page extents");
              uint64_t sz = 2ull * sizeof(double) * config.n1 * config.n2 * config.n3;
              if (config.page_size == 0)
                  config.page_size = sz;
              else if (config.page_size != sz)
                  raise(ErrorCode::SizeMismatch,
                        "page size does not match 16*n1*n2*n3");
              return std::move(config);
          }(),
          trace) {}

Payload ArrayPageDevice::read_transpose13_payload(uint64_t page_index) {
    Payload raw = PageDevice::read_payload(page_index);
    ArrayPage p(config_.n1, config_.n2, config_.n3);
    p.page().from_bytes(raw.data(), raw.size());
    p.transpose13();
    return p.page().to_payload();
}

Payload ArrayPageDevice::read_transpose23_payload(uint64_t page_index) {
    Payload raw = PageDevice::read_payload(page_index);
    ArrayPage p(config_.n1, config_.n2, config_.n3);
    p.page().from_bytes(raw.data(), raw.size());
    p.transpose23();
    return p.page().to_payload();
}

void ArrayPageDevice::write_transpose13_payload(const Payload& page, uint64_t page_index) {
    // incoming page is (n3,n2,n1)-shaped; transpose restores disk orientation
    ArrayPage p(config_.n3, config_.n2, config_.n1);
    p.page().from_bytes(page.data(), page.size());
    p.transpose13();
    PageDevice::write_payload(p.page().to_payload(), page_index);
}

void ArrayPageDevice::write_transpose23_payload(const Payload& page, uint64_t page_index) {
    ArrayPage p(config_.n1, config_.n3, config_.n2);
    p.page().from_bytes(page.data(), page.size());
    p.transpose23();
    PageDevice::write_payload(p.page().to_payload(), page_index);
}

ArrayDevice::ArrayDevice(DeviceConfig config, TraceSink* trace)
    : ArrayPageDevice(std::move(config), trace) {}

void ArrayDevice::invalidate(uint64_t page_index) {
    auto it = cache_.find(page_index);
    if (it == cache_.end())
        return;
    cache_.erase(it);
    for (auto q = cache_order_.begin(); q != cache_order_.end(); ++q) {
        if (*q == page_index) {
            cache_order_.erase(q);
            break;
        }
    }
}

void ArrayDevice::read_into_cache(uint64_t page_index) {
    check_index(page_index);
    if (config_.cache_pages == 0)
        return; // uncached device: prefetch is a no-op
    if (cache_.contains(page_index))
        return; // already resident and clean
    auto t0 = std::chrono::steady_clock::now();
    Payload page(config_.page_size);
    if (config_.direct_io) {
        Page aligned(config_.page_size);
        raw_read(aligned.data(), page_index);
        std::memcpy(page.data(), aligned.data(), page.size());
    } else {
        raw_read(page.data(), page_index);
    }
    double sec = seconds_since(t0);

    while (cache_.size() >= config_.cache_pages) {
        uint64_t oldest = cache_order_.front();
        cache_order_.pop_front();
        cache_.erase(oldest);
    }
    cache_order_.push_back(page_index);
    cache_.emplace(page_index, std::move(page));

    stats_.reads += 1;
    stats_.bytes_read += config_.page_size;
    stats_.seconds_busy += sec;
    journal("read_into_cache", page_index, false, sec);
    prefetch_pages_ += 1;
    prefetch_bytes_ += config_.page_size;
    prefetch_seconds_ += sec;
}

void ArrayDevice::flush_prefetch_trace() {
    if (prefetch_pages_ == 0)
        return;
    if (trace_ && trace_->enabled()) {
        std::string text =
            std::to_string(config_.trace_id) + ": ArrayDevice::ReadIntoCache: " +
            std::to_string(prefetch_pages_) + " pages, " +
            format_g(static_cast<double>(prefetch_bytes_) / (1 << 20)) + " MB, " +
            format_g(prefetch_seconds_) + " sec, " +
            format_g(rate_mb_per_sec(prefetch_bytes_, prefetch_seconds_)) + " MB/sec";
        trace_->line(text);
    }
    prefetch_pages_ = 0;
    prefetch_bytes_ = 0;
    prefetch_seconds_ = 0.0;
}

Payload ArrayDevice::cached_read(uint64_t page_index, bool* hit) {
    check_index(page_index);
    flush_prefetch_trace();
    auto it = cache_.find(page_index);
    if (it != cache_.end()) {
        *hit = true;
        stats_.cache_hits += 1;
        journal("read", page_index, true, 0.0);
        return it->second;
    }
    *hit = false;
    return ArrayPageDevice::read_payload(page_index);
}

Payload ArrayDevice::read_payload(uint64_t page_index) {
    bool hit = false;
    return cached_read(page_index, &hit);
}

Payload ArrayDevice::read_transpose13_payload(uint64_t page_index) {
    bool hit = false;
    Payload raw = cached_read(page_index, &hit);
    ArrayPage p(config_.n1, config_.n2, config_.n3);
    p.page().from_bytes(raw.data(), raw.size());
    p.transpose13();
    return p.page().to_payload();
}

Payload ArrayDevice::read_transpose23_payload(uint64_t page_index) {
    bool hit = false;
    Payload raw = cached_read(page_index, &hit);
    ArrayPage p(config_.n1, config_.n2, config_.n3);
    p.page().from_bytes(raw.data(), raw.size());
    p.transpose23();
    return p.page().to_payload();
}

Payload ArrayDevice::write_payload(const Payload& page, uint64_t page_index) {
    flush_prefetch_trace();
    invalidate(page_index);
    return ArrayPageDevice::write_payload(page, page_index);
}

void ArrayDevice::write_transpose13_payload(const Payload& page, uint64_t page_index) {
    flush_prefetch_trace();
    invalidate(page_index);
    ArrayPageDevice::write_transpose13_payload(page, page_index);
}

void ArrayDevice::write_transpose23_payload(const Payload& page, uint64_t page_index) {
    flush_prefetch_trace();
    invalidate(page_index);
    ArrayPageDevice::write_transpose23_payload(page, page_index);
}

// ---- descriptors and worker factories ----------------------------------

const InterfaceDescriptor& page_device_descriptor() {
    static const InterfaceDescriptor d = [] {
        InterfaceDescriptor d("PageDevice");
        d.constructor<std::string, uint64_t, uint64_t, bool, uint32_t>();
        d.method<void, Payload, uint64_t>("write");
        d.method<Payload, uint64_t>("read");
        d.method<Payload>("stats");
        d.method<void>("reset_stats");
        return d;
    }();
    return d;
}

namespace {

template <typename D>
void add_array_methods(D& d) {
    d.template method<void, Payload, uint64_t>("write");
    d.template method<Payload, uint64_t>("read");
    d.template method<void, Payload, uint64_t>("write_transpose13");
    d.template method<Payload, uint64_t>("read_transpose13");
    d.template method<void, Payload, uint64_t>("write_transpose23");
    d.template method<Payload, uint64_t>("read_transpose23");
    d.template method<Payload>("stats");
    d.template method<void>("reset_stats");
}

} // namespace

const InterfaceDescriptor& array_page_device_descriptor() {
    static const InterfaceDescriptor d = [] {
        InterfaceDescriptor d("ArrayPageDevice");
        d.constructor<std::string, uint64_t, uint32_t, uint32_t, uint32_t, bool,
                      uint32_t>();
        add_array_methods(d);
        return d;
    }();
    return d;
}

const InterfaceDescriptor& array_device_descriptor() {
    static const InterfaceDescriptor d = [] {
        InterfaceDescriptor d("ArrayDevice");
        d.constructor<std::string, uint64_t, uint32_t, uint32_t, uint32_t, uint64_t,
                      bool, uint32_t>();
        add_array_methods(d);
        d.method<void, uint64_t>("read_into_cache");
        return d;
    }();
    return d;
}

Payload encode_device_ctor_args(const DeviceConfig& c, bool array_device) {
    Writer w;
    w.str(c.filename);
    w.u64(c.number_of_pages);
    if (c.n1 > 0) {
        w.u32(static_cast<uint32_t>(c.n1));
        w.u32(static_cast<uint32_t>(c.n2));
        w.u32(static_cast<uint32_t>(c.n3));
        if (array_device)
            w.u64(c.cache_pages);
    } else {
        w.u64(c.page_size);
    }
    w.boolean(c.direct_io);
    w.u32(c.trace_id);
    return w.take();
}

DeviceConfig decode_device_ctor_args(Reader& r, bool array_device) {
    DeviceConfig c;
    c.filename = r.str();
    c.number_of_pages = r.u64();
    c.n1 = static_cast<int>(r.u32());
    c.n2 = static_cast<int>(r.u32());
    c.n3 = static_cast<int>(r.u32());
    if (array_device)
        c.cache_pages = r.u64();
    c.direct_io = r.boolean();
    c.trace_id = r.u32();
    r.expect_end();
    return c;
}

namespace {

std::string resolve_device_path(const WorkerEnv& env, const std::string& filename) {
    std::filesystem::path p(filename);
    if (p.is_absolute())
        return filename;
    return (env.identity().data_dir / p).string();
}

Payload encode_state(const DeviceConfig& c, bool array_device) {
    return encode_device_ctor_args(c, array_device);
}

template <typename Dev>
void bind_array_device_methods(ServiceBinding& b, const std::shared_ptr<Dev>& dev) {
    b.bind("write", [dev](Payload page, uint64_t idx) { dev->write_payload(page, idx); });
    b.bind("read", [dev](uint64_t idx) { return dev->read_payload(idx); });
    b.bind("write_transpose13",
           [dev](Payload page, uint64_t idx) { dev->write_transpose13_payload(page, idx); });
    b.bind("read_transpose13",
           [dev](uint64_t idx) { return dev->read_transpose13_payload(idx); });
    b.bind("write_transpose23",
           [dev](Payload page, uint64_t idx) { dev->write_transpose23_payload(page, idx); });
    b.bind("read_transpose23",
           [dev](uint64_t idx) { return dev->read_transpose23_payload(idx); });
    b.bind("stats", [dev]() { return dev->stats().encode(); });
    b.bind("reset_stats", [dev]() { dev->reset_stats(); });
}

ServiceBinding make_page_device(WorkerEnv& env, Reader& args, bool) {
    // fresh construction and restore share the config layout
    DeviceConfig c;
    c.filename = args.str();
    c.number_of_pages = args.u64();
    c.page_size = args.u64();
    c.direct_io = args.boolean();
    c.trace_id = args.u32();
    args.expect_end();
    c.filename = resolve_device_path(env, c.filename);

    auto trace = std::make_shared<TraceSink>(env.identity().log_dir,
                                             "dev-" + std::to_string(c.trace_id));
    auto dev = std::make_shared<PageDevice>(c, trace.get());

    ServiceBinding b(page_device_descriptor());
    b.bind("write", [dev](Payload page, uint64_t idx) { dev->write_payload(page, idx); });
    b.bind("read", [dev](uint64_t idx) { return dev->read_payload(idx); });
    b.bind("stats", [dev]() { return dev->stats().encode(); });
    b.bind("reset_stats", [dev]() { dev->reset_stats(); });
    b.bind_save_state([dev]() {
        Writer w;
        const auto& c = dev->config();
        w.str(c.filename);
        w.u64(c.number_of_pages);
        w.u64(c.page_size);
        w.boolean(c.direct_io);
        w.u32(c.trace_id);
        return w.take();
    });
    b.own(std::make_shared<std::pair<decltype(dev), decltype(trace)>>(dev, trace));
    return b;
}

ServiceBinding make_array_page_device(WorkerEnv& env, Reader& args, bool) {
    DeviceConfig c = decode_device_ctor_args(args, false);
    c.filename = resolve_device_path(env, c.filename);
    auto trace = std::make_shared<TraceSink>(env.identity().log_dir,
                                             "dev-" + std::to_string(c.trace_id));
    auto dev = std::make_shared<ArrayPageDevice>(c, trace.get());

    ServiceBinding b(array_page_device_descriptor());
    bind_array_device_methods(b, dev);
    b.bind_save_state([dev]() { return encode_state(dev->config(), false); });
    b.own(std::make_shared<std::pair<decltype(dev), decltype(trace)>>(dev, trace));
    return b;
}

ServiceBinding make_array_device(WorkerEnv& env, Reader& args, bool) {
    DeviceConfig c = decode_device_ctor_args(args, true);
    c.filename = resolve_device_path(env, c.filename);
    auto trace = std::make_shared<TraceSink>(env.identity().log_dir,
                                             "dev-" + std::to_string(c.trace_id));
    auto dev = std::make_shared<ArrayDevice>(c, trace.get());

    ServiceBinding b(array_device_descriptor());
    bind_array_device_methods(b, dev);
    b.bind("read_into_cache", [dev](uint64_t idx) { dev->read_into_cache(idx); });
    b.bind_save_state([dev]() { return encode_state(dev->config(), true); });
    b.bind_shutdown([dev]() { dev->flush_prefetch_trace(); });
    b.own(std::make_shared<std::pair<decltype(dev), decltype(trace)>>(dev, trace));
    return b;
}

} // namespace

void register_device_interfaces() {
    LocalInterfaceRegistry::add(page_device_descriptor(), make_page_device);
    LocalInterfaceRegistry::add(array_page_device_descriptor(), make_array_page_device);
    LocalInterfaceRegistry::add(array_device_descriptor(), make_array_device);
}

} // namespace poa::pagestore
