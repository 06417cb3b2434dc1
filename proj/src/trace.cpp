#include "poa/trace.hpp"

#include <chrono>
#include <cstdio>

namespace poa {

uint64_t trace_now_us() {
    using namespace std::chrono;
    return static_cast<uint64_t>(
        duration_cast<microseconds>(system_clock::now().time_since_epoch()).count());
}

TraceSink::TraceSink(const std::filesystem::path& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    log_path_ = dir / (name + ".log");
    journal_path_ = dir / (name + ".jsonl");
    log_.open(log_path_, std::ios::app);
    journal_.open(journal_path_, std::ios::app);
    enabled_ = log_.is_open() && journal_.is_open();
}

void TraceSink::line(const std::string& text) {
    if (!enabled_)
        return;
    std::lock_guard lk(mu_);
    log_ << text << "\n";
    log_.flush();
}

void TraceSink::event(const std::string& json_object) {
    if (!enabled_)
        return;
    std::lock_guard lk(mu_);
    journal_ << "{\"ts\":" << trace_now_us() << "," << json_object << "}\n";
    journal_.flush();
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string format_size(uint64_t bytes) {
    constexpr uint64_t kGiB = 1ull << 30;
    if (bytes > 0 && bytes % kGiB == 0)
        return std::to_string(bytes / kGiB) + " GB";
    return format_g(static_cast<double>(bytes) / (1ull << 20)) + " MB";
}

double rate_mb_per_sec(uint64_t bytes, double seconds) {
    if (seconds <= 0)
        return 0.0;
    return static_cast<double>(bytes) / (1ull << 20) / seconds;
}

} // namespace poa
