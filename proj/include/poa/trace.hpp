#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>

namespace poa {

/// Timestamp in microseconds since the Unix epoch; comparable across
/// processes on one host, used to order the merged trace.
uint64_t trace_now_us();

/// Per-process instrumentation sink. Two files per process under the log
/// directory: `<name>.log` carries the human-readable trace lines in the
/// exact report format, `<name>.jsonl` carries one machine-readable
/// event per line for merging and analysis. Default-constructed sinks
/// are disabled and drop everything.
class TraceSink {
public:
    TraceSink() = default;
    TraceSink(const std::filesystem::path& dir, const std::string& name);

    bool enabled() const { return enabled_; }

    /// Append one trace line (no timestamp prefix; the journal carries it).
    void line(const std::string& text);

    /// Append one journal event; `fields` must be a JSON object literal
    /// without the surrounding braces' ts field (added here).
    void event(const std::string& json_object);

    const std::filesystem::path& log_path() const { return log_path_; }
    const std::filesystem::path& journal_path() const { return journal_path_; }

private:
    bool enabled_ = false;
    std::filesystem::path log_path_;
    std::filesystem::path journal_path_;
    std::ofstream log_;
    std::ofstream journal_;
    std::mutex mu_;
};

/// Render sizes/rates the way the performance report does: MB = 2^20
/// bytes, and sizes that are whole GB (2^30) print as "N GB".
std::string format_size(uint64_t bytes);
double rate_mb_per_sec(uint64_t bytes, double seconds);

/// %g-style number rendering used throughout the trace lines.
std::string format_g(double v);

} // namespace poa
