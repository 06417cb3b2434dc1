#pragma once

#include "poa/handle.hpp"

#include <chrono>
#include <condition_variable>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

namespace poa {

/// A member's own view of its process group. The member list is a deep
/// copy: every entry is a directly usable handle owned by this process.
struct ProcessGroupView {
    uint32_t my_id = 0;
    uint32_t group_size = 1;
    std::vector<RemoteHandle> members;
};

/// Barrier bookkeeping for one hosted object. Coordinator scheme: member
/// 0 collects group_size-1 notifications for a barrier epoch, then sends
/// releases. Notify/release frames are handled on the network threads,
/// never queued, so they make progress while the executor is blocked
/// inside the barrier itself. Epoch tags keep consecutive barrier
/// instances from interleaving.
class GroupContext {
public:
    void set_view(ProcessGroupView view);
    std::optional<ProcessGroupView> view() const;
    bool has_view() const;

    /// Block until every group member entered the same barrier instance.
    /// Throws MemberLost when a peer dies or the deadline passes.
    void barrier();

    // Control-plane entry points (called from connection readers).
    void on_notify(uint64_t epoch, uint32_t from_id);
    void on_release(uint64_t epoch);

    void set_timeout(std::chrono::milliseconds t) { timeout_ = t; }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::optional<ProcessGroupView> view_;
    std::map<uint64_t, uint32_t> notify_counts_; // coordinator side
    std::set<uint64_t> released_;                // member side
    uint64_t local_epoch_ = 0;
    std::chrono::milliseconds timeout_{120000};
};

} // namespace poa
