#include "poa/group.hpp"

#include "poa/client.hpp"

namespace poa {

void GroupContext::set_view(ProcessGroupView view) {
    std::lock_guard lk(mu_);
    view_ = std::move(view);
}

std::optional<ProcessGroupView> GroupContext::view() const {
    std::lock_guard lk(mu_);
    return view_;
}

bool GroupContext::has_view() const {
    std::lock_guard lk(mu_);
    return view_.has_value();
}

void GroupContext::on_notify(uint64_t epoch, uint32_t from_id) {
    (void)from_id;
    {
        std::lock_guard lk(mu_);
        notify_counts_[epoch] += 1;
    }
    cv_.notify_all();
}

void GroupContext::on_release(uint64_t epoch) {
    {
        std::lock_guard lk(mu_);
        released_.insert(epoch);
    }
    cv_.notify_all();
}

void GroupContext::barrier() {
    ProcessGroupView view;
    uint64_t epoch;
    {
        std::lock_guard lk(mu_);
        if (!view_)
            raise(ErrorCode::MemberLost, "barrier without a process group");
        view = *view_;
        epoch = ++local_epoch_;
    }
    if (view.group_size <= 1)
        return;

    auto deadline = std::chrono::steady_clock::now() + timeout_;

    if (view.my_id == 0) {
        // collect notifications from everyone else
        {
            std::unique_lock lk(mu_);
            bool ok = cv_.wait_until(lk, deadline, [&] {
                auto it = notify_counts_.find(epoch);
                return it != notify_counts_.end() && it->second >= view.group_size - 1;
            });
            if (!ok)
                raise(ErrorCode::MemberLost,
                      "barrier " + std::to_string(epoch) + " timed out collecting entries");
            notify_counts_.erase(epoch);
        }
        for (uint32_t i = 1; i < view.group_size; ++i) {
            try {
                invoke_raw(view.members[i], cmd::kBarrierRelease, encode_fields(epoch));
            } catch (const Error&) {
                raise(ErrorCode::MemberLost,
                      "member " + std::to_string(i) + " unreachable at barrier release");
            }
        }
    } else {
        try {
            invoke_raw(view.members[0], cmd::kBarrierNotify,
                       encode_fields(epoch, view.my_id));
        } catch (const Error&) {
            raise(ErrorCode::MemberLost, "coordinator unreachable at barrier entry");
        }
        std::unique_lock lk(mu_);
        bool ok = cv_.wait_until(lk, deadline, [&] { return released_.contains(epoch); });
        if (!ok)
            raise(ErrorCode::MemberLost,
                  "barrier " + std::to_string(epoch) + " timed out awaiting release");
        released_.erase(epoch);
    }
}

} // namespace poa
