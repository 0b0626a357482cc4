#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace surro {

// Event kinds of the call-center model. Payload meaning depends on the kind.
enum class EventKind {
    Arrival,              // payload = contact group
    ServiceCompletion,    // payload = expert id
    Abandonment,          // payload = customer id
    BackofficeCompletion, // payload = expert id
    EpochBoundary,        // payload unused
};

struct Event {
    double time = 0.0;       // minutes
    std::uint64_t seq = 0;   // insertion counter, breaks time ties FIFO
    EventKind kind = EventKind::EpochBoundary;
    std::int64_t payload = 0;
};

// Minimal future-event list: binary heap keyed on (time, seq), lazy deletion.
// Cancelled events stay in the heap flagged void and are skipped on pop.
class EventCalendar {
public:
    double clock() const { return clock_; }
    std::size_t pending() const { return live_; }

    // Returns a handle usable with cancel_handle.
    std::size_t schedule(double time, EventKind kind, std::int64_t payload = 0) {
        if (time < clock_)
            throw std::invalid_argument("EventCalendar: cannot schedule in the past");
        const std::uint64_t seq = next_seq_++;
        records_.push_back({Event{time, seq, kind, payload}, false});
        heap_.push(HeapEntry{time, seq, records_.size() - 1});
        ++live_;
        return records_.size() - 1;
    }

    std::optional<Event> pop_next() {
        while (!heap_.empty()) {
            const HeapEntry top = heap_.top();
            heap_.pop();
            Record& rec = records_[top.index];
            if (rec.cancelled) continue;
            rec.cancelled = true;  // consumed
            --live_;
            clock_ = rec.event.time;
            return rec.event;
        }
        return std::nullopt;
    }

    std::optional<Event> peek_next() {
        while (!heap_.empty()) {
            const HeapEntry top = heap_.top();
            if (!records_[top.index].cancelled) return records_[top.index].event;
            heap_.pop();
        }
        return std::nullopt;
    }

    bool cancel_handle(std::size_t handle) {
        if (handle >= records_.size() || records_[handle].cancelled) return false;
        records_[handle].cancelled = true;
        --live_;
        return true;
    }

    // Void every pending event matching the predicate; returns the count.
    std::size_t cancel(const std::function<bool(const Event&)>& pred) {
        std::size_t n = 0;
        for (auto& rec : records_) {
            if (!rec.cancelled && pred(rec.event)) {
                rec.cancelled = true;
                ++n;
            }
        }
        live_ -= n;
        return n;
    }

private:
    struct HeapEntry {
        double time;
        std::uint64_t seq;
        std::size_t index;
        bool operator>(const HeapEntry& o) const {
            if (time != o.time) return time > o.time;
            return seq > o.seq;
        }
    };
    struct Record {
        Event event;
        bool cancelled;
    };

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
    std::vector<Record> records_;
    std::uint64_t next_seq_ = 0;
    std::size_t live_ = 0;
    double clock_ = 0.0;
};

}  // namespace surro
