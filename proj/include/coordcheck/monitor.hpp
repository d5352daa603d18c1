#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "coordcheck/digest.hpp"
#include "coordcheck/topology.hpp"

namespace coord {

enum class DecisionStatus { Accepted, Rejected, Blocked };
const char* to_string(DecisionStatus s);

enum class RejectReason {
  UnknownActor,
  UnknownTarget,
  DirectionViolation,
  LabelNotDeclared,
  WrongResourceKind,
  ReleaseByNonHolder,
  CounterOverRelease,
};
const char* to_string(RejectReason r);

struct MonitorDecision {
  DecisionStatus status = DecisionStatus::Accepted;
  std::optional<RejectReason> reason;        // Rejected only
  std::string detail;                        // reason / unblock condition
  std::optional<std::string> received_label; // accepted Receive only
  uint64_t sequence = 0;                     // decision order, Accepted/Rejected
  std::chrono::microseconds waited{0};       // submit_wait only
};

struct MonitorStats {
  uint64_t accepted = 0;
  std::map<std::string, uint64_t> rejected_by_reason;
  uint64_t rejected_total = 0;
  uint64_t blocked_returns = 0;   // non-waiting submits that found a guard closed
  uint64_t blocked_waits = 0;     // submit_wait calls that actually parked
  uint64_t max_concurrent_waiters = 0;
};

// Runtime view of the shared coordination state: queues, holders, counters.
// Label queues and holders are rendered with declared identifiers.
struct MonitorSnapshot {
  std::map<std::string, std::vector<std::string>> queues;
  std::map<std::string, std::optional<std::string>> holders;
  std::map<std::string, int64_t> counters;
  MonitorStats stats;
};

// Online topology-conformance enforcement. Every submitted event is first
// checked against event_admitted; rejected events never change state. Lock
// and counter discipline is enforced structurally: a second holder cannot be
// recorded and a counter can never exceed its initial value or go negative.
// Safe for concurrent submission from many threads.
class Monitor {
 public:
  explicit Monitor(Topology t);

  const Topology& topology() const { return topo_; }

  // Non-blocking: Accepted, Rejected(reason), or Blocked when the operation
  // is admitted but its guard is closed (or FIFO waiters are ahead of it).
  MonitorDecision submit(const CoordinationEvent& e);

  // Parks the caller until the guard opens (FIFO per target) or the timeout
  // elapses. Rejections return immediately.
  MonitorDecision submit_wait(const CoordinationEvent& e, std::chrono::milliseconds timeout);

  MonitorSnapshot snapshot() const;
  Fingerprint state_digest() const;
  MonitorStats stats() const;

  // Accepted events in sequence order, with assigned sequence numbers.
  std::vector<CoordinationEvent> accepted_log() const;

 private:
  struct Waitable {
    std::deque<uint64_t> waiters;  // ticket FIFO
  };

  enum class Guard { Open, Closed };

  MonitorDecision decide_locked(const CoordinationEvent& e, bool from_wait);
  std::optional<RejectReason> admission_locked(const CoordinationEvent& e,
                                               std::string* detail) const;
  std::optional<RejectReason> discipline_locked(const CoordinationEvent& e,
                                                std::string* detail) const;
  Guard guard_locked(const CoordinationEvent& e, std::string* why) const;
  MonitorDecision apply_locked(const CoordinationEvent& e);
  Waitable* waitable_for_locked(const CoordinationEvent& e);
  std::vector<uint8_t> encode_locked() const;

  Topology topo_;
  mutable std::mutex mu_;
  std::condition_variable cv_;

  std::vector<int> lock_resource_;     // lock slot -> resource index
  std::vector<int> counter_resource_;  // counter slot -> resource index
  std::vector<int> resource_slot_;     // resource index -> slot
  std::vector<int64_t> counter_initial_;

  std::vector<std::vector<uint16_t>> queues_;  // per channel, label ordinals
  std::vector<int16_t> holders_;               // per lock, agent index or -1
  std::vector<int64_t> counters_;

  std::vector<Waitable> lock_waiters_;
  std::vector<Waitable> counter_waiters_;
  std::vector<Waitable> channel_waiters_;

  uint64_t next_sequence_ = 0;
  uint64_t next_ticket_ = 0;
  uint64_t current_waiters_ = 0;
  MonitorStats stats_;
  std::vector<CoordinationEvent> accepted_;
};

struct ReplayReport {
  std::vector<MonitorDecision> decisions;  // one per processed log entry
  std::optional<size_t> first_rejection;
  std::optional<size_t> first_stall;       // Blocked during offline replay
  MonitorSnapshot final_state;

  bool clean() const { return !first_rejection && !first_stall; }
};

// Feeds a recorded event log through a fresh monitor. Rejections are recorded
// and replay continues (a rejected event changes nothing); a Blocked decision
// stalls the replay at that index. Throws std::invalid_argument when sequence
// numbers are not strictly increasing.
ReplayReport replay_log(const Topology& t, const std::vector<CoordinationEvent>& log);

// Line-delimited event-log format shared by the simulator and replay.
std::string serialize_event_log(const std::vector<CoordinationEvent>& log);
std::vector<CoordinationEvent> parse_event_log(const std::string& text);

}  // namespace coord
