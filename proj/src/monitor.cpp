#include "coordcheck/monitor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace coord {

using nlohmann::ordered_json;

const char* to_string(DecisionStatus s) {
  switch (s) {
    case DecisionStatus::Accepted: return "accepted";
    case DecisionStatus::Rejected: return "rejected";
    case DecisionStatus::Blocked: return "blocked";
  }
  return "?";
}

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::UnknownActor: return "unknown-actor";
    case RejectReason::UnknownTarget: return "unknown-target";
    case RejectReason::DirectionViolation: return "direction-violation";
    case RejectReason::LabelNotDeclared: return "label-not-declared";
    case RejectReason::WrongResourceKind: return "wrong-resource-kind";
    case RejectReason::ReleaseByNonHolder: return "release-by-non-holder";
    case RejectReason::CounterOverRelease: return "counter-over-release";
  }
  return "?";
}

Monitor::Monitor(Topology t) : topo_(std::move(t)) {
  ValidationReport report = validate_topology(topo_);
  if (!report.ok()) {
    throw std::invalid_argument("invalid topology:\n" + report.to_string());
  }
  resource_slot_.assign(topo_.resources.size(), -1);
  for (size_t i = 0; i < topo_.resources.size(); ++i) {
    if (topo_.resources[i].kind == ResourceKind::Lock) {
      resource_slot_[i] = static_cast<int>(lock_resource_.size());
      lock_resource_.push_back(static_cast<int>(i));
    } else {
      resource_slot_[i] = static_cast<int>(counter_resource_.size());
      counter_resource_.push_back(static_cast<int>(i));
      counter_initial_.push_back(*topo_.resources[i].initial);
    }
  }
  queues_.assign(topo_.channels.size(), {});
  holders_.assign(lock_resource_.size(), -1);
  counters_ = counter_initial_;
  lock_waiters_.resize(lock_resource_.size());
  counter_waiters_.resize(counter_resource_.size());
  channel_waiters_.resize(topo_.channels.size());
}

std::optional<RejectReason> Monitor::admission_locked(const CoordinationEvent& e,
                                                      std::string* detail) const {
  Admission a = event_admitted(topo_, e);
  if (a.admitted) return std::nullopt;
  *detail = a.detail;
  switch (a.reason) {
    case AdmitReason::UnknownActor: return RejectReason::UnknownActor;
    case AdmitReason::UnknownTarget: return RejectReason::UnknownTarget;
    case AdmitReason::DirectionViolation: return RejectReason::DirectionViolation;
    case AdmitReason::LabelNotDeclared: return RejectReason::LabelNotDeclared;
    case AdmitReason::WrongResourceKind: return RejectReason::WrongResourceKind;
    case AdmitReason::Admitted: break;
  }
  return std::nullopt;
}

// State-dependent rejections for operations that never block: releasing a
// lock one does not hold, and releasing a counter past its capacity.
std::optional<RejectReason> Monitor::discipline_locked(const CoordinationEvent& e,
                                                       std::string* detail) const {
  if (e.kind == EventKind::Release) {
    int slot = resource_slot_[topo_.resource_index(e.target)];
    int actor = topo_.agent_index(e.actor);
    if (holders_[slot] != actor) {
      *detail = "agent '" + e.actor + "' does not hold lock '" + e.target + "'";
      return RejectReason::ReleaseByNonHolder;
    }
  }
  if (e.kind == EventKind::CounterRelease) {
    int slot = resource_slot_[topo_.resource_index(e.target)];
    if (counters_[slot] + e.amount > counter_initial_[slot]) {
      *detail = "releasing " + std::to_string(e.amount) + " would push counter '" + e.target +
                "' past its initial value " + std::to_string(counter_initial_[slot]);
      return RejectReason::CounterOverRelease;
    }
  }
  return std::nullopt;
}

Monitor::Guard Monitor::guard_locked(const CoordinationEvent& e, std::string* why) const {
  switch (e.kind) {
    case EventKind::Send:
    case EventKind::Release:
    case EventKind::CounterRelease:
      return Guard::Open;
    case EventKind::Acquire: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      if (holders_[slot] != -1) {
        *why = "lock '" + e.target + "' is held by '" + topo_.agents[holders_[slot]].id + "'";
        return Guard::Closed;
      }
      return Guard::Open;
    }
    case EventKind::CounterAcquire: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      if (counters_[slot] < e.amount) {
        *why = "counter '" + e.target + "' has " + std::to_string(counters_[slot]) +
               ", needs " + std::to_string(e.amount);
        return Guard::Closed;
      }
      return Guard::Open;
    }
    case EventKind::Receive: {
      int ch = topo_.channel_index(e.target);
      if (queues_[ch].empty()) {
        *why = "channel '" + e.target + "' is empty";
        return Guard::Closed;
      }
      if (!e.expected.empty()) {
        const std::string& head = topo_.channels[ch].labels[queues_[ch].front()];
        if (std::find(e.expected.begin(), e.expected.end(), head) == e.expected.end()) {
          *why = "head of '" + e.target + "' is \"" + head + "\", not in the expected set";
          return Guard::Closed;
        }
      }
      return Guard::Open;
    }
  }
  return Guard::Open;
}

Monitor::Waitable* Monitor::waitable_for_locked(const CoordinationEvent& e) {
  switch (e.kind) {
    case EventKind::Acquire:
      return &lock_waiters_[resource_slot_[topo_.resource_index(e.target)]];
    case EventKind::CounterAcquire:
      return &counter_waiters_[resource_slot_[topo_.resource_index(e.target)]];
    case EventKind::Receive:
      return &channel_waiters_[topo_.channel_index(e.target)];
    default:
      return nullptr;
  }
}

MonitorDecision Monitor::apply_locked(const CoordinationEvent& e) {
  MonitorDecision d;
  d.status = DecisionStatus::Accepted;
  switch (e.kind) {
    case EventKind::Send: {
      int ch = topo_.channel_index(e.target);
      queues_[ch].push_back(
          static_cast<uint16_t>(topo_.channels[ch].label_ordinal(e.label)));
      break;
    }
    case EventKind::Receive: {
      int ch = topo_.channel_index(e.target);
      d.received_label = topo_.channels[ch].labels[queues_[ch].front()];
      queues_[ch].erase(queues_[ch].begin());
      break;
    }
    case EventKind::Acquire: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      holders_[slot] = static_cast<int16_t>(topo_.agent_index(e.actor));
      break;
    }
    case EventKind::Release: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      holders_[slot] = -1;
      break;
    }
    case EventKind::CounterAcquire: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      counters_[slot] -= e.amount;
      break;
    }
    case EventKind::CounterRelease: {
      int slot = resource_slot_[topo_.resource_index(e.target)];
      counters_[slot] += e.amount;
      break;
    }
  }
  d.sequence = next_sequence_++;
  ++stats_.accepted;
  CoordinationEvent logged = e;
  logged.sequence = d.sequence;
  accepted_.push_back(std::move(logged));
  cv_.notify_all();
  return d;
}

MonitorDecision Monitor::decide_locked(const CoordinationEvent& e, bool from_wait) {
  MonitorDecision d;
  std::string detail;
  if (auto reason = admission_locked(e, &detail)) {
    d.status = DecisionStatus::Rejected;
    d.reason = *reason;
    d.detail = detail;
    d.sequence = next_sequence_++;
    ++stats_.rejected_total;
    ++stats_.rejected_by_reason[to_string(*reason)];
    return d;
  }
  if (auto reason = discipline_locked(e, &detail)) {
    d.status = DecisionStatus::Rejected;
    d.reason = *reason;
    d.detail = detail;
    d.sequence = next_sequence_++;
    ++stats_.rejected_total;
    ++stats_.rejected_by_reason[to_string(*reason)];
    return d;
  }
  std::string why;
  Waitable* w = waitable_for_locked(e);
  // No barging: an immediate submit yields to parked waiters on the target.
  if (w != nullptr && !w->waiters.empty()) {
    d.status = DecisionStatus::Blocked;
    d.detail = "waiters are queued ahead on '" + e.target + "'";
    if (!from_wait) ++stats_.blocked_returns;
    return d;
  }
  if (guard_locked(e, &why) == Guard::Closed) {
    d.status = DecisionStatus::Blocked;
    d.detail = why;
    if (!from_wait) ++stats_.blocked_returns;
    return d;
  }
  return apply_locked(e);
}

MonitorDecision Monitor::submit(const CoordinationEvent& e) {
  std::lock_guard<std::mutex> lock(mu_);
  return decide_locked(e, /*from_wait=*/false);
}

MonitorDecision Monitor::submit_wait(const CoordinationEvent& e,
                                     std::chrono::milliseconds timeout) {
  auto started = std::chrono::steady_clock::now();
  std::unique_lock<std::mutex> lock(mu_);

  std::string detail;
  if (auto reason = admission_locked(e, &detail)) {
    MonitorDecision d;
    d.status = DecisionStatus::Rejected;
    d.reason = *reason;
    d.detail = detail;
    d.sequence = next_sequence_++;
    ++stats_.rejected_total;
    ++stats_.rejected_by_reason[to_string(*reason)];
    return d;
  }
  if (auto reason = discipline_locked(e, &detail)) {
    MonitorDecision d;
    d.status = DecisionStatus::Rejected;
    d.reason = *reason;
    d.detail = detail;
    d.sequence = next_sequence_++;
    ++stats_.rejected_total;
    ++stats_.rejected_by_reason[to_string(*reason)];
    return d;
  }

  Waitable* w = waitable_for_locked(e);
  std::string why;
  if (w == nullptr || (w->waiters.empty() && guard_locked(e, &why) == Guard::Open)) {
    return apply_locked(e);
  }

  // Join the target's FIFO; we run only when at the front with an open guard.
  const uint64_t ticket = next_ticket_++;
  w->waiters.push_back(ticket);
  ++stats_.blocked_waits;
  ++current_waiters_;
  stats_.max_concurrent_waiters = std::max(stats_.max_concurrent_waiters, current_waiters_);
  const auto deadline = started + timeout;

  for (;;) {
    why.clear();
    if (w->waiters.front() == ticket && guard_locked(e, &why) == Guard::Open) {
      w->waiters.pop_front();
      --current_waiters_;
      MonitorDecision d = apply_locked(e);
      d.waited = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - started);
      return d;
    }
    if (timeout.count() == 0 || cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      auto it = std::find(w->waiters.begin(), w->waiters.end(), ticket);
      if (it != w->waiters.end()) w->waiters.erase(it);
      --current_waiters_;
      cv_.notify_all();  // the next waiter may now be at the front
      MonitorDecision d;
      d.status = DecisionStatus::Blocked;
      d.detail = why.empty() ? "timed out behind queued waiters on '" + e.target + "'"
                             : "timed out: " + why;
      d.waited = std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now() - started);
      return d;
    }
  }
}

std::vector<uint8_t> Monitor::encode_locked() const {
  std::vector<uint8_t> out;
  auto put16 = [&out](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8));
  };
  for (const auto& q : queues_) {
    put16(static_cast<uint16_t>(q.size()));
    for (uint16_t m : q) put16(m);
  }
  for (int16_t h : holders_) put16(static_cast<uint16_t>(h));
  for (int64_t v : counters_) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
  }
  return out;
}

Fingerprint Monitor::state_digest() const {
  std::lock_guard<std::mutex> lock(mu_);
  return fingerprint_bytes(encode_locked());
}

MonitorSnapshot Monitor::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  MonitorSnapshot snap;
  for (size_t c = 0; c < queues_.size(); ++c) {
    std::vector<std::string> q;
    for (uint16_t m : queues_[c]) q.push_back(topo_.channels[c].labels[m]);
    snap.queues[topo_.channels[c].id] = std::move(q);
  }
  for (size_t l = 0; l < holders_.size(); ++l) {
    snap.holders[topo_.resources[lock_resource_[l]].id] =
        holders_[l] == -1 ? std::nullopt
                          : std::make_optional(topo_.agents[holders_[l]].id);
  }
  for (size_t c = 0; c < counters_.size(); ++c) {
    snap.counters[topo_.resources[counter_resource_[c]].id] = counters_[c];
  }
  snap.stats = stats_;
  return snap;
}

MonitorStats Monitor::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

std::vector<CoordinationEvent> Monitor::accepted_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return accepted_;
}

ReplayReport replay_log(const Topology& t, const std::vector<CoordinationEvent>& log) {
  for (size_t i = 1; i < log.size(); ++i) {
    if (log[i].sequence <= log[i - 1].sequence) {
      throw std::invalid_argument("event log sequence numbers must be strictly increasing (at index " +
                                  std::to_string(i) + ")");
    }
  }
  Monitor m(t);
  ReplayReport report;
  for (size_t i = 0; i < log.size(); ++i) {
    MonitorDecision d = m.submit(log[i]);
    if (d.status == DecisionStatus::Rejected && !report.first_rejection) {
      report.first_rejection = i;
    }
    if (d.status == DecisionStatus::Blocked) {
      // Offline replay cannot wait; the log diverges from here.
      report.first_stall = i;
      report.decisions.push_back(std::move(d));
      break;
    }
    report.decisions.push_back(std::move(d));
  }
  report.final_state = m.snapshot();
  return report;
}

std::string serialize_event_log(const std::vector<CoordinationEvent>& log) {
  std::ostringstream os;
  for (const auto& e : log) {
    ordered_json line;
    line["seq"] = e.sequence;
    line["actor"] = e.actor;
    line["kind"] = to_string(e.kind);
    line["target"] = e.target;
    if (e.kind == EventKind::Send) line["label"] = e.label;
    if (e.kind == EventKind::Receive && !e.expected.empty()) line["expected"] = e.expected;
    if (e.kind == EventKind::CounterAcquire || e.kind == EventKind::CounterRelease) {
      line["amount"] = e.amount;
    }
    line["ts"] = e.timestamp;
    os << line.dump() << "\n";
  }
  return os.str();
}

std::vector<CoordinationEvent> parse_event_log(const std::string& text) {
  std::vector<CoordinationEvent> out;
  std::istringstream is(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
      throw std::invalid_argument("event log line " + std::to_string(lineno) + ": " + err.what());
    }
    CoordinationEvent e;
    e.sequence = j.at("seq").get<uint64_t>();
    e.actor = j.at("actor").get<std::string>();
    auto kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) {
      throw std::invalid_argument("event log line " + std::to_string(lineno) +
                                  ": unknown kind '" + j.at("kind").get<std::string>() + "'");
    }
    e.kind = *kind;
    e.target = j.at("target").get<std::string>();
    if (j.contains("label")) e.label = j.at("label").get<std::string>();
    if (j.contains("expected")) {
      for (const auto& l : j.at("expected")) e.expected.push_back(l.get<std::string>());
    }
    if (j.contains("amount")) e.amount = j.at("amount").get<uint32_t>();
    if (j.contains("ts")) e.timestamp = j.at("ts").get<uint64_t>();
    if ((e.kind == EventKind::CounterAcquire || e.kind == EventKind::CounterRelease) &&
        e.amount < 1) {
      throw std::invalid_argument("event log line " + std::to_string(lineno) +
                                  ": amount must be >= 1");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace coord
