#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coord {

enum class EventKind {
  Send,
  Receive,
  Acquire,
  Release,
  CounterAcquire,
  CounterRelease,
};

const char* to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(const std::string& s);

// A runtime coordination operation as submitted to the monitor or written to
// an event log. `label` is the message label for Send; `expected` is the
// optional head-label filter for Receive (empty = accept any head).
struct CoordinationEvent {
  std::string actor;
  EventKind kind = EventKind::Send;
  std::string target;  // channel id for Send/Receive, resource id otherwise
  std::string label;
  std::vector<std::string> expected;
  uint32_t amount = 1;  // counter ops only, >= 1
  uint64_t sequence = 0;
  uint64_t timestamp = 0;

  static CoordinationEvent send(std::string actor, std::string channel, std::string label) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::Send;
    e.target = std::move(channel);
    e.label = std::move(label);
    return e;
  }
  static CoordinationEvent receive(std::string actor, std::string channel,
                                   std::vector<std::string> expected = {}) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::Receive;
    e.target = std::move(channel);
    e.expected = std::move(expected);
    return e;
  }
  static CoordinationEvent acquire(std::string actor, std::string resource) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::Acquire;
    e.target = std::move(resource);
    return e;
  }
  static CoordinationEvent release(std::string actor, std::string resource) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::Release;
    e.target = std::move(resource);
    return e;
  }
  static CoordinationEvent counter_acquire(std::string actor, std::string resource,
                                           uint32_t amount = 1) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::CounterAcquire;
    e.target = std::move(resource);
    e.amount = amount;
    return e;
  }
  static CoordinationEvent counter_release(std::string actor, std::string resource,
                                           uint32_t amount = 1) {
    CoordinationEvent e;
    e.actor = std::move(actor);
    e.kind = EventKind::CounterRelease;
    e.target = std::move(resource);
    e.amount = amount;
    return e;
  }
};

}  // namespace coord
