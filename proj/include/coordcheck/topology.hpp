#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "coordcheck/diagnostics.hpp"
#include "coordcheck/event.hpp"

namespace coord {

enum class ResourceKind { Lock, Counter };

struct AgentDecl {
  std::string id;
  std::vector<std::string> tools;  // runtime metadata, never checked

  bool operator==(const AgentDecl&) const = default;
};

struct ResourceDecl {
  std::string id;
  ResourceKind kind = ResourceKind::Lock;
  std::optional<int64_t> initial;  // Counter only

  bool operator==(const ResourceDecl&) const = default;
};

struct ChannelDecl {
  std::string id;
  std::vector<std::string> senders;
  std::vector<std::string> receivers;
  std::vector<std::string> labels;

  bool has_label(const std::string& l) const;
  // Index of l in the declared label list, or -1. This ordinal is the value a
  // receive binds to a local.
  int label_ordinal(const std::string& l) const;

  bool operator==(const ChannelDecl&) const = default;
};

// The coordination envelope: who exists, what they share, and which directed
// labeled FIFO channels connect them. Immutable after construction.
struct Topology {
  std::vector<AgentDecl> agents;
  std::vector<ResourceDecl> resources;
  std::vector<ChannelDecl> channels;

  bool operator==(const Topology&) const = default;

  const AgentDecl* find_agent(const std::string& id) const;
  const ResourceDecl* find_resource(const std::string& id) const;
  const ChannelDecl* find_channel(const std::string& id) const;

  int agent_index(const std::string& id) const;
  int resource_index(const std::string& id) const;
  int channel_index(const std::string& id) const;
};

struct TopologyParseError : std::runtime_error {
  std::string path;  // structural path to the offending element
  TopologyParseError(std::string path_, const std::string& message)
      : std::runtime_error(path_.empty() ? message : path_ + ": " + message),
        path(std::move(path_)) {}
};

// Parses the topology document (closed schema: unknown fields are errors).
Topology parse_topology(const std::string& text);

// Canonical serialization: fixed key order, declaration list order preserved,
// single-element from/to collapsed to a plain string.
std::string serialize_topology(const Topology& t);

// Semantic validation: dangling endpoints, duplicate ids, duplicate directed
// (sender, receiver) pairs across channel cross products, counter/lock initial
// rules. Diagnostics are data; nothing throws.
ValidationReport validate_topology(const Topology& t);

enum class AdmitReason {
  Admitted,
  UnknownActor,
  UnknownTarget,
  DirectionViolation,
  LabelNotDeclared,
  WrongResourceKind,
};

const char* to_string(AdmitReason r);

struct Admission {
  bool admitted = false;
  AdmitReason reason = AdmitReason::Admitted;
  std::string detail;

  explicit operator bool() const { return admitted; }
};

// Pure membership test: is e one of the coordination events this topology
// declares? Knows nothing about runtime state (lock holders, queue contents).
Admission event_admitted(const Topology& t, const CoordinationEvent& e);

}  // namespace coord
