#include "coordcheck/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace coord {

using nlohmann::ordered_json;

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  if (diagnostics.empty()) {
    os << "ok: no findings\n";
    return os.str();
  }
  for (const auto& d : diagnostics) {
    os << (d.severity == Severity::Error ? "error" : "advisory") << " at " << d.path << ": "
       << d.message << "\n";
  }
  return os.str();
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Send: return "send";
    case EventKind::Receive: return "receive";
    case EventKind::Acquire: return "acquire";
    case EventKind::Release: return "release";
    case EventKind::CounterAcquire: return "ctr_acquire";
    case EventKind::CounterRelease: return "ctr_release";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_string(const std::string& s) {
  if (s == "send") return EventKind::Send;
  if (s == "receive") return EventKind::Receive;
  if (s == "acquire") return EventKind::Acquire;
  if (s == "release") return EventKind::Release;
  if (s == "ctr_acquire") return EventKind::CounterAcquire;
  if (s == "ctr_release") return EventKind::CounterRelease;
  return std::nullopt;
}

const char* to_string(AdmitReason r) {
  switch (r) {
    case AdmitReason::Admitted: return "admitted";
    case AdmitReason::UnknownActor: return "unknown-actor";
    case AdmitReason::UnknownTarget: return "unknown-target";
    case AdmitReason::DirectionViolation: return "direction-violation";
    case AdmitReason::LabelNotDeclared: return "label-not-declared";
    case AdmitReason::WrongResourceKind: return "wrong-resource-kind";
  }
  return "?";
}

bool ChannelDecl::has_label(const std::string& l) const {
  return std::find(labels.begin(), labels.end(), l) != labels.end();
}

int ChannelDecl::label_ordinal(const std::string& l) const {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == l) return static_cast<int>(i);
  }
  return -1;
}

const AgentDecl* Topology::find_agent(const std::string& id) const {
  for (const auto& a : agents) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

const ResourceDecl* Topology::find_resource(const std::string& id) const {
  for (const auto& r : resources) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const ChannelDecl* Topology::find_channel(const std::string& id) const {
  for (const auto& c : channels) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

int Topology::agent_index(const std::string& id) const {
  for (size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Topology::resource_index(const std::string& id) const {
  for (size_t i = 0; i < resources.size(); ++i) {
    if (resources[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int Topology::channel_index(const std::string& id) const {
  for (size_t i = 0; i < channels.size(); ++i) {
    if (channels[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw TopologyParseError(path, msg);
}

void require_keys(const ordered_json& obj, const std::string& path,
                  std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional) {
  for (const char* k : required) {
    if (!obj.contains(k)) fail(path, std::string("missing required field '") + k + "'");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) fail(path + "." + it.key(), "unknown field");
  }
}

std::string nonempty_string(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  std::string s = v.get<std::string>();
  if (s.empty()) fail(path, "must be nonempty");
  return s;
}

std::vector<std::string> string_or_list(const ordered_json& v, const std::string& path) {
  std::vector<std::string> out;
  if (v.is_string()) {
    out.push_back(nonempty_string(v, path));
    return out;
  }
  if (!v.is_array() || v.empty()) fail(path, "expected an agent id or a nonempty list of ids");
  for (size_t i = 0; i < v.size(); ++i) {
    out.push_back(nonempty_string(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

Topology parse_topology(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail("", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) fail("", "top level must be an object");
  require_keys(doc, "$", {"agents", "resources", "channels"}, {});

  Topology t;

  const auto& agents = doc["agents"];
  if (!agents.is_array() || agents.empty()) fail("agents", "expected a nonempty list");
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string path = "agents[" + std::to_string(i) + "]";
    const auto& a = agents[i];
    if (!a.is_object()) fail(path, "expected an object");
    require_keys(a, path, {"id"}, {"tools"});
    AgentDecl decl;
    decl.id = nonempty_string(a["id"], path + ".id");
    if (a.contains("tools")) {
      if (!a["tools"].is_array()) fail(path + ".tools", "expected a list");
      for (size_t j = 0; j < a["tools"].size(); ++j) {
        decl.tools.push_back(
            nonempty_string(a["tools"][j], path + ".tools[" + std::to_string(j) + "]"));
      }
    }
    t.agents.push_back(std::move(decl));
  }

  const auto& resources = doc["resources"];
  if (!resources.is_array()) fail("resources", "expected a list");
  for (size_t i = 0; i < resources.size(); ++i) {
    const std::string path = "resources[" + std::to_string(i) + "]";
    const auto& r = resources[i];
    if (!r.is_object()) fail(path, "expected an object");
    require_keys(r, path, {"id", "type"}, {"config"});
    ResourceDecl decl;
    decl.id = nonempty_string(r["id"], path + ".id");
    const std::string kind = nonempty_string(r["type"], path + ".type");
    if (kind == "Lock") {
      decl.kind = ResourceKind::Lock;
    } else if (kind == "Counter") {
      decl.kind = ResourceKind::Counter;
    } else {
      fail(path + ".type", "must be 'Lock' or 'Counter', got '" + kind + "'");
    }
    if (r.contains("config")) {
      const auto& cfg = r["config"];
      if (!cfg.is_object()) fail(path + ".config", "expected an object");
      require_keys(cfg, path + ".config", {}, {"initial"});
      if (cfg.contains("initial")) {
        if (!cfg["initial"].is_number_integer()) {
          fail(path + ".config.initial", "expected an integer");
        }
        int64_t v = cfg["initial"].get<int64_t>();
        if (v < 0) fail(path + ".config.initial", "must be >= 0");
        decl.initial = v;
      }
    }
    t.resources.push_back(std::move(decl));
  }

  const auto& channels = doc["channels"];
  if (!channels.is_array()) fail("channels", "expected a list");
  for (size_t i = 0; i < channels.size(); ++i) {
    const std::string path = "channels[" + std::to_string(i) + "]";
    const auto& c = channels[i];
    if (!c.is_object()) fail(path, "expected an object");
    require_keys(c, path, {"id", "from", "to", "labels"}, {});
    ChannelDecl decl;
    decl.id = nonempty_string(c["id"], path + ".id");
    decl.senders = string_or_list(c["from"], path + ".from");
    decl.receivers = string_or_list(c["to"], path + ".to");
    if (!c["labels"].is_array() || c["labels"].empty()) {
      fail(path + ".labels", "expected a nonempty list of label strings");
    }
    for (size_t j = 0; j < c["labels"].size(); ++j) {
      decl.labels.push_back(
          nonempty_string(c["labels"][j], path + ".labels[" + std::to_string(j) + "]"));
    }
    t.channels.push_back(std::move(decl));
  }

  return t;
}

std::string serialize_topology(const Topology& t) {
  ordered_json doc;
  doc["agents"] = ordered_json::array();
  for (const auto& a : t.agents) {
    ordered_json o;
    o["id"] = a.id;
    if (!a.tools.empty()) o["tools"] = a.tools;
    doc["agents"].push_back(std::move(o));
  }
  doc["resources"] = ordered_json::array();
  for (const auto& r : t.resources) {
    ordered_json o;
    o["id"] = r.id;
    o["type"] = r.kind == ResourceKind::Lock ? "Lock" : "Counter";
    if (r.initial.has_value()) o["config"] = ordered_json{{"initial", *r.initial}};
    doc["resources"].push_back(std::move(o));
  }
  doc["channels"] = ordered_json::array();
  for (const auto& c : t.channels) {
    ordered_json o;
    o["id"] = c.id;
    o["from"] = c.senders.size() == 1 ? ordered_json(c.senders[0]) : ordered_json(c.senders);
    o["to"] = c.receivers.size() == 1 ? ordered_json(c.receivers[0]) : ordered_json(c.receivers);
    o["labels"] = c.labels;
    doc["channels"].push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

ValidationReport validate_topology(const Topology& t) {
  ValidationReport report;

  auto check_duplicates = [&report](auto const& decls, const std::string& section) {
    std::map<std::string, size_t> first;
    for (size_t i = 0; i < decls.size(); ++i) {
      auto [it, inserted] = first.emplace(decls[i].id, i);
      if (!inserted) {
        report.add_error(section + "[" + std::to_string(i) + "].id",
                         "duplicate " + section.substr(0, section.size() - 1) + " id '" +
                             decls[i].id + "' (first declared at " + section + "[" +
                             std::to_string(it->second) + "])");
      }
    }
  };
  check_duplicates(t.agents, "agents");
  check_duplicates(t.resources, "resources");
  check_duplicates(t.channels, "channels");

  for (size_t i = 0; i < t.resources.size(); ++i) {
    const auto& r = t.resources[i];
    const std::string path = "resources[" + std::to_string(i) + "]";
    if (r.kind == ResourceKind::Counter && !r.initial.has_value()) {
      report.add_error(path + ".config.initial",
                       "Counter '" + r.id + "' must declare an initial value");
    }
    if (r.kind == ResourceKind::Lock && r.initial.has_value()) {
      report.add_error(path + ".config.initial",
                       "Lock '" + r.id + "' must not declare an initial value");
    }
  }

  auto check_endpoints = [&](const std::vector<std::string>& ids, const std::string& path) {
    std::set<std::string> seen;
    for (size_t j = 0; j < ids.size(); ++j) {
      if (t.find_agent(ids[j]) == nullptr) {
        report.add_error(path + "[" + std::to_string(j) + "]",
                         "endpoint '" + ids[j] + "' is not a declared agent");
      }
      if (!seen.insert(ids[j]).second) {
        report.add_error(path + "[" + std::to_string(j) + "]",
                         "duplicate endpoint '" + ids[j] + "'");
      }
    }
  };

  // Directed (sender, receiver) pairs must be unique across the expansion of
  // every channel's sender x receiver cross product.
  std::map<std::pair<std::string, std::string>, std::string> pair_owner;
  for (size_t i = 0; i < t.channels.size(); ++i) {
    const auto& c = t.channels[i];
    const std::string path = "channels[" + std::to_string(i) + "]";
    check_endpoints(c.senders, path + ".from");
    check_endpoints(c.receivers, path + ".to");
    for (const auto& s : c.senders) {
      for (const auto& r : c.receivers) {
        auto [it, inserted] = pair_owner.emplace(std::make_pair(s, r), c.id);
        if (!inserted && it->second != c.id) {
          report.add_error(path, "channels '" + it->second + "' and '" + c.id +
                                     "' both connect (" + s + " -> " + r + ")");
        }
      }
    }
  }

  return report;
}

Admission event_admitted(const Topology& t, const CoordinationEvent& e) {
  Admission a;
  if (t.find_agent(e.actor) == nullptr) {
    a.reason = AdmitReason::UnknownActor;
    a.detail = "actor '" + e.actor + "' is not a declared agent";
    return a;
  }

  switch (e.kind) {
    case EventKind::Send:
    case EventKind::Receive: {
      const ChannelDecl* ch = t.find_channel(e.target);
      if (ch == nullptr) {
        a.reason = AdmitReason::UnknownTarget;
        a.detail = "channel '" + e.target + "' is not declared";
        return a;
      }
      const auto& side = e.kind == EventKind::Send ? ch->senders : ch->receivers;
      if (std::find(side.begin(), side.end(), e.actor) == side.end()) {
        a.reason = AdmitReason::DirectionViolation;
        a.detail = "agent '" + e.actor + "' may not " +
                   (e.kind == EventKind::Send ? std::string("send on '") : std::string("receive from '")) +
                   e.target + "'";
        return a;
      }
      if (e.kind == EventKind::Send) {
        if (!ch->has_label(e.label)) {
          a.reason = AdmitReason::LabelNotDeclared;
          a.detail = "label '" + e.label + "' is not in the vocabulary of '" + e.target + "'";
          return a;
        }
      } else {
        for (const auto& l : e.expected) {
          if (!ch->has_label(l)) {
            a.reason = AdmitReason::LabelNotDeclared;
            a.detail = "label '" + l + "' is not in the vocabulary of '" + e.target + "'";
            return a;
          }
        }
      }
      break;
    }
    case EventKind::Acquire:
    case EventKind::Release:
    case EventKind::CounterAcquire:
    case EventKind::CounterRelease: {
      const ResourceDecl* r = t.find_resource(e.target);
      if (r == nullptr) {
        a.reason = AdmitReason::UnknownTarget;
        a.detail = "resource '" + e.target + "' is not declared";
        return a;
      }
      const bool wants_lock = e.kind == EventKind::Acquire || e.kind == EventKind::Release;
      const bool is_lock = r->kind == ResourceKind::Lock;
      if (wants_lock != is_lock) {
        a.reason = AdmitReason::WrongResourceKind;
        a.detail = "resource '" + e.target + "' is a " + (is_lock ? "Lock" : "Counter") +
                   ", not valid for " + to_string(e.kind);
        return a;
      }
      break;
    }
  }

  a.admitted = true;
  a.reason = AdmitReason::Admitted;
  return a;
}

}  // namespace coord
