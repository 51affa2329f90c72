#pragma once

#include <map>
#include <optional>
#include <string>

namespace msgfn {

enum class FailureReason { none, requirements, unsolvable, budget };

inline std::string reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::requirements: return "requirements";
    case FailureReason::unsolvable: return "unsolvable";
    case FailureReason::budget: return "budget";
  }
  return "unknown";
}

struct Analysis {
  bool playable = false;
  std::map<std::string, int> properties;
  std::optional<std::string> solution;  // one action character per move
  FailureReason reason = FailureReason::none;
  std::string detail;  // which requirement failed, when known

  bool has(const std::string& name) const { return properties.count(name) != 0; }
  int property(const std::string& name) const { return properties.at(name); }

  bool operator==(const Analysis&) const = default;
};

inline Analysis fail(FailureReason reason, std::string detail, Analysis a = {}) {
  a.playable = false;
  a.reason = reason;
  a.detail = std::move(detail);
  return a;
}

}  // namespace msgfn
