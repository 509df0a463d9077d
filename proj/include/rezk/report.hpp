#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace rezk {

struct Obligation {
  std::string id, kind, status, witness;
};

struct Report {
  std::vector<Obligation> obligations;

  void add(std::string id, std::string kind, bool pass, std::string witness = "") {
    obligations.push_back(
        {std::move(id), std::move(kind), pass ? "pass" : "fail", std::move(witness)});
  }

  void add_unknown(std::string id, std::string kind, std::string witness = "") {
    obligations.push_back({std::move(id), std::move(kind), "unknown", std::move(witness)});
  }

  void merge(const Report& other) {
    obligations.insert(obligations.end(), other.obligations.begin(), other.obligations.end());
  }

  void sort_by_id() {
    std::stable_sort(obligations.begin(), obligations.end(),
                     [](const Obligation& a, const Obligation& b) { return a.id < b.id; });
  }

  std::size_t count(const char* status) const {
    std::size_t n = 0;
    for (const auto& o : obligations)
      if (o.status == status) ++n;
    return n;
  }

  bool all_pass() const { return count("fail") == 0 && count("unknown") == 0; }
  bool any_fail() const { return count("fail") != 0; }
  bool any_unknown() const { return count("unknown") != 0; }
};

}  // namespace rezk
