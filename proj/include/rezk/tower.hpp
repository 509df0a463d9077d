#pragma once

// Reference construction for dimension-0 fibrant replacement, kept
// deliberately independent of the term engine: plain strings and indices.
// Each stage adjoins, for every object that does not yet have one, a fresh
// object together with a formal iso edge to it.

#include <cstddef>
#include <string>
#include <vector>

namespace rezk {

struct TowerObject {
  std::string name;
  int depth = 0;
  long parent = -1;  // index of the object this one was adjoined for
};

struct Tower {
  std::vector<TowerObject> objects;
  std::vector<std::size_t> totals;  // objects.size() after each stage 0..depth

  std::size_t count_at(int depth) const { return totals.at(static_cast<std::size_t>(depth)); }
};

inline Tower build_tower(const std::vector<std::string>& baseObjects, int depth) {
  Tower t;
  for (const auto& b : baseObjects) t.objects.push_back({b, 0, -1});
  t.totals.push_back(t.objects.size());
  std::vector<bool> extended(t.objects.size(), false);
  for (int d = 1; d <= depth; ++d) {
    std::size_t before = t.objects.size();
    for (std::size_t k = 0; k < before; ++k) {
      if (extended[k]) continue;
      t.objects.push_back({"E(" + t.objects[k].name + ")", d, static_cast<long>(k)});
      extended[k] = true;
      extended.push_back(false);
    }
    t.totals.push_back(t.objects.size());
  }
  return t;
}

}  // namespace rezk
