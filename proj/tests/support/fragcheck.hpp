#pragma once

// Labeled-forest comparison between an externalized fragment and the
// independent replacement tower: same multiset of parent chains, same
// per-depth counts, and every adjunction edge realized by marked isos.

#include <map>
#include <string>

#include "rezk/completion.hpp"
#include "rezk/tower.hpp"

namespace rezk::testgen {

inline std::string frag_chain(const Fragment& f, std::size_t k) {
  long p = f.glueParent[k];
  if (p < 0) return term_str(f.objects[k]);
  return "E:" + frag_chain(f, static_cast<std::size_t>(p));
}

inline std::string tower_chain(const Tower& t, std::size_t k) {
  long p = t.objects[k].parent;
  if (p < 0) return t.objects[k].name;
  return "E:" + tower_chain(t, static_cast<std::size_t>(p));
}

inline bool fragment_matches_tower(const Fragment& f, const Tower& t, std::string* why = nullptr) {
  auto fail = [&](std::string m) {
    if (why) *why = std::move(m);
    return false;
  };
  if (f.objects.size() != t.objects.size()) return fail("object counts differ");
  std::multiset<std::string> fc, tc;
  std::map<std::string, int> fDepth, tDepth;
  for (std::size_t k = 0; k < f.objects.size(); ++k) {
    fc.insert(frag_chain(f, k));
    fDepth[frag_chain(f, k)] = f.depths[k];
  }
  for (std::size_t k = 0; k < t.objects.size(); ++k) {
    tc.insert(tower_chain(t, k));
    tDepth[tower_chain(t, k)] = t.objects[k].depth;
  }
  if (fc != tc) return fail("parent chains differ");
  if (fDepth != tDepth) return fail("depth labels differ");
  // Every adjoined object must be joined to its parent by marked isos in
  // both directions.
  for (std::size_t k = 0; k < f.objects.size(); ++k) {
    long p = f.glueParent[k];
    if (p < 0) continue;
    bool up = false, down = false;
    for (const auto& hm : f.homs) {
      if (!hm.iso) continue;
      if (hm.src == static_cast<std::size_t>(p) && hm.dst == k) up = true;
      if (hm.src == k && hm.dst == static_cast<std::size_t>(p)) down = true;
    }
    if (!up || !down) return fail("missing iso edge for " + frag_chain(f, k));
  }
  return true;
}

}  // namespace rezk::testgen
