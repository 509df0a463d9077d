#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace rezk {

// Interned names for dimension variables and generators.  Symbols are
// compared by id; the table is append-only.
using Sym = std::uint32_t;

namespace detail {
struct SymbolTable {
  std::mutex mu;
  std::deque<std::string> names;  // deque: references stay valid
  std::unordered_map<std::string, Sym> ids;

  static SymbolTable& instance() {
    static SymbolTable table;
    return table;
  }
};
}  // namespace detail

inline Sym intern(std::string_view name) {
  if (name.empty()) throw std::invalid_argument("intern: empty name");
  auto& tab = detail::SymbolTable::instance();
  std::scoped_lock lock(tab.mu);
  auto it = tab.ids.find(std::string(name));
  if (it != tab.ids.end()) return it->second;
  Sym id = static_cast<Sym>(tab.names.size());
  tab.names.emplace_back(name);
  tab.ids.emplace(tab.names.back(), id);
  return id;
}

inline const std::string& symbol_name(Sym s) {
  auto& tab = detail::SymbolTable::instance();
  std::scoped_lock lock(tab.mu);
  if (s >= tab.names.size()) throw std::out_of_range("symbol_name: bad id");
  return tab.names[s];
}

}  // namespace rezk
