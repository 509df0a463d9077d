#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rezk/symbols.hpp"

namespace rezk {

struct CubeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An ordered list of distinct dimension variables.
class DimCtx {
 public:
  DimCtx() = default;
  explicit DimCtx(std::vector<Sym> names) : names_(std::move(names)) {
    for (std::size_t a = 0; a < names_.size(); ++a)
      for (std::size_t b = a + 1; b < names_.size(); ++b)
        if (names_[a] == names_[b])
          throw CubeError("DimCtx: duplicate variable " + symbol_name(names_[a]));
  }

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<Sym>& names() const { return names_; }
  Sym at(std::size_t k) const { return names_.at(k); }

  bool contains(Sym v) const {
    return std::find(names_.begin(), names_.end(), v) != names_.end();
  }

  std::optional<std::size_t> index_of(Sym v) const {
    auto it = std::find(names_.begin(), names_.end(), v);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

  /// Context extended on the right by a fresh variable.
  DimCtx extend(Sym v) const {
    if (contains(v)) throw CubeError("DimCtx::extend: variable already bound: " + symbol_name(v));
    std::vector<Sym> ns = names_;
    ns.push_back(v);
    return DimCtx(std::move(ns));
  }

  DimCtx remove(Sym v) const {
    std::vector<Sym> ns;
    ns.reserve(names_.size());
    bool found = false;
    for (Sym n : names_) {
      if (n == v) { found = true; continue; }
      ns.push_back(n);
    }
    if (!found) throw CubeError("DimCtx::remove: variable not bound: " + symbol_name(v));
    return DimCtx(std::move(ns));
  }

  bool operator==(const DimCtx& o) const { return names_ == o.names_; }
  bool operator!=(const DimCtx& o) const { return !(*this == o); }

  std::string str() const {
    std::string out = "(";
    for (std::size_t k = 0; k < names_.size(); ++k) {
      if (k) out += ",";
      out += symbol_name(names_[k]);
    }
    out += ")";
    return out;
  }

 private:
  std::vector<Sym> names_;
};

/// A dimension variable or one of the two interval endpoints.
struct IntervalExpr {
  enum class Kind : std::uint8_t { End0, End1, Var };
  Kind kind = Kind::End0;
  Sym var = 0;

  static IntervalExpr end0() { return {Kind::End0, 0}; }
  static IntervalExpr end1() { return {Kind::End1, 0}; }
  static IntervalExpr mk_var(Sym v) { return {Kind::Var, v}; }

  bool is_const() const { return kind != Kind::Var; }
  bool is_var() const { return kind == Kind::Var; }

  bool operator==(const IntervalExpr& o) const {
    return kind == o.kind && (kind != Kind::Var || var == o.var);
  }
  bool operator!=(const IntervalExpr& o) const { return !(*this == o); }

  std::string str() const {
    switch (kind) {
      case Kind::End0: return "0";
      case Kind::End1: return "1";
      case Kind::Var: return symbol_name(var);
    }
    return "?";
  }
};

/// Orders constants before variables, variables by position in `ctx`.
inline bool expr_less(const IntervalExpr& a, const IntervalExpr& b, const DimCtx& ctx) {
  auto rank = [&](const IntervalExpr& e) -> std::size_t {
    switch (e.kind) {
      case IntervalExpr::Kind::End0: return 0;
      case IntervalExpr::Kind::End1: return 1;
      case IntervalExpr::Kind::Var: {
        auto ix = ctx.index_of(e.var);
        if (!ix) throw CubeError("expr_less: variable not in context: " + symbol_name(e.var));
        return 2 + *ix;
      }
    }
    return 0;
  };
  return rank(a) < rank(b);
}

/// A morphism of the cartesian cube category, written f : dom -> cod.
/// It assigns to every variable of `cod` an interval expression over `dom`.
class Substitution {
 public:
  Substitution() = default;
  Substitution(DimCtx dom, DimCtx cod, std::vector<IntervalExpr> images)
      : dom_(std::move(dom)), cod_(std::move(cod)), images_(std::move(images)) {
    if (images_.size() != cod_.size())
      throw CubeError("Substitution: image count does not match codomain");
    for (const auto& e : images_)
      if (e.is_var() && !dom_.contains(e.var))
        throw CubeError("Substitution: image variable not in domain: " + symbol_name(e.var));
  }

  static Substitution identity(const DimCtx& ctx) {
    std::vector<IntervalExpr> im;
    im.reserve(ctx.size());
    for (Sym v : ctx.names()) im.push_back(IntervalExpr::mk_var(v));
    return Substitution(ctx, ctx, std::move(im));
  }

  /// The unique map dom -> ().
  static Substitution terminal(const DimCtx& dom) {
    return Substitution(dom, DimCtx(), {});
  }

  /// Projection (ctx + extra) -> ctx, forgetting the added variables.
  static Substitution projection(const DimCtx& big, const DimCtx& small) {
    std::vector<IntervalExpr> im;
    im.reserve(small.size());
    for (Sym v : small.names()) {
      if (!big.contains(v))
        throw CubeError("Substitution::projection: missing variable " + symbol_name(v));
      im.push_back(IntervalExpr::mk_var(v));
    }
    return Substitution(big, small, std::move(im));
  }

  /// Face map (ctx minus i) -> ctx sending i to the constant e.
  static Substitution face(const DimCtx& ctx, Sym i, const IntervalExpr& e) {
    DimCtx dom = ctx.remove(i);
    if (e.is_var() && !dom.contains(e.var))
      throw CubeError("Substitution::face: image variable not in resulting context");
    std::vector<IntervalExpr> im;
    im.reserve(ctx.size());
    for (Sym v : ctx.names()) im.push_back(v == i ? e : IntervalExpr::mk_var(v));
    return Substitution(dom, ctx, std::move(im));
  }

  /// Renaming ctx -> ctx' along matching positions.
  static Substitution rename(const DimCtx& from, const DimCtx& to) {
    if (from.size() != to.size()) throw CubeError("Substitution::rename: size mismatch");
    std::vector<IntervalExpr> im;
    im.reserve(to.size());
    for (std::size_t k = 0; k < to.size(); ++k)
      im.push_back(IntervalExpr::mk_var(from.at(k)));
    return Substitution(from, to, std::move(im));
  }

  const DimCtx& dom() const { return dom_; }
  const DimCtx& cod() const { return cod_; }
  const std::vector<IntervalExpr>& images() const { return images_; }

  /// Image of one codomain variable.
  IntervalExpr image_of(Sym v) const {
    auto ix = cod_.index_of(v);
    if (!ix) throw CubeError("Substitution: variable not in codomain: " + symbol_name(v));
    return images_[*ix];
  }

  /// Applies the substitution to an expression over the codomain.
  IntervalExpr apply(const IntervalExpr& e) const {
    if (!e.is_var()) return e;
    return image_of(e.var);
  }

  bool operator==(const Substitution& o) const {
    return dom_ == o.dom_ && cod_ == o.cod_ && images_ == o.images_;
  }
  bool operator!=(const Substitution& o) const { return !(*this == o); }

  bool is_identity() const {
    if (dom_ != cod_) return false;
    for (std::size_t k = 0; k < images_.size(); ++k)
      if (!(images_[k] == IntervalExpr::mk_var(cod_.at(k)))) return false;
    return true;
  }

  std::string str() const {
    std::string out = "{";
    for (std::size_t k = 0; k < cod_.size(); ++k) {
      if (k) out += ", ";
      out += symbol_name(cod_.at(k)) + ":=" + images_[k].str();
    }
    out += "}";
    return out;
  }

 private:
  DimCtx dom_, cod_;
  std::vector<IntervalExpr> images_;
};

/// compose(f, g) is the composite "f after g": with f : J -> I and
/// g : K -> J it yields K -> I, substituting g into the images of f.
inline Substitution compose(const Substitution& f, const Substitution& g) {
  if (g.cod() != f.dom())
    throw CubeError("compose: domain mismatch (" + g.cod().str() + " vs " + f.dom().str() + ")");
  std::vector<IntervalExpr> im;
  im.reserve(f.images().size());
  for (const auto& e : f.images()) im.push_back(g.apply(e));
  return Substitution(g.dom(), f.cod(), std::move(im));
}

/// Degeneracy (ctx + fresh) -> ctx.
inline Substitution degeneracy(const DimCtx& ctx, Sym fresh) {
  return Substitution::projection(ctx.extend(fresh), ctx);
}

/// Extends f : J -> I to (J + fresh) -> (I + fresh) with fresh fixed.
inline Substitution weaken(const Substitution& f, Sym fresh) {
  DimCtx dom = f.dom().extend(fresh);
  DimCtx cod = f.cod().extend(fresh);
  std::vector<IntervalExpr> im = f.images();
  im.push_back(IntervalExpr::mk_var(fresh));
  return Substitution(std::move(dom), std::move(cod), std::move(im));
}

/// All substitutions out of `ctx` that set each variable to an endpoint or
/// merge it with earlier variables.  Every decision about a cofibration over
/// `ctx` is determined by its value on these maps.  Each result has a
/// canonical domain: one variable per merge class, named after the first
/// member.
inline std::vector<Substitution> critical_substitutions(const DimCtx& ctx) {
  std::vector<Substitution> out;
  const std::size_t n = ctx.size();
  // Assignment per variable: 0 -> end0, 1 -> end1, 2+b -> merge block b.
  // Block labels grow restrictedly: a new block may only be opened with the
  // next unused label, which makes each partition appear exactly once.
  std::vector<std::uint32_t> choice(n, 0);
  while (true) {
    std::uint32_t blocks = 0;
    bool canonical = true;
    for (std::size_t k = 0; k < n && canonical; ++k) {
      if (choice[k] >= 2) {
        std::uint32_t b = choice[k] - 2;
        if (b > blocks) canonical = false;
        else if (b == blocks) ++blocks;
      }
    }
    if (canonical) {
      std::vector<Sym> domNames(blocks, 0);
      std::vector<bool> seen(blocks, false);
      for (std::size_t k = 0; k < n; ++k) {
        if (choice[k] >= 2) {
          std::uint32_t b = choice[k] - 2;
          if (!seen[b]) { seen[b] = true; domNames[b] = ctx.at(k); }
        }
      }
      std::vector<IntervalExpr> im;
      im.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        if (choice[k] == 0) im.push_back(IntervalExpr::end0());
        else if (choice[k] == 1) im.push_back(IntervalExpr::end1());
        else im.push_back(IntervalExpr::mk_var(domNames[choice[k] - 2]));
      }
      out.emplace_back(DimCtx(domNames), ctx, std::move(im));
    }
    // Next assignment in mixed radix (each digit ranges over 0..n+1).
    std::size_t k = 0;
    for (; k < n; ++k) {
      if (choice[k] + 1 < 2 + n) { ++choice[k]; break; }
      choice[k] = 0;
    }
    if (k == n) break;
  }
  return out;
}

}  // namespace rezk
