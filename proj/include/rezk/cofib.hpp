#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rezk/cube.hpp"

namespace rezk {

struct CofError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Syntax

struct CofNode;
using CofPtr = std::shared_ptr<const CofNode>;

struct CofNode {
  enum class Kind : std::uint8_t { Eq, And, Or, Forall };
  Kind kind;
  IntervalExpr lhs, rhs;  // Eq
  CofPtr a, b;            // And / Or
  Sym binder = 0;         // Forall
  CofPtr body;            // Forall
};

/// A cofibration formula together with the dimension context it lives in.
/// Truth of an equation is syntactic identity of the two sides; there is no
/// interval algebra beyond variables and endpoints.
struct Cofibration {
  DimCtx ctx;
  CofPtr node;
};

namespace detail {
inline void check_expr(const DimCtx& ctx, const IntervalExpr& e, const char* who) {
  if (e.is_var() && !ctx.contains(e.var))
    throw CofError(std::string(who) + ": variable not in context: " + symbol_name(e.var));
}
}  // namespace detail

inline Cofibration cof_eq(const DimCtx& ctx, IntervalExpr lhs, IntervalExpr rhs) {
  detail::check_expr(ctx, lhs, "cof_eq");
  detail::check_expr(ctx, rhs, "cof_eq");
  auto n = std::make_shared<CofNode>();
  n->kind = CofNode::Kind::Eq;
  n->lhs = lhs;
  n->rhs = rhs;
  return {ctx, n};
}

// Top and Bot are notations for (0=0) and (0=1).
inline Cofibration cof_top(const DimCtx& ctx) {
  return cof_eq(ctx, IntervalExpr::end0(), IntervalExpr::end0());
}
inline Cofibration cof_bot(const DimCtx& ctx) {
  return cof_eq(ctx, IntervalExpr::end0(), IntervalExpr::end1());
}

inline Cofibration cof_and(const Cofibration& a, const Cofibration& b) {
  if (a.ctx != b.ctx) throw CofError("cof_and: context mismatch");
  auto n = std::make_shared<CofNode>();
  n->kind = CofNode::Kind::And;
  n->a = a.node;
  n->b = b.node;
  return {a.ctx, n};
}

inline Cofibration cof_or(const Cofibration& a, const Cofibration& b) {
  if (a.ctx != b.ctx) throw CofError("cof_or: context mismatch");
  auto n = std::make_shared<CofNode>();
  n->kind = CofNode::Kind::Or;
  n->a = a.node;
  n->b = b.node;
  return {a.ctx, n};
}

/// forall binds `i`; the body lives over ctx extended by `i`.
inline Cofibration cof_forall(const DimCtx& ctx, Sym i, const Cofibration& body) {
  if (body.ctx != ctx.extend(i)) throw CofError("cof_forall: body context mismatch");
  auto n = std::make_shared<CofNode>();
  n->kind = CofNode::Kind::Forall;
  n->binder = i;
  n->body = body.node;
  return {ctx, n};
}

inline std::string cof_str(const Cofibration& c);

namespace detail {
inline std::string cof_node_str(const CofPtr& n) {
  switch (n->kind) {
    case CofNode::Kind::Eq: {
      if (n->lhs == IntervalExpr::end0() && n->rhs == IntervalExpr::end0()) return "T";
      if (n->lhs == IntervalExpr::end0() && n->rhs == IntervalExpr::end1()) return "F";
      return "(" + n->lhs.str() + "=" + n->rhs.str() + ")";
    }
    case CofNode::Kind::And:
      return "(" + cof_node_str(n->a) + " /\\ " + cof_node_str(n->b) + ")";
    case CofNode::Kind::Or:
      return "(" + cof_node_str(n->a) + " \\/ " + cof_node_str(n->b) + ")";
    case CofNode::Kind::Forall:
      return "(forall " + symbol_name(n->binder) + ". " + cof_node_str(n->body) + ")";
  }
  return "?";
}
}  // namespace detail

inline std::string cof_str(const Cofibration& c) { return detail::cof_node_str(c.node); }

// ---------------------------------------------------------------------------
// Decision and substitution

/// Whether the formula holds under the generic assignment of its context.
/// Equations hold only when both sides are the same expression; a bound
/// forall variable is compared as itself.
inline bool decided(const Cofibration& c) {
  switch (c.node->kind) {
    case CofNode::Kind::Eq:
      return c.node->lhs == c.node->rhs;
    case CofNode::Kind::And:
      return decided({c.ctx, c.node->a}) && decided({c.ctx, c.node->b});
    case CofNode::Kind::Or:
      return decided({c.ctx, c.node->a}) || decided({c.ctx, c.node->b});
    case CofNode::Kind::Forall:
      return decided({c.ctx.extend(c.node->binder), c.node->body});
  }
  return false;
}

/// A name based on `base` that is not bound in `ctx`.
inline Sym fresh_for(Sym base, const DimCtx& ctx) {
  Sym v = base;
  std::string name = symbol_name(base);
  while (ctx.contains(v)) {
    name += "'";
    v = intern(name);
  }
  return v;
}

/// Reindexing along f : J -> I; the result lives over J.  Binders are
/// renamed when they would clash with J.
inline Cofibration subst_cof(const Cofibration& c, const Substitution& f) {
  if (f.cod() != c.ctx) throw CofError("subst_cof: substitution codomain mismatch");
  switch (c.node->kind) {
    case CofNode::Kind::Eq:
      return cof_eq(f.dom(), f.apply(c.node->lhs), f.apply(c.node->rhs));
    case CofNode::Kind::And:
      return cof_and(subst_cof({c.ctx, c.node->a}, f), subst_cof({c.ctx, c.node->b}, f));
    case CofNode::Kind::Or:
      return cof_or(subst_cof({c.ctx, c.node->a}, f), subst_cof({c.ctx, c.node->b}, f));
    case CofNode::Kind::Forall: {
      Sym i = c.node->binder;
      Sym i2 = fresh_for(i, f.dom());
      DimCtx domExt = f.dom().extend(i2);
      DimCtx codExt = c.ctx.extend(i);
      std::vector<IntervalExpr> im;
      im.reserve(codExt.size());
      for (Sym v : c.ctx.names()) im.push_back(f.image_of(v));
      im.push_back(IntervalExpr::mk_var(i2));
      Substitution fExt(domExt, codExt, std::move(im));
      Cofibration body = subst_cof({codExt, c.node->body}, fExt);
      return cof_forall(f.dom(), i2, body);
    }
  }
  throw CofError("subst_cof: bad node");
}

// ---------------------------------------------------------------------------
// Quantifier elimination

/// Eliminates one forall binder from a quantifier-free body.  Equations not
/// mentioning the binder pass through; (i=i) holds; an equation pinning the
/// binder to anything else can hold for no single choice covering all
/// instances, so it becomes F.  The map distributes over /\ and \/.
inline Cofibration forall_elim(Sym i, const Cofibration& body) {
  const DimCtx& ext = body.ctx;
  if (!ext.contains(i)) throw CofError("forall_elim: binder not in body context");
  DimCtx out = ext.remove(i);
  switch (body.node->kind) {
    case CofNode::Kind::Eq: {
      const IntervalExpr& l = body.node->lhs;
      const IntervalExpr& r = body.node->rhs;
      bool li = l.is_var() && l.var == i;
      bool ri = r.is_var() && r.var == i;
      if (l == r) return cof_top(out);
      if (li || ri) return cof_bot(out);
      return cof_eq(out, l, r);
    }
    case CofNode::Kind::And:
      return cof_and(forall_elim(i, {ext, body.node->a}), forall_elim(i, {ext, body.node->b}));
    case CofNode::Kind::Or:
      return cof_or(forall_elim(i, {ext, body.node->a}), forall_elim(i, {ext, body.node->b}));
    case CofNode::Kind::Forall: {
      Sym j = body.node->binder;
      Cofibration inner = forall_elim(i, {ext.extend(j), body.node->body});
      return cof_forall(out, j, inner);
    }
  }
  throw CofError("forall_elim: bad node");
}

namespace detail {
/// Rewrites away every Forall, innermost first.
inline Cofibration elim_foralls(const Cofibration& c) {
  switch (c.node->kind) {
    case CofNode::Kind::Eq:
      return c;
    case CofNode::Kind::And:
      return cof_and(elim_foralls({c.ctx, c.node->a}), elim_foralls({c.ctx, c.node->b}));
    case CofNode::Kind::Or:
      return cof_or(elim_foralls({c.ctx, c.node->a}), elim_foralls({c.ctx, c.node->b}));
    case CofNode::Kind::Forall: {
      Cofibration body = elim_foralls({c.ctx.extend(c.node->binder), c.node->body});
      return forall_elim(c.node->binder, body);
    }
  }
  throw CofError("elim_foralls: bad node");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Conjunct systems and disjunctive normal form

/// A satisfiable conjunction of interval equations in solved form: each
/// equation reads (v = rep) where rep is an endpoint or an earlier variable,
/// and the list is sorted by v's position in the context.
struct ConjunctSystem {
  DimCtx ctx;
  std::vector<std::pair<IntervalExpr, IntervalExpr>> eqs;

  bool is_top() const { return eqs.empty(); }

  bool operator==(const ConjunctSystem& o) const { return ctx == o.ctx && eqs == o.eqs; }
  bool operator!=(const ConjunctSystem& o) const { return !(*this == o); }

  std::string str() const {
    if (eqs.empty()) return "{}";
    std::string out = "{";
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      if (k) out += ", ";
      out += eqs[k].first.str() + "=" + eqs[k].second.str();
    }
    out += "}";
    return out;
  }
};

namespace detail {
// Union-find over slots 0 = end0, 1 = end1, 2+k = k-th context variable;
// the representative is always the smallest slot.
struct IntervalUF {
  std::vector<std::size_t> parent;

  explicit IntervalUF(std::size_t nvars) : parent(2 + nvars) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }

  std::size_t find(std::size_t s) {
    while (parent[s] != s) {
      parent[s] = parent[parent[s]];
      s = parent[s];
    }
    return s;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;
  }
};

inline std::size_t slot_of(const DimCtx& ctx, const IntervalExpr& e) {
  switch (e.kind) {
    case IntervalExpr::Kind::End0: return 0;
    case IntervalExpr::Kind::End1: return 1;
    case IntervalExpr::Kind::Var: {
      auto ix = ctx.index_of(e.var);
      if (!ix) throw CofError("conjunct: variable not in context: " + symbol_name(e.var));
      return 2 + *ix;
    }
  }
  throw CofError("conjunct: bad expression");
}

inline IntervalExpr expr_of_slot(const DimCtx& ctx, std::size_t s) {
  if (s == 0) return IntervalExpr::end0();
  if (s == 1) return IntervalExpr::end1();
  return IntervalExpr::mk_var(ctx.at(s - 2));
}
}  // namespace detail

/// Solves a list of raw equations over ctx.  Returns the canonical solved
/// form, or nothing when the equations force 0 = 1.
inline std::optional<ConjunctSystem> solve_conjunct(
    const DimCtx& ctx, const std::vector<std::pair<IntervalExpr, IntervalExpr>>& raw) {
  detail::IntervalUF uf(ctx.size());
  for (const auto& [l, r] : raw) uf.unite(detail::slot_of(ctx, l), detail::slot_of(ctx, r));
  if (uf.find(0) == uf.find(1)) return std::nullopt;
  ConjunctSystem out;
  out.ctx = ctx;
  for (std::size_t k = 0; k < ctx.size(); ++k) {
    std::size_t s = 2 + k;
    std::size_t rep = uf.find(s);
    if (rep != s)
      out.eqs.emplace_back(IntervalExpr::mk_var(ctx.at(k)), detail::expr_of_slot(ctx, rep));
  }
  return out;
}

/// The substitution that collapses ctx along the conjunct: its domain keeps
/// one variable per merge class (the earliest), and every ctx variable maps
/// to its representative.
inline Substitution quotient(const ConjunctSystem& c) {
  auto solved = solve_conjunct(c.ctx, c.eqs);
  if (!solved) throw CofError("quotient: inconsistent conjunct");
  detail::IntervalUF uf(c.ctx.size());
  for (const auto& [l, r] : c.eqs)
    uf.unite(detail::slot_of(c.ctx, l), detail::slot_of(c.ctx, r));
  std::vector<Sym> qnames;
  for (std::size_t k = 0; k < c.ctx.size(); ++k)
    if (uf.find(2 + k) == 2 + k) qnames.push_back(c.ctx.at(k));
  DimCtx q(qnames);
  std::vector<IntervalExpr> im;
  im.reserve(c.ctx.size());
  for (std::size_t k = 0; k < c.ctx.size(); ++k)
    im.push_back(detail::expr_of_slot(c.ctx, uf.find(2 + k)));
  return Substitution(q, c.ctx, std::move(im));
}

/// Whether every equation of the conjunct becomes syntactically true under f.
inline bool conjunct_decided_under(const ConjunctSystem& c, const Substitution& f) {
  for (const auto& [l, r] : c.eqs)
    if (!(f.apply(l) == f.apply(r))) return false;
  return true;
}

/// The meet of two conjuncts over the same context, if satisfiable.
inline std::optional<ConjunctSystem> meet_conjuncts(const ConjunctSystem& a,
                                                    const ConjunctSystem& b) {
  if (a.ctx != b.ctx) throw CofError("meet_conjuncts: context mismatch");
  auto eqs = a.eqs;
  eqs.insert(eqs.end(), b.eqs.begin(), b.eqs.end());
  return solve_conjunct(a.ctx, eqs);
}

/// Canonical disjunctive normal form: foralls eliminated, each conjunct
/// solved and satisfiable, subsumed conjuncts dropped, deterministic order
/// with the empty (true) conjunct first.  An empty list is falsity.
inline std::vector<ConjunctSystem> dnf(const Cofibration& c0) {
  Cofibration c = detail::elim_foralls(c0);
  using Raw = std::vector<std::pair<IntervalExpr, IntervalExpr>>;
  std::vector<Raw> raw;
  // Distribute to a list of equation lists.
  struct Walk {
    static std::vector<Raw> go(const CofPtr& n) {
      switch (n->kind) {
        case CofNode::Kind::Eq:
          return {Raw{{n->lhs, n->rhs}}};
        case CofNode::Kind::Or: {
          auto l = go(n->a), r = go(n->b);
          l.insert(l.end(), r.begin(), r.end());
          return l;
        }
        case CofNode::Kind::And: {
          auto l = go(n->a), r = go(n->b);
          std::vector<Raw> out;
          out.reserve(l.size() * r.size());
          for (const auto& x : l)
            for (const auto& y : r) {
              Raw both = x;
              both.insert(both.end(), y.begin(), y.end());
              out.push_back(std::move(both));
            }
          return out;
        }
        case CofNode::Kind::Forall:
          throw CofError("dnf: unexpected forall");
      }
      throw CofError("dnf: bad node");
    }
  };
  raw = Walk::go(c.node);

  std::vector<ConjunctSystem> conj;
  for (const auto& eqs : raw) {
    auto solved = solve_conjunct(c.ctx, eqs);
    if (solved) conj.push_back(std::move(*solved));
  }

  auto eq_rank = [&](const std::pair<IntervalExpr, IntervalExpr>& e) {
    return std::pair<std::size_t, std::size_t>(detail::slot_of(c.ctx, e.first),
                                               detail::slot_of(c.ctx, e.second));
  };
  std::sort(conj.begin(), conj.end(), [&](const ConjunctSystem& x, const ConjunctSystem& y) {
    if (x.eqs.size() != y.eqs.size()) return x.eqs.size() < y.eqs.size();
    for (std::size_t k = 0; k < x.eqs.size(); ++k) {
      auto rx = eq_rank(x.eqs[k]), ry = eq_rank(y.eqs[k]);
      if (rx != ry) return rx < ry;
    }
    return false;
  });
  conj.erase(std::unique(conj.begin(), conj.end()), conj.end());

  // A conjunct is redundant when a strictly weaker one is present.
  auto contains_all = [](const ConjunctSystem& big, const ConjunctSystem& small) {
    for (const auto& e : small.eqs)
      if (std::find(big.eqs.begin(), big.eqs.end(), e) == big.eqs.end()) return false;
    return true;
  };
  std::vector<ConjunctSystem> kept;
  for (std::size_t k = 0; k < conj.size(); ++k) {
    bool subsumed = false;
    for (std::size_t d = 0; d < conj.size() && !subsumed; ++d) {
      if (d == k) continue;
      if (conj[d].eqs.size() < conj[k].eqs.size() && contains_all(conj[k], conj[d]))
        subsumed = true;
    }
    if (!subsumed) kept.push_back(conj[k]);
  }
  return kept;
}

/// Formula rebuilt from the canonical DNF.
inline Cofibration canonical_cof(const Cofibration& c) {
  auto conj = dnf(c);
  if (conj.empty()) return cof_bot(c.ctx);
  auto conj_cof = [&](const ConjunctSystem& cs) {
    if (cs.eqs.empty()) return cof_top(c.ctx);
    Cofibration acc = cof_eq(c.ctx, cs.eqs.back().first, cs.eqs.back().second);
    for (std::size_t k = cs.eqs.size() - 1; k-- > 0;)
      acc = cof_and(cof_eq(c.ctx, cs.eqs[k].first, cs.eqs[k].second), acc);
    return acc;
  };
  Cofibration acc = conj_cof(conj.back());
  for (std::size_t k = conj.size() - 1; k-- > 0;) acc = cof_or(conj_cof(conj[k]), acc);
  return acc;
}

inline bool cof_equal(const Cofibration& a, const Cofibration& b) {
  return a.ctx == b.ctx && dnf(a) == dnf(b);
}

inline bool cof_is_bot(const Cofibration& c) { return dnf(c).empty(); }
inline bool cof_is_top(const Cofibration& c) {
  auto d = dnf(c);
  return d.size() == 1 && d[0].is_top();
}

// ---------------------------------------------------------------------------
// Entailment

/// a entails b when b is decided on every satisfiable conjunct of a, i.e.
/// after collapsing the context along that conjunct's quotient.
inline bool entails(const Cofibration& a, const Cofibration& b) {
  if (a.ctx != b.ctx) throw CofError("entails: context mismatch");
  for (const auto& cs : dnf(a)) {
    Substitution q = quotient(cs);
    if (!decided(subst_cof(b, q))) return false;
  }
  return true;
}

/// Reference decision procedure: checks a against b on every critical
/// substitution of the context.  Slow, exists to cross-check entails.
inline bool oracle_entails(const Cofibration& a, const Cofibration& b) {
  if (a.ctx != b.ctx) throw CofError("oracle_entails: context mismatch");
  for (const auto& f : critical_substitutions(a.ctx)) {
    if (decided(subst_cof(a, f)) && !decided(subst_cof(b, f))) return false;
  }
  return true;
}

/// Canonical printed form: F, or \/ of /\ of solved equations (T when empty).
inline std::string cof_canonical_str(const Cofibration& c) {
  auto conj = dnf(c);
  if (conj.empty()) return "F";
  std::string out;
  for (std::size_t k = 0; k < conj.size(); ++k) {
    if (k) out += " \\/ ";
    const auto& cs = conj[k];
    if (cs.eqs.empty()) {
      out += "T";
      continue;
    }
    for (std::size_t e = 0; e < cs.eqs.size(); ++e) {
      if (e) out += " /\\ ";
      out += "(" + cs.eqs[e].first.str() + "=" + cs.eqs[e].second.str() + ")";
    }
  }
  return out;
}

}  // namespace rezk
