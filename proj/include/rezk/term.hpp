#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rezk/cofib.hpp"
#include "rezk/cube.hpp"

namespace rezk {

struct SortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

enum class SortKind : std::uint8_t { Ob, Hom, Elt };

/// Sort of a term; Hom carries its endpoint object terms.
struct Sort {
  SortKind kind = SortKind::Ob;
  Term src, dst;  // Hom only

  static Sort ob() { return {SortKind::Ob, nullptr, nullptr}; }
  static Sort elt() { return {SortKind::Elt, nullptr, nullptr}; }
  static Sort hom(Term src, Term dst) { return {SortKind::Hom, std::move(src), std::move(dst)}; }
};

enum class TermKind : std::uint8_t {
  Gen,         // generator, carrying the substitution into its own context
  IdHom,       // identity on an object
  Comp,        // composition g . f
  Inv,         // inverse of an invertible hom (eliminated by normalization)
  GlueOb,      // object component of an iso-extension
  GlueIsoFwd,  // its structure iso, base -> glue object
  GlueIsoInv,  // the inverse direction, glue object -> base
  ExtSet,      // element extension in the SET theory
  Restrict,    // explicit restriction (eliminated by normalization)
};

/// Object piece of an iso-extension under one conjunct: the chosen object
/// together with both directions of the iso from the restricted base.
struct GluePiece {
  Term ob, fwd, inv;
};

/// A compatible family of payloads, one per satisfiable conjunct of the
/// cofibration; payloads live over the conjunct's quotient context.
template <class P>
struct PartialData {
  Cofibration cof;
  std::vector<std::pair<ConjunctSystem, P>> pieces;
};

using PartialTerms = PartialData<Term>;
using PartialGlue = PartialData<GluePiece>;

struct TermNode {
  TermKind kind;
  DimCtx ctx;
  Sort sort;
  Sym name = 0;                           // Gen
  Substitution sub;                       // Gen: ctx -> generator context
  Term a, b;                              // children (see builders)
  Substitution rsub;                      // Restrict: ctx -> a's context
  Term base;                              // Glue/ExtSet basepoint
  std::optional<PartialGlue> glue;        // Glue nodes
  std::optional<PartialTerms> ext;        // ExtSet
  std::string key;                        // injective structural fingerprint
  std::size_t hash = 0;
};

inline bool term_eq(const Term& x, const Term& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  return x->hash == y->hash && x->key == y->key;
}

inline const std::string& term_key(const Term& t) { return t->key; }

inline bool sort_eq(const Sort& a, const Sort& b) {
  if (a.kind != b.kind) return false;
  if (a.kind != SortKind::Hom) return true;
  return term_eq(a.src, b.src) && term_eq(a.dst, b.dst);
}

// ---------------------------------------------------------------------------
// Construction

namespace detail {

inline std::string conjuncts_key(const DimCtx& ctx,
                                 const std::vector<ConjunctSystem>& cs) {
  std::string out = ctx.str() + "|";
  for (const auto& c : cs) out += c.str() + ";";
  return out;
}

inline Term finish(std::shared_ptr<TermNode> n, std::string key) {
  n->key = std::move(key);
  n->hash = std::hash<std::string>{}(n->key);
  return n;
}

template <class P>
void check_partial_shape(const DimCtx& ctx, const PartialData<P>& part, const char* who) {
  if (part.cof.ctx != ctx) throw SortError(std::string(who) + ": cofibration context mismatch");
  auto conj = dnf(part.cof);
  if (conj.size() != part.pieces.size())
    throw SortError(std::string(who) + ": piece count does not match conjunct count");
  for (std::size_t k = 0; k < conj.size(); ++k)
    if (!(conj[k] == part.pieces[k].first))
      throw SortError(std::string(who) + ": pieces not aligned with canonical conjuncts");
}

}  // namespace detail

inline Term t_gen(Sym name, const DimCtx& ctx, const Sort& sort, const Substitution& sub) {
  if (sub.dom() != ctx) throw SortError("t_gen: substitution domain mismatch");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Gen;
  n->ctx = ctx;
  n->sort = sort;
  n->name = name;
  n->sub = sub;
  return detail::finish(n, "G:" + symbol_name(name) + sub.str() + ctx.str());
}

inline Term t_id(const Term& ob) {
  if (ob->sort.kind == SortKind::Hom) throw SortError("t_id: expected an object");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::IdHom;
  n->ctx = ob->ctx;
  n->sort = Sort::hom(ob, ob);
  n->a = ob;
  return detail::finish(n, "I:(" + ob->key + ")");
}

inline Term t_comp(const Term& g, const Term& f) {
  if (g->sort.kind != SortKind::Hom || f->sort.kind != SortKind::Hom)
    throw SortError("t_comp: expected homs");
  if (g->ctx != f->ctx) throw SortError("t_comp: context mismatch");
  if (!term_eq(g->sort.src, f->sort.dst))
    throw SortError("t_comp: endpoint mismatch: " + g->sort.src->key + " vs " + f->sort.dst->key);
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Comp;
  n->ctx = g->ctx;
  n->sort = Sort::hom(f->sort.src, g->sort.dst);
  n->a = g;
  n->b = f;
  return detail::finish(n, "C:(" + g->key + "," + f->key + ")");
}

/// Whether Inv may be applied: identities, glue isos, and composites or
/// inverses of such.
inline bool is_invertible_shape(const Term& t) {
  switch (t->kind) {
    case TermKind::IdHom:
    case TermKind::GlueIsoFwd:
    case TermKind::GlueIsoInv:
      return true;
    case TermKind::Inv:
      return is_invertible_shape(t->a);
    case TermKind::Comp:
      return is_invertible_shape(t->a) && is_invertible_shape(t->b);
    case TermKind::Restrict:
      return is_invertible_shape(t->a);
    default:
      return false;
  }
}

inline Term t_inv(const Term& h) {
  if (h->sort.kind != SortKind::Hom) throw SortError("t_inv: expected a hom");
  if (!is_invertible_shape(h)) throw SortError("t_inv: term is not invertible: " + h->key);
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Inv;
  n->ctx = h->ctx;
  n->sort = Sort::hom(h->sort.dst, h->sort.src);
  n->a = h;
  return detail::finish(n, "V:(" + h->key + ")");
}

namespace detail {
template <class P>
std::string partial_key(const PartialData<P>& part);

inline std::string piece_key(const Term& t) { return t->key; }
inline std::string piece_key(const GluePiece& p) {
  return "(" + p.ob->key + "," + p.fwd->key + "," + p.inv->key + ")";
}

template <class P>
std::string partial_key(const PartialData<P>& part) {
  std::string out;
  for (const auto& [c, p] : part.pieces) out += c.str() + "->" + piece_key(p) + ";";
  return out;
}
}  // namespace detail

/// The three glue builders share payload; the iso directions differ only in
/// sort and in which piece component a boundary collapse selects.
inline Term t_glue_ob(const Term& base, PartialGlue part) {
  if (base->sort.kind != SortKind::Ob) throw SortError("t_glue_ob: base must be an object");
  detail::check_partial_shape(base->ctx, part, "t_glue_ob");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::GlueOb;
  n->ctx = base->ctx;
  n->sort = Sort::ob();
  n->base = base;
  n->glue = std::move(part);
  return detail::finish(n, "O:(" + base->key + ")[" + detail::partial_key(*n->glue) + "]");
}

inline Term t_glue_fwd(const Term& base, PartialGlue part) {
  if (base->sort.kind != SortKind::Ob) throw SortError("t_glue_fwd: base must be an object");
  detail::check_partial_shape(base->ctx, part, "t_glue_fwd");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::GlueIsoFwd;
  n->ctx = base->ctx;
  n->base = base;
  n->glue = std::move(part);
  n->sort = Sort::hom(base, t_glue_ob(base, *n->glue));
  return detail::finish(n, "F:(" + base->key + ")[" + detail::partial_key(*n->glue) + "]");
}

inline Term t_glue_inv(const Term& base, PartialGlue part) {
  if (base->sort.kind != SortKind::Ob) throw SortError("t_glue_inv: base must be an object");
  detail::check_partial_shape(base->ctx, part, "t_glue_inv");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::GlueIsoInv;
  n->ctx = base->ctx;
  n->base = base;
  n->glue = std::move(part);
  n->sort = Sort::hom(t_glue_ob(base, *n->glue), base);
  return detail::finish(n, "N:(" + base->key + ")[" + detail::partial_key(*n->glue) + "]");
}

inline Term t_ext(const Term& base, PartialTerms part) {
  if (base->sort.kind != SortKind::Elt) throw SortError("t_ext: base must be an element");
  detail::check_partial_shape(base->ctx, part, "t_ext");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::ExtSet;
  n->ctx = base->ctx;
  n->sort = Sort::elt();
  n->base = base;
  n->ext = std::move(part);
  return detail::finish(n, "E:(" + base->key + ")[" + detail::partial_key(*n->ext) + "]");
}

inline Term t_restrict(const Term& t, const Substitution& f) {
  if (f.cod() != t->ctx) throw SortError("t_restrict: substitution codomain mismatch");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Restrict;
  n->ctx = f.dom();
  n->a = t;
  n->rsub = f;
  // The sort is resolved when the restriction is pushed inward.
  n->sort = t->sort.kind == SortKind::Hom ? Sort::hom(nullptr, nullptr) : t->sort;
  return detail::finish(n, "R:(" + t->key + ")" + f.str());
}

// ---------------------------------------------------------------------------
// Display

/// Human-oriented rendering used in reports and JSON; composition words
/// print flattened, degenerate generator substitutions are suppressed.
inline std::string term_str(const Term& t) {
  switch (t->kind) {
    case TermKind::Gen: {
      if (t->sub.cod().empty() || t->sub.is_identity()) return symbol_name(t->name);
      return symbol_name(t->name) + t->sub.str();
    }
    case TermKind::IdHom:
      return "id(" + term_str(t->a) + ")";
    case TermKind::Comp: {
      std::string out = "(";
      Term cur = t;
      bool first = true;
      while (cur->kind == TermKind::Comp) {
        out += (first ? "" : " . ") + term_str(cur->a);
        first = false;
        cur = cur->b;
      }
      out += " . " + term_str(cur) + ")";
      return out;
    }
    case TermKind::Inv:
      return "inv(" + term_str(t->a) + ")";
    case TermKind::GlueOb:
    case TermKind::GlueIsoFwd:
    case TermKind::GlueIsoInv: {
      const char* head = t->kind == TermKind::GlueOb
                             ? "Glue"
                             : (t->kind == TermKind::GlueIsoFwd ? "glue" : "glue_inv");
      std::string out = std::string(head) + "(" + term_str(t->base) + "; " +
                        cof_canonical_str(t->glue->cof) + "; [";
      for (std::size_t k = 0; k < t->glue->pieces.size(); ++k) {
        const auto& [c, p] = t->glue->pieces[k];
        if (k) out += ", ";
        out += c.str() + " -> (" + term_str(p.ob) + ", " + term_str(p.fwd) + ", " +
               term_str(p.inv) + ")";
      }
      return out + "])";
    }
    case TermKind::ExtSet: {
      std::string out = "ext(" + term_str(t->base) + "; " + cof_canonical_str(t->ext->cof) + "; [";
      for (std::size_t k = 0; k < t->ext->pieces.size(); ++k) {
        const auto& [c, p] = t->ext->pieces[k];
        if (k) out += ", ";
        out += c.str() + " -> " + term_str(p);
      }
      return out + "])";
    }
    case TermKind::Restrict:
      return "restrict(" + term_str(t->a) + "; " + t->rsub.str() + ")";
  }
  return "?";
}

}  // namespace rezk
