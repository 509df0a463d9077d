#pragma once

#include <string>
#include <vector>

#include "rezk/presentation.hpp"
#include "rezk/rng.hpp"

namespace rezk {

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IncompatiblePieces : std::runtime_error {
  std::string conjunct1, conjunct2, meetSub, nf1, nf2;
  IncompatiblePieces(std::string c1, std::string c2, std::string m, std::string a, std::string b)
      : std::runtime_error("incompatible pieces on " + c1 + " and " + c2 + " under " + m + ": " +
                           a + " vs " + b),
        conjunct1(std::move(c1)),
        conjunct2(std::move(c2)),
        meetSub(std::move(m)),
        nf1(std::move(a)),
        nf2(std::move(b)) {}
};

struct NormalizeOptions {
  long budget = 100000;
  Rng* rng = nullptr;  // when set, redex choice is randomized (test strategies)
};

// ---------------------------------------------------------------------------
// Inverse elimination

inline Term invert_hom(const Term& h);

/// Rebuilds a term with every Inv pushed to atoms and eliminated.
inline Term elim_inv(const Term& t) {
  switch (t->kind) {
    case TermKind::Inv:
      return invert_hom(t->a);
    case TermKind::Comp:
      return t_comp(elim_inv(t->a), elim_inv(t->b));
    case TermKind::IdHom:
      return t_id(t->a);
    default:
      return t;
  }
}

/// The inverse of an invertible hom, Inv-free: identities are self-inverse,
/// glue isos flip direction, composites reverse.
inline Term invert_hom(const Term& h) {
  switch (h->kind) {
    case TermKind::IdHom:
      return h;
    case TermKind::GlueIsoFwd:
      return t_glue_inv(h->base, *h->glue);
    case TermKind::GlueIsoInv:
      return t_glue_fwd(h->base, *h->glue);
    case TermKind::Comp:
      return t_comp(invert_hom(h->b), invert_hom(h->a));
    case TermKind::Inv:
      return elim_inv(h->a);
    case TermKind::Restrict:
      return t_restrict(invert_hom(h->a), h->rsub);
    default:
      throw SortError("invert_hom: term is not invertible: " + h->key);
  }
}

// ---------------------------------------------------------------------------
// Restriction

inline Term restrict_term(const Term& t, const Substitution& f);

namespace detail {

inline Term restrict_payload(const Term& t, const Substitution& f) { return restrict_term(t, f); }
inline GluePiece restrict_payload(const GluePiece& p, const Substitution& f) {
  return {restrict_term(p.ob, f), restrict_term(p.fwd, f), restrict_term(p.inv, f)};
}

/// Restricts a partial family along f.  Each conjunct of the restricted
/// cofibration is covered by some original conjunct; its payload is the
/// original one, carried over the factoring of the quotients.
template <class P>
PartialData<P> restrict_partial(const PartialData<P>& part, const Substitution& f) {
  Cofibration beta = subst_cof(part.cof, f);
  PartialData<P> out{canonical_cof(beta), {}};
  for (const auto& cNew : dnf(beta)) {
    Substitution qNew = quotient(cNew);
    Substitution g = compose(f, qNew);
    const ConjunctSystem* oldC = nullptr;
    const P* oldP = nullptr;
    for (const auto& [c, p] : part.pieces) {
      if (conjunct_decided_under(c, g)) {
        oldC = &c;
        oldP = &p;
        break;
      }
    }
    if (!oldC) throw SortError("restrict: no covering conjunct for " + cNew.str());
    Substitution qOld = quotient(*oldC);
    std::vector<IntervalExpr> im;
    im.reserve(qOld.dom().size());
    for (Sym u : qOld.dom().names()) im.push_back(g.image_of(u));
    Substitution factor(qNew.dom(), qOld.dom(), std::move(im));
    out.pieces.emplace_back(cNew, restrict_payload(*oldP, factor));
  }
  return out;
}

template <class P>
bool partial_is_top(const PartialData<P>& part) {
  return part.pieces.size() == 1 && part.pieces[0].first.is_top();
}

}  // namespace detail

/// Pushes f into the term: generators compose substitutions, operations
/// distribute, glue/ext nodes restrict cofibration and pieces, and a node
/// whose cofibration becomes true collapses to the selected piece.
inline Term restrict_term(const Term& t, const Substitution& f) {
  if (f.cod() != t->ctx)
    throw SortError("restrict_term: context mismatch for " + t->key);
  if (f.is_identity()) return t;
  switch (t->kind) {
    case TermKind::Gen: {
      Sort s = t->sort;
      if (s.kind == SortKind::Hom)
        s = Sort::hom(restrict_term(s.src, f), restrict_term(s.dst, f));
      return t_gen(t->name, f.dom(), s, compose(t->sub, f));
    }
    case TermKind::IdHom:
      return t_id(restrict_term(t->a, f));
    case TermKind::Comp:
      return t_comp(restrict_term(t->a, f), restrict_term(t->b, f));
    case TermKind::Inv:
      return restrict_term(invert_hom(t->a), f);
    case TermKind::Restrict:
      return restrict_term(t->a, compose(t->rsub, f));
    case TermKind::GlueOb: {
      auto part = detail::restrict_partial(*t->glue, f);
      if (detail::partial_is_top(part)) return part.pieces[0].second.ob;
      return t_glue_ob(restrict_term(t->base, f), std::move(part));
    }
    case TermKind::GlueIsoFwd: {
      auto part = detail::restrict_partial(*t->glue, f);
      if (detail::partial_is_top(part)) return part.pieces[0].second.fwd;
      return t_glue_fwd(restrict_term(t->base, f), std::move(part));
    }
    case TermKind::GlueIsoInv: {
      auto part = detail::restrict_partial(*t->glue, f);
      if (detail::partial_is_top(part)) return part.pieces[0].second.inv;
      return t_glue_inv(restrict_term(t->base, f), std::move(part));
    }
    case TermKind::ExtSet: {
      auto part = detail::restrict_partial(*t->ext, f);
      if (detail::partial_is_top(part)) return part.pieces[0].second;
      return t_ext(restrict_term(t->base, f), std::move(part));
    }
  }
  throw SortError("restrict_term: bad node");
}

// ---------------------------------------------------------------------------
// Normalization

namespace detail {

inline bool same_glue_payload(const Term& a, const Term& b) {
  return term_eq(a->base, b->base) && partial_key(*a->glue) == partial_key(*b->glue);
}

inline bool inverse_pair(const Term& a, const Term& b) {
  bool fwdInv = a->kind == TermKind::GlueIsoFwd && b->kind == TermKind::GlueIsoInv;
  bool invFwd = a->kind == TermKind::GlueIsoInv && b->kind == TermKind::GlueIsoFwd;
  if (!fwdInv && !invFwd) return false;
  return same_glue_payload(a, b);
}

}  // namespace detail

class Normalizer {
 public:
  Normalizer(const Presentation& pres, NormalizeOptions opts = {})
      : pres_(pres), opts_(opts) {}

  Term normalize(const Term& t) {
    switch (t->kind) {
      case TermKind::Gen:
        // Single-atom hom words can still match one-generator rule sides.
        if (t->sort.kind == SortKind::Hom) return reduce_word({t}, t->sort.src);
        return t;
      case TermKind::IdHom:
        return t_id(normalize(t->a));
      case TermKind::Restrict:
        tick();
        return normalize(restrict_term(t->a, t->rsub));
      case TermKind::Inv:
        tick();
        return normalize(invert_hom(t->a));
      case TermKind::Comp: {
        Term g = normalize(t->a);
        Term f = normalize(t->b);
        std::vector<Term> word;
        flatten(g, word);
        flatten(f, word);
        return reduce_word(std::move(word), f->sort.src);
      }
      case TermKind::GlueOb: {
        auto [base, part] = norm_glue(t);
        if (detail::partial_is_top(part)) return normalize(part.pieces[0].second.ob);
        return t_glue_ob(base, std::move(part));
      }
      case TermKind::GlueIsoFwd: {
        auto [base, part] = norm_glue(t);
        if (detail::partial_is_top(part)) return normalize(part.pieces[0].second.fwd);
        return t_glue_fwd(base, std::move(part));
      }
      case TermKind::GlueIsoInv: {
        auto [base, part] = norm_glue(t);
        if (detail::partial_is_top(part)) return normalize(part.pieces[0].second.inv);
        return t_glue_inv(base, std::move(part));
      }
      case TermKind::ExtSet: {
        Term base = normalize(t->base);
        PartialTerms part{t->ext->cof, {}};
        for (const auto& [c, p] : t->ext->pieces) part.pieces.emplace_back(c, normalize(p));
        if (detail::partial_is_top(part)) return normalize(part.pieces[0].second);
        return t_ext(base, std::move(part));
      }
    }
    throw SortError("normalize: bad node");
  }

  long steps_used() const { return steps_; }

 private:
  void tick() {
    if (++steps_ > opts_.budget)
      throw BudgetExceeded("rewrite budget exceeded (" + std::to_string(opts_.budget) + " steps)");
  }

  static void flatten(const Term& h, std::vector<Term>& out) {
    if (h->kind == TermKind::Comp) {
      flatten(h->a, out);
      flatten(h->b, out);
      return;
    }
    if (h->kind == TermKind::IdHom) return;
    out.push_back(h);
  }

  std::pair<Term, PartialGlue> norm_glue(const Term& t) {
    Term base = normalize(t->base);
    PartialGlue part{t->glue->cof, {}};
    for (const auto& [c, p] : t->glue->pieces)
      part.pieces.emplace_back(
          c, GluePiece{normalize(p.ob), normalize(p.fwd), normalize(p.inv)});
    return {base, std::move(part)};
  }

  struct Cand {
    enum class What { Cancel, Rule };
    What what;
    std::size_t pos;
    std::size_t rule = 0;
  };

  std::vector<Cand> candidates(const std::vector<Term>& word) const {
    std::vector<Cand> out;
    for (std::size_t k = 0; k + 1 < word.size(); ++k)
      if (detail::inverse_pair(word[k], word[k + 1]))
        out.push_back({Cand::What::Cancel, k, 0});
    for (std::size_t r = 0; r < pres_.rules.size(); ++r) {
      const auto& rule = pres_.rules[r];
      if (rule.lhs.size() > word.size()) continue;
      for (std::size_t k = 0; k + rule.lhs.size() <= word.size(); ++k) {
        bool match = true;
        for (std::size_t j = 0; j < rule.lhs.size() && match; ++j) {
          const Term& at = word[k + j];
          if (at->kind != TermKind::Gen || at->name != rule.lhs[j]) match = false;
        }
        if (match) out.push_back({Cand::What::Rule, k, r});
      }
    }
    std::sort(out.begin(), out.end(), [](const Cand& a, const Cand& b) {
      if (a.pos != b.pos) return a.pos < b.pos;
      if (a.what != b.what) return a.what == Cand::What::Cancel;
      return a.rule < b.rule;
    });
    return out;
  }

  Term reduce_word(std::vector<Term> word, Term emptySrc) {
    while (true) {
      auto cands = candidates(word);
      if (cands.empty()) break;
      tick();
      const Cand& c = opts_.rng ? cands[opts_.rng->below(cands.size())] : cands.front();
      if (c.what == Cand::What::Cancel) {
        word.erase(word.begin() + static_cast<std::ptrdiff_t>(c.pos),
                   word.begin() + static_cast<std::ptrdiff_t>(c.pos) + 2);
      } else {
        const auto& rule = pres_.rules[c.rule];
        const DimCtx& ctx = word[c.pos]->ctx;
        std::vector<Term> repl;
        for (Sym n : rule.rhs) repl.push_back(hom_term(pres_, n, ctx));
        word.erase(word.begin() + static_cast<std::ptrdiff_t>(c.pos),
                   word.begin() + static_cast<std::ptrdiff_t>(c.pos + rule.lhs.size()));
        word.insert(word.begin() + static_cast<std::ptrdiff_t>(c.pos), repl.begin(), repl.end());
      }
    }
    if (word.empty()) return t_id(emptySrc);
    Term acc = word.back();
    for (std::size_t k = word.size() - 1; k-- > 0;) acc = t_comp(word[k], acc);
    return acc;
  }

  const Presentation& pres_;
  NormalizeOptions opts_;
  long steps_ = 0;
};

inline Term normalize(const Presentation& p, const Term& t, NormalizeOptions opts = {}) {
  return Normalizer(p, opts).normalize(t);
}

inline bool eq_terms(const Presentation& p, const Term& a, const Term& b,
                     NormalizeOptions opts = {}) {
  if (a->ctx != b->ctx) throw SortError("eq_terms: context mismatch");
  return term_eq(normalize(p, a, opts), normalize(p, b, opts));
}

// ---------------------------------------------------------------------------
// Partial elements

namespace detail {
inline bool payload_eq(const Presentation& p, const Term& a, const Term& b,
                       const NormalizeOptions& o, std::string* l, std::string* r) {
  Term na = normalize(p, a, o), nb = normalize(p, b, o);
  *l = term_str(na);
  *r = term_str(nb);
  return term_eq(na, nb);
}
inline bool payload_eq(const Presentation& p, const GluePiece& a, const GluePiece& b,
                       const NormalizeOptions& o, std::string* l, std::string* r) {
  if (!payload_eq(p, a.ob, b.ob, o, l, r)) return false;
  if (!payload_eq(p, a.fwd, b.fwd, o, l, r)) return false;
  return payload_eq(p, a.inv, b.inv, o, l, r);
}
}  // namespace detail

/// Validated partial family over α: one payload per canonical conjunct, in
/// canonical order, pairwise compatible on meets.
template <class P>
PartialData<P> make_partial(const Presentation& pres, const Cofibration& cof,
                            const std::vector<P>& payloads, NormalizeOptions opts = {}) {
  auto conj = dnf(cof);
  if (conj.size() != payloads.size())
    throw SortError("make_partial: need exactly one payload per satisfiable conjunct");
  PartialData<P> out{canonical_cof(cof), {}};
  for (std::size_t k = 0; k < conj.size(); ++k) out.pieces.emplace_back(conj[k], payloads[k]);
  for (std::size_t a = 0; a < conj.size(); ++a)
    for (std::size_t b = a + 1; b < conj.size(); ++b) {
      auto meet = meet_conjuncts(conj[a], conj[b]);
      if (!meet) continue;
      Substitution qm = quotient(*meet);
      auto factor_to = [&](const ConjunctSystem& c) {
        Substitution qc = quotient(c);
        std::vector<IntervalExpr> im;
        im.reserve(qc.dom().size());
        for (Sym u : qc.dom().names()) im.push_back(qm.image_of(u));
        return Substitution(qm.dom(), qc.dom(), std::move(im));
      };
      P left = detail::restrict_payload(payloads[a], factor_to(conj[a]));
      P right = detail::restrict_payload(payloads[b], factor_to(conj[b]));
      std::string nl, nr;
      if (!detail::payload_eq(pres, left, right, opts, &nl, &nr))
        throw IncompatiblePieces(conj[a].str(), conj[b].str(), qm.str(), nl, nr);
    }
  return out;
}

}  // namespace rezk
