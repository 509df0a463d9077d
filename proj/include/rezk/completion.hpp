#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "rezk/rewrite.hpp"

namespace rezk {

struct NonPropositionalPiece : std::runtime_error {
  std::string conjunct, pieceNf, targetNf;
  NonPropositionalPiece(std::string c, std::string p, std::string t)
      : std::runtime_error("piece on " + c + " normalizes to " + p +
                           " but the extended hom normalizes to " + t),
        conjunct(std::move(c)),
        pieceNf(std::move(p)),
        targetNf(std::move(t)) {}
};

/// The free extension of a presentation by the glue/ext constructors.  The
/// carrier is never materialized; the handle bundles the presentation with
/// a normalizer configuration and enumeration caches.
class CompletionHandle {
 public:
  explicit CompletionHandle(Presentation pres, NormalizeOptions opts = {})
      : pres_(std::move(pres)), opts_(opts), cache_(std::make_shared<Cache>()) {
    pres_.validate();
  }

  const Presentation& pres() const { return pres_; }
  Theory theory() const { return pres_.theory; }
  const NormalizeOptions& options() const { return opts_; }

  Term norm(const Term& t) const { return normalize(pres_, t, opts_); }
  bool eq(const Term& a, const Term& b) const { return eq_terms(pres_, a, b, opts_); }

  /// Normal forms of the object (or element) sort over ctx with at most
  /// `depth` glue/ext constructors, in construction order.  Over a nonempty
  /// context only the cofibration-free fragment is enumerated.
  std::vector<Term> enumerate_obs(const DimCtx& ctx, int depth) const {
    std::string k = "ob:" + ctx.str() + ":" + std::to_string(depth);
    return cached(k, [&] {
      std::vector<Term> all, prev;
      for (Sym n : pres_.obGens) {
        all.push_back(ob_term(pres_, n, ctx));
        prev.push_back(all.back());
      }
      for (int d = 1; d <= depth; ++d) {
        std::vector<Term> next;
        for (const Term& u : prev) {
          Term g = theory() == Theory::SET ? t_ext(u, bot_terms(ctx))
                                           : t_glue_ob(u, bot_glue(ctx));
          next.push_back(g);
          all.push_back(g);
        }
        prev = std::move(next);
      }
      return all;
    });
  }

  /// Hom normal forms between enumerated objects: composable words of base
  /// generators and glue isos, length at most `depth`, plus identities.
  std::vector<Term> enumerate_homs(const DimCtx& ctx, int depth) const {
    if (theory() != Theory::CAT) throw ValidationError("enumerate_homs: homs need CAT");
    std::string k = "hom:" + ctx.str() + ":" + std::to_string(depth);
    return cached(k, [&] {
      std::vector<Term> atoms;
      for (const auto& h : pres_.homGens) atoms.push_back(hom_term(pres_, h.name, ctx));
      for (const Term& ob : enumerate_obs(ctx, depth)) {
        if (ob->kind != TermKind::GlueOb) continue;
        atoms.push_back(t_glue_fwd(ob->base, *ob->glue));
        atoms.push_back(t_glue_inv(ob->base, *ob->glue));
      }
      std::vector<Term> out;
      std::map<std::string, bool> seen;
      auto push = [&](const Term& raw) -> std::pair<Term, bool> {
        Term nf = norm(raw);
        bool fresh = seen.emplace(nf->key, true).second;
        if (fresh) out.push_back(nf);
        return {nf, fresh};
      };
      for (const Term& ob : enumerate_obs(ctx, depth)) push(t_id(ob));
      std::vector<Term> layer;
      if (depth >= 1)
        for (const Term& a : atoms) {
          auto [nf, fresh] = push(a);
          if (fresh && nf->kind != TermKind::IdHom) layer.push_back(nf);
        }
      for (int len = 2; len <= depth; ++len) {
        std::vector<Term> next;
        for (const Term& w : layer)
          for (const Term& a : atoms) {
            if (!term_eq(a->sort.src, w->sort.dst)) continue;
            auto [nf, fresh] = push(t_comp(a, w));
            if (fresh && nf->kind != TermKind::IdHom) next.push_back(nf);
          }
        layer = std::move(next);
      }
      return out;
    });
  }

 private:
  PartialGlue bot_glue(const DimCtx& ctx) const { return {cof_bot(ctx), {}}; }
  PartialTerms bot_terms(const DimCtx& ctx) const { return {cof_bot(ctx), {}}; }

  struct Cache {
    std::mutex mu;
    std::map<std::string, std::vector<Term>> entries;
  };

  template <class F>
  std::vector<Term> cached(const std::string& key, F&& build) const {
    {
      std::scoped_lock lock(cache_->mu);
      auto it = cache_->entries.find(key);
      if (it != cache_->entries.end()) return it->second;
    }
    std::vector<Term> value = build();
    std::scoped_lock lock(cache_->mu);
    return cache_->entries.emplace(key, std::move(value)).first->second;
  }

  Presentation pres_;
  NormalizeOptions opts_;
  std::shared_ptr<Cache> cache_;
};

inline CompletionHandle complete(const Presentation& p, NormalizeOptions opts = {}) {
  return CompletionHandle(p, opts);
}

/// Enumerated fragment of the completion of the given sort.
inline std::vector<Term> enumerate(const CompletionHandle& h, SortKind sort, const DimCtx& ctx,
                                   int depth) {
  if (sort == SortKind::Hom) return h.enumerate_homs(ctx, depth);
  return h.enumerate_obs(ctx, depth);
}

// ---------------------------------------------------------------------------
// Extension operations

/// Iso-extension of objects: given x and a compatible partial family of
/// (object, iso-from-x) choices, produce a total object isomorphic to x and
/// agreeing with the family on the cofibration.  Collapses when the
/// cofibration already holds.
inline GluePiece ext_ob(const CompletionHandle& h, const Term& x, const Cofibration& cof,
                        const std::vector<GluePiece>& pieces) {
  if (h.theory() != Theory::CAT) throw ValidationError("ext_ob: object extension needs CAT");
  if (x->sort.kind != SortKind::Ob) throw SortError("ext_ob: x must be an object");
  if (cof.ctx != x->ctx) throw SortError("ext_ob: cofibration context mismatch");
  auto conj = dnf(cof);
  if (conj.size() != pieces.size()) throw SortError("ext_ob: one piece per conjunct required");
  for (std::size_t k = 0; k < conj.size(); ++k) {
    Substitution q = quotient(conj[k]);
    Term xq = h.norm(restrict_term(x, q));
    const GluePiece& p = pieces[k];
    if (p.fwd->sort.kind != SortKind::Hom || p.inv->sort.kind != SortKind::Hom)
      throw SortError("ext_ob: piece isos must be homs");
    if (!h.eq(p.fwd->sort.src, xq) || !h.eq(p.fwd->sort.dst, p.ob) ||
        !h.eq(p.inv->sort.src, p.ob) || !h.eq(p.inv->sort.dst, xq))
      throw SortError("ext_ob: piece iso endpoints do not match on " + conj[k].str());
  }
  PartialGlue part = make_partial(h.pres(), cof, pieces, h.options());
  if (detail::partial_is_top(part)) return part.pieces[0].second;
  Term xn = h.norm(x);
  PartialGlue normed{part.cof, {}};
  for (const auto& [c, p] : part.pieces)
    normed.pieces.emplace_back(c, GluePiece{h.norm(p.ob), h.norm(p.fwd), h.norm(p.inv)});
  return {t_glue_ob(xn, normed), t_glue_fwd(xn, normed), t_glue_inv(xn, normed)};
}

/// Element extension in the SET theory: a total element agreeing with the
/// partial family on the cofibration.
inline Term ext_elt(const CompletionHandle& h, const Term& x, const Cofibration& cof,
                    const std::vector<Term>& pieces) {
  if (h.theory() != Theory::SET) throw ValidationError("ext_elt: element extension needs SET");
  if (x->sort.kind != SortKind::Elt) throw SortError("ext_elt: x must be an element");
  if (cof.ctx != x->ctx) throw SortError("ext_elt: cofibration context mismatch");
  auto conj = dnf(cof);
  if (conj.size() != pieces.size()) throw SortError("ext_elt: one piece per conjunct required");
  PartialTerms part = make_partial(h.pres(), cof, pieces, h.options());
  if (detail::partial_is_top(part)) return h.norm(part.pieces[0].second);
  PartialTerms normed{part.cof, {}};
  for (const auto& [c, p] : part.pieces) normed.pieces.emplace_back(c, h.norm(p));
  return t_ext(h.norm(x), normed);
}

/// Hom extension: the identification space forces the extension to be f
/// itself; pieces must already be equal to f under their conjuncts.
inline Term ext_hom(const CompletionHandle& h, const Term& f, const Cofibration& cof,
                    const std::vector<Term>& pieces) {
  if (f->sort.kind != SortKind::Hom) throw SortError("ext_hom: f must be a hom");
  if (cof.ctx != f->ctx) throw SortError("ext_hom: cofibration context mismatch");
  auto conj = dnf(cof);
  if (conj.size() != pieces.size()) throw SortError("ext_hom: one piece per conjunct required");
  for (std::size_t k = 0; k < conj.size(); ++k) {
    Substitution q = quotient(conj[k]);
    Term target = h.norm(restrict_term(f, q));
    Term piece = h.norm(pieces[k]);
    if (!term_eq(piece, target))
      throw NonPropositionalPiece(conj[k].str(), term_str(piece), term_str(target));
  }
  return h.norm(f);
}

// ---------------------------------------------------------------------------
// Essential surjectivity

struct SurjWitness {
  Term base;       // a generator object
  Term fwd, inv;   // iso base -> ob and back
};

/// Walks glue layers down to the underlying generator, composing the layer
/// isos on the way up.
inline SurjWitness ess_surj_witness(const CompletionHandle& h, const Term& ob) {
  switch (ob->kind) {
    case TermKind::Gen: {
      Term id = t_id(ob);
      return {ob, id, id};
    }
    case TermKind::GlueOb: {
      SurjWitness inner = ess_surj_witness(h, ob->base);
      Term up = t_glue_fwd(ob->base, *ob->glue);
      Term down = t_glue_inv(ob->base, *ob->glue);
      return {inner.base, h.norm(t_comp(up, inner.fwd)), h.norm(t_comp(inner.inv, down))};
    }
    default:
      throw SortError("ess_surj_witness: not a normal object term: " + ob->key);
  }
}

// ---------------------------------------------------------------------------
// Externalization

struct FragmentHom {
  Term term;
  std::size_t src = 0, dst = 0;
  bool iso = false;
};

/// Finite slice of the completion at the empty dimension context.  The
/// composition table stores hom indices, kNotComposable, or kOverflow when
/// the composite's normal form escapes the enumerated fragment.
struct Fragment {
  static constexpr long kNotComposable = -1;
  static constexpr long kOverflow = -2;

  std::vector<Term> objects;
  std::vector<int> depths;
  std::vector<long> glueParent;  // index of the base object, -1 for generators
  std::vector<FragmentHom> homs;
  std::vector<std::vector<long>> compose;  // [g][f] -> hom index of g.f
};

inline int glue_depth(const Term& t) {
  switch (t->kind) {
    case TermKind::GlueOb:
    case TermKind::ExtSet:
      return 1 + glue_depth(t->base);
    default:
      return 0;
  }
}

inline Fragment externalize(const CompletionHandle& h, int depth) {
  Fragment out;
  DimCtx empty;
  out.objects = h.enumerate_obs(empty, depth);
  std::map<std::string, std::size_t> obIndex;
  for (std::size_t k = 0; k < out.objects.size(); ++k) {
    const Term& ob = out.objects[k];
    out.depths.push_back(glue_depth(ob));
    obIndex.emplace(ob->key, k);
  }
  for (std::size_t k = 0; k < out.objects.size(); ++k) {
    const Term& ob = out.objects[k];
    bool layered = ob->kind == TermKind::GlueOb || ob->kind == TermKind::ExtSet;
    out.glueParent.push_back(layered ? static_cast<long>(obIndex.at(ob->base->key)) : -1);
  }
  if (h.theory() != Theory::CAT) return out;

  std::map<std::string, std::size_t> homIndex;
  for (const Term& f : h.enumerate_homs(empty, depth)) {
    FragmentHom fh;
    fh.term = f;
    fh.src = obIndex.at(f->sort.src->key);
    fh.dst = obIndex.at(f->sort.dst->key);
    homIndex.emplace(f->key, out.homs.size());
    out.homs.push_back(fh);
  }
  out.compose.assign(out.homs.size(), std::vector<long>(out.homs.size(), Fragment::kNotComposable));
  for (std::size_t g = 0; g < out.homs.size(); ++g)
    for (std::size_t f = 0; f < out.homs.size(); ++f) {
      if (out.homs[g].src != out.homs[f].dst) continue;
      Term c = h.norm(t_comp(out.homs[g].term, out.homs[f].term));
      auto it = homIndex.find(c->key);
      out.compose[g][f] = it == homIndex.end() ? Fragment::kOverflow
                                               : static_cast<long>(it->second);
    }
  for (std::size_t f = 0; f < out.homs.size(); ++f) {
    const FragmentHom& fh = out.homs[f];
    for (std::size_t g = 0; g < out.homs.size(); ++g) {
      if (out.homs[g].src != fh.dst || out.homs[g].dst != fh.src) continue;
      long gf = out.compose[g][f], fg = out.compose[f][g];
      if (gf < 0 || fg < 0) continue;
      bool leftId = out.homs[static_cast<std::size_t>(gf)].term->kind == TermKind::IdHom;
      bool rightId = out.homs[static_cast<std::size_t>(fg)].term->kind == TermKind::IdHom;
      if (leftId && rightId) {
        out.homs[f].iso = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace rezk
