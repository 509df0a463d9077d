#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rezk/kan.hpp"
#include "rezk/report.hpp"

namespace rezk {

// ---------------------------------------------------------------------------
// Iso calculus

struct IsoTerm {
  Term fwd, inv;
};

inline bool iso_laws_hold(const CompletionHandle& h, const IsoTerm& e) {
  return h.eq(t_comp(e.fwd, e.inv), t_id(e.fwd->sort.dst)) &&
         h.eq(t_comp(e.inv, e.fwd), t_id(e.fwd->sort.src));
}

namespace detail {

/// Coercion iso of an object line along its fill dimension, by structural
/// recursion: generators are degenerate, glue conjugates the inner coercion
/// with the glue iso at each end.
inline IsoTerm wcoe_iso(const CompletionHandle& h, const Term& line, Sym dim,
                        const IntervalExpr& from, const IntervalExpr& to) {
  auto at = [&](const Term& t, const IntervalExpr& e) {
    return h.norm(restrict_term(t, Substitution::face(t->ctx, dim, e)));
  };
  switch (line->kind) {
    case TermKind::Gen: {
      Term o = at(line, from);
      Term id = t_id(o);
      return {id, id};
    }
    case TermKind::GlueOb: {
      Term fwdLine = t_glue_fwd(line->base, *line->glue);
      Term invLine = t_glue_inv(line->base, *line->glue);
      IsoTerm inner = wcoe_iso(h, line->base, dim, from, to);
      Term fwd = h.norm(t_comp(at(fwdLine, to), t_comp(inner.fwd, at(invLine, from))));
      Term inv = h.norm(t_comp(at(fwdLine, from), t_comp(inner.inv, at(invLine, to))));
      return {fwd, inv};
    }
    default:
      throw SortError("wcoe: unsupported head in object line: " + line->key);
  }
}

}  // namespace detail

/// Weak coercion data for an object line: iso family between levels plus
/// the coherence and restriction-compatibility certificate.
struct WCoeStructure {
  const CompletionHandle* h = nullptr;
  Term line;  // normal form, over baseCtx + dim
  Sym dim = 0;
  DimCtx baseCtx;
  Certificate cert;

  IsoTerm iso(const IntervalExpr& from, const IntervalExpr& to) const {
    return detail::wcoe_iso(*h, line, dim, from, to);
  }

  Term at(const IntervalExpr& e) const {
    return h->norm(restrict_term(line, Substitution::face(line->ctx, dim, e)));
  }
};

inline WCoeStructure derive_wcoe_ob(const CompletionHandle& h, const Term& line, Sym dim) {
  if (!line->ctx.contains(dim)) throw SortError("derive_wcoe_ob: fill dimension not in context");
  WCoeStructure w;
  w.h = &h;
  w.line = h.norm(line);
  w.dim = dim;
  w.baseCtx = line->ctx.remove(dim);

  // Coherence: coercion over a degenerate interval is the identity, for
  // both endpoints and a generic level.
  for (const auto& e : {IntervalExpr::end0(), IntervalExpr::end1()}) {
    IsoTerm iso = w.iso(e, e);
    w.cert.check(h, "coherence: level-preserving coercion is the identity", "r:=" + e.str(),
                 iso.fwd, t_id(w.at(e)));
  }
  {
    Sym rv = fresh_for(intern("r"), w.line->ctx);
    DimCtx big = w.line->ctx.extend(rv);
    Term lineR = restrict_term(w.line, Substitution::projection(big, w.line->ctx));
    IntervalExpr vr = IntervalExpr::mk_var(rv);
    IsoTerm iso = detail::wcoe_iso(h, lineR, dim, vr, vr);
    Term o = h.norm(restrict_term(lineR, Substitution::face(big, dim, vr)));
    w.cert.check(h, "coherence: level-preserving coercion is the identity", "r generic",
                 iso.fwd, t_id(o));
  }

  // On glue lines, restricting the derived structure along a conjunct that
  // leaves the fill dimension free matches the structure derived from the
  // restricted line.
  if (w.line->kind == TermKind::GlueOb) {
    for (const auto& [conj, piece] : w.line->glue->pieces) {
      bool touchesDim = false;
      for (const auto& [l, r] : conj.eqs)
        if ((l.is_var() && l.var == dim) || (r.is_var() && r.var == dim)) touchesDim = true;
      if (touchesDim) continue;
      Cofibration acc = cof_top(w.baseCtx);
      for (const auto& [l, r] : conj.eqs) acc = cof_and(acc, cof_eq(w.baseCtx, l, r));
      auto cs = dnf(acc);
      if (cs.size() != 1) continue;
      Substitution q = quotient(cs[0]);
      std::vector<IntervalExpr> im;
      for (Sym v : w.line->ctx.names())
        im.push_back(v == dim ? IntervalExpr::mk_var(dim) : q.image_of(v));
      Substitution qz(q.dom().extend(dim), w.line->ctx, std::move(im));
      Term lineR = h.norm(restrict_term(w.line, qz));
      for (const auto& [from, to] : std::vector<std::pair<IntervalExpr, IntervalExpr>>{
               {IntervalExpr::end0(), IntervalExpr::end1()},
               {IntervalExpr::end1(), IntervalExpr::end0()}}) {
        IsoTerm whole = w.iso(from, to);
        IsoTerm part = detail::wcoe_iso(h, lineR, dim, q.apply(from), q.apply(to));
        w.cert.check(h, "restriction compatibility of the coercion structure",
                     conj.str() + ", " + from.str() + "->" + to.str(),
                     restrict_term(whole.fwd, q), part.fwd);
      }
    }
  }
  return w;
}

/// Naturality of a hom line in the coercion structures of its endpoint
/// lines, composed structurally along the word.
inline Certificate derive_wcoe_hom(const CompletionHandle& h, const Term& line,
                                   const WCoeStructure& src, const WCoeStructure& dst) {
  Certificate cert;
  Term nline = h.norm(line);
  Sym dim = src.dim;

  // Composite words: certify each factor against the middle object line,
  // then the whole.
  if (nline->kind == TermKind::Comp) {
    WCoeStructure mid = derive_wcoe_ob(h, nline->b->sort.dst, dim);
    cert.merge(derive_wcoe_hom(h, nline->b, src, mid));
    cert.merge(derive_wcoe_hom(h, nline->a, mid, dst));
  }

  struct Level {
    std::string name;
    IntervalExpr expr;
    bool generic = false;
  };
  Sym rv = fresh_for(intern("r"), nline->ctx);
  Sym sv = fresh_for(intern("s"), nline->ctx.extend(rv));
  std::vector<Level> levels = {{"0", IntervalExpr::end0(), false},
                               {"1", IntervalExpr::end1(), false},
                               {"generic", IntervalExpr::mk_var(rv), true},
                               {"generic'", IntervalExpr::mk_var(sv), true}};
  for (const auto& from : levels)
    for (const auto& to : levels) {
      DimCtx big = nline->ctx;
      for (const Level* l : {&from, &to})
        if (l->generic && !big.contains(l->expr.var)) big = big.extend(l->expr.var);
      Substitution pad = Substitution::projection(big, nline->ctx);
      Term lineE = restrict_term(nline, pad);
      Term srcLineE = restrict_term(src.line, pad);
      Term dstLineE = restrict_term(dst.line, pad);
      auto face = [&](const Term& t, const IntervalExpr& e) {
        return h.norm(restrict_term(t, Substitution::face(big, dim, e)));
      };
      IsoTerm srcIso = detail::wcoe_iso(h, srcLineE, dim, from.expr, to.expr);
      IsoTerm dstIso = detail::wcoe_iso(h, dstLineE, dim, from.expr, to.expr);
      cert.check(h, "hom coercion naturality",
                 from.name + "->" + to.name + " for " + term_str(nline),
                 t_comp(dstIso.fwd, face(lineE, from.expr)),
                 t_comp(face(lineE, to.expr), srcIso.fwd));
    }
  return cert;
}

// ---------------------------------------------------------------------------
// Pseudo-reflexive-graph instances for the category theory

/// Object instance: vertices are objects, edges are isos; extension is
/// iso-extension, and the reflexive loop contracts to the identity.
inline PRGInstance make_cat_ob_prg_instance(const CompletionHandle& h) {
  PRGInstance inst;
  inst.name = "cat-ob";
  inst.coe = [&h](const Term& line, Sym z, const IntervalExpr& from, const IntervalExpr& to) {
    IsoTerm iso = detail::wcoe_iso(h, h.norm(line), z, from, to);
    return std::pair<Term, Term>{iso.fwd, iso.inv};
  };
  inst.extendE = [&h](const IntervalExpr&, const Term& anchor, const Cofibration& cof,
                      const std::vector<PRGElem>& pieces, Certificate&, const std::string&) {
    std::vector<GluePiece> gp;
    for (const auto& p : pieces) gp.push_back({p.main, p.edgeFwd, p.edgeInv});
    GluePiece res = ext_ob(h, anchor, cof, gp);
    return PRGElem{res.ob, res.fwd, res.inv};
  };
  inst.extendR = [&h](const Term& anchor, const Cofibration& cof,
                      const std::vector<PRGElem>& pieces, Certificate& cert,
                      const std::string& where) {
    auto conj = dnf(cof);
    for (std::size_t k = 0; k < conj.size(); ++k) {
      Substitution q = quotient(conj[k]);
      cert.check(h, where + ": reflexive-loop edge is the identity", "on " + conj[k].str(),
                 pieces[k].edgeFwd, t_id(h.norm(restrict_term(anchor, q))));
    }
    Term a = h.norm(anchor);
    Term id = t_id(a);
    return PRGElem{a, id, id};
  };
  return inst;
}

/// Hom instance for a fixed pair of endpoint object lines: the fiber over a
/// coercion square has a unique element, the conjugate by the endpoint
/// coercions.
inline PRGInstance make_cat_hom_prg_instance(const CompletionHandle& h, const Term& xLine,
                                             const Term& yLine, Sym z,
                                             const IntervalExpr& fromLevel) {
  PRGInstance inst;
  inst.name = "cat-hom";
  inst.coe = [](const Term&, Sym, const IntervalExpr&, const IntervalExpr&) {
    return std::pair<Term, Term>{nullptr, nullptr};
  };
  Term xn = h.norm(xLine), yn = h.norm(yLine);
  inst.extendE = [&h, xn, yn, z, fromLevel](const IntervalExpr& level, const Term& anchor,
                                            const Cofibration& cof,
                                            const std::vector<PRGElem>& pieces,
                                            Certificate& cert, const std::string& where) {
    IsoTerm xIso = detail::wcoe_iso(h, xn, z, fromLevel, level);
    IsoTerm yIso = detail::wcoe_iso(h, yn, z, fromLevel, level);
    DimCtx base = xn->ctx.remove(z);
    Term yFwd = yIso.fwd, xInv = xIso.inv;
    if (anchor->ctx != base) {
      Substitution pad = Substitution::projection(anchor->ctx, base);
      yFwd = restrict_term(yFwd, pad);
      xInv = restrict_term(xInv, pad);
    }
    Term main = h.norm(t_comp(yFwd, t_comp(anchor, xInv)));
    auto conj = dnf(cof);
    for (std::size_t k = 0; k < conj.size(); ++k) {
      Substitution q = quotient(conj[k]);
      cert.check(h, where + ": piece agrees with the unique conjugate", "on " + conj[k].str(),
                 restrict_term(main, q), pieces[k].main);
    }
    return PRGElem{main, nullptr, nullptr};
  };
  inst.extendR = [&h](const Term& anchor, const Cofibration&, const std::vector<PRGElem>&,
                      Certificate&, const std::string&) {
    return PRGElem{h.norm(anchor), nullptr, nullptr};
  };
  return inst;
}

// ---------------------------------------------------------------------------
// Functors between base presentations and the split classes

struct FunctorSpec {
  Presentation src, dst;
  std::vector<std::pair<Sym, Sym>> obMap;
  std::vector<std::pair<Sym, std::vector<Sym>>> homMap;  // image word, composition order

  Sym ob_image(Sym x) const {
    for (const auto& [a, b] : obMap)
      if (a == x) return b;
    throw ValidationError("functor: no image for object " + symbol_name(x));
  }

  const std::vector<Sym>& hom_image(Sym f) const {
    for (const auto& [a, w] : homMap)
      if (a == f) return w;
    throw ValidationError("functor: no image for hom " + symbol_name(f));
  }

  void validate() const {
    for (Sym x : src.obGens)
      if (!dst.has_ob(ob_image(x)))
        throw ValidationError("functor: object image missing in target");
    for (const auto& hg : src.homGens) {
      const auto& w = hom_image(hg.name);
      Sym at = ob_image(hg.src);
      for (std::size_t k = w.size(); k-- > 0;) {
        const HomGen* g = dst.find_hom(w[k]);
        if (!g) throw ValidationError("functor: unknown target hom " + symbol_name(w[k]));
        if (g->src != at) throw ValidationError("functor: image word does not compose");
        at = g->dst;
      }
      if (at != ob_image(hg.dst))
        throw ValidationError("functor: image word has the wrong target");
    }
  }
};

/// Image of a base word term under the functor.
inline Term apply_functor(const FunctorSpec& F, const Term& t) {
  switch (t->kind) {
    case TermKind::Gen:
      if (t->sort.kind == SortKind::Hom) {
        const HomGen* hg = F.src.find_hom(t->name);
        return word_term(F.dst, F.hom_image(t->name), F.ob_image(hg->src), t->ctx);
      }
      return ob_term(F.dst, F.ob_image(t->name), t->ctx);
    case TermKind::IdHom:
      return t_id(apply_functor(F, t->a));
    case TermKind::Comp:
      return t_comp(apply_functor(F, t->a), apply_functor(F, t->b));
    default:
      throw SortError("apply_functor: not a base term: " + t->key);
  }
}

struct BaseHom {
  Term term;  // normal form over the empty context
  Sym src, dst;
};

/// All base homs with word length up to depth, deduplicated by normal form.
/// Identities are included at every object.
inline std::vector<BaseHom> enumerate_base_homs(const Presentation& p, int depth,
                                                NormalizeOptions opts = {}) {
  std::vector<BaseHom> out;
  std::set<std::string> seen;
  auto push = [&](const Term& t, Sym s, Sym d) {
    Term n = normalize(p, t, opts);
    if (seen.insert(term_key(n)).second) out.push_back({n, s, d});
  };
  for (Sym x : p.obGens) push(t_id(ob_term(p, x, DimCtx())), x, x);
  std::vector<BaseHom> layer;
  for (const auto& hg : p.homGens) {
    Term t = hom_term(p, hg.name, DimCtx());
    push(t, hg.src, hg.dst);
    layer.push_back({normalize(p, t, opts), hg.src, hg.dst});
  }
  for (int len = 2; len <= depth; ++len) {
    std::vector<BaseHom> next;
    for (const auto& w : layer)
      for (const auto& hg : p.homGens) {
        if (hg.src != w.dst) continue;
        Term t = normalize(p, t_comp(hom_term(p, hg.name, DimCtx()), w.term), opts);
        if (seen.insert(term_key(t)).second) {
          out.push_back({t, w.src, hg.dst});
          next.push_back({t, w.src, hg.dst});
        }
      }
    layer = std::move(next);
  }
  return out;
}

namespace detail {

inline const BaseHom* find_two_sided_inverse(const Presentation& p,
                                             const std::vector<BaseHom>& homs,
                                             const BaseHom& e, NormalizeOptions opts) {
  Term idSrc = normalize(p, t_id(ob_term(p, e.src, DimCtx())), opts);
  Term idDst = normalize(p, t_id(ob_term(p, e.dst, DimCtx())), opts);
  for (const auto& cand : homs) {
    if (cand.src != e.dst || cand.dst != e.src) continue;
    if (term_eq(normalize(p, t_comp(cand.term, e.term), opts), idSrc) &&
        term_eq(normalize(p, t_comp(e.term, cand.term), opts), idDst))
      return &cand;
  }
  return nullptr;
}

}  // namespace detail

/// Bounded dimension-0 check of the three split classes for a functor
/// between base presentations.
inline Report check_split_classes(const FunctorSpec& F, int depth, NormalizeOptions opts = {}) {
  F.src.validate();
  F.dst.validate();
  F.validate();
  Report rep;
  std::vector<BaseHom> srcHoms, dstHoms;
  std::vector<Term> srcImages;
  try {
    srcHoms = enumerate_base_homs(F.src, depth, opts);
    dstHoms = enumerate_base_homs(F.dst, depth, opts);
    for (const auto& w : srcHoms)
      srcImages.push_back(normalize(F.dst, apply_functor(F, w.term), opts));
  } catch (const BudgetExceeded& b) {
    rep.add_unknown("setup.enumerate", "setup", b.what());
    return rep;
  }

  // Split essential surjectivity: every target object is isomorphic to an
  // image, witnessed inside the enumerated fragment.
  for (Sym y : F.dst.obGens) {
    std::string id = "weq.ess_surj." + symbol_name(y);
    try {
      bool found = false;
      std::string witness;
      for (Sym x : F.src.obGens) {
        Sym fx = F.ob_image(x);
        for (const auto& e : dstHoms) {
          if (e.src != fx || e.dst != y) continue;
          if (detail::find_two_sided_inverse(F.dst, dstHoms, e, opts)) {
            found = true;
            witness = symbol_name(x) + " via " + term_str(e.term);
            break;
          }
        }
        if (found) break;
      }
      rep.add(id, "weq", found, witness);
    } catch (const BudgetExceeded& b) {
      rep.add_unknown(id, "weq", b.what());
    }
  }

  // Fullness and hom-surjectivity obligations: one per target hom between
  // image objects.
  for (const auto& g : dstHoms) {
    bool betweenImages = false;
    for (Sym x1 : F.src.obGens)
      for (Sym x2 : F.src.obGens)
        if (F.ob_image(x1) == g.src && F.ob_image(x2) == g.dst) betweenImages = true;
    if (!betweenImages) continue;
    std::string id = "weq.full." + symbol_name(g.src) + "->" + symbol_name(g.dst) + ":" +
                     term_str(g.term);
    try {
      bool found = false;
      std::string witness;
      for (std::size_t k = 0; k < srcHoms.size(); ++k) {
        if (F.ob_image(srcHoms[k].src) != g.src || F.ob_image(srcHoms[k].dst) != g.dst) continue;
        if (term_eq(srcImages[k], g.term)) {
          found = true;
          witness = term_str(srcHoms[k].term);
          break;
        }
      }
      rep.add(id, "weq", found, witness);
      rep.add("tfib.hom." + symbol_name(g.src) + "->" + symbol_name(g.dst) + ":" +
                  term_str(g.term),
              "tfib", found, witness);
    } catch (const BudgetExceeded& b) {
      rep.add_unknown(id, "weq", b.what());
    }
  }

  // Faithfulness: equal images force equal sources (also the split
  // surjectivity on equality proofs).
  for (std::size_t a = 0; a < srcHoms.size(); ++a)
    for (std::size_t b = a + 1; b < srcHoms.size(); ++b) {
      if (srcHoms[a].src != srcHoms[b].src || srcHoms[a].dst != srcHoms[b].dst) continue;
      if (!term_eq(srcImages[a], srcImages[b])) continue;
      std::string id = "weq.faithful." + term_str(srcHoms[a].term) + "=" +
                       term_str(srcHoms[b].term);
      bool same = term_eq(srcHoms[a].term, srcHoms[b].term);
      rep.add(id, "weq", same, term_str(srcImages[a]));
      rep.add("tfib.eqhom." + term_str(srcHoms[a].term) + "=" + term_str(srcHoms[b].term),
              "tfib", same);
    }

  // Split trivial fibration also needs on-the-nose object surjectivity.
  for (Sym y : F.dst.obGens) {
    bool hit = false;
    std::string witness;
    for (Sym x : F.src.obGens)
      if (F.ob_image(x) == y) {
        hit = true;
        witness = symbol_name(x);
        break;
      }
    rep.add("tfib.ob." + symbol_name(y), "tfib", hit, witness);
  }

  // Split fibration: every iso out of an image lifts to an iso out of its
  // preimage with the same image.
  for (Sym x : F.src.obGens) {
    Sym fx = F.ob_image(x);
    for (const auto& e : dstHoms) {
      if (e.src != fx) continue;
      if (!detail::find_two_sided_inverse(F.dst, dstHoms, e, opts)) continue;
      std::string id = "fib.iso_lift." + symbol_name(x) + ":" + term_str(e.term);
      try {
        bool found = false;
        std::string witness;
        for (std::size_t k = 0; k < srcHoms.size(); ++k) {
          if (srcHoms[k].src != x) continue;
          if (!detail::find_two_sided_inverse(F.src, srcHoms, srcHoms[k], opts)) continue;
          if (term_eq(srcImages[k], e.term)) {
            found = true;
            witness = term_str(srcHoms[k].term);
            break;
          }
        }
        rep.add(id, "fib", found, witness);
      } catch (const BudgetExceeded& b) {
        rep.add_unknown(id, "fib", b.what());
      }
    }
  }

  rep.sort_by_id();
  return rep;
}

}  // namespace rezk
