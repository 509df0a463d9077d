#pragma once

#include <set>
#include <string>
#include <vector>

#include "rezk/cat.hpp"

namespace rezk {

namespace detail {

inline bool is_base_term(const Term& t) {
  switch (t->kind) {
    case TermKind::Gen:
      return true;
    case TermKind::IdHom:
      return is_base_term(t->a);
    case TermKind::Comp:
      return is_base_term(t->a) && is_base_term(t->b);
    default:
      return false;
  }
}

inline void cert_to_report(Report& rep, const std::string& id, const std::string& kind,
                           const Certificate& c) {
  if (c.pass()) {
    rep.add(id, kind, true);
    return;
  }
  std::string witness;
  for (const auto& e : c.entries)
    if (!e.pass) {
      witness = e.desc + " @ " + e.where;
      break;
    }
  rep.add(id, kind, false, witness);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Boundary-law scan

struct BoundaryScan {
  std::size_t nodes = 0;    // glue/ext nodes visited
  std::size_t checked = 0;  // per-conjunct equalities checked
  std::size_t failed = 0;

  void merge(const BoundaryScan& o) {
    nodes += o.nodes;
    checked += o.checked;
    failed += o.failed;
  }
};

namespace detail {

inline void scan_term(const CompletionHandle& h, const Term& t, BoundaryScan& out,
                      std::set<std::string>& seen) {
  if (!t || !seen.insert(t->key).second) return;
  if (t->glue) {
    ++out.nodes;
    Term obLine = t->kind == TermKind::GlueOb ? t : t_glue_ob(t->base, *t->glue);
    Term fwdLine = t_glue_fwd(t->base, *t->glue);
    for (const auto& [c, p] : t->glue->pieces) {
      Substitution q = quotient(c);
      out.checked += 2;
      if (!h.eq(restrict_term(obLine, q), p.ob)) ++out.failed;
      if (!h.eq(restrict_term(fwdLine, q), p.fwd)) ++out.failed;
      scan_term(h, p.ob, out, seen);
      scan_term(h, p.fwd, out, seen);
      scan_term(h, p.inv, out, seen);
    }
  }
  if (t->ext) {
    ++out.nodes;
    for (const auto& [c, p] : t->ext->pieces) {
      Substitution q = quotient(c);
      ++out.checked;
      if (!h.eq(restrict_term(t, q), p)) ++out.failed;
      scan_term(h, p, out, seen);
    }
  }
  scan_term(h, t->a, out, seen);
  scan_term(h, t->b, out, seen);
  scan_term(h, t->base, out, seen);
}

}  // namespace detail

/// Re-verify the per-conjunct collapse equality for every glue/ext node
/// reachable from the given terms.  Used as an independent final pass over
/// everything a verification run constructed.
inline BoundaryScan scan_boundaries(const CompletionHandle& h, const std::vector<Term>& roots) {
  BoundaryScan out;
  std::set<std::string> seen;
  for (const auto& t : roots)
    if (t) detail::scan_term(h, t, out, seen);
  return out;
}

inline std::vector<Term> certificate_terms(const Certificate& c) {
  std::vector<Term> out;
  for (const auto& e : c.entries) {
    out.push_back(e.left);
    out.push_back(e.right);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dimension-0 weak equivalence of the base inclusion

inline Report verify_weq_dim0(const CompletionHandle& h, int depth) {
  Report rep;
  if (h.theory() != Theory::CAT)
    throw ValidationError("verify_weq_dim0: needs a category completion");
  try {
    auto obs = enumerate(h, SortKind::Ob, DimCtx(), depth);
    for (const auto& ob : obs) {
      std::string id = "ess_surj." + term_str(ob);
      SurjWitness w = ess_surj_witness(h, ob);
      bool pass = w.base->kind == TermKind::Gen &&
                  h.eq(t_comp(w.inv, w.fwd), t_id(w.base)) &&
                  h.eq(t_comp(w.fwd, w.inv), t_id(h.norm(ob)));
      rep.add(id, "ess_surj", pass, term_str(w.base));
    }

    auto baseHoms = enumerate_base_homs(h.pres(), depth + 3, h.options());
    auto homs = enumerate(h, SortKind::Hom, DimCtx(), depth);
    for (const auto& f : homs) {
      if (f->sort.src->kind != TermKind::Gen || f->sort.dst->kind != TermKind::Gen) continue;
      std::string id = "full." + term_str(f->sort.src) + "->" + term_str(f->sort.dst) + ":" +
                       term_str(f);
      bool pass = false;
      std::string witness;
      if (detail::is_base_term(f)) {
        for (const auto& w : baseHoms)
          if (term_eq(h.norm(w.term), f)) {
            pass = true;
            witness = term_str(w.term);
            break;
          }
      }
      rep.add(id, "full", pass, witness);
    }

    // Faithfulness as conservativity: completion normal forms of base homs
    // are their base normal forms, so equality downstairs is reflected.
    for (const auto& w : baseHoms) {
      std::string id = "faithful." + symbol_name(w.src) + "->" + symbol_name(w.dst) + ":" +
                       term_str(w.term);
      rep.add(id, "faithful", term_eq(h.norm(w.term), w.term) && detail::is_base_term(w.term));
    }
    for (std::size_t a = 0; a < baseHoms.size(); ++a)
      for (std::size_t b = a + 1; b < baseHoms.size(); ++b) {
        if (baseHoms[a].src != baseHoms[b].src || baseHoms[a].dst != baseHoms[b].dst) continue;
        if (!h.eq(baseHoms[a].term, baseHoms[b].term)) continue;
        rep.add("faithful.pair." + term_str(baseHoms[a].term) + "=" + term_str(baseHoms[b].term),
                "faithful", term_eq(baseHoms[a].term, baseHoms[b].term));
      }
  } catch (const BudgetExceeded& b) {
    rep.add_unknown("weq.budget", "budget", b.what());
  }
  rep.sort_by_id();
  return rep;
}

// ---------------------------------------------------------------------------
// Completeness sampling

namespace detail {

inline Cofibration sample_cof(Rng& rng, const DimCtx& ctx) {
  std::vector<Cofibration> pool = {cof_bot(ctx)};
  std::vector<IntervalExpr> exprs = {IntervalExpr::end0(), IntervalExpr::end1()};
  for (Sym v : ctx.names()) exprs.push_back(IntervalExpr::mk_var(v));
  for (std::size_t a = 0; a < exprs.size(); ++a)
    for (std::size_t b = a + 1; b < exprs.size(); ++b)
      pool.push_back(cof_eq(ctx, exprs[a], exprs[b]));
  if (!ctx.empty()) {
    IntervalExpr v = IntervalExpr::mk_var(ctx.at(0));
    pool.push_back(cof_or(cof_eq(ctx, v, IntervalExpr::end0()),
                          cof_eq(ctx, v, IntervalExpr::end1())));
  }
  return pool[rng.below(pool.size())];
}

inline DimCtx sample_ctx(Rng& rng, int maxVars) {
  static const char* pool[] = {"i", "j"};
  DimCtx ctx;
  int n = int(rng.below(std::uint64_t(maxVars) + 1));
  for (int k = 0; k < n && k < 2; ++k) ctx = ctx.extend(intern(pool[k]));
  return ctx;
}

inline Term sample_elt(const CompletionHandle& h, Rng& rng, const DimCtx& ctx, int depth) {
  const auto& obs = h.pres().obGens;
  Term x = ob_term(h.pres(), obs[rng.below(obs.size())], ctx);
  if (depth <= 0 || rng.flip()) return x;
  Cofibration cof = sample_cof(rng, ctx);
  Term w = sample_elt(h, rng, ctx, depth - 1);
  std::vector<Term> pieces;
  for (const auto& c : dnf(cof)) pieces.push_back(restrict_term(w, quotient(c)));
  return t_ext(x, make_partial(h.pres(), cof, pieces, h.options()));
}

inline Term sample_ob(const CompletionHandle& h, Rng& rng, const DimCtx& ctx, int depth) {
  const auto& obs = h.pres().obGens;
  Term x = h.norm(ob_term(h.pres(), obs[rng.below(obs.size())], ctx));
  if (depth <= 0 || rng.flip()) return x;
  Term anchor = sample_ob(h, rng, ctx, depth - 1);
  Cofibration cof = sample_cof(rng, ctx);
  Term w = sample_ob(h, rng, ctx, depth - 1);
  SurjWitness wa = ess_surj_witness(h, anchor);
  SurjWitness ww = ess_surj_witness(h, w);
  Term fwd, inv;
  if (term_eq(wa.base, ww.base)) {
    fwd = h.norm(t_comp(ww.fwd, wa.inv));
    inv = h.norm(t_comp(wa.fwd, ww.inv));
  } else {
    w = anchor;
    fwd = t_id(anchor);
    inv = fwd;
  }
  std::vector<GluePiece> pieces;
  for (const auto& c : dnf(cof)) {
    Substitution q = quotient(c);
    pieces.push_back({h.norm(restrict_term(w, q)), h.norm(restrict_term(fwd, q)),
                      h.norm(restrict_term(inv, q))});
  }
  return ext_ob(h, anchor, cof, pieces).ob;
}

/// A coherent filling problem whose tube restricts one total line.
inline FillingProblem sample_problem(const CompletionHandle& h, Rng& rng, const Term& line,
                                     Sym fillDim, bool concreteS) {
  FillingProblem p;
  p.ctx = line->ctx.remove(fillDim);
  p.fillDim = fillDim;
  std::vector<IntervalExpr> levels = {IntervalExpr::end0(), IntervalExpr::end1()};
  for (Sym v : p.ctx.names()) levels.push_back(IntervalExpr::mk_var(v));
  p.r = levels[rng.below(levels.size())];
  if (concreteS || rng.flip())
    p.s = levels[rng.below(levels.size())];
  else
    p.s = std::nullopt;
  p.cof = sample_cof(rng, p.ctx);
  for (const auto& c : dnf(p.cof)) {
    Substitution q = quotient(c);
    std::vector<IntervalExpr> im;
    for (Sym v : line->ctx.names())
      im.push_back(v == fillDim ? IntervalExpr::mk_var(fillDim) : q.image_of(v));
    p.tube.push_back(restrict_term(line, Substitution(q.dom().extend(fillDim), line->ctx, im)));
  }
  std::vector<IntervalExpr> atR;
  for (Sym v : line->ctx.names())
    atR.push_back(v == fillDim ? p.r : IntervalExpr::mk_var(v));
  p.base = h.norm(restrict_term(line, Substitution(p.ctx, line->ctx, atR)));
  return p;
}

}  // namespace detail

/// Seeded sampling of the completeness structure: extensions extend, any
/// two extensions are path-connected, and the derived weak composition
/// certifies through the pseudo-reflexive-graph instances.
inline Report verify_completeness(const CompletionHandle& h, int samples, std::uint64_t seed,
                                  std::vector<Term>* createdOut = nullptr) {
  Report rep;
  Rng rng(seed);
  Sym z = intern("z");
  auto created = [&](const Term& t) {
    if (createdOut) createdOut->push_back(t);
  };

  for (int k = 0; k < samples; ++k) {
    std::string tag = "sample" + std::to_string(k);
    try {
      if (h.theory() == Theory::SET) {
        DimCtx ctx = detail::sample_ctx(rng, 2);
        Term x = h.norm(detail::sample_elt(h, rng, ctx, 2));
        Term y = h.norm(detail::sample_elt(h, rng, ctx, 2));
        PathResult pr = center_and_path(h, x, y);
        detail::cert_to_report(rep, tag + ".path", "path", pr.cert);
        created(pr.center);
        created(pr.path);

        Term line = h.norm(detail::sample_elt(h, rng, ctx.extend(z), 2));
        FillingProblem p = detail::sample_problem(h, rng, line, z, false);
        KanResult direct = wcom_from_ext(h, p);
        detail::cert_to_report(rep, tag + ".wcom", "wcom", direct.cert);
        created(direct.filler);
        if (direct.path) created(*direct.path);

        KanResult derived = fibrancy_from_prg(h, make_set_prg_instance(h), p);
        bool same = derived.cert.pass() && term_eq(derived.filler, direct.filler) &&
                    derived.path.has_value() == direct.path.has_value() &&
                    (!derived.path || term_eq(*derived.path, *direct.path));
        rep.add(tag + ".wcom_agrees", "wcom", same);
        continue;
      }

      DimCtx ctx = detail::sample_ctx(rng, 2);
      Term x = detail::sample_ob(h, rng, ctx, 2);

      // Extension of a sampled boundary family.
      Cofibration cof = detail::sample_cof(rng, ctx);
      Term w = detail::sample_ob(h, rng, ctx, 2);
      SurjWitness wx = ess_surj_witness(h, x);
      SurjWitness ww = ess_surj_witness(h, w);
      Term fwd, inv;
      if (term_eq(wx.base, ww.base)) {
        fwd = h.norm(t_comp(ww.fwd, wx.inv));
        inv = h.norm(t_comp(wx.fwd, ww.inv));
      } else {
        w = x;
        fwd = t_id(x);
        inv = fwd;
      }
      std::vector<GluePiece> pieces;
      for (const auto& c : dnf(cof)) {
        Substitution q = quotient(c);
        pieces.push_back({h.norm(restrict_term(w, q)), h.norm(restrict_term(fwd, q)),
                          h.norm(restrict_term(inv, q))});
      }
      GluePiece res = ext_ob(h, x, cof, pieces);
      created(res.ob);
      Certificate extCert;
      auto conj = dnf(cof);
      for (std::size_t c = 0; c < conj.size(); ++c) {
        Substitution q = quotient(conj[c]);
        extCert.check(h, "extension boundary (object)", "on " + conj[c].str(),
                      restrict_term(res.ob, q), pieces[c].ob);
        extCert.check(h, "extension boundary (iso)", "on " + conj[c].str(),
                      restrict_term(res.fwd, q), pieces[c].fwd);
      }
      detail::cert_to_report(rep, tag + ".ext_ob", "ext", extCert);

      // Path between two extensions of the empty family.
      GluePiece e1 = ext_ob(h, x, cof_bot(ctx), {});
      GluePiece e2{h.norm(x), t_id(h.norm(x)), t_id(h.norm(x))};
      CatPathResult path = center_and_path(h, x, e1, e2);
      detail::cert_to_report(rep, tag + ".path", "path", path.cert);
      created(path.center.ob);
      created(path.path.ob);

      // Derived weak composition on objects.
      Term obLine = detail::sample_ob(h, rng, ctx.extend(z), 2);
      FillingProblem pOb = detail::sample_problem(h, rng, obLine, z, false);
      KanResult wOb = fibrancy_from_prg(h, make_cat_ob_prg_instance(h), pOb);
      detail::cert_to_report(rep, tag + ".wcom_ob", "wcom", wOb.cert);
      created(wOb.filler);
      if (wOb.path) created(*wOb.path);

      // Derived weak composition on homs between two sampled object lines.
      DimCtx ctxZ = ctx.extend(z);
      Term xLine = detail::sample_ob(h, rng, ctxZ, 2);
      Term yLine = detail::sample_ob(h, rng, ctxZ, 2);
      SurjWitness wxL = ess_surj_witness(h, xLine);
      SurjWitness wyL = ess_surj_witness(h, yLine);
      Term mid = wxL.base;
      Term cross = term_eq(wxL.base, wyL.base)
                       ? t_id(mid)
                       : [&] {
                           // Join the two base objects through a base hom
                           // if one exists, else fall back to equal lines.
                           for (const auto& hg : h.pres().homGens) {
                             Term s = ob_term(h.pres(), hg.src, ctxZ);
                             Term d = ob_term(h.pres(), hg.dst, ctxZ);
                             if (term_eq(h.norm(s), wxL.base) && term_eq(h.norm(d), wyL.base))
                               return hom_term(h.pres(), hg.name, ctxZ);
                           }
                           return Term();
                         }();
      if (!cross) {
        yLine = xLine;
        wyL = wxL;
        cross = t_id(mid);
      }
      Term homLine = h.norm(t_comp(wyL.fwd, t_comp(cross, wxL.inv)));
      FillingProblem pHom = detail::sample_problem(h, rng, homLine, z, true);
      PRGInstance homInst = make_cat_hom_prg_instance(h, xLine, yLine, z, pHom.r);
      KanResult wHom = fibrancy_from_prg(h, homInst, pHom);
      detail::cert_to_report(rep, tag + ".wcom_hom", "wcom", wHom.cert);
      created(wHom.filler);
      if (wHom.path) created(*wHom.path);
    } catch (const BudgetExceeded& b) {
      rep.add_unknown(tag + ".budget", "budget", b.what());
    }
  }
  rep.sort_by_id();
  return rep;
}

}  // namespace rezk
