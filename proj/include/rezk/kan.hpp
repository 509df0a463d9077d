#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rezk/completion.hpp"

namespace rezk {

// ---------------------------------------------------------------------------
// Certificates

struct CertEntry {
  std::string desc;    // which equation
  std::string where;   // instantiation / substitution context
  Term left, right;    // stored as normal forms
  bool pass = false;
};

/// Machine-checkable residue of a construction's side conditions: a list of
/// normal-form equalities, plus free-form notes about formula readings.
struct Certificate {
  std::vector<CertEntry> entries;
  std::vector<std::string> notes;

  bool pass() const {
    for (const auto& e : entries)
      if (!e.pass) return false;
    return true;
  }

  void check(const CompletionHandle& h, std::string desc, std::string where, const Term& l,
             const Term& r) {
    Term ln = h.norm(l), rn = h.norm(r);
    entries.push_back({std::move(desc), std::move(where), ln, rn, term_eq(ln, rn)});
  }

  void note(std::string s) { notes.push_back(std::move(s)); }

  void merge(const Certificate& c) {
    entries.insert(entries.end(), c.entries.begin(), c.entries.end());
    notes.insert(notes.end(), c.notes.begin(), c.notes.end());
  }
};

// ---------------------------------------------------------------------------
// Filling problems

/// An open box: base b at level r, tube t on the cofibration running along
/// the fill dimension, target level s (or symbolic when absent).
struct FillingProblem {
  DimCtx ctx;
  Sym fillDim = 0;                // z, fresh for ctx
  IntervalExpr r;
  std::optional<IntervalExpr> s;  // nullopt: fill to a generic level
  Cofibration cof;                // over ctx
  std::vector<Term> tube;         // per canonical conjunct, over quotient + z
  Term base;                      // over ctx
};

struct KanResult {
  Term filler;               // over fillerCtx
  std::optional<Term> path;  // over fillerCtx + pathDim
  DimCtx fillerCtx;
  Sym pathDim = 0;
  std::optional<Sym> sVar;   // present when s was symbolic
  Certificate cert;
};

namespace detail {

inline Sym fresh_sym(const char* base, const DimCtx& ctx) {
  return fresh_for(intern(base), ctx);
}

/// Substitution Q -> Q+z setting z to `value` (an expression over Q).
inline Substitution set_last(const DimCtx& q, Sym z, const IntervalExpr& value) {
  DimCtx qz = q.extend(z);
  std::vector<IntervalExpr> im;
  im.reserve(qz.size());
  for (Sym v : q.names()) im.push_back(IntervalExpr::mk_var(v));
  im.push_back(value);
  return Substitution(q, qz, std::move(im));
}

struct LiftedProblem {
  DimCtx ctx;        // problem context, extended by sVar when symbolic
  Sym fillDim = 0;
  IntervalExpr rE, sE;
  Cofibration cof;   // over ctx
  std::vector<std::pair<ConjunctSystem, Term>> tube;  // aligned with dnf(cof)
  Term base;
  std::optional<Sym> sVar;
};

inline LiftedProblem lift_problem(const FillingProblem& p) {
  LiftedProblem L;
  L.fillDim = p.fillDim;
  L.rE = p.r;
  auto conj = dnf(p.cof);
  if (conj.size() != p.tube.size())
    throw SortError("filling problem: one tube piece per satisfiable conjunct required");
  if (p.s) {
    L.ctx = p.ctx;
    L.sE = *p.s;
    L.cof = p.cof;
    L.base = p.base;
    for (std::size_t k = 0; k < conj.size(); ++k) L.tube.emplace_back(conj[k], p.tube[k]);
    return L;
  }
  Sym sv = fresh_sym("s", p.ctx.extend(p.fillDim));
  L.sVar = sv;
  L.ctx = p.ctx.extend(sv);
  L.sE = IntervalExpr::mk_var(sv);
  Substitution proj = Substitution::projection(L.ctx, p.ctx);
  L.cof = subst_cof(p.cof, proj);
  L.base = restrict_term(p.base, proj);
  auto conjS = dnf(L.cof);
  if (conjS.size() != conj.size()) throw SortError("filling problem: lifting changed conjuncts");
  for (std::size_t k = 0; k < conj.size(); ++k) {
    Substitution q = quotient(conj[k]);
    Substitution qs = quotient(conjS[k]);
    // The lifted quotient context is the original one plus sv.
    Substitution lift = Substitution::projection(qs.dom().extend(p.fillDim),
                                                 q.dom().extend(p.fillDim));
    L.tube.emplace_back(conjS[k], restrict_term(p.tube[k], lift));
  }
  return L;
}

/// Tube payload for any g : D -> ctx landing in the cofibration, at the
/// given level (an expression over ctx).
inline Term tube_piece_for(const LiftedProblem& L, const Substitution& g,
                           const IntervalExpr& level) {
  for (const auto& [c, t] : L.tube) {
    if (!conjunct_decided_under(c, g)) continue;
    Substitution q = quotient(c);
    std::vector<IntervalExpr> im;
    im.reserve(q.dom().size() + 1);
    for (Sym u : q.dom().names()) im.push_back(g.image_of(u));
    im.push_back(g.apply(level));
    return restrict_term(t, Substitution(g.dom(), q.dom().extend(L.fillDim), std::move(im)));
  }
  throw SortError("tube_piece_for: substitution does not satisfy the cofibration");
}

/// Tube payload on the k-th conjunct at the given level.
inline Term tube_at(const LiftedProblem& L, std::size_t k, const IntervalExpr& level) {
  const auto& [c, t] = L.tube[k];
  Substitution q = quotient(c);
  return restrict_term(t, set_last(q.dom(), L.fillDim, q.apply(level)));
}

/// Instantiations used by certificates for a symbolic dimension: keep it
/// generic, then pin it to each endpoint.
inline std::vector<std::pair<std::string, Substitution>> face_cases(const DimCtx& ctx,
                                                                    std::optional<Sym> var) {
  std::vector<std::pair<std::string, Substitution>> out;
  out.emplace_back("generic", Substitution::identity(ctx));
  if (var) {
    out.emplace_back(symbol_name(*var) + ":=0",
                     Substitution::face(ctx, *var, IntervalExpr::end0()));
    out.emplace_back(symbol_name(*var) + ":=1",
                     Substitution::face(ctx, *var, IntervalExpr::end1()));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Weak composition from the extension structure

/// Filler = ext(b, [alpha |-> t(s)]); the correction path runs from the
/// degenerate filler at r to b, constant on alpha.
inline KanResult wcom_from_ext(const CompletionHandle& h, const FillingProblem& p) {
  if (h.theory() != Theory::SET)
    throw ValidationError("wcom_from_ext: expects the element theory");
  detail::LiftedProblem L = detail::lift_problem(p);
  KanResult out;
  out.fillerCtx = L.ctx;
  out.sVar = L.sVar;

  std::vector<Term> atS, atR;
  for (std::size_t k = 0; k < L.tube.size(); ++k) {
    atS.push_back(h.norm(detail::tube_at(L, k, L.sE)));
    atR.push_back(h.norm(detail::tube_at(L, k, L.rE)));
  }
  Term baseN = h.norm(L.base);
  out.filler = h.norm(t_ext(baseN, make_partial(h.pres(), L.cof, atS, h.options())));

  // Tube-base agreement at r.
  bool agree = true;
  for (std::size_t k = 0; k < L.tube.size(); ++k) {
    Substitution q = quotient(L.tube[k].first);
    out.cert.check(h, "tube-base agreement", "on " + L.tube[k].first.str(), atR[k],
                   restrict_term(baseN, q));
    agree = agree && out.cert.entries.back().pass;
  }

  // Filler boundary under alpha, across instantiations of a symbolic s.
  for (const auto& [fname, face] : detail::face_cases(L.ctx, L.sVar)) {
    Cofibration cofF = subst_cof(L.cof, face);
    for (const auto& c : dnf(cofF)) {
      Substitution g = compose(face, quotient(c));
      out.cert.check(h, "filler boundary", fname + " on " + c.str(), restrict_term(out.filler, g),
                     detail::tube_piece_for(L, g, L.sE));
    }
  }

  if (!agree) return out;

  Term fillerRR = h.norm(t_ext(baseN, make_partial(h.pres(), L.cof, atR, h.options())));
  Sym i = detail::fresh_sym("i", L.ctx.extend(L.fillDim));
  out.pathDim = i;
  DimCtx ctxP = L.ctx.extend(i);
  Substitution projP = Substitution::projection(ctxP, L.ctx);
  Term baseP = restrict_term(baseN, projP);
  Cofibration cofP = subst_cof(L.cof, projP);
  IntervalExpr vi = IntervalExpr::mk_var(i);
  Cofibration isZero = cof_eq(ctxP, vi, IntervalExpr::end0());
  Cofibration isOne = cof_eq(ctxP, vi, IntervalExpr::end1());
  Cofibration combined = cof_or(cofP, cof_or(isZero, isOne));

  std::vector<Term> pathPieces;
  for (const auto& c : dnf(combined)) {
    Substitution q = quotient(c);
    Term piece;
    if (decided(subst_cof(cofP, q))) {
      piece = restrict_term(baseP, q);
    } else if (q.apply(vi) == IntervalExpr::end0()) {
      piece = restrict_term(fillerRR, compose(projP, q));
    } else {
      piece = restrict_term(baseP, q);
    }
    pathPieces.push_back(h.norm(piece));
  }
  Term path = h.norm(t_ext(baseP, make_partial(h.pres(), combined, pathPieces, h.options())));
  out.path = path;
  out.cert.note(
      "correction path: on the base cofibration the path is constant at b, reading the "
      "tube value at the starting level; a target-level reading would be out of scope here");

  out.cert.check(h, "path endpoint 0", "i:=0",
                 restrict_term(path, Substitution::face(ctxP, i, IntervalExpr::end0())),
                 fillerRR);
  out.cert.check(h, "path endpoint 1", "i:=1",
                 restrict_term(path, Substitution::face(ctxP, i, IntervalExpr::end1())), baseN);
  for (const auto& c : dnf(L.cof)) {
    Substitution q = quotient(c);
    DimCtx d = q.dom();
    Term baseQ = restrict_term(baseN, q);
    // Constancy under alpha for i generic and at both endpoints.
    DimCtx dI = d.extend(i);
    std::vector<IntervalExpr> im;
    for (Sym v : L.ctx.names()) im.push_back(q.image_of(v));
    im.push_back(IntervalExpr::mk_var(i));
    Substitution qGen(dI, ctxP, im);
    out.cert.check(h, "path constant on cofibration", "generic i on " + c.str(),
                   restrict_term(path, qGen),
                   restrict_term(baseQ, Substitution::projection(dI, d)));
    for (const auto& end : {IntervalExpr::end0(), IntervalExpr::end1()}) {
      std::vector<IntervalExpr> im2;
      for (Sym v : L.ctx.names()) im2.push_back(q.image_of(v));
      im2.push_back(end);
      out.cert.check(h, "path constant on cofibration", "i:=" + end.str() + " on " + c.str(),
                     restrict_term(path, Substitution(d, ctxP, im2)), baseQ);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contractibility: center and connecting path

struct PathResult {
  Term center, path;
  Sym pathDim = 0;
  Certificate cert;
};

/// In a carrier with an extension structure every two elements are joined:
/// the center extends nothing, the path extends the two-endpoint family.
inline PathResult center_and_path(const CompletionHandle& h, const Term& x, const Term& y) {
  if (h.theory() != Theory::SET)
    throw ValidationError("center_and_path: element form expects the element theory");
  if (x->ctx != y->ctx) throw SortError("center_and_path: context mismatch");
  PathResult out;
  Term xn = h.norm(x), yn = h.norm(y);
  out.center = h.norm(t_ext(xn, PartialTerms{cof_bot(x->ctx), {}}));
  Sym i = detail::fresh_sym("i", x->ctx);
  out.pathDim = i;
  DimCtx ctxP = x->ctx.extend(i);
  Substitution projP = Substitution::projection(ctxP, x->ctx);
  Term xP = restrict_term(xn, projP), yP = restrict_term(yn, projP);
  IntervalExpr vi = IntervalExpr::mk_var(i);
  Cofibration ends = cof_or(cof_eq(ctxP, vi, IntervalExpr::end0()),
                            cof_eq(ctxP, vi, IntervalExpr::end1()));
  std::vector<Term> pieces;
  for (const auto& c : dnf(ends)) {
    Substitution q = quotient(c);
    pieces.push_back(h.norm(restrict_term(q.apply(vi) == IntervalExpr::end0() ? xP : yP, q)));
  }
  out.path = h.norm(t_ext(xP, make_partial(h.pres(), ends, pieces, h.options())));
  out.cert.check(h, "path endpoint 0", "i:=0",
                 restrict_term(out.path, Substitution::face(ctxP, i, IntervalExpr::end0())), xn);
  out.cert.check(h, "path endpoint 1", "i:=1",
                 restrict_term(out.path, Substitution::face(ctxP, i, IntervalExpr::end1())), yn);
  return out;
}

struct CatPathResult {
  GluePiece center, path;  // path components over ctx + pathDim
  Sym pathDim = 0;
  Certificate cert;
};

/// Iso-extension form: both arguments extend the empty family over the same
/// anchor; the connecting path is the two-endpoint iso-extension.
inline CatPathResult center_and_path(const CompletionHandle& h, const Term& anchor,
                                     const GluePiece& e1, const GluePiece& e2) {
  if (h.theory() != Theory::CAT)
    throw ValidationError("center_and_path: iso form expects the category theory");
  CatPathResult out;
  out.center = ext_ob(h, anchor, cof_bot(anchor->ctx), {});
  Sym i = detail::fresh_sym("i", anchor->ctx);
  out.pathDim = i;
  DimCtx ctxP = anchor->ctx.extend(i);
  Substitution projP = Substitution::projection(ctxP, anchor->ctx);
  Term anchorP = restrict_term(h.norm(anchor), projP);
  IntervalExpr vi = IntervalExpr::mk_var(i);
  Cofibration ends = cof_or(cof_eq(ctxP, vi, IntervalExpr::end0()),
                            cof_eq(ctxP, vi, IntervalExpr::end1()));
  auto liftPiece = [&](const GluePiece& p, const Substitution& q) {
    return GluePiece{h.norm(restrict_term(p.ob, compose(projP, q))),
                     h.norm(restrict_term(p.fwd, compose(projP, q))),
                     h.norm(restrict_term(p.inv, compose(projP, q)))};
  };
  std::vector<GluePiece> pieces;
  for (const auto& c : dnf(ends)) {
    Substitution q = quotient(c);
    pieces.push_back(liftPiece(q.apply(vi) == IntervalExpr::end0() ? e1 : e2, q));
  }
  out.path = ext_ob(h, anchorP, ends, pieces);
  auto face = [&](const IntervalExpr& e) { return Substitution::face(ctxP, i, e); };
  out.cert.check(h, "path endpoint 0 (object)", "i:=0",
                 restrict_term(out.path.ob, face(IntervalExpr::end0())), e1.ob);
  out.cert.check(h, "path endpoint 0 (iso)", "i:=0",
                 restrict_term(out.path.fwd, face(IntervalExpr::end0())), e1.fwd);
  out.cert.check(h, "path endpoint 1 (object)", "i:=1",
                 restrict_term(out.path.ob, face(IntervalExpr::end1())), e2.ob);
  out.cert.check(h, "path endpoint 1 (iso)", "i:=1",
                 restrict_term(out.path.fwd, face(IntervalExpr::end1())), e2.fwd);
  return out;
}

// ---------------------------------------------------------------------------
// Fibrancy from a pseudo-reflexive graph

/// Element of a vertices-with-edge-data pair space.  Edge components are
/// null when the edge space carries no syntax.
struct PRGElem {
  Term main;
  Term edgeFwd, edgeInv;
};

/// Callbacks describing one pseudo-reflexive graph: coercion edge data for
/// a line, extension of partial (vertex, edge) families at a level, and the
/// reflexive-loop extension with its side conditions.
struct PRGInstance {
  std::string name;
  std::vector<std::string> notes;
  std::function<std::pair<Term, Term>(const Term& line, Sym z, const IntervalExpr& from,
                                      const IntervalExpr& to)>
      coe;
  std::function<PRGElem(const IntervalExpr& level, const Term& anchor, const Cofibration& cof,
                        const std::vector<PRGElem>& pieces, Certificate& cert,
                        const std::string& where)>
      extendE;
  std::function<PRGElem(const Term& anchor, const Cofibration& cof,
                        const std::vector<PRGElem>& pieces, Certificate& cert,
                        const std::string& where)>
      extendR;
};

namespace detail {

inline Term maybe_restrict(const Term& t, const Substitution& f) {
  return t ? restrict_term(t, f) : t;
}

inline PRGElem restrict_elem(const PRGElem& e, const Substitution& f) {
  return {maybe_restrict(e.main, f), maybe_restrict(e.edgeFwd, f), maybe_restrict(e.edgeInv, f)};
}

inline void boundary_certs(const CompletionHandle& h, Certificate& cert, const std::string& who,
                           const Cofibration& cof, const PRGElem& total,
                           const std::vector<PRGElem>& pieces) {
  auto conj = dnf(cof);
  for (std::size_t k = 0; k < conj.size(); ++k) {
    Substitution q = quotient(conj[k]);
    cert.check(h, who + " boundary (vertex)", "on " + conj[k].str(),
               restrict_term(total.main, q), pieces[k].main);
    if (total.edgeFwd && pieces[k].edgeFwd)
      cert.check(h, who + " boundary (edge)", "on " + conj[k].str(),
                 restrict_term(total.edgeFwd, q), pieces[k].edgeFwd);
  }
}

}  // namespace detail

/// The generic derivation: w(s) extends the coerced tube, d contracts the
/// reflexive loop, and the correction line w(i) glues the starting face to
/// (b, d).  Returns (w(s).1, i . w(i).1).
inline KanResult fibrancy_from_prg(const CompletionHandle& h, const PRGInstance& inst,
                                   const FillingProblem& p) {
  detail::LiftedProblem L = detail::lift_problem(p);
  KanResult out;
  out.fillerCtx = L.ctx;
  out.sVar = L.sVar;
  for (const auto& n : inst.notes) out.cert.note(n);

  Term baseN = h.norm(L.base);

  auto piecesAt = [&](const IntervalExpr& level) {
    std::vector<PRGElem> out2;
    for (std::size_t k = 0; k < L.tube.size(); ++k) {
      Substitution q = quotient(L.tube[k].first);
      Term main = h.norm(detail::tube_at(L, k, level));
      auto [ef, ei] = inst.coe(L.tube[k].second, L.fillDim, q.apply(L.rE), q.apply(level));
      out2.push_back({main, ef ? h.norm(ef) : ef, ei ? h.norm(ei) : ei});
    }
    return out2;
  };

  std::vector<PRGElem> atS = piecesAt(L.sE);
  std::vector<PRGElem> atR = piecesAt(L.rE);

  // Tube-base agreement.
  bool agree = true;
  for (std::size_t k = 0; k < L.tube.size(); ++k) {
    Substitution q = quotient(L.tube[k].first);
    out.cert.check(h, "tube-base agreement", "on " + L.tube[k].first.str(), atR[k].main,
                   restrict_term(baseN, q));
    agree = agree && out.cert.entries.back().pass;
  }

  PRGElem ws = inst.extendE(L.sE, baseN, L.cof, atS, out.cert, "w(s)");
  detail::boundary_certs(h, out.cert, "w(s)", L.cof, ws, atS);
  out.filler = ws.main;
  if (!agree) return out;

  PRGElem wr = inst.extendE(L.rE, baseN, L.cof, atR, out.cert, "w(r)");
  detail::boundary_certs(h, out.cert, "w(r)", L.cof, wr, atR);

  PRGElem d = inst.extendR(baseN, L.cof, atR, out.cert, "d");

  Sym i = detail::fresh_sym("i", L.ctx.extend(L.fillDim));
  out.pathDim = i;
  DimCtx ctxP = L.ctx.extend(i);
  Substitution projP = Substitution::projection(ctxP, L.ctx);
  Term baseP = restrict_term(baseN, projP);
  Cofibration cofP = subst_cof(L.cof, projP);
  IntervalExpr vi = IntervalExpr::mk_var(i);
  Cofibration combined =
      cof_or(cofP, cof_or(cof_eq(ctxP, vi, IntervalExpr::end0()),
                          cof_eq(ctxP, vi, IntervalExpr::end1())));

  std::vector<PRGElem> linePieces;
  for (const auto& c : dnf(combined)) {
    Substitution q = quotient(c);
    if (decided(subst_cof(cofP, q))) {
      Substitution g = compose(projP, q);
      Term main = h.norm(detail::tube_piece_for(L, g, L.rE));
      // Edge of the tube at r -> r, carried to this conjunct.
      PRGElem edge;
      for (std::size_t k = 0; k < L.tube.size(); ++k) {
        if (!conjunct_decided_under(L.tube[k].first, g)) continue;
        Substitution qk = quotient(L.tube[k].first);
        std::vector<IntervalExpr> im;
        for (Sym u : qk.dom().names()) im.push_back(g.image_of(u));
        Substitution factor(g.dom(), qk.dom(), im);
        edge = detail::restrict_elem(atR[k], factor);
        break;
      }
      linePieces.push_back({main, edge.edgeFwd, edge.edgeInv});
    } else if (q.apply(vi) == IntervalExpr::end0()) {
      linePieces.push_back(detail::restrict_elem(wr, compose(projP, q)));
    } else {
      Substitution g = compose(projP, q);
      linePieces.push_back({restrict_term(baseN, g), detail::maybe_restrict(d.edgeFwd, g),
                            detail::maybe_restrict(d.edgeInv, g)});
    }
  }
  PRGElem wline = inst.extendE(L.rE, baseP, combined, linePieces, out.cert, "w-line");
  detail::boundary_certs(h, out.cert, "w-line", combined, wline, linePieces);
  out.path = wline.main;
  out.cert.note(
      "correction line: the i=0 face reuses the extension at the starting level r; the "
      "target-level element would not typecheck in this fiber");

  out.cert.check(h, "path endpoint 0", "i:=0",
                 restrict_term(wline.main, Substitution::face(ctxP, i, IntervalExpr::end0())),
                 wr.main);
  out.cert.check(h, "path endpoint 1", "i:=1",
                 restrict_term(wline.main, Substitution::face(ctxP, i, IntervalExpr::end1())),
                 baseN);
  return out;
}

/// Trivial instance: vertex space only.  Reduces the derivation to the
/// direct ext formulas.
inline PRGInstance make_set_prg_instance(const CompletionHandle& h) {
  PRGInstance inst;
  inst.name = "element-trivial";
  inst.coe = [](const Term&, Sym, const IntervalExpr&, const IntervalExpr&) {
    return std::pair<Term, Term>{nullptr, nullptr};
  };
  inst.extendE = [&h](const IntervalExpr&, const Term& anchor, const Cofibration& cof,
                      const std::vector<PRGElem>& pieces, Certificate&, const std::string&) {
    std::vector<Term> mains;
    for (const auto& p : pieces) mains.push_back(p.main);
    Term total = h.norm(t_ext(anchor, make_partial(h.pres(), cof, mains, h.options())));
    return PRGElem{total, nullptr, nullptr};
  };
  inst.extendR = [](const Term& anchor, const Cofibration&, const std::vector<PRGElem>&,
                    Certificate&, const std::string&) {
    return PRGElem{anchor, nullptr, nullptr};
  };
  return inst;
}

}  // namespace rezk
