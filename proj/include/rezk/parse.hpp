#pragma once

// Readers for the textual formats used by the command-line tools:
// cofibration formulas, substitutions, terms, presentation files, functor
// files, and Kan filling problems.  Failures carry 1-based line and column
// positions.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rezk/cat.hpp"
#include "rezk/completion.hpp"
#include "rezk/kan.hpp"

namespace rezk {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int ln, int cl)
      : std::runtime_error("line " + std::to_string(ln) + ", col " + std::to_string(cl) +
                           ": " + msg),
        line(ln),
        col(cl) {}
};

namespace detail {

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

/// Tokenizing cursor; `#` starts a comment running to the end of the line.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  struct Mark {
    std::size_t pos;
    int line, col;
  };
  Mark mark() const { return {pos_, line_, col_}; }
  void reset(Mark m) {
    pos_ = m.pos;
    line_ = m.line;
    col_ = m.col;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') step();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        step();
      } else {
        break;
      }
    }
  }

  /// True at a newline, comment, or end of input; skips spaces and tabs.
  bool at_eol() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) step();
    if (pos_ >= text_.size()) return true;
    char c = text_[pos_];
    return c == '\n' || c == '\r' || c == '#';
  }

  bool eof() {
    skip();
    return pos_ >= text_.size();
  }

  bool at(char c) {
    skip();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  char peek_raw() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  void step_raw() {
    if (pos_ < text_.size()) step();
  }

  bool try_tok(std::string_view t) {
    skip();
    if (text_.substr(pos_, t.size()) != t) return false;
    for (std::size_t k = 0; k < t.size(); ++k) step();
    return true;
  }

  void expect_tok(std::string_view t, const std::string& what) {
    if (!try_tok(t)) fail("expected '" + std::string(t) + "' " + what);
  }

  std::optional<std::string> try_ident() {
    skip();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    std::string out;
    while (pos_ < text_.size() && ident_char(text_[pos_])) {
      out += text_[pos_];
      step();
    }
    return out;
  }

  std::string ident(const std::string& what) {
    auto w = try_ident();
    if (!w) fail("expected " + what);
    return *w;
  }

  bool try_word(std::string_view w) {
    Mark m = mark();
    auto got = try_ident();
    if (got && *got == w) return true;
    reset(m);
    return false;
  }

 private:
  void step() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// ---------------------------------------------------------------------------
// Interval expressions and cofibrations

inline IntervalExpr parse_iexpr(Cursor& cur, const DimCtx& ctx, bool mustBind = true) {
  if (cur.try_tok("0")) return IntervalExpr::end0();
  if (cur.try_tok("1")) return IntervalExpr::end1();
  Cursor::Mark m = cur.mark();
  auto name = cur.try_ident();
  if (!name) cur.fail("expected an interval expression (0, 1, or a dimension variable)");
  Sym v = intern(*name);
  if (mustBind && !ctx.contains(v)) {
    cur.reset(m);
    cur.fail("unknown dimension variable '" + *name + "'");
  }
  return IntervalExpr::mk_var(v);
}

inline Cofibration parse_cof_expr(Cursor& cur, const DimCtx& ctx);

inline Cofibration parse_cof_atom(Cursor& cur, const DimCtx& ctx) {
  if (cur.try_word("T")) return cof_top(ctx);
  if (cur.try_word("F")) return cof_bot(ctx);
  if (cur.try_word("forall")) {
    Cursor::Mark m = cur.mark();
    std::string v = cur.ident("a dimension variable after 'forall'");
    Sym i = intern(v);
    if (ctx.contains(i)) {
      cur.reset(m);
      cur.fail("dimension variable '" + v + "' is already bound");
    }
    cur.expect_tok(".", "after the forall binder");
    Cofibration body = parse_cof_expr(cur, ctx.extend(i));
    return cof_forall(ctx, i, body);
  }
  if (cur.try_tok("(")) {
    // Equation or parenthesized formula: look for '=' after one expression.
    bool isEq = false;
    {
      Cursor::Mark probe = cur.mark();
      bool lexed = cur.try_tok("0") || cur.try_tok("1") || cur.try_ident().has_value();
      if (lexed && cur.at('=')) isEq = true;
      cur.reset(probe);
    }
    if (isEq) {
      IntervalExpr l = parse_iexpr(cur, ctx);
      cur.expect_tok("=", "in the equation");
      IntervalExpr r = parse_iexpr(cur, ctx);
      cur.expect_tok(")", "closing the equation");
      return cof_eq(ctx, l, r);
    }
    Cofibration inner = parse_cof_expr(cur, ctx);
    cur.expect_tok(")", "closing the group");
    return inner;
  }
  cur.fail("expected a cofibration");
}

inline Cofibration parse_cof_conj(Cursor& cur, const DimCtx& ctx) {
  Cofibration acc = parse_cof_atom(cur, ctx);
  while (cur.try_tok("/\\")) acc = cof_and(acc, parse_cof_atom(cur, ctx));
  return acc;
}

inline Cofibration parse_cof_expr(Cursor& cur, const DimCtx& ctx) {
  Cofibration acc = parse_cof_conj(cur, ctx);
  while (cur.try_tok("\\/")) acc = cof_or(acc, parse_cof_conj(cur, ctx));
  return acc;
}

// ---------------------------------------------------------------------------
// Substitutions

/// `{i:=e, ...}` as a list of assignments in written order.  When keyCtx is
/// given, keys must be bound there; when valCtx is given, value variables
/// must be bound there.
inline std::vector<std::pair<Sym, IntervalExpr>> parse_sub_entries(Cursor& cur,
                                                                   const DimCtx* keyCtx,
                                                                   const DimCtx* valCtx) {
  cur.expect_tok("{", "opening the substitution");
  std::vector<std::pair<Sym, IntervalExpr>> out;
  if (!cur.try_tok("}")) {
    do {
      Cursor::Mark m = cur.mark();
      std::string k = cur.ident("a dimension variable on the left of ':='");
      Sym key = intern(k);
      if (keyCtx && !keyCtx->contains(key)) {
        cur.reset(m);
        cur.fail("variable '" + k + "' is not in the context " + keyCtx->str());
      }
      for (const auto& [k0, e0] : out) {
        (void)e0;
        if (k0 == key) {
          cur.reset(m);
          cur.fail("variable '" + k + "' assigned twice");
        }
      }
      cur.expect_tok(":=", "in the substitution entry");
      IntervalExpr val =
          valCtx ? parse_iexpr(cur, *valCtx) : parse_iexpr(cur, DimCtx(), false);
      out.emplace_back(key, val);
    } while (cur.try_tok(","));
    cur.expect_tok("}", "closing the substitution");
  }
  return out;
}

/// A substitution into `cod`: keys are cod variables, unmentioned cod
/// variables are kept, and the domain lists the image variables in first
/// appearance order.
inline Substitution parse_sub_into(Cursor& cur, const DimCtx& cod) {
  auto entries = parse_sub_entries(cur, &cod, nullptr);
  std::vector<IntervalExpr> images;
  images.reserve(cod.size());
  for (Sym v : cod.names()) {
    const IntervalExpr* found = nullptr;
    for (const auto& [k, e] : entries)
      if (k == v) found = &e;
    images.push_back(found ? *found : IntervalExpr::mk_var(v));
  }
  DimCtx dom;
  for (const auto& e : images)
    if (e.is_var() && !dom.contains(e.var)) dom = dom.extend(e.var);
  return Substitution(dom, cod, std::move(images));
}

/// A substitution out of `dom` whose codomain is the written key list.
inline Substitution parse_sub_binding(Cursor& cur, const DimCtx& dom) {
  auto entries = parse_sub_entries(cur, nullptr, &dom);
  std::vector<Sym> keys;
  std::vector<IntervalExpr> images;
  for (const auto& [k, e] : entries) {
    keys.push_back(k);
    images.push_back(e);
  }
  return Substitution(dom, DimCtx(std::move(keys)), std::move(images));
}

// ---------------------------------------------------------------------------
// Terms

inline Term parse_term_expr(Cursor& cur, const CompletionHandle& h, const DimCtx& ctx);

/// Piece side: a conjunct written either as a formula or in the solved
/// `{i=0, j=k}` form used by the printer.
inline Cofibration parse_piece_cof(Cursor& cur, const DimCtx& ctx) {
  if (cur.at('{')) {
    cur.expect_tok("{", "opening the piece side");
    Cofibration acc = cof_top(ctx);
    if (!cur.try_tok("}")) {
      do {
        IntervalExpr l = parse_iexpr(cur, ctx);
        cur.expect_tok("=", "in the piece equation");
        IntervalExpr r = parse_iexpr(cur, ctx);
        acc = cof_and(acc, cof_eq(ctx, l, r));
      } while (cur.try_tok(","));
      cur.expect_tok("}", "closing the piece side");
    }
    return acc;
  }
  return parse_cof_expr(cur, ctx);
}

/// Matches a written piece side against the canonical conjuncts of cof,
/// failing at the current position when it is not exactly one of them.
inline std::size_t match_conjunct(Cursor& cur, const Cofibration& cof,
                                  const std::vector<ConjunctSystem>& conj) {
  Cursor::Mark m = cur.mark();
  Cofibration side = parse_piece_cof(cur, cof.ctx);
  auto sc = dnf(side);
  if (sc.size() != 1) {
    cur.reset(m);
    cur.fail("piece side must be a single satisfiable conjunct");
  }
  for (std::size_t k = 0; k < conj.size(); ++k)
    if (conj[k] == sc[0]) return k;
  cur.reset(m);
  cur.fail("piece side is not a conjunct of the cofibration");
}

/// `[ side -> payload, ... ]`; written payloads live over the full context
/// and are restricted to each conjunct's quotient context.
template <class P, class ParsePayload>
std::vector<P> parse_pieces(Cursor& cur, const Cofibration& cof, ParsePayload&& payload) {
  auto conj = dnf(cof);
  std::vector<std::optional<P>> slots(conj.size());
  cur.expect_tok("[", "opening the piece list");
  if (!cur.try_tok("]")) {
    do {
      Cursor::Mark m = cur.mark();
      std::size_t at = match_conjunct(cur, cof, conj);
      if (slots[at]) {
        cur.reset(m);
        cur.fail("duplicate piece for " + conj[at].str());
      }
      if (!cur.try_tok("|->")) cur.expect_tok("->", "after the piece side");
      slots[at] = payload(quotient(conj[at]));
    } while (cur.try_tok(","));
    cur.expect_tok("]", "closing the piece list");
  }
  std::vector<P> out;
  out.reserve(conj.size());
  for (std::size_t k = 0; k < conj.size(); ++k) {
    if (!slots[k]) cur.fail("missing piece for " + conj[k].str());
    out.push_back(*slots[k]);
  }
  return out;
}

/// Skips over one term without interpreting it: balanced brackets up to a
/// top-level ';' or closing bracket.
inline void skip_term_text(Cursor& cur) {
  int depth = 0;
  for (;;) {
    char c = cur.peek_raw();
    if (c == '\0') cur.fail("unterminated term (missing ';')");
    if (depth == 0 && (c == ';' || c == ')' || c == ']' || c == '}')) return;
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    cur.step_raw();
  }
}

inline Term parse_gen_term(Cursor& cur, const CompletionHandle& h, const DimCtx& ctx,
                           const std::string& name, Cursor::Mark at) {
  const Presentation& p = h.pres();
  Sym n = intern(name);
  if (p.has_ob(n)) return ob_term(p, n, ctx);
  if (p.find_hom(n)) return hom_term(p, n, ctx);
  cur.reset(at);
  cur.fail("unknown generator '" + name + "'");
}

inline Term parse_term_expr(Cursor& cur, const CompletionHandle& h, const DimCtx& ctx) {
  if (cur.try_tok("(")) {
    std::vector<Term> factors;
    factors.push_back(parse_term_expr(cur, h, ctx));
    while (cur.try_tok(".")) factors.push_back(parse_term_expr(cur, h, ctx));
    cur.expect_tok(")", "closing the composition");
    Term acc = factors.back();
    for (std::size_t k = factors.size() - 1; k-- > 0;) acc = t_comp(factors[k], acc);
    return acc;
  }
  Cursor::Mark m = cur.mark();
  std::string w = cur.ident("a term");
  if (w == "id") {
    cur.expect_tok("(", "after 'id'");
    Term ob = parse_term_expr(cur, h, ctx);
    cur.expect_tok(")", "closing 'id'");
    return t_id(ob);
  }
  if (w.size() > 3 && w.rfind("id_", 0) == 0) {
    Sym n = intern(w.substr(3));
    if (!h.pres().has_ob(n)) {
      cur.reset(m);
      cur.fail("unknown object '" + w.substr(3) + "' in an identity");
    }
    return t_id(ob_term(h.pres(), n, ctx));
  }
  if (w == "inv") {
    cur.expect_tok("(", "after 'inv'");
    Term t = parse_term_expr(cur, h, ctx);
    cur.expect_tok(")", "closing 'inv'");
    return t_inv(t);
  }
  if (w == "ext") {
    cur.expect_tok("(", "after 'ext'");
    Term base = parse_term_expr(cur, h, ctx);
    cur.expect_tok(";", "after the ext anchor");
    Cofibration cof = parse_cof_expr(cur, ctx);
    cur.expect_tok(";", "after the ext cofibration");
    auto pieces = parse_pieces<Term>(cur, cof, [&](const Substitution& q) {
      return restrict_term(parse_term_expr(cur, h, ctx), q);
    });
    cur.expect_tok(")", "closing 'ext'");
    return ext_elt(h, base, cof, pieces);
  }
  if (w == "Glue" || w == "glue" || w == "glue_inv") {
    cur.expect_tok("(", "after '" + w + "'");
    Term base = parse_term_expr(cur, h, ctx);
    cur.expect_tok(";", "after the glue anchor");
    Cofibration cof = parse_cof_expr(cur, ctx);
    cur.expect_tok(";", "after the glue cofibration");
    auto pieces = parse_pieces<GluePiece>(cur, cof, [&](const Substitution& q) {
      cur.expect_tok("(", "opening the piece triple");
      Term ob = parse_term_expr(cur, h, ctx);
      cur.expect_tok(",", "after the piece object");
      Term fwd = parse_term_expr(cur, h, ctx);
      cur.expect_tok(",", "after the forward iso");
      Term inv = parse_term_expr(cur, h, ctx);
      cur.expect_tok(")", "closing the piece triple");
      return GluePiece{restrict_term(ob, q), restrict_term(fwd, q), restrict_term(inv, q)};
    });
    cur.expect_tok(")", "closing '" + w + "'");
    GluePiece g = ext_ob(h, base, cof, pieces);
    return w == "Glue" ? g.ob : (w == "glue" ? g.fwd : g.inv);
  }
  if (w == "restrict") {
    cur.expect_tok("(", "after 'restrict'");
    Cursor::Mark termStart = cur.mark();
    skip_term_text(cur);
    cur.expect_tok(";", "after the restricted term");
    Substitution f = parse_sub_binding(cur, ctx);
    Cursor::Mark afterSub = cur.mark();
    cur.reset(termStart);
    Term t = parse_term_expr(cur, h, f.cod());
    cur.reset(afterSub);
    cur.expect_tok(")", "closing 'restrict'");
    return restrict_term(t, f);
  }
  return parse_gen_term(cur, h, ctx, w, m);
}

// ---------------------------------------------------------------------------
// Presentation files

struct RuleWord {
  std::vector<Sym> word;
  Sym src = 0, dst = 0;
  bool isId = false;
};

/// `id_x` or `f.g.h`; endpoints computed from the hom declarations.
inline RuleWord parse_rule_word(Cursor& cur, const Presentation& p) {
  Cursor::Mark m = cur.mark();
  std::string first = cur.ident("a hom word");
  if (first.size() > 3 && first.rfind("id_", 0) == 0) {
    Sym x = intern(first.substr(3));
    if (!p.has_ob(x)) {
      cur.reset(m);
      cur.fail("unknown object '" + first.substr(3) + "' in an identity");
    }
    return {{}, x, x, true};
  }
  std::vector<Sym> w{intern(first)};
  while (cur.try_tok(".")) w.push_back(intern(cur.ident("a hom name after '.'")));
  Sym src = 0, dst = 0;
  for (std::size_t k = w.size(); k-- > 0;) {
    const HomGen* hg = p.find_hom(w[k]);
    if (!hg) {
      cur.reset(m);
      cur.fail("unknown hom '" + symbol_name(w[k]) + "' in a word");
    }
    if (k == w.size() - 1)
      src = hg->src;
    else if (hg->src != dst) {
      cur.reset(m);
      cur.fail("word does not compose at '" + symbol_name(w[k]) + "'");
    }
    dst = hg->dst;
  }
  return {std::move(w), src, dst, false};
}

/// Consumes `[name]`, returning the header words; restores on mismatch.
inline std::optional<std::string> read_header(Cursor& cur) {
  Cursor::Mark m = cur.mark();
  if (!cur.try_tok("[")) return std::nullopt;
  std::string name;
  for (;;) {
    auto w = cur.try_ident();
    if (!w) break;
    if (!name.empty()) name += ' ';
    name += *w;
  }
  if (!cur.try_tok("]")) {
    cur.reset(m);
    return std::nullopt;
  }
  return name;
}

inline std::optional<std::string> peek_header(Cursor& cur) {
  Cursor::Mark m = cur.mark();
  auto h = read_header(cur);
  cur.reset(m);
  return h;
}

/// `theory SET|CAT` plus [objects]/[homs]/[rules] sections; stops at any
/// other section header or at the end of input.
inline Presentation parse_presentation_body(Cursor& cur) {
  Presentation p;
  if (!cur.try_word("theory")) cur.fail("expected 'theory SET' or 'theory CAT'");
  Cursor::Mark tm = cur.mark();
  std::string th = cur.ident("SET or CAT after 'theory'");
  if (th == "SET")
    p.theory = Theory::SET;
  else if (th == "CAT")
    p.theory = Theory::CAT;
  else {
    cur.reset(tm);
    cur.fail("unknown theory '" + th + "'");
  }
  for (;;) {
    auto h = peek_header(cur);
    if (!h) break;
    if (*h == "objects") {
      read_header(cur);
      while (!cur.eof() && !cur.at('[')) {
        Cursor::Mark m = cur.mark();
        std::string n = cur.ident("a generator name");
        Sym s = intern(n);
        if (p.has_ob(s) || p.find_hom(s)) {
          cur.reset(m);
          cur.fail("duplicate name '" + n + "'");
        }
        p.obGens.push_back(s);
      }
    } else if (*h == "homs") {
      if (p.theory == Theory::SET) cur.fail("SET theory admits no homs");
      read_header(cur);
      while (!cur.eof() && !cur.at('[')) {
        Cursor::Mark m = cur.mark();
        std::string n = cur.ident("a hom name");
        cur.expect_tok(":", "after the hom name");
        Cursor::Mark sm = cur.mark();
        std::string s = cur.ident("the source object");
        cur.expect_tok("->", "between the hom endpoints");
        Cursor::Mark dm = cur.mark();
        std::string d = cur.ident("the target object");
        Sym ns = intern(n);
        if (p.has_ob(ns) || p.find_hom(ns)) {
          cur.reset(m);
          cur.fail("duplicate name '" + n + "'");
        }
        if (!p.has_ob(intern(s))) {
          cur.reset(sm);
          cur.fail("unknown source object '" + s + "'");
        }
        if (!p.has_ob(intern(d))) {
          cur.reset(dm);
          cur.fail("unknown target object '" + d + "'");
        }
        p.homGens.push_back({ns, intern(s), intern(d)});
      }
    } else if (*h == "rules") {
      if (p.theory == Theory::SET) cur.fail("SET theory admits no rules");
      read_header(cur);
      while (!cur.eof() && !cur.at('[')) {
        Cursor::Mark m = cur.mark();
        RuleWord lhs = parse_rule_word(cur, p);
        if (lhs.isId) {
          cur.reset(m);
          cur.fail("rule left side must not be an identity");
        }
        cur.expect_tok("->", "between the rule sides");
        RuleWord rhs = parse_rule_word(cur, p);
        if (lhs.src != rhs.src || lhs.dst != rhs.dst) {
          cur.reset(m);
          cur.fail("rule sides are not parallel");
        }
        p.rules.push_back({std::move(lhs.word), std::move(rhs.word), lhs.src, lhs.dst});
      }
    } else {
      break;
    }
  }
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry points

inline DimCtx parse_dimctx(const std::string& text) {
  detail::Cursor cur(text);
  DimCtx ctx;
  while (!cur.eof()) {
    detail::Cursor::Mark m = cur.mark();
    std::string v = cur.ident("a dimension variable");
    Sym s = intern(v);
    if (ctx.contains(s)) {
      cur.reset(m);
      cur.fail("duplicate dimension variable '" + v + "'");
    }
    ctx = ctx.extend(s);
    cur.try_tok(",");
  }
  return ctx;
}

inline Cofibration parse_cof(const std::string& text, const DimCtx& ctx) {
  detail::Cursor cur(text);
  Cofibration c = detail::parse_cof_expr(cur, ctx);
  if (!cur.eof()) cur.fail("unexpected trailing input");
  return c;
}

/// `{i:=e, ...}` into ctx; unmentioned variables are kept, the domain is
/// inferred from the images.
inline Substitution parse_sub(const std::string& text, const DimCtx& ctx) {
  detail::Cursor cur(text);
  Substitution f = detail::parse_sub_into(cur, ctx);
  if (!cur.eof()) cur.fail("unexpected trailing input");
  return f;
}

inline Term parse_term(const std::string& text, const CompletionHandle& h, const DimCtx& ctx) {
  detail::Cursor cur(text);
  Term t = detail::parse_term_expr(cur, h, ctx);
  if (!cur.eof()) cur.fail("unexpected trailing input");
  return t;
}

inline Presentation parse_presentation(const std::string& text) {
  detail::Cursor cur(text);
  Presentation p = detail::parse_presentation_body(cur);
  if (!cur.eof()) cur.fail("unexpected trailing input");
  p.validate();
  return p;
}

/// Functor file: [source] and [target] presentations followed by
/// [on objects] and [on homs] generator maps.
inline FunctorSpec parse_functor(const std::string& text) {
  detail::Cursor cur(text);
  FunctorSpec F;
  if (detail::peek_header(cur) != "source") cur.fail("expected [source]");
  detail::read_header(cur);
  F.src = detail::parse_presentation_body(cur);
  F.src.validate();
  if (detail::peek_header(cur) != "target") cur.fail("expected [target]");
  detail::read_header(cur);
  F.dst = detail::parse_presentation_body(cur);
  F.dst.validate();
  if (detail::peek_header(cur) != "on objects") cur.fail("expected [on objects]");
  detail::read_header(cur);
  while (!cur.eof() && !cur.at('[')) {
    detail::Cursor::Mark m = cur.mark();
    std::string a = cur.ident("a source object");
    Sym sa = intern(a);
    if (!F.src.has_ob(sa)) {
      cur.reset(m);
      cur.fail("unknown source object '" + a + "'");
    }
    for (const auto& [k, v] : F.obMap) {
      (void)v;
      if (k == sa) {
        cur.reset(m);
        cur.fail("object '" + a + "' mapped twice");
      }
    }
    if (!cur.try_tok("|->")) cur.expect_tok("->", "in the object map");
    detail::Cursor::Mark bm = cur.mark();
    std::string b = cur.ident("a target object");
    if (!F.dst.has_ob(intern(b))) {
      cur.reset(bm);
      cur.fail("unknown target object '" + b + "'");
    }
    F.obMap.emplace_back(sa, intern(b));
  }
  if (detail::peek_header(cur) == "on homs") {
    detail::read_header(cur);
    while (!cur.eof() && !cur.at('[')) {
      detail::Cursor::Mark m = cur.mark();
      std::string a = cur.ident("a source hom");
      Sym sa = intern(a);
      if (!F.src.find_hom(sa)) {
        cur.reset(m);
        cur.fail("unknown source hom '" + a + "'");
      }
      for (const auto& [k, v] : F.homMap) {
        (void)v;
        if (k == sa) {
          cur.reset(m);
          cur.fail("hom '" + a + "' mapped twice");
        }
      }
      if (!cur.try_tok("|->")) cur.expect_tok("->", "in the hom map");
      detail::RuleWord w = detail::parse_rule_word(cur, F.dst);
      F.homMap.emplace_back(sa, std::move(w.word));
    }
  }
  if (!cur.eof()) cur.fail("unexpected trailing input");
  F.validate();
  return F;
}

struct KanProblemSource {
  Presentation pres;
  FillingProblem problem;
};

/// Kan problem file: a presentation body, a [problem] section with the
/// `ctx`, `fill`, `r`, optional `s`, `cof`, and `base` keys in that order,
/// and a [tube] section with one piece per conjunct written over the full
/// context extended by the fill dimension.
inline KanProblemSource parse_kan_problem(const std::string& text, NormalizeOptions opts = {}) {
  detail::Cursor cur(text);
  KanProblemSource out;
  out.pres = detail::parse_presentation_body(cur);
  out.pres.validate();
  CompletionHandle h = complete(out.pres, opts);
  if (detail::peek_header(cur) != "problem") cur.fail("expected [problem]");
  detail::read_header(cur);
  FillingProblem& pr = out.problem;
  if (!cur.try_word("ctx")) cur.fail("expected 'ctx' (the dimension variables)");
  DimCtx ctx;
  while (!cur.at_eol()) {
    detail::Cursor::Mark m = cur.mark();
    std::string v = cur.ident("a dimension variable");
    Sym s = intern(v);
    if (ctx.contains(s)) {
      cur.reset(m);
      cur.fail("duplicate dimension variable '" + v + "'");
    }
    ctx = ctx.extend(s);
  }
  if (!cur.try_word("fill")) cur.fail("expected 'fill' (the fill dimension)");
  detail::Cursor::Mark fm = cur.mark();
  Sym z = intern(cur.ident("the fill dimension variable"));
  if (ctx.contains(z)) {
    cur.reset(fm);
    cur.fail("fill dimension must be fresh for the context");
  }
  pr.ctx = ctx;
  pr.fillDim = z;
  if (!cur.try_word("r")) cur.fail("expected 'r' (the base level)");
  pr.r = detail::parse_iexpr(cur, ctx);
  if (cur.try_word("s")) {
    if (cur.try_word("generic"))
      pr.s = std::nullopt;
    else
      pr.s = detail::parse_iexpr(cur, ctx);
  }
  if (!cur.try_word("cof")) cur.fail("expected 'cof' (the tube cofibration)");
  pr.cof = detail::parse_cof_expr(cur, ctx);
  if (!cur.try_word("base")) cur.fail("expected 'base' (the bottom of the box)");
  pr.base = detail::parse_term_expr(cur, h, ctx);
  auto conj = dnf(pr.cof);
  std::vector<std::optional<Term>> slots(conj.size());
  if (detail::peek_header(cur) == "tube") {
    detail::read_header(cur);
    DimCtx ctxz = ctx.extend(z);
    while (!cur.eof() && !cur.at('[')) {
      detail::Cursor::Mark m = cur.mark();
      std::size_t at = detail::match_conjunct(cur, pr.cof, conj);
      if (slots[at]) {
        cur.reset(m);
        cur.fail("duplicate tube piece for " + conj[at].str());
      }
      if (!cur.try_tok("|->")) cur.expect_tok("->", "after the tube side");
      Term t = detail::parse_term_expr(cur, h, ctxz);
      Substitution q = quotient(conj[at]);
      std::vector<IntervalExpr> im = q.images();
      im.push_back(IntervalExpr::mk_var(z));
      Substitution qz(q.dom().extend(z), ctxz, std::move(im));
      slots[at] = restrict_term(t, qz);
    }
  }
  pr.tube.clear();
  for (std::size_t k = 0; k < conj.size(); ++k) {
    if (!slots[k]) cur.fail("missing tube piece for " + conj[k].str());
    pr.tube.push_back(*slots[k]);
  }
  if (!cur.eof()) cur.fail("unexpected trailing input");
  return out;
}

}  // namespace rezk
