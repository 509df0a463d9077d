#pragma once

// Command-line front end: dispatches a parsed request to the solver,
// normalizer, Kan filler, functor checker, and completion verifier, and
// renders deterministic reports (obligations sorted by id; timings are the
// only nondeterministic field).

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rezk/parse.hpp"
#include "rezk/tower.hpp"
#include "rezk/verify.hpp"

namespace rezk {

using Json = nlohmann::ordered_json;

struct CommandRequest {
  std::string subcommand;            // cof | normalize | enumerate | kan | cat
                                     // | complete | truncate-demo
  std::string action;                // cof: entails/dnf/decide; kan: wcom; cat: check
  std::vector<std::string> inputs;   // positional arguments (formulas, file paths)
  std::string ctxText;               // --ctx "i j"
  std::string termText;              // --term
  std::string subText;               // --sub
  std::string problemPath;           // --problem
  std::string functorPath;           // --functor
  std::string elements;              // --elements a,b
  int depth = 3;                     // --depth
  int samples = 20;                  // --samples
  std::uint64_t seed = 0;            // --seed
  long stepBudget = -1;              // --step-budget; -1 = RF_STEP_BUDGET or default
  std::string outPath;               // --out
  std::string format = "json";       // --format json|text
  bool externalize = false;
  bool verifyWeq = false;
  bool verifyCompleteness = false;
};

struct CliResult {
  int exitCode = 0;
  std::string output;
  Json report;
};

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline long resolve_budget(long flagValue) {
  if (flagValue >= 0) return flagValue;
  if (const char* env = std::getenv("RF_STEP_BUDGET")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0)
      throw ValidationError("RF_STEP_BUDGET must be a nonnegative integer");
    return v;
  }
  return 100000;
}

/// Context for formula arguments: the --ctx flag, or the free variables of
/// the formulas in first appearance order (forall binders excluded).
inline DimCtx formula_ctx(const std::vector<std::string>& texts, const std::string& flag) {
  if (!flag.empty()) return parse_dimctx(flag);
  std::vector<Sym> acc;
  std::vector<Sym> bound;
  for (const auto& text : texts) {
    bool binderNext = false;
    for (std::size_t k = 0; k < text.size();) {
      char c = text[k];
      if (c == '#') {
        while (k < text.size() && text[k] != '\n') ++k;
      } else if (detail::ident_start(c)) {
        std::size_t b = k;
        while (k < text.size() && detail::ident_char(text[k])) ++k;
        std::string w = text.substr(b, k - b);
        if (w == "T" || w == "F") continue;
        if (w == "forall") {
          binderNext = true;
          continue;
        }
        Sym s = intern(w);
        if (binderNext) {
          binderNext = false;
          bound.push_back(s);
          continue;
        }
        if (std::find(bound.begin(), bound.end(), s) != bound.end()) continue;
        if (std::find(acc.begin(), acc.end(), s) == acc.end()) acc.push_back(s);
      } else {
        ++k;
      }
    }
  }
  return DimCtx(std::move(acc));
}

inline Json report_json(const Report& rep) {
  Json obls = Json::array();
  for (const auto& o : rep.obligations) {
    Json e{{"id", o.id}, {"kind", o.kind}, {"status", o.status}};
    if (!o.witness.empty()) e["witness"] = o.witness;
    obls.push_back(std::move(e));
  }
  Json counts{{"pass", rep.count("pass")},
              {"fail", rep.count("fail")},
              {"unknown", rep.count("unknown")},
              {"total", rep.obligations.size()}};
  return Json{{"obligations", std::move(obls)}, {"counts", std::move(counts)}};
}

inline Json cert_json(const Certificate& c) {
  Json entries = Json::array();
  for (const auto& e : c.entries)
    entries.push_back(Json{{"desc", e.desc},
                           {"where", e.where},
                           {"left", term_str(e.left)},
                           {"right", term_str(e.right)},
                           {"pass", e.pass}});
  return Json{{"pass", c.pass()}, {"entries", std::move(entries)}, {"notes", c.notes}};
}

inline Json fragment_json(const Fragment& f) {
  Json objs = Json::array();
  for (std::size_t k = 0; k < f.objects.size(); ++k)
    objs.push_back(Json{{"index", k},
                        {"term", term_str(f.objects[k])},
                        {"depth", f.depths[k]},
                        {"parent", f.glueParent[k]}});
  Json homs = Json::array();
  for (const auto& hm : f.homs)
    homs.push_back(Json{
        {"term", term_str(hm.term)}, {"src", hm.src}, {"dst", hm.dst}, {"iso", hm.iso}});
  return Json{{"objects", std::move(objs)},
              {"homs", std::move(homs)},
              {"compose", f.compose}};
}

inline const char* sort_name(SortKind k) {
  switch (k) {
    case SortKind::Ob: return "ob";
    case SortKind::Hom: return "hom";
    case SortKind::Elt: return "elt";
  }
  return "?";
}

inline std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// -------------------------------------------------------------------------
// Subcommands; each fills the report fields of `j` and/or `rep`.

inline void run_cof(const CommandRequest& req, Json& j, Report&) {
  if (req.action == "entails") {
    if (req.inputs.size() != 2)
      throw ValidationError("cof entails needs two formula arguments");
    DimCtx ctx = formula_ctx(req.inputs, req.ctxText);
    Cofibration a = parse_cof(req.inputs[0], ctx);
    Cofibration b = parse_cof(req.inputs[1], ctx);
    bool res = entails(a, b);
    j["result"] = res;
    Json wit = Json::array();
    if (!res)
      for (const auto& f : critical_substitutions(ctx))
        if (decided(subst_cof(a, f)) && !decided(subst_cof(b, f))) wit.push_back(f.str());
    j["witnesses"] = std::move(wit);
    return;
  }
  if (req.action == "dnf") {
    if (req.inputs.size() != 1) throw ValidationError("cof dnf needs one formula argument");
    DimCtx ctx = formula_ctx(req.inputs, req.ctxText);
    Cofibration a = parse_cof(req.inputs[0], ctx);
    j["result"] = cof_canonical_str(a);
    Json cj = Json::array();
    for (const auto& c : dnf(a)) cj.push_back(c.str());
    j["conjuncts"] = std::move(cj);
    return;
  }
  if (req.action == "decide") {
    if (req.inputs.size() != 1) throw ValidationError("cof decide needs one formula argument");
    DimCtx ctx = formula_ctx(req.inputs, req.ctxText);
    j["result"] = decided(parse_cof(req.inputs[0], ctx));
    j["witnesses"] = Json::array();
    return;
  }
  throw ValidationError("unknown cof action '" + req.action +
                        "' (expected entails, dnf, or decide)");
}

inline void run_normalize(const CommandRequest& req, const NormalizeOptions& opts, Json& j,
                          Report&) {
  if (req.inputs.size() != 1) throw ValidationError("normalize needs a presentation file");
  if (req.termText.empty()) throw ValidationError("normalize needs --term");
  Presentation p = parse_presentation(read_file(req.inputs[0]));
  CompletionHandle h = complete(p, opts);
  DimCtx ctx = req.ctxText.empty() ? DimCtx() : parse_dimctx(req.ctxText);
  Term t = parse_term(req.termText, h, ctx);
  if (!req.subText.empty()) t = restrict_term(t, parse_sub(req.subText, ctx));
  Term nf = h.norm(t);
  j["result"] = term_str(nf);
  j["sort"] = sort_name(nf->sort.kind);
  j["context"] = nf->ctx.str();
}

inline void run_enumerate(const CommandRequest& req, const NormalizeOptions& opts, Json& j,
                          Report&) {
  if (req.inputs.size() != 1) throw ValidationError("enumerate needs a presentation file");
  Presentation p = parse_presentation(read_file(req.inputs[0]));
  CompletionHandle h = complete(p, opts);
  DimCtx ctx = req.ctxText.empty() ? DimCtx() : parse_dimctx(req.ctxText);
  auto obs = h.enumerate_obs(ctx, req.depth);
  Json oj = Json::array();
  for (const auto& t : obs) oj.push_back(term_str(t));
  j["objects"] = std::move(oj);
  Json counts{{"objects", obs.size()}};
  if (p.theory == Theory::CAT) {
    auto homs = h.enumerate_homs(ctx, req.depth);
    Json hj = Json::array();
    for (const auto& t : homs)
      hj.push_back(Json{{"term", term_str(t)},
                        {"src", term_str(t->sort.src)},
                        {"dst", term_str(t->sort.dst)}});
    j["homs"] = std::move(hj);
    counts["homs"] = homs.size();
  }
  j["enumerated"] = std::move(counts);
}

inline void run_kan(const CommandRequest& req, const NormalizeOptions& opts, Json& j,
                    Report& rep) {
  if (req.action != "wcom")
    throw ValidationError("unknown kan action '" + req.action + "' (expected wcom)");
  if (req.problemPath.empty()) throw ValidationError("kan wcom needs --problem");
  KanProblemSource ks = parse_kan_problem(read_file(req.problemPath), opts);
  CompletionHandle h = complete(ks.pres, opts);
  KanResult kr = wcom_from_ext(h, ks.problem);
  j["filler"] = term_str(kr.filler);
  j["fillerContext"] = kr.fillerCtx.str();
  if (kr.sVar) j["fillLevel"] = symbol_name(*kr.sVar);
  if (kr.path) {
    j["path"] = term_str(*kr.path);
    j["pathDim"] = symbol_name(kr.pathDim);
  }
  j["certificate"] = cert_json(kr.cert);
  detail::cert_to_report(rep, "wcom.cert", "kan", kr.cert);
}

inline void run_cat(const CommandRequest& req, const NormalizeOptions& opts, Json&,
                    Report& rep) {
  if (req.action != "check")
    throw ValidationError("unknown cat action '" + req.action + "' (expected check)");
  if (req.functorPath.empty()) throw ValidationError("cat check needs --functor");
  FunctorSpec F = parse_functor(read_file(req.functorPath));
  rep = check_split_classes(F, req.depth, opts);
}

inline void run_complete(const CommandRequest& req, const NormalizeOptions& opts, Json& j,
                         Report& rep) {
  if (req.inputs.size() != 1) throw ValidationError("complete needs a presentation file");
  Presentation p = parse_presentation(read_file(req.inputs[0]));
  CompletionHandle h = complete(p, opts);
  if (req.externalize) {
    Fragment f = externalize(h, req.depth);
    Json perDepth = Json::array();
    for (int d = 0; d <= req.depth; ++d) {
      std::size_t n = 0;
      for (int dk : f.depths)
        if (dk <= d) ++n;
      perDepth.push_back(n);
    }
    j["objectCounts"] = std::move(perDepth);
    j["fragment"] = fragment_json(f);
  }
  if (req.verifyWeq) rep.merge(verify_weq_dim0(h, req.depth));
  if (req.verifyCompleteness) rep.merge(verify_completeness(h, req.samples, req.seed));
  rep.sort_by_id();
}

inline void run_truncate_demo(const CommandRequest& req, const NormalizeOptions& opts, Json& j,
                              Report& rep) {
  auto names = split_commas(req.elements);
  if (names.size() < 2)
    throw ValidationError("truncate-demo needs --elements with at least two names");
  Presentation p;
  p.theory = Theory::SET;
  for (const auto& n : names) p.obGens.push_back(intern(n));
  p.validate();
  CompletionHandle h = complete(p, opts);
  DimCtx empty;
  Json paths = Json::array();
  for (std::size_t k = 0; k + 1 < names.size(); ++k) {
    Term x = ob_term(p, p.obGens[k], empty);
    Term y = ob_term(p, p.obGens[k + 1], empty);
    PathResult pr = center_and_path(h, x, y);
    std::string id = "trunc.path." + names[k] + "->" + names[k + 1];
    DimCtx ctxP = empty.extend(pr.pathDim);
    Term at0 = h.norm(
        restrict_term(pr.path, Substitution::face(ctxP, pr.pathDim, IntervalExpr::end0())));
    Term at1 = h.norm(
        restrict_term(pr.path, Substitution::face(ctxP, pr.pathDim, IntervalExpr::end1())));
    rep.add(id + ".ep0", "truncation", term_eq(at0, h.norm(x)), term_str(at0));
    rep.add(id + ".ep1", "truncation", term_eq(at1, h.norm(y)), term_str(at1));
    detail::cert_to_report(rep, id + ".cert", "truncation", pr.cert);
    paths.push_back(Json{{"from", names[k]},
                         {"to", names[k + 1]},
                         {"dim", symbol_name(pr.pathDim)},
                         {"path", term_str(pr.path)},
                         {"center", term_str(pr.center)}});
  }
  j["paths"] = std::move(paths);
  auto obs = h.enumerate_obs(empty, req.depth);
  Json ej = Json::array();
  for (const auto& t : obs) ej.push_back(term_str(t));
  j["truncationElements"] = std::move(ej);
  rep.sort_by_id();
}

inline std::string text_render(const Json& j) {
  std::ostringstream out;
  if (j.contains("error")) {
    out << "error: " << j["error"]["message"].get<std::string>() << "\n";
    return out.str();
  }
  if (j.contains("result")) out << "result: " << j["result"].dump() << "\n";
  if (j.contains("filler")) out << "filler: " << j["filler"].get<std::string>() << "\n";
  if (j.contains("path")) out << "path: " << j["path"].get<std::string>() << "\n";
  if (j.contains("obligations"))
    for (const auto& o : j["obligations"]) {
      std::string status = o["status"].get<std::string>();
      for (char& c : status) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      out << status << " " << o["id"].get<std::string>();
      if (o.contains("witness")) out << " (" << o["witness"].get<std::string>() << ")";
      out << "\n";
    }
  if (j.contains("counts"))
    out << "counts: " << j["counts"]["pass"] << " pass, " << j["counts"]["fail"] << " fail, "
        << j["counts"]["unknown"] << " unknown\n";
  return out.str();
}

}  // namespace cli_detail

inline CliResult run(const CommandRequest& req) {
  auto t0 = std::chrono::steady_clock::now();
  Json j;
  j["command"] = req.subcommand;
  Report rep;
  int code = 0;
  try {
    NormalizeOptions opts;
    opts.budget = cli_detail::resolve_budget(req.stepBudget);
    if (req.subcommand == "cof")
      cli_detail::run_cof(req, j, rep);
    else if (req.subcommand == "normalize")
      cli_detail::run_normalize(req, opts, j, rep);
    else if (req.subcommand == "enumerate")
      cli_detail::run_enumerate(req, opts, j, rep);
    else if (req.subcommand == "kan")
      cli_detail::run_kan(req, opts, j, rep);
    else if (req.subcommand == "cat")
      cli_detail::run_cat(req, opts, j, rep);
    else if (req.subcommand == "complete")
      cli_detail::run_complete(req, opts, j, rep);
    else if (req.subcommand == "truncate-demo")
      cli_detail::run_truncate_demo(req, opts, j, rep);
    else
      throw ValidationError("unknown subcommand '" + req.subcommand + "'");
    Json rj = cli_detail::report_json(rep);
    j["obligations"] = rj["obligations"];
    j["counts"] = rj["counts"];
    if (rep.any_fail())
      code = 1;
    else if (rep.any_unknown())
      code = 3;
  } catch (const BudgetExceeded& e) {
    rep.add_unknown("budget", "budget", e.what());
    Json rj = cli_detail::report_json(rep);
    j["obligations"] = rj["obligations"];
    j["counts"] = rj["counts"];
    code = 3;
  } catch (const ParseError& e) {
    j["error"] = Json{{"message", e.what()}, {"line", e.line}, {"col", e.col}};
    code = 2;
  } catch (const std::exception& e) {
    j["error"] = Json{{"message", e.what()}};
    code = 2;
  }
  auto t1 = std::chrono::steady_clock::now();
  j["timings"] = Json{
      {"total_ms", std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()}};
  CliResult out;
  out.exitCode = code;
  out.report = j;
  out.output = req.format == "text" ? cli_detail::text_render(j) : j.dump(2) + "\n";
  if (!req.outPath.empty()) {
    std::ofstream f(req.outPath, std::ios::binary);
    if (!f) {
      out.exitCode = 2;
      out.output += "error: cannot write " + req.outPath + "\n";
    } else {
      f << j.dump(2) << "\n";
    }
  }
  return out;
}

}  // namespace rezk
