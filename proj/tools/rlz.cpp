// rlz: batch front end for the realizability engine.
//
// Exit codes: 0 success, 1 negative verdict (stuck / check failure / suite
// failure), 2 usage or parse error, 3 fuel exhaustion.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rlz/corpus.hpp"
#include "rlz/extract.hpp"
#include "rlz/gen.hpp"
#include "rlz/json_io.hpp"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/suite.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

using namespace rlz;

namespace {

struct GlobalOpts {
  std::string calculus = "st";
  uint64_t fuel = 1000000;
  uint64_t seed = 0;
  bool json = false;
  std::string trace_path;

  Level level() const {
    auto lv = level_from_name(calculus);
    if (!lv) throw CLI::ValidationError("--calculus must be st, f, or fw");
    return *lv;
  }
};

uint64_t default_fuel() {
  if (const char* env = std::getenv("RLZ_FUEL")) {
    char* end = nullptr;
    uint64_t v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return 1000000;
}

std::string trim_copy(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

KindCtx parse_ctx_flag(const std::string& spec, Level lv) {
  KindCtx ctx;
  std::istringstream in(spec);
  std::string binding;
  while (std::getline(in, binding, ';')) {
    std::string b = trim_copy(binding);
    if (b.empty()) continue;
    size_t colon = b.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad ctx binding: " + b);
    std::string name = trim_copy(b.substr(0, colon));
    KindPtr kind = parse_kind(trim_copy(b.substr(colon + 1)), lv);
    if (!name.empty() && name[0] == '#')
      ctx = ctx.with_eig(name.substr(1), kind);
    else
      ctx = ctx.with_tvar(name, kind);
  }
  return ctx;
}

TypeEnv parse_env_flag(const std::string& spec, Level lv) {
  TypeEnv env;
  std::istringstream in(spec);
  std::string binding;
  while (std::getline(in, binding, ';')) {
    std::string b = trim_copy(binding);
    if (b.empty()) continue;
    size_t colon = b.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad env binding: " + b);
    env = env.extended(trim_copy(b.substr(0, colon)),
                       parse_type(trim_copy(b.substr(colon + 1)), lv));
  }
  return env;
}

void emit_trace(const GlobalOpts& g, const Trace& trace, Strategy strategy) {
  if (g.trace_path.empty()) return;
  std::ofstream out(g.trace_path);
  out << trace_to_jsonl(trace, strategy, g.fuel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"realizability engine for verifier/generator semantics"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  g.fuel = default_fuel();
  app.add_option("--calculus", g.calculus, "calculus level: st, f, fw")
      ->capture_default_str();
  app.add_option("--fuel", g.fuel, "reduction fuel")->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_flag("--json", g.json, "machine-readable output");
  app.add_option("--trace", g.trace_path, "write the reduction trace (JSON lines) to a file");

  // parse
  std::string parse_sort = "term";
  std::string parse_text;
  auto* cmd_parse = app.add_subcommand("parse", "parse and reprint an expression");
  cmd_parse->add_option("--sort", parse_sort, "kind | type | term")->capture_default_str();
  cmd_parse->add_option("text", parse_text, "expression")->required();

  // reduce
  std::string reduce_strategy = "wh";
  std::string reduce_text;
  auto* cmd_reduce = app.add_subcommand("reduce", "run the rewrite engine");
  cmd_reduce->add_option("--strategy", reduce_strategy, "wh | lo | random")
      ->capture_default_str();
  cmd_reduce->add_option("term", reduce_text, "metaterm")->required();

  // verify
  std::string v_type, v_term, v_env, v_ctx;
  bool v_close_tvars = false;
  auto* cmd_verify = app.add_subcommand("verify", "decide whether a term realizes a type");
  cmd_verify->add_option("--type", v_type, "the proposition")->required();
  cmd_verify->add_option("--term", v_term, "the candidate realizer")->required();
  cmd_verify->add_option("--env", v_env, "environment: x: A; y: B");
  cmd_verify->add_option("--ctx", v_ctx, "kind context: #a: Prop; p: @k -> Prop");
  cmd_verify->add_flag("--close-tvars", v_close_tvars,
                       "replace free type variables by fresh eigenvariables");

  // check
  std::string c_type, c_term, c_env, c_ctx;
  auto* cmd_check = app.add_subcommand("check", "type-check a pure term");
  cmd_check->add_option("--type", c_type, "the type")->required();
  cmd_check->add_option("--term", c_term, "the subject")->required();
  cmd_check->add_option("--env", c_env, "environment: x: A; y: B");
  cmd_check->add_option("--ctx", c_ctx, "kind context");

  // extract
  std::string x_type, x_term, x_env, x_ctx;
  auto* cmd_extract =
      app.add_subcommand("extract", "extract a typing derivation from a realizer");
  cmd_extract->add_option("--type", x_type, "the proposition")->required();
  cmd_extract->add_option("--term", x_term, "the good realizer")->required();
  cmd_extract->add_option("--env", x_env, "environment");
  cmd_extract->add_option("--ctx", x_ctx, "kind context");

  // gen
  int gen_depth = 4;
  int gen_env = 2;
  bool gen_typed = false;
  bool gen_pure = false;
  auto* cmd_gen = app.add_subcommand("gen", "generate a random (typed) term");
  cmd_gen->add_option("--depth", gen_depth, "generation depth")->capture_default_str();
  cmd_gen->add_option("--env-size", gen_env, "environment size")->capture_default_str();
  cmd_gen->add_flag("--typed", gen_typed, "generate a well-typed judgment");
  cmd_gen->add_flag("--pure", gen_pure, "generate a pure closed term");

  // suite
  std::string suite_name;
  size_t suite_cases = 100;
  int suite_depth = 4;
  auto* cmd_suite = app.add_subcommand("suite", "run a property suite");
  cmd_suite->add_option("name", suite_name, "suite name")->required();
  cmd_suite->add_option("--cases", suite_cases, "number of cases")->capture_default_str();
  cmd_suite->add_option("--depth", suite_depth, "generation depth")->capture_default_str();

  // corpus
  std::string corpus_path;
  auto* cmd_corpus = app.add_subcommand("corpus", "run golden corpus entries");
  cmd_corpus->add_option("path", corpus_path, "corpus file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Level lv = g.level();

    if (cmd_parse->parsed()) {
      Sort sort = parse_sort == "kind"   ? Sort::KindSort
                  : parse_sort == "type" ? Sort::TypeSort
                                         : Sort::TermSort;
      Ast ast = parse(parse_text, sort, lv);
      std::string printed = std::visit([](const auto& x) { return print(x); }, ast);
      if (g.json)
        std::cout << nlohmann::json{{"sort", parse_sort}, {"text", printed}}.dump() << "\n";
      else
        std::cout << printed << "\n";
      return 0;
    }

    if (cmd_reduce->parsed()) {
      MetatermPtr m = erase_annotations(parse_term(reduce_text, lv));
      if (lv == Level::ST) m = expand_st(m);
      Strategy strategy = reduce_strategy == "lo"       ? Strategy::LeftmostOutermost
                          : reduce_strategy == "random" ? Strategy::Random
                                                        : Strategy::WeakHead;
      ReduceSession session;
      session.level = lv;
      Trace trace = reduce(session, m, strategy, g.fuel, g.seed);
      emit_trace(g, trace, strategy);
      if (g.json)
        std::cout << trace_to_jsonl(trace, strategy, g.fuel);
      else
        std::cout << outcome_name(trace.outcome) << " after " << trace.step_count
                  << " steps: " << print(trace.final_term) << "\n";
      return trace.outcome == Outcome::FuelExhausted ? 3 : 0;
    }

    if (cmd_verify->parsed()) {
      KindCtx ctx = parse_ctx_flag(v_ctx, lv);
      TypeEnv env = parse_env_flag(v_env, lv);
      VerifyOptions opts;
      opts.fuel = g.fuel;
      opts.tvars = v_close_tvars ? FreeTvarPolicy::AutoClose : FreeTvarPolicy::Reject;
      Verdict v = realizes(lv, ctx, env, parse_type(v_type, lv), parse_term(v_term, lv), opts);
      emit_trace(g, v.trace, Strategy::WeakHead);
      if (g.json)
        std::cout << verdict_to_jsonl(v, g.fuel);
      else if (v.realized())
        std::cout << "realized in " << v.trace.step_count << " steps\n";
      else
        std::cout << verdict_name(v.kind) << " at " << print(v.final_term) << " after "
                  << v.trace.step_count << " steps\n";
      if (v.kind == Verdict::Kind::FuelExhausted) return 3;
      return v.realized() ? 0 : 1;
    }

    if (cmd_check->parsed()) {
      KindCtx ctx = parse_ctx_flag(c_ctx, lv);
      TypeEnv env = parse_env_flag(c_env, lv);
      CheckResult r = check(lv, ctx, env, parse_term(c_term, lv), parse_type(c_type, lv));
      if (g.json) {
        nlohmann::json out;
        out["ok"] = r.ok();
        if (r.ok())
          out["derivation"] = derivation_to_json(r.derivation);
        else
          out["error"] = {{"path", r.fail->path}, {"reason", r.fail->reason}};
        std::cout << out.dump(2) << "\n";
      } else if (r.ok()) {
        std::cout << "check-ok\n";
      } else {
        std::cout << "check-fail at [" << r.fail->path << "]: " << r.fail->reason << "\n";
      }
      return r.ok() ? 0 : 1;
    }

    if (cmd_extract->parsed()) {
      KindCtx ctx = parse_ctx_flag(x_ctx, lv);
      TypeEnv env = parse_env_flag(x_env, lv);
      try {
        ExtractResult r =
            extract(lv, ctx, env, parse_type(x_type, lv), parse_term(x_term, lv), g.fuel);
        if (g.json)
          std::cout << extract_result_to_json(r).dump(2) << "\n";
        else
          std::cout << "normal form: " << print(r.normal_form)
                    << "\nproof size: " << r.size << "\neta-long: " << print(r.eta_long)
                    << "\n";
        return 0;
      } catch (const ExtractionFuelExhausted& e) {
        std::cerr << "fuel exhausted: " << e.what() << "\n";
        return 3;
      } catch (const NotRealizer& e) {
        std::cerr << e.what() << "\n";
        return 1;
      }
    }

    if (cmd_gen->parsed()) {
      GenConfig cfg;
      cfg.seed = g.seed;
      cfg.level = lv;
      cfg.max_depth = gen_depth;
      cfg.env_size = gen_env;
      cfg.fuel = g.fuel;
      if (gen_typed) {
        TypedJudgment j = gen_typed_term(cfg);
        if (g.json) {
          nlohmann::json env = nlohmann::json::array();
          for (const auto& [x, t] : j.env.entries())
            env.push_back({{"var", x}, {"type", print(t)}});
          std::cout << nlohmann::json{{"env", env},
                                      {"term", print(j.term)},
                                      {"type", print(j.type)}}
                           .dump()
                    << "\n";
        } else {
          for (const auto& [x, t] : j.env.entries())
            std::cout << x << " : " << print(t) << "\n";
          std::cout << print(j.term) << " : " << print(j.type) << "\n";
        }
      } else {
        MetatermPtr m = gen_pure ? gen_pure_closed(cfg) : gen_metaterm(cfg);
        std::cout << print(m) << "\n";
      }
      return 0;
    }

    if (cmd_suite->parsed()) {
      GenConfig cfg;
      cfg.seed = g.seed;
      cfg.level = lv;
      cfg.max_depth = suite_depth;
      cfg.fuel = g.fuel;
      SuiteReport r = run_suite(suite_name, cfg, suite_cases);
      if (g.json) {
        std::cout << nlohmann::json{{"suite", r.name},
                                    {"cases", r.cases},
                                    {"passed", r.passed},
                                    {"failed", r.failed},
                                    {"inconclusive", r.inconclusive},
                                    {"first_fail_seed", r.first_fail_seed},
                                    {"detail", r.detail}}
                         .dump()
                  << "\n";
      } else {
        std::cout << r.name << ": " << r.passed << "/" << r.cases << " passed";
        if (r.inconclusive) std::cout << ", " << r.inconclusive << " inconclusive";
        if (r.failed)
          std::cout << ", " << r.failed << " FAILED (first seed " << r.first_fail_seed << ")\n"
                    << r.detail << "\n";
        else
          std::cout << "\n";
      }
      return r.ok() ? 0 : 1;
    }

    if (cmd_corpus->parsed()) {
      auto outcomes = run_corpus(corpus_path, g.fuel);
      bool all = true;
      for (const auto& o : outcomes) {
        all = all && o.passed;
        if (g.json)
          std::cout << nlohmann::json{{"name", o.name},
                                      {"passed", o.passed},
                                      {"detail", o.detail}}
                           .dump()
                    << "\n";
        else
          std::cout << (o.passed ? "pass" : "FAIL") << "  " << o.name << "  (" << o.detail
                    << ")\n";
      }
      return all ? 0 : 1;
    }
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const LevelError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
