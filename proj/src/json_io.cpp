#include "rlz/json_io.hpp"

#include "rlz/printer.hpp"

namespace rlz {

using nlohmann::json;

std::string trace_to_jsonl(const Trace& trace, Strategy strategy, uint64_t fuel) {
  std::string out;
  json header = {{"level", level_name(trace.level)},
                 {"strategy", strategy_name(strategy)},
                 {"fuel", fuel}};
  out += header.dump();
  out += '\n';
  size_t i = 0;
  for (const auto& step : trace.steps) {
    json line = {{"step", i++},
                 {"rule", rule_tag_name(step.rule)},
                 {"pos", path_to_string(step.pos)},
                 {"term", print(step.after)}};
    out += line.dump();
    out += '\n';
  }
  json footer = {{"outcome", outcome_name(trace.outcome)}};
  out += footer.dump();
  out += '\n';
  return out;
}

std::string verdict_to_jsonl(const Verdict& v, uint64_t fuel) {
  std::string out = trace_to_jsonl(v.trace, Strategy::WeakHead, fuel);
  json final_line = {{"verdict", verdict_name(v.kind)}, {"steps", v.trace.step_count}};
  out += final_line.dump();
  out += '\n';
  return out;
}

namespace {

json env_to_json(const TypeEnv& env) {
  json out = json::array();
  for (const auto& [x, t] : env.entries()) out.push_back({{"var", x}, {"type", print(t)}});
  return out;
}

json ctx_to_json(const KindCtx& ctx) {
  json out = json::array();
  for (const auto& [a, k] : ctx.tvars()) out.push_back({{"tvar", a}, {"kind", print(k)}});
  for (const auto& [a, k] : ctx.eigs()) out.push_back({{"eigvar", "#" + a}, {"kind", print(k)}});
  return out;
}

}  // namespace

json derivation_to_json(const TypingDerivationPtr& d) {
  json out;
  out["rule"] = rule_name(d->rule);
  out["ctx"] = ctx_to_json(d->ctx);
  out["env"] = env_to_json(d->env);
  out["term"] = print(d->term);
  out["type"] = print(d->type);
  if (!d->binder_name.empty()) out["binder"] = d->binder_name;
  if (d->elim_arg) out["type_arg"] = print(d->elim_arg);
  json prems = json::array();
  for (const auto& p : d->premises) prems.push_back(derivation_to_json(p));
  out["premises"] = std::move(prems);
  return out;
}

json lderiv_to_json(const LinDerivPtr& d) {
  json out;
  out["rule"] = lin_rule_name(d->rule);
  json env = json::array();
  for (const auto& [x, m] : d->env.entries())
    env.push_back({{"var", x}, {"multitype", multi_show(m)}});
  out["env"] = std::move(env);
  out["term"] = print(d->subject);
  if (d->is_multi)
    out["linear_type"] = multi_show(d->multi);
  else
    out["linear_type"] = lin_show(d->type);
  if (!d->opened.empty()) out["opened"] = d->opened;
  json prems = json::array();
  for (const auto& p : d->premises) prems.push_back(lderiv_to_json(p));
  out["premises"] = std::move(prems);
  return out;
}

json extract_result_to_json(const ExtractResult& r) {
  json out;
  out["normal_form"] = print(r.normal_form);
  out["derivation"] = derivation_to_json(r.derivation);
  out["proof_size"] = r.size;
  out["eta_long"] = print(r.eta_long);
  return out;
}

}  // namespace rlz
