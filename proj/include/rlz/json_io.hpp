#pragma once

// JSON serializations for traces (JSON lines), verdicts, typing derivations,
// and intersection-type derivations.

#include <string>

#include "json.hpp"
#include "rlz/extract.hpp"
#include "rlz/intersect.hpp"
#include "rlz/reduction.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

namespace rlz {

// One object per line: a header {"level","strategy","fuel"}, then
// {"step",i,"rule","pos","term"} per step, then {"outcome": ...}.
std::string trace_to_jsonl(const Trace& trace, Strategy strategy, uint64_t fuel);

// The trace stream followed by {"verdict": "...", "steps": n}.
std::string verdict_to_jsonl(const Verdict& v, uint64_t fuel);

nlohmann::json derivation_to_json(const TypingDerivationPtr& d);
nlohmann::json lderiv_to_json(const LinDerivPtr& d);
nlohmann::json extract_result_to_json(const ExtractResult& r);

}  // namespace rlz
