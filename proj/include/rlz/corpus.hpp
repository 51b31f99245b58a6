#pragma once

// Golden corpus entries: one entry per file with header lines
//   name: <identifier>
//   level: st | f | fw
//   ctx: #a: Prop; #p: @k -> Prop      (optional; tvars without '#')
//   env: x: A; y: B                    (optional)
//   type: A
//   term: M
//   expect: realized | stuck | check-ok | check-fail
// Lines starting with -- are comments.

#include <string>
#include <vector>

#include "rlz/syntax.hpp"

namespace rlz {

struct CorpusEntry {
  std::string name;
  Level level = Level::ST;
  KindCtx ctx;
  TypeEnv env;
  TypePtr type;
  MetatermPtr term;
  enum class Expect { Realized, Stuck, CheckOk, CheckFail } expect;
};

CorpusEntry parse_corpus_entry(const std::string& text);
CorpusEntry load_corpus_entry(const std::string& path);

struct CorpusOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

CorpusOutcome run_corpus_entry(const CorpusEntry& entry, uint64_t fuel);

// Runs every *.rlz file in a directory (or one file).
std::vector<CorpusOutcome> run_corpus(const std::string& path, uint64_t fuel);

}  // namespace rlz
