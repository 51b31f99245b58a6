#include "rlz/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

namespace rlz {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

CorpusEntry parse_corpus_entry(const std::string& text) {
  CorpusEntry entry;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.rfind("--", 0) == 0) continue;
    size_t colon = t.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("corpus line without a field: " + t);
    fields[trim(t.substr(0, colon))] = trim(t.substr(colon + 1));
  }
  for (const char* required : {"name", "level", "type", "term", "expect"})
    if (!fields.count(required))
      throw std::invalid_argument(std::string("corpus entry is missing: ") + required);

  entry.name = fields["name"];
  auto lv = level_from_name(fields["level"]);
  if (!lv) throw std::invalid_argument("bad level: " + fields["level"]);
  entry.level = *lv;

  if (fields.count("ctx")) {
    std::istringstream cs(fields["ctx"]);
    std::string binding;
    while (std::getline(cs, binding, ';')) {
      std::string b = trim(binding);
      if (b.empty()) continue;
      size_t colon = b.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("bad ctx binding: " + b);
      std::string name = trim(b.substr(0, colon));
      KindPtr kind = parse_kind(trim(b.substr(colon + 1)), entry.level);
      if (!name.empty() && name[0] == '#')
        entry.ctx = entry.ctx.with_eig(name.substr(1), kind);
      else
        entry.ctx = entry.ctx.with_tvar(name, kind);
    }
  }
  if (fields.count("env")) {
    std::istringstream es(fields["env"]);
    std::string binding;
    while (std::getline(es, binding, ';')) {
      std::string b = trim(binding);
      if (b.empty()) continue;
      size_t colon = b.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("bad env binding: " + b);
      entry.env = entry.env.extended(trim(b.substr(0, colon)),
                                     parse_type(trim(b.substr(colon + 1)), entry.level));
    }
  }
  entry.type = parse_type(fields["type"], entry.level);
  entry.term = parse_term(fields["term"], entry.level);

  const std::string& e = fields["expect"];
  if (e == "realized")
    entry.expect = CorpusEntry::Expect::Realized;
  else if (e == "stuck")
    entry.expect = CorpusEntry::Expect::Stuck;
  else if (e == "check-ok")
    entry.expect = CorpusEntry::Expect::CheckOk;
  else if (e == "check-fail")
    entry.expect = CorpusEntry::Expect::CheckFail;
  else
    throw std::invalid_argument("bad expectation: " + e);
  return entry;
}

CorpusEntry load_corpus_entry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus_entry(buf.str());
}

CorpusOutcome run_corpus_entry(const CorpusEntry& entry, uint64_t fuel) {
  CorpusOutcome out;
  out.name = entry.name;
  switch (entry.expect) {
    case CorpusEntry::Expect::Realized:
    case CorpusEntry::Expect::Stuck: {
      VerifyOptions opts;
      opts.fuel = fuel;
      opts.record_steps = false;
      Verdict v = realizes(entry.level, entry.ctx, entry.env, entry.type, entry.term, opts);
      bool want_realized = entry.expect == CorpusEntry::Expect::Realized;
      out.passed = want_realized ? v.realized() : v.kind == Verdict::Kind::Stuck;
      out.detail = verdict_name(v.kind) +
                   (v.realized() ? "" : " at " + print(v.final_term)) + " in " +
                   std::to_string(v.trace.step_count) + " steps";
      return out;
    }
    case CorpusEntry::Expect::CheckOk:
    case CorpusEntry::Expect::CheckFail: {
      CheckResult r = check(entry.level, entry.ctx, entry.env, entry.term, entry.type);
      bool want_ok = entry.expect == CorpusEntry::Expect::CheckOk;
      bool revalidates = r.ok() && validate(r.derivation);
      out.passed = want_ok ? revalidates : !r.ok();
      out.detail = r.ok() ? "check-ok" : "check-fail: " + r.fail->reason;
      return out;
    }
  }
  out.detail = "unreachable";
  return out;
}

std::vector<CorpusOutcome> run_corpus(const std::string& path, uint64_t fuel) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path))
      if (e.path().extension() == ".rlz") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<CorpusOutcome> out;
  for (const auto& f : files) {
    try {
      out.push_back(run_corpus_entry(load_corpus_entry(f), fuel));
    } catch (const std::exception& e) {
      out.push_back(CorpusOutcome{f, false, e.what()});
    }
  }
  return out;
}

}  // namespace rlz
