#include "rlz/parser.hpp"

#include <cctype>

namespace rlz {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

const std::set<std::string> kKeywords = {"star", "seq", "gen", "ver", "nu", "forall", "Prop"};

// Binder occurrences parse as free names and are closed at the binder node;
// inner binders close their own occurrences first, so shadowing works out.
class Parser {
 public:
  Parser(const std::string& text, Level lv) : text_(text), lv_(lv) {}

  KindPtr kind_top() {
    KindPtr k = kind();
    expect_end();
    return k;
  }
  TypePtr type_top() {
    TypePtr t = type();
    expect_end();
    return t;
  }
  MetatermPtr term_top() {
    MetatermPtr m = term();
    expect_end();
    return m;
  }

 private:
  const std::string& text_;
  Level lv_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) { throw ParseError(pos_, expected); }

  void skip_ws() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) pos_++;
      if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '-') {
        while (pos_ < text_.size() && text_[pos_] != '\n') pos_++;
        continue;
      }
      break;
    }
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  void expect_end() {
    if (!at_end()) fail("end of input");
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool try_sym(const std::string& s) {
    skip_ws();
    if (text_.compare(pos_, s.size(), s) != 0) return false;
    pos_ += s.size();
    return true;
  }

  void expect_sym(const std::string& s) {
    if (!try_sym(s)) fail("'" + s + "'");
  }

  bool peek_arrow() {
    skip_ws();
    return text_.compare(pos_, 2, "->") == 0;
  }

  std::optional<std::string> try_ident() {
    skip_ws();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) pos_++;
    std::string id = text_.substr(start, pos_ - start);
    if (kKeywords.count(id)) {
      pos_ = start;
      return std::nullopt;
    }
    return id;
  }

  std::string ident(const std::string& what) {
    auto id = try_ident();
    if (!id) fail(what);
    return *id;
  }

  bool try_keyword(const std::string& kw) {
    skip_ws();
    if (text_.compare(pos_, kw.size(), kw) != 0) return false;
    size_t after = pos_ + kw.size();
    if (after < text_.size() && ident_char(text_[after])) return false;
    pos_ = after;
    return true;
  }

  bool peek_keyword(const std::string& kw) {
    skip_ws();
    if (text_.compare(pos_, kw.size(), kw) != 0) return false;
    size_t after = pos_ + kw.size();
    return after >= text_.size() || !ident_char(text_[after]);
  }

  // -------------------------------------------------------------- kinds

  KindPtr kind() {
    KindPtr left = kind_atom();
    if (try_sym("->")) return kind_arrow(left, kind());
    return left;
  }

  KindPtr kind_atom() {
    if (try_keyword("Prop")) return kind_prop();
    if (try_sym("@")) {
      if (lv_ != Level::FOmega) throw LevelError("base kinds require level fw");
      return kind_base(ident("base kind name"));
    }
    if (try_sym("(")) {
      KindPtr k = kind();
      expect_sym(")");
      return k;
    }
    fail("kind");
  }

  KindPtr optional_binder_kind() {
    KindPtr k = kind_prop();
    if (try_sym(":")) {
      k = kind();
      if (lv_ == Level::F && !is_prop(k))
        throw LevelError("non-Prop binder kinds require level fw");
    }
    return k;
  }

  // -------------------------------------------------------------- types

  TypePtr type() {
    if (try_keyword("forall")) {
      if (lv_ == Level::ST) throw LevelError("forall is not part of the ST level");
      std::string a = ident("type variable");
      KindPtr k = optional_binder_kind();
      expect_sym(".");
      TypePtr body = type();
      return t_forall(a, k, close_tvar(body, a));
    }
    if (peek() == '\\') {
      expect_sym("\\");
      if (lv_ != Level::FOmega) throw LevelError("type-level lambda requires level fw");
      std::string a = ident("type variable");
      expect_sym(":");
      KindPtr k = kind();
      expect_sym(".");
      TypePtr body = type();
      return t_tlam(a, k, close_tvar(body, a));
    }
    TypePtr left = type_app();
    if (try_sym("->")) return t_arrow(left, type());
    return left;
  }

  TypePtr type_app() {
    TypePtr t = type_atom();
    for (;;) {
      if (peek_arrow()) break;
      char c = peek();
      bool starts_atom = c == '(' || c == '#';
      if (!starts_atom && ident_start(c)) {
        size_t save = pos_;
        starts_atom = try_ident().has_value();
        pos_ = save;
      }
      if (!starts_atom) break;
      if (lv_ != Level::FOmega) throw LevelError("type application requires level fw");
      t = t_tapp(t, type_atom());
    }
    return t;
  }

  TypePtr type_atom() {
    if (try_sym("#")) return t_eig(ident("eigenvariable name"));
    if (try_sym("(")) {
      TypePtr t = type();
      expect_sym(")");
      return t;
    }
    if (auto id = try_ident()) {
      if (lv_ == Level::ST) throw LevelError("type variables are not part of the ST level");
      return t_var(*id);
    }
    fail("type");
  }

  // -------------------------------------------------------------- terms

  MetatermPtr term() {
    if (peek() == '\\') {
      expect_sym("\\");
      std::string x = ident("variable");
      expect_sym(".");
      MetatermPtr body = term();
      return m_lam(x, close_term(body, x));
    }
    if (try_sym("/\\")) {
      if (lv_ == Level::ST) throw LevelError("type abstraction is not part of the ST level");
      std::string a = ident("type variable");
      KindPtr k = optional_binder_kind();
      expect_sym(".");
      MetatermPtr body = term();
      return m_tylam(a, k, close_tvar_in_term(body, a));
    }
    if (try_keyword("nu")) {
      if (lv_ == Level::ST) throw LevelError("nu binders are not part of the ST level");
      expect_sym("#");
      std::string a = ident("eigenvariable name");
      KindPtr k = optional_binder_kind();
      expect_sym(".");
      MetatermPtr body = term();
      return m_fresh(a, k, close_eig_in_term(body, a));
    }
    return term_app();
  }

  MetatermPtr term_app() {
    MetatermPtr t = term_atom();
    for (;;) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '[') {
        pos_++;
        if (lv_ == Level::ST) throw LevelError("type application is not part of the ST level");
        TypePtr a = type();
        expect_sym("]");
        t = m_tyapp(t, canonicalize_type(lv_, a));
        continue;
      }
      char c = peek();
      bool starts_atom = c == '(';
      if (!starts_atom && ident_start(c)) {
        starts_atom = peek_keyword("star") || peek_keyword("seq") || peek_keyword("gen") ||
                      peek_keyword("ver");
        if (!starts_atom) {
          size_t save = pos_;
          starts_atom = try_ident().has_value();
          pos_ = save;
        }
      }
      if (!starts_atom) break;
      t = m_app(t, term_atom());
    }
    return t;
  }

  MetatermPtr term_atom() {
    if (try_keyword("star")) return m_star();
    if (try_keyword("seq")) {
      expect_sym("(");
      MetatermPtr a = term();
      expect_sym(",");
      MetatermPtr b = term();
      expect_sym(")");
      return m_guard(a, b);
    }
    if (try_keyword("gen")) {
      expect_sym("(");
      TypePtr a = type();
      expect_sym(")");
      return m_gen(canonicalize_type(lv_, a));
    }
    if (try_keyword("ver")) {
      expect_sym("(");
      TypePtr a = type();
      expect_sym(",");
      MetatermPtr m = term();
      expect_sym(")");
      return m_verif(canonicalize_type(lv_, a), m);
    }
    if (try_sym("(")) {
      MetatermPtr t = term();
      if (try_sym(":")) {
        TypePtr a = type();
        expect_sym(")");
        return m_anno(t, canonicalize_type(lv_, a));
      }
      expect_sym(")");
      return t;
    }
    if (auto id = try_ident()) return m_var(*id);
    fail("term");
  }
};

}  // namespace

KindPtr parse_kind(const std::string& text, Level lv) { return Parser(text, lv).kind_top(); }

TypePtr parse_type(const std::string& text, Level lv) {
  return canonicalize_type(lv, Parser(text, lv).type_top());
}

MetatermPtr parse_term(const std::string& text, Level lv) {
  return canonicalize(lv, Parser(text, lv).term_top());
}

Ast parse(const std::string& text, Sort sort, Level lv) {
  switch (sort) {
    case Sort::KindSort: return parse_kind(text, lv);
    case Sort::TypeSort: return parse_type(text, lv);
    case Sort::TermSort: return parse_term(text, lv);
  }
  throw std::logic_error("bad sort");
}

}  // namespace rlz
