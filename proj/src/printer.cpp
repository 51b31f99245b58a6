#include "rlz/printer.hpp"

#include <cctype>
#include <sstream>

namespace rlz {

namespace {

const std::set<std::string> kKeywords = {"star", "seq", "gen", "ver", "nu", "forall", "Prop"};

bool valid_ident(const std::string& s) {
  if (s.empty() || kKeywords.count(s)) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') return false;
  return true;
}

std::string pick_name(const std::string& hint, const char* fallback,
                      const std::set<std::string>& avoid) {
  std::string base = valid_ident(hint) ? hint : fallback;
  std::string candidate = base;
  while (avoid.count(candidate)) candidate += '\'';
  return candidate;
}

void print_kind(std::ostringstream& os, const KindPtr& k, int prec) {
  switch (k->tag) {
    case Kind::Tag::Prop: os << "Prop"; return;
    case Kind::Tag::Base: os << '@' << k->name; return;
    case Kind::Tag::Arrow: {
      if (prec > 0) os << '(';
      print_kind(os, k->dom, 1);
      os << " -> ";
      print_kind(os, k->cod, 0);
      if (prec > 0) os << ')';
      return;
    }
  }
}

// prec: 0 top, 1 arrow left operand, 2 application argument
void print_type(std::ostringstream& os, const TypePtr& t, int prec) {
  switch (t->tag) {
    case Type::Tag::TVar: os << t->name; return;
    case Type::Tag::Eig: os << '#' << t->name; return;
    case Type::Tag::TBound: os << "?t" << t->idx; return;   // not reachable on closed types
    case Type::Tag::EBound: os << "?#e" << t->idx; return;  // not reachable on closed types
    case Type::Tag::Arrow: {
      if (prec > 0) os << '(';
      print_type(os, t->a, 1);
      os << " -> ";
      print_type(os, t->b, 0);
      if (prec > 0) os << ')';
      return;
    }
    case Type::Tag::TApp: {
      if (prec > 1) os << '(';
      print_type(os, t->a, 1);
      os << ' ';
      print_type(os, t->b, 2);
      if (prec > 1) os << ')';
      return;
    }
    case Type::Tag::ForAll: {
      if (prec > 0) os << '(';
      std::string a = pick_name(t->hint, "a", free_names(t->body).type_vars);
      os << "forall " << a;
      if (!is_prop(t->kind)) {
        os << ':';
        print_kind(os, t->kind, 1);
      }
      os << ". ";
      print_type(os, open_tvar(t->body, t_var(a)), 0);
      if (prec > 0) os << ')';
      return;
    }
    case Type::Tag::TLam: {
      if (prec > 0) os << '(';
      std::string a = pick_name(t->hint, "a", free_names(t->body).type_vars);
      os << '\\' << a << ':';
      print_kind(os, t->kind, 1);
      os << ". ";
      print_type(os, open_tvar(t->body, t_var(a)), 0);
      if (prec > 0) os << ')';
      return;
    }
  }
}

// prec: 0 top, 1 application function, 2 application argument
void print_term(std::ostringstream& os, const MetatermPtr& m, int prec) {
  switch (m->tag) {
    case Metaterm::Tag::Var: os << m->name; return;
    case Metaterm::Tag::BVar: os << "?v" << m->idx; return;  // not reachable on closed terms
    case Metaterm::Tag::Star: os << "star"; return;
    case Metaterm::Tag::Lam: {
      if (prec > 0) os << '(';
      std::string x = pick_name(m->hint, "x", free_names(m->body).term_vars);
      os << '\\' << x << ". ";
      print_term(os, open_term(m->body, m_var(x)), 0);
      if (prec > 0) os << ')';
      return;
    }
    case Metaterm::Tag::TyLam: {
      if (prec > 0) os << '(';
      std::string a = pick_name(m->hint, "a", free_names(m->body).type_vars);
      os << "/\\" << a;
      if (!is_prop(m->kind)) {
        os << ':';
        print_kind(os, m->kind, 1);
      }
      os << ". ";
      print_term(os, open_tvar_in_term(m->body, t_var(a)), 0);
      if (prec > 0) os << ')';
      return;
    }
    case Metaterm::Tag::Fresh: {
      if (prec > 0) os << '(';
      std::string a = pick_name(m->hint, "g", free_names(m->body).eig_vars);
      os << "nu #" << a;
      if (!is_prop(m->kind)) {
        os << ':';
        print_kind(os, m->kind, 1);
      }
      os << ". ";
      print_term(os, open_eig_in_term(m->body, a), 0);
      if (prec > 0) os << ')';
      return;
    }
    case Metaterm::Tag::App: {
      if (prec > 1) os << '(';
      print_term(os, m->fun, 1);
      os << ' ';
      print_term(os, m->arg, 2);
      if (prec > 1) os << ')';
      return;
    }
    case Metaterm::Tag::TyApp: {
      if (prec > 1) os << '(';
      print_term(os, m->sub, 1);
      os << " [";
      print_type(os, m->ty, 0);
      os << ']';
      if (prec > 1) os << ')';
      return;
    }
    case Metaterm::Tag::Guard: {
      os << "seq(";
      print_term(os, m->fun, 0);
      os << ", ";
      print_term(os, m->arg, 0);
      os << ')';
      return;
    }
    case Metaterm::Tag::Gen: {
      os << "gen(";
      print_type(os, m->ty, 0);
      os << ')';
      return;
    }
    case Metaterm::Tag::Verif: {
      os << "ver(";
      print_type(os, m->ty, 0);
      os << ", ";
      print_term(os, m->sub, 0);
      os << ')';
      return;
    }
    case Metaterm::Tag::Anno: {
      os << '(';
      print_term(os, m->sub, 0);
      os << " : ";
      print_type(os, m->ty, 0);
      os << ')';
      return;
    }
  }
}

}  // namespace

std::string print(const KindPtr& k) {
  std::ostringstream os;
  print_kind(os, k, 0);
  return os.str();
}

std::string print(const TypePtr& t) {
  std::ostringstream os;
  print_type(os, t, 0);
  return os.str();
}

std::string print(const MetatermPtr& m) {
  std::ostringstream os;
  print_term(os, m, 0);
  return os.str();
}

}  // namespace rlz
