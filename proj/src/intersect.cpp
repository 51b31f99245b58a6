#include "rlz/intersect.hpp"

#include <algorithm>

#include "rlz/printer.hpp"
#include "rlz/verify.hpp"

namespace rlz {

// ---------------------------------------------------------------------------
// Linear types and multitypes

LinTypePtr lt_star() {
  static const LinTypePtr s =
      std::make_shared<LinType>(LinType{LinType::Tag::Star, "", {}, nullptr, nullptr, nullptr});
  return s;
}
LinTypePtr lt_gen(std::string eig) {
  return std::make_shared<LinType>(
      LinType{LinType::Tag::Gen, std::move(eig), {}, nullptr, nullptr, nullptr});
}
LinTypePtr lt_arrow(LinMulti dom, LinTypePtr cod) {
  return std::make_shared<LinType>(
      LinType{LinType::Tag::Arrow, "", multi_sorted(std::move(dom)), std::move(cod), nullptr,
              nullptr});
}
LinTypePtr lt_forall(TypePtr arg, LinTypePtr body) {
  return std::make_shared<LinType>(
      LinType{LinType::Tag::ForAll, "", {}, nullptr, std::move(arg), std::move(body)});
}

namespace {

int type_cmp(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return 0;
  if (static_cast<int>(a->tag) != static_cast<int>(b->tag))
    return static_cast<int>(a->tag) < static_cast<int>(b->tag) ? -1 : 1;
  switch (a->tag) {
    case Type::Tag::TVar:
    case Type::Tag::Eig: return a->name.compare(b->name);
    case Type::Tag::TBound:
    case Type::Tag::EBound: return a->idx - b->idx;
    case Type::Tag::Arrow:
    case Type::Tag::TApp: {
      int c = type_cmp(a->a, b->a);
      return c ? c : type_cmp(a->b, b->b);
    }
    case Type::Tag::ForAll:
    case Type::Tag::TLam: return type_cmp(a->body, b->body);
  }
  return 0;
}

int multi_cmp(const LinMulti& a, const LinMulti& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (size_t i = 0; i < a.size(); i++)
    if (int c = lin_cmp(a[i], b[i])) return c;
  return 0;
}

}  // namespace

int lin_cmp(const LinTypePtr& a, const LinTypePtr& b) {
  if (a.get() == b.get()) return 0;
  if (static_cast<int>(a->tag) != static_cast<int>(b->tag))
    return static_cast<int>(a->tag) < static_cast<int>(b->tag) ? -1 : 1;
  switch (a->tag) {
    case LinType::Tag::Star: return 0;
    case LinType::Tag::Gen: return a->eig.compare(b->eig);
    case LinType::Tag::Arrow: {
      int c = multi_cmp(a->dom, b->dom);
      return c ? c : lin_cmp(a->cod, b->cod);
    }
    case LinType::Tag::ForAll: {
      int c = type_cmp(a->arg, b->arg);
      return c ? c : lin_cmp(a->body, b->body);
    }
  }
  return 0;
}

bool lin_eq(const LinTypePtr& a, const LinTypePtr& b) { return lin_cmp(a, b) == 0; }

LinMulti multi_sorted(LinMulti m) {
  std::sort(m.begin(), m.end(), [](const LinTypePtr& a, const LinTypePtr& b) {
    return lin_cmp(a, b) < 0;
  });
  return m;
}

LinMulti multi_sum(const LinMulti& a, const LinMulti& b) {
  LinMulti out = a;
  out.insert(out.end(), b.begin(), b.end());
  return multi_sorted(std::move(out));
}

bool multi_eq(const LinMulti& a, const LinMulti& b) { return multi_cmp(a, b) == 0; }

std::string lin_show(const LinTypePtr& t) {
  switch (t->tag) {
    case LinType::Tag::Star: return "*";
    case LinType::Tag::Gen: return "gen(#" + t->eig + ")";
    case LinType::Tag::Arrow: return multi_show(t->dom) + " -o " + lin_show(t->cod);
    case LinType::Tag::ForAll:
      return "(" + print(t->arg) + " inst " + lin_show(t->body) + ")";
  }
  return "?";
}

std::string multi_show(const LinMulti& m) {
  std::string out = "[";
  for (size_t i = 0; i < m.size(); i++) {
    if (i) out += ", ";
    out += lin_show(m[i]);
  }
  return out + "]";
}

const LinMulti& LinEnv::lookup(const std::string& x) const {
  static const LinMulti empty;
  auto it = entries_.find(x);
  return it == entries_.end() ? empty : it->second;
}

LinEnv LinEnv::with(const std::string& x, LinMulti m) const {
  LinEnv out = *this;
  LinMulti merged = multi_sum(out.lookup(x), m);
  if (merged.empty())
    out.entries_.erase(x);
  else
    out.entries_[x] = std::move(merged);
  return out;
}

LinEnv LinEnv::without(const std::string& x) const {
  LinEnv out = *this;
  out.entries_.erase(x);
  return out;
}

LinEnv LinEnv::sum(const LinEnv& other) const {
  LinEnv out = *this;
  for (const auto& [x, m] : other.entries_) out = out.with(x, m);
  return out;
}

bool LinEnv::operator==(const LinEnv& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [x, m] : entries_) {
    auto it = other.entries_.find(x);
    if (it == other.entries_.end() || !multi_eq(m, it->second)) return false;
  }
  return true;
}

std::string lin_rule_name(LinRule r) {
  switch (r) {
    case LinRule::Lvar: return "Lvar";
    case LinRule::Llam: return "Llam";
    case LinRule::Lapp: return "Lapp";
    case LinRule::Llamt: return "Llamt";
    case LinRule::Lappt: return "Lappt";
    case LinRule::LStarIntro: return "LStarIntro";
    case LinRule::LGuard: return "LGuard";
    case LinRule::LNu: return "LNu";
    case LinRule::LVerEig: return "LVerEig";
    case LinRule::LVerImp: return "LVerImp";
    case LinRule::LVerAll: return "LVerAll";
    case LinRule::LGenEig: return "LGenEig";
    case LinRule::LGenImp: return "LGenImp";
    case LinRule::LGenAll: return "LGenAll";
    case LinRule::Lmulti: return "Lmulti";
  }
  return "?";
}

namespace {

using LD = LinDeriv;
using LDPtr = LinDerivPtr;

LDPtr mk(LD d) { return std::make_shared<LD>(std::move(d)); }

LDPtr unary(LinRule rule, LinEnv env, MetatermPtr subject, LinTypePtr type,
            std::vector<LDPtr> premises = {}, std::string opened = "") {
  LD d;
  d.rule = rule;
  d.env = std::move(env);
  d.subject = std::move(subject);
  d.type = std::move(type);
  d.premises = std::move(premises);
  d.opened = std::move(opened);
  return mk(std::move(d));
}

LDPtr multi_node(MetatermPtr subject, std::vector<LDPtr> premises) {
  LD d;
  d.rule = LinRule::Lmulti;
  d.is_multi = true;
  d.subject = std::move(subject);
  LinMulti types;
  LinEnv env;
  for (const auto& p : premises) {
    types.push_back(p->type);
    env = env.sum(p->env);
  }
  d.multi = multi_sorted(std::move(types));
  d.env = std::move(env);
  d.premises = std::move(premises);
  return mk(std::move(d));
}

LDPtr star_axiom() { return unary(LinRule::LStarIntro, LinEnv(), m_star(), lt_star()); }

// The reducts the structural rules quote in their premises.
MetatermPtr rule5_reduct(const TypePtr& arrow) {
  return m_lam("x", m_guard(m_verif(arrow->a, m_bvar(0)), m_gen(arrow->b)));
}
MetatermPtr rule7_reduct(const TypePtr& forall) {
  return m_tylam(forall->hint, forall->kind, m_gen(forall->body));
}
MetatermPtr rule8_reduct(const TypePtr& forall, const MetatermPtr& arg) {
  std::set<std::string> avoid = free_names(arg).eig_vars;
  auto fa = free_names(forall).eig_vars;
  avoid.insert(fa.begin(), fa.end());
  std::string g = "g";
  int i = 0;
  while (avoid.count(g)) g = "g" + std::to_string(i++);
  MetatermPtr body = m_verif(open_tvar(forall->body, t_eig(g)), m_tyapp(arg, t_eig(g)));
  return m_fresh(g, forall->kind, close_eig_in_term(body, g));
}

void collect_lin_eigs(const LinTypePtr& t, std::set<std::string>& out) {
  switch (t->tag) {
    case LinType::Tag::Star: return;
    case LinType::Tag::Gen: out.insert(t->eig); return;
    case LinType::Tag::Arrow:
      for (const auto& d : t->dom) collect_lin_eigs(d, out);
      collect_lin_eigs(t->cod, out);
      return;
    case LinType::Tag::ForAll: {
      auto fe = free_names(t->arg).eig_vars;
      out.insert(fe.begin(), fe.end());
      collect_lin_eigs(t->body, out);
      return;
    }
  }
}

std::set<std::string> env_type_eigs(const LinEnv& env, const LinTypePtr& t) {
  std::set<std::string> out;
  for (const auto& [x, m] : env.entries()) {
    (void)x;
    for (const auto& lt : m) collect_lin_eigs(lt, out);
  }
  if (t) collect_lin_eigs(t, out);
  return out;
}

bool cfail(std::string* why, const std::string& msg, const LDPtr& d) {
  if (why)
    *why = lin_rule_name(d->rule) + ": " + msg + " [subject " + print(d->subject) + "]";
  return false;
}

}  // namespace

bool check_lderiv(const LinDerivPtr& d, std::string* why) {
  if (!d) {
    if (why) *why = "null derivation";
    return false;
  }
  for (const auto& p : d->premises)
    if (!check_lderiv(p, why)) return false;
  auto bad = [&](const std::string& msg) { return cfail(why, msg, d); };
  const MetatermPtr& s = d->subject;

  if (d->rule == LinRule::Lmulti) {
    if (!d->is_multi) return bad("multi flag");
    LinMulti types;
    LinEnv env;
    for (const auto& p : d->premises) {
      if (p->is_multi) return bad("multi premise of a multi node");
      if (!term_eq(p->subject, s)) return bad("premise subject differs");
      types.push_back(p->type);
      env = env.sum(p->env);
    }
    if (!multi_eq(d->multi, multi_sorted(std::move(types)))) return bad("multitype mismatch");
    if (!(d->env == env)) return bad("environment is not the premise sum");
    return true;
  }
  if (d->is_multi) return bad("unary node carries a multitype");
  if (!d->type) return bad("missing linear type");

  switch (d->rule) {
    case LinRule::Lvar: {
      if (s->tag != Metaterm::Tag::Var || !d->premises.empty()) return bad("shape");
      LinEnv expect = LinEnv().with(s->name, {d->type});
      if (!(d->env == expect)) return bad("environment is not x:[T]");
      return true;
    }
    case LinRule::LStarIntro: {
      if (s->tag != Metaterm::Tag::Star || !d->premises.empty()) return bad("shape");
      if (!(d->env == LinEnv())) return bad("environment not empty");
      if (d->type->tag != LinType::Tag::Star) return bad("type is not star");
      return true;
    }
    case LinRule::LGenEig: {
      if (s->tag != Metaterm::Tag::Gen || s->ty->tag != Type::Tag::Eig || !d->premises.empty())
        return bad("shape");
      if (!(d->env == LinEnv())) return bad("environment not empty");
      if (d->type->tag != LinType::Tag::Gen || d->type->eig != s->ty->name)
        return bad("type is not the generator type");
      return true;
    }
    case LinRule::Llam: {
      if (s->tag != Metaterm::Tag::Lam || d->premises.size() != 1) return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (free_names(s->body).term_vars.count(d->opened)) return bad("opened name not fresh");
      if (!term_eq(p->subject, open_term(s->body, m_var(d->opened))))
        return bad("premise subject mismatch");
      LinMulti dom = p->env.lookup(d->opened);
      if (!(p->env.without(d->opened) == d->env)) return bad("environment mismatch");
      if (d->type->tag != LinType::Tag::Arrow || !multi_eq(d->type->dom, dom) ||
          !lin_eq(d->type->cod, p->type))
        return bad("conclusion type mismatch");
      return true;
    }
    case LinRule::Lapp: {
      if (s->tag != Metaterm::Tag::App || d->premises.size() != 2) return bad("shape");
      const auto& p1 = d->premises[0];
      const auto& p2 = d->premises[1];
      if (p1->is_multi || !p2->is_multi) return bad("premise shapes");
      if (!term_eq(p1->subject, s->fun) || !term_eq(p2->subject, s->arg))
        return bad("premise subjects mismatch");
      if (p1->type->tag != LinType::Tag::Arrow) return bad("head type is not an arrow");
      if (!multi_eq(p1->type->dom, p2->multi)) return bad("argument multitype mismatch");
      if (!lin_eq(p1->type->cod, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p1->env.sum(p2->env))) return bad("environment is not the sum");
      return true;
    }
    case LinRule::Llamt: {
      if (s->tag != Metaterm::Tag::TyLam || d->premises.size() != 1) return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (d->type->tag != LinType::Tag::ForAll || !lin_eq(d->type->body, p->type))
        return bad("conclusion type mismatch");
      if (!term_eq(p->subject, open_tvar_in_term(s->body, d->type->arg)))
        return bad("premise subject is not the instantiated body");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::Lappt: {
      if (s->tag != Metaterm::Tag::TyApp || d->premises.size() != 1) return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (!term_eq(p->subject, s->sub)) return bad("premise subject mismatch");
      if (p->type->tag != LinType::Tag::ForAll || !type_eq(p->type->arg, s->ty))
        return bad("instantiation type mismatch");
      if (!lin_eq(p->type->body, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::LGuard: {
      if (s->tag != Metaterm::Tag::Guard || d->premises.size() != 2) return bad("shape");
      const auto& p1 = d->premises[0];
      const auto& p2 = d->premises[1];
      if (p1->is_multi || p2->is_multi) return bad("premise shapes");
      if (!term_eq(p1->subject, s->fun) || !term_eq(p2->subject, s->arg))
        return bad("premise subjects mismatch");
      if (p1->type->tag != LinType::Tag::Star) return bad("guard condition is not star-typed");
      if (!lin_eq(p2->type, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p1->env.sum(p2->env))) return bad("environment is not the sum");
      return true;
    }
    case LinRule::LNu: {
      if (s->tag != Metaterm::Tag::Fresh || d->premises.size() != 1) return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (free_names(s->body).eig_vars.count(d->opened)) return bad("opened name not fresh");
      if (!term_eq(p->subject, open_eig_in_term(s->body, d->opened)))
        return bad("premise subject mismatch");
      if (!lin_eq(p->type, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p->env)) return bad("environment mismatch");
      // Freshness guards the conclusion type. The environment half of the
      // textbook side condition would reject beta-expansions whose argument
      // occurrences sit under the binder at binder-dependent types (e.g. the
      // spine x [#g] inside nu #g), yet exactly such terms arise by reducing
      // correctness instances at quantified types; multitypes of pending
      // variables may therefore mention the bound eigenvariable.
      {
        std::set<std::string> eigs;
        collect_lin_eigs(d->type, eigs);
        if (eigs.count(d->opened)) return bad("eigenvariable escapes through the type");
      }
      return true;
    }
    case LinRule::LVerEig: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::Eig ||
          d->premises.size() != 1)
        return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (!term_eq(p->subject, s->sub)) return bad("premise subject mismatch");
      if (p->type->tag != LinType::Tag::Gen || p->type->eig != s->ty->name)
        return bad("premise type is not the matching generator type");
      if (d->type->tag != LinType::Tag::Star) return bad("conclusion type is not star");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::LVerImp: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::Arrow ||
          d->premises.size() != 1)
        return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      MetatermPtr expected = m_verif(s->ty->b, m_app(s->sub, m_gen(s->ty->a)));
      if (!term_eq(p->subject, expected)) return bad("premise subject mismatch");
      if (p->type->tag != LinType::Tag::Star || d->type->tag != LinType::Tag::Star)
        return bad("types are not star");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::LVerAll: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::ForAll ||
          d->premises.size() != 1)
        return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (!term_eq(p->subject, rule8_reduct(s->ty, s->sub)))
        return bad("premise subject mismatch");
      if (p->type->tag != LinType::Tag::Star || d->type->tag != LinType::Tag::Star)
        return bad("types are not star");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::LGenImp: {
      if (s->tag != Metaterm::Tag::Gen || s->ty->tag != Type::Tag::Arrow ||
          d->premises.size() != 1)
        return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (!term_eq(p->subject, rule5_reduct(s->ty))) return bad("premise subject mismatch");
      if (!lin_eq(p->type, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::LGenAll: {
      if (s->tag != Metaterm::Tag::Gen || s->ty->tag != Type::Tag::ForAll ||
          d->premises.size() != 1)
        return bad("shape");
      const auto& p = d->premises[0];
      if (p->is_multi) return bad("premise is a multi node");
      if (!term_eq(p->subject, rule7_reduct(s->ty))) return bad("premise subject mismatch");
      if (!lin_eq(p->type, d->type)) return bad("conclusion type mismatch");
      if (!(d->env == p->env)) return bad("environment mismatch");
      return true;
    }
    case LinRule::Lmulti: break;  // handled above
  }
  return bad("unknown rule");
}

size_t lderiv_size_unchecked(const LinDerivPtr& d) {
  size_t n = d->rule == LinRule::Lmulti ? 0 : 1;
  for (const auto& p : d->premises) n += lderiv_size_unchecked(p);
  return n;
}

size_t lderiv_size(const LinDerivPtr& d) {
  std::string why;
  if (!check_lderiv(d, &why)) throw InvalidDerivation(why);
  return lderiv_size_unchecked(d);
}

// ---------------------------------------------------------------------------
// Weighted substitution

namespace {

// Remove from `pool` one derivation per element of `need` with matching
// linear type, in order. Throws when the multiset does not cover the need.
std::vector<LDPtr> take_matching(const LinMulti& need, std::vector<LDPtr>& pool) {
  std::vector<LDPtr> taken;
  for (const auto& want : need) {
    bool found = false;
    for (size_t i = 0; i < pool.size(); i++) {
      if (lin_eq(pool[i]->type, want)) {
        taken.push_back(pool[i]);
        pool.erase(pool.begin() + static_cast<long>(i));
        found = true;
        break;
      }
    }
    if (!found)
      throw InvalidDerivation("substitution premises do not cover the multitype " +
                              multi_show(need));
  }
  return taken;
}

std::string fresh_name(const char* base, const std::set<std::string>& avoid) {
  std::string n = base;
  int i = 0;
  while (avoid.count(n)) n = std::string(base) + std::to_string(i++);
  return n;
}

LDPtr rename_opened_term(const LDPtr& d, const std::string& to) {
  // Alpha-rename the opened term variable of an Llam node within its subtree.
  // An inner node that opens the same name shadows it and is left alone.
  const std::string from = d->opened;
  struct R {
    const std::string& from;
    const std::string& to;
    TermSubst s;
    LDPtr go(const LDPtr& n) {
      LD out = *n;
      out.subject = subst_term(n->subject, s);
      LinEnv env;
      for (const auto& [x, m] : n->env.entries()) env = env.with(x == from ? to : x, m);
      out.env = env;
      // A node that re-opens the same name shadows it; its premises refer to
      // the inner binder and stay untouched.
      if (!(n->rule == LinRule::Llam && n->opened == from)) {
        out.premises.clear();
        for (const auto& p : n->premises) out.premises.push_back(go(p));
      }
      return mk(std::move(out));
    }
  };
  R r{from, to, TermSubst{{from, m_var(to)}}};
  // The top node itself is the binder being renamed; rename its premises.
  LD out = *d;
  out.opened = to;
  out.premises.clear();
  for (const auto& p : d->premises) out.premises.push_back(r.go(p));
  return mk(std::move(out));
}

// Alpha-rename the opened eigenvariable of an LNu node within its subtree.
LinTypePtr lin_subst_eig(const LinTypePtr& t, const TypeSubst& s);

LinMulti multi_subst_eig(const LinMulti& m, const TypeSubst& s) {
  LinMulti out;
  out.reserve(m.size());
  for (const auto& t : m) out.push_back(lin_subst_eig(t, s));
  return multi_sorted(std::move(out));
}

LinTypePtr lin_subst_eig(const LinTypePtr& t, const TypeSubst& s) {
  switch (t->tag) {
    case LinType::Tag::Star: return t;
    case LinType::Tag::Gen: {
      auto it = s.find(t->eig);
      if (it != s.end()) {
        if (it->second->tag != Type::Tag::Eig)
          throw InvalidDerivation("generator linear types rename only to eigenvariables");
        return lt_gen(it->second->name);
      }
      return t;
    }
    case LinType::Tag::Arrow: return lt_arrow(multi_subst_eig(t->dom, s), lin_subst_eig(t->cod, s));
    case LinType::Tag::ForAll:
      return lt_forall(subst_eig(t->arg, s), lin_subst_eig(t->body, s));
  }
  return t;
}

LDPtr rename_opened_eig(const LDPtr& d, const std::string& to) {
  const std::string from = d->opened;
  struct R {
    const std::string& from;
    TypeSubst s;
    LDPtr go(const LDPtr& n) {
      LD out = *n;
      out.subject = subst_eig_in_term(n->subject, s);
      LinEnv env;
      for (const auto& [x, m] : n->env.entries()) env = env.with(x, multi_subst_eig(m, s));
      out.env = env;
      if (out.type) out.type = lin_subst_eig(out.type, s);
      out.multi = multi_subst_eig(out.multi, s);
      if (!(n->rule == LinRule::LNu && n->opened == from)) {
        out.premises.clear();
        for (const auto& p : n->premises) out.premises.push_back(go(p));
      }
      return mk(std::move(out));
    }
  };
  R r{from, TypeSubst{{from, t_eig(to)}}};
  LD out = *d;
  out.opened = to;
  out.premises.clear();
  for (const auto& p : d->premises) out.premises.push_back(r.go(p));
  return mk(std::move(out));
}

struct SubstLin {
  std::string x;
  MetatermPtr n_term;
  FreeNames n_free;

  // psis: the unary premises available for occurrences of x; consumed in
  // multiset-matching order.
  LDPtr go(const LDPtr& phi, std::vector<LDPtr> psis) {
    switch (phi->rule) {
      case LinRule::Lvar: {
        if (phi->subject->name == x) {
          if (psis.size() != 1 || !lin_eq(psis[0]->type, phi->type))
            throw InvalidDerivation("variable occurrence needs exactly one matching premise");
          return psis[0];
        }
        if (!psis.empty()) throw InvalidDerivation("unused substitution premises at a variable");
        return phi;
      }
      case LinRule::LStarIntro:
      case LinRule::LGenEig: {
        if (!psis.empty()) throw InvalidDerivation("unused substitution premises at an axiom");
        return phi;
      }
      case LinRule::Lmulti: {
        std::vector<LDPtr> prems;
        for (const auto& p : phi->premises) {
          auto mine = take_matching(p->env.lookup(x), psis);
          prems.push_back(go(p, std::move(mine)));
        }
        if (!psis.empty()) throw InvalidDerivation("leftover substitution premises at Lmulti");
        return multi_node(subst_term(phi->subject, {{x, n_term}}), std::move(prems));
      }
      case LinRule::Llam: {
        LDPtr cur = phi;
        if (cur->opened == x || n_free.term_vars.count(cur->opened)) {
          auto avoid = n_free.term_vars;
          avoid.insert(x);
          auto fs = free_names(cur->subject).term_vars;
          avoid.insert(fs.begin(), fs.end());
          cur = rename_opened_term(cur, fresh_name("_w", avoid));
        }
        LDPtr p = go(cur->premises[0], std::move(psis));
        LinMulti dom = p->env.lookup(cur->opened);
        return unary(LinRule::Llam, p->env.without(cur->opened),
                     subst_term(cur->subject, {{x, n_term}}), lt_arrow(dom, p->type), {p},
                     cur->opened);
      }
      case LinRule::LNu: {
        LDPtr cur = phi;
        if (n_free.eig_vars.count(cur->opened)) {
          auto avoid = n_free.eig_vars;
          auto fs = free_names(cur->subject).eig_vars;
          avoid.insert(fs.begin(), fs.end());
          cur = rename_opened_eig(cur, fresh_name("_we", avoid));
        }
        LDPtr p = go(cur->premises[0], std::move(psis));
        return unary(LinRule::LNu, p->env, subst_term(cur->subject, {{x, n_term}}), p->type, {p},
                     cur->opened);
      }
      case LinRule::Lapp: {
        auto p1_need = phi->premises[0]->env.lookup(x);
        std::vector<LDPtr> mine = take_matching(p1_need, psis);
        LDPtr p1 = go(phi->premises[0], std::move(mine));
        LDPtr p2 = go(phi->premises[1], std::move(psis));
        return unary(LinRule::Lapp, p1->env.sum(p2->env),
                     subst_term(phi->subject, {{x, n_term}}), p1->type->cod, {p1, p2});
      }
      case LinRule::LGuard: {
        auto p1_need = phi->premises[0]->env.lookup(x);
        std::vector<LDPtr> mine = take_matching(p1_need, psis);
        LDPtr p1 = go(phi->premises[0], std::move(mine));
        LDPtr p2 = go(phi->premises[1], std::move(psis));
        return unary(LinRule::LGuard, p1->env.sum(p2->env),
                     subst_term(phi->subject, {{x, n_term}}), p2->type, {p1, p2});
      }
      case LinRule::Llamt: {
        LDPtr p = go(phi->premises[0], std::move(psis));
        return unary(LinRule::Llamt, p->env, subst_term(phi->subject, {{x, n_term}}),
                     lt_forall(phi->type->arg, p->type), {p});
      }
      case LinRule::Lappt: {
        LDPtr p = go(phi->premises[0], std::move(psis));
        return unary(LinRule::Lappt, p->env, subst_term(phi->subject, {{x, n_term}}),
                     p->type->body, {p});
      }
      case LinRule::LVerEig:
      case LinRule::LVerImp:
      case LinRule::LVerAll:
      case LinRule::LGenImp:
      case LinRule::LGenAll: {
        LDPtr p = go(phi->premises[0], std::move(psis));
        LinTypePtr type = phi->rule == LinRule::LVerEig || phi->rule == LinRule::LVerImp ||
                                  phi->rule == LinRule::LVerAll
                              ? lt_star()
                              : p->type;
        return unary(phi->rule, p->env, subst_term(phi->subject, {{x, n_term}}), type, {p});
      }
    }
    throw InvalidDerivation("unknown rule in substitution");
  }
};

}  // namespace

LinDerivPtr subst_lderiv(const LinDerivPtr& phi, const std::string& x, const LinDerivPtr& psi) {
  if (!psi->is_multi) throw InvalidDerivation("psi must be an Lmulti derivation");
  FreeNames nf = free_names(psi->subject);
  if (nf.term_vars.count(x))
    throw PreconditionViolated("the substituted variable occurs free in the replacement");
  if (!multi_eq(psi->multi, phi->env.lookup(x)))
    throw PreconditionViolated("psi's multitype differs from x's multitype in phi");
  SubstLin s{x, psi->subject, nf};
  std::vector<LDPtr> psis = psi->premises;
  // Order premises deterministically so splits are reproducible.
  std::stable_sort(psis.begin(), psis.end(),
                   [](const LDPtr& a, const LDPtr& b) { return lin_cmp(a->type, b->type) < 0; });
  return s.go(phi, std::move(psis));
}

// ---------------------------------------------------------------------------
// Weak-head subject reduction

namespace {

LDPtr wh_rec(const LDPtr& d, const Path& pos, size_t i) {
  if (i == pos.size()) {
    // Contract at the root of the subject.
    switch (d->rule) {
      case LinRule::Lapp: {
        LDPtr p1 = d->premises[0];
        if (p1->rule != LinRule::Llam)
          throw NotWeakHead("beta step without an abstraction premise");
        auto fa = free_names(d->premises[1]->subject).term_vars;
        if (fa.count(p1->opened)) {
          auto avoid = fa;
          auto fs = free_names(p1->subject).term_vars;
          avoid.insert(fs.begin(), fs.end());
          p1 = rename_opened_term(p1, fresh_name("_c", avoid));
        }
        return subst_lderiv(p1->premises[0], p1->opened, d->premises[1]);
      }
      case LinRule::Lappt: {
        const auto& p1 = d->premises[0];
        if (p1->rule != LinRule::Llamt)
          throw NotWeakHead("type beta step without a type abstraction premise");
        return p1->premises[0];
      }
      case LinRule::LGuard: return d->premises[1];
      case LinRule::LVerEig: return star_axiom();
      case LinRule::LVerImp:
      case LinRule::LVerAll:
      case LinRule::LGenImp:
      case LinRule::LGenAll: return d->premises[0];
      case LinRule::LNu: return d->premises[0];
      default: throw NotWeakHead("no contraction for this rule");
    }
  }
  switch (pos[i]) {
    case PathStep::Fun: {
      if (d->rule == LinRule::Lapp) {
        LDPtr p1 = wh_rec(d->premises[0], pos, i + 1);
        MetatermPtr subj = m_app(p1->subject, d->premises[1]->subject);
        return unary(LinRule::Lapp, p1->env.sum(d->premises[1]->env), subj, p1->type->cod,
                     {p1, d->premises[1]});
      }
      if (d->rule == LinRule::Lappt) {
        LDPtr p = wh_rec(d->premises[0], pos, i + 1);
        return unary(LinRule::Lappt, p->env, m_tyapp(p->subject, d->subject->ty), p->type->body,
                     {p});
      }
      throw NotWeakHead("fun step against a non-application derivation");
    }
    case PathStep::Cond: {
      if (d->rule != LinRule::LGuard) throw NotWeakHead("cond step against a non-guard");
      LDPtr p1 = wh_rec(d->premises[0], pos, i + 1);
      MetatermPtr subj = m_guard(p1->subject, d->premises[1]->subject);
      return unary(LinRule::LGuard, p1->env.sum(d->premises[1]->env), subj,
                   d->premises[1]->type, {p1, d->premises[1]});
    }
    case PathStep::Arg: {
      // Weak-head positions admit Arg only under a verifier.
      switch (d->rule) {
        case LinRule::LVerEig: {
          LDPtr p = wh_rec(d->premises[0], pos, i + 1);
          return unary(LinRule::LVerEig, p->env, m_verif(d->subject->ty, p->subject), lt_star(),
                       {p});
        }
        case LinRule::LVerImp: {
          Path remapped{PathStep::Arg, PathStep::Fun};
          remapped.insert(remapped.end(), pos.begin() + static_cast<long>(i) + 1, pos.end());
          LDPtr p = wh_rec(d->premises[0], remapped, 0);
          // Recover the new verifier argument from the premise subject.
          MetatermPtr arg = p->subject->sub->fun;
          return unary(LinRule::LVerImp, p->env, m_verif(d->subject->ty, arg), lt_star(), {p});
        }
        case LinRule::LVerAll: {
          Path remapped{PathStep::Body, PathStep::Arg, PathStep::Fun};
          remapped.insert(remapped.end(), pos.begin() + static_cast<long>(i) + 1, pos.end());
          LDPtr p = wh_rec(d->premises[0], remapped, 0);
          // Premise subject: nu #g. ver(B, arg [#g]); recover arg.
          std::string g = fresh_name("_q", free_names(p->subject->body).eig_vars);
          MetatermPtr opened = open_eig_in_term(p->subject->body, g);
          MetatermPtr arg = close_eig_in_term(opened->sub->sub, g);
          return unary(LinRule::LVerAll, p->env, m_verif(d->subject->ty, arg), lt_star(), {p});
        }
        default: throw NotWeakHead("arg step outside a verifier");
      }
    }
    case PathStep::Body: {
      if (d->rule != LinRule::LNu) throw NotWeakHead("body step outside a nu binder");
      LDPtr p = wh_rec(d->premises[0], pos, i + 1);
      return unary(LinRule::LNu, p->env,
                   m_fresh(d->subject->hint, d->subject->kind,
                           close_eig_in_term(p->subject, d->opened)),
                   p->type, {p}, d->opened);
    }
    case PathStep::Next: throw NotWeakHead("step in the guarded branch is not weak-head");
  }
  throw NotWeakHead("unsupported path");
}

}  // namespace

LinDerivPtr wh_step_lderiv(const LinDerivPtr& d, const Step& step) {
  if (!term_eq(d->subject, step.before))
    throw SubjectMismatch("derivation subject differs from the step source");
  LDPtr out = wh_rec(d, step.pos, 0);
  if (!term_eq(out->subject, step.after))
    throw SubjectMismatch("stepped derivation subject differs from the step target");
  return out;
}

// ---------------------------------------------------------------------------
// Subject expansion

namespace {

struct AntiResult {
  LDPtr d0;      // derives the pattern with x tracked in its environment
  std::vector<LDPtr> psis;  // unary derivations of the replaced term
};

struct AntiSubst {
  std::string x;
  MetatermPtr n;

  // d derives pattern[x:=n]; reconstruct a derivation of `pattern` plus the
  // premises typing n for each consumed occurrence.
  AntiResult go(const LDPtr& d, const MetatermPtr& pattern) {
    if (pattern->tag == Metaterm::Tag::Var && pattern->name == x) {
      LDPtr var = unary(LinRule::Lvar, LinEnv().with(x, {d->type}), m_var(x), d->type);
      return {var, {d}};
    }
    switch (d->rule) {
      case LinRule::Lvar:
      case LinRule::LStarIntro:
      case LinRule::LGenEig:
        return {unary(d->rule, d->env, pattern, d->type), {}};
      case LinRule::Lmulti: {
        std::vector<LDPtr> prems;
        std::vector<LDPtr> psis;
        for (const auto& p : d->premises) {
          AntiResult r = go(p, pattern);
          prems.push_back(r.d0);
          psis.insert(psis.end(), r.psis.begin(), r.psis.end());
        }
        return {multi_node(pattern, std::move(prems)), std::move(psis)};
      }
      case LinRule::Llam: {
        LDPtr cur = d;
        FreeNames nf = free_names(n);
        auto fp = free_names(pattern->body).term_vars;
        if (cur->opened == x || nf.term_vars.count(cur->opened) || fp.count(cur->opened)) {
          auto avoid = nf.term_vars;
          avoid.insert(x);
          avoid.insert(fp.begin(), fp.end());
          auto fs = free_names(cur->subject).term_vars;
          avoid.insert(fs.begin(), fs.end());
          cur = rename_opened_term(cur, fresh_name("_a", avoid));
        }
        AntiResult r = go(cur->premises[0], open_term(pattern->body, m_var(cur->opened)));
        LinMulti dom = r.d0->env.lookup(cur->opened);
        LDPtr node = unary(LinRule::Llam, r.d0->env.without(cur->opened), pattern,
                           lt_arrow(dom, r.d0->type), {r.d0}, cur->opened);
        return {node, std::move(r.psis)};
      }
      case LinRule::LNu: {
        LDPtr cur = d;
        FreeNames nf = free_names(n);
        auto fp = free_names(pattern->body).eig_vars;
        if (nf.eig_vars.count(cur->opened) || fp.count(cur->opened)) {
          auto avoid = nf.eig_vars;
          avoid.insert(fp.begin(), fp.end());
          auto fs = free_names(cur->subject).eig_vars;
          avoid.insert(fs.begin(), fs.end());
          cur = rename_opened_eig(cur, fresh_name("_ae", avoid));
        }
        AntiResult r = go(cur->premises[0], open_eig_in_term(pattern->body, cur->opened));
        LDPtr node =
            unary(LinRule::LNu, r.d0->env, pattern, r.d0->type, {r.d0}, cur->opened);
        return {node, std::move(r.psis)};
      }
      case LinRule::Lapp: {
        AntiResult r1 = go(d->premises[0], pattern->fun);
        AntiResult r2 = go(d->premises[1], pattern->arg);
        LDPtr node = unary(LinRule::Lapp, r1.d0->env.sum(r2.d0->env), pattern,
                           r1.d0->type->cod, {r1.d0, r2.d0});
        r1.psis.insert(r1.psis.end(), r2.psis.begin(), r2.psis.end());
        return {node, std::move(r1.psis)};
      }
      case LinRule::LGuard: {
        AntiResult r1 = go(d->premises[0], pattern->fun);
        AntiResult r2 = go(d->premises[1], pattern->arg);
        LDPtr node = unary(LinRule::LGuard, r1.d0->env.sum(r2.d0->env), pattern, r2.d0->type,
                           {r1.d0, r2.d0});
        r1.psis.insert(r1.psis.end(), r2.psis.begin(), r2.psis.end());
        return {node, std::move(r1.psis)};
      }
      case LinRule::Llamt: {
        AntiResult r = go(d->premises[0], open_tvar_in_term(pattern->body, d->type->arg));
        LDPtr node = unary(LinRule::Llamt, r.d0->env, pattern,
                           lt_forall(d->type->arg, r.d0->type), {r.d0});
        return {node, std::move(r.psis)};
      }
      case LinRule::Lappt: {
        AntiResult r = go(d->premises[0], pattern->sub);
        LDPtr node = unary(LinRule::Lappt, r.d0->env, pattern, r.d0->type->body, {r.d0});
        return {node, std::move(r.psis)};
      }
      case LinRule::LVerEig: {
        AntiResult r = go(d->premises[0], pattern->sub);
        return {unary(LinRule::LVerEig, r.d0->env, pattern, lt_star(), {r.d0}),
                std::move(r.psis)};
      }
      case LinRule::LVerImp: {
        MetatermPtr inner = m_verif(pattern->ty->b, m_app(pattern->sub, m_gen(pattern->ty->a)));
        AntiResult r = go(d->premises[0], inner);
        return {unary(LinRule::LVerImp, r.d0->env, pattern, lt_star(), {r.d0}),
                std::move(r.psis)};
      }
      case LinRule::LVerAll: {
        MetatermPtr inner = rule8_reduct(pattern->ty, pattern->sub);
        AntiResult r = go(d->premises[0], inner);
        return {unary(LinRule::LVerAll, r.d0->env, pattern, lt_star(), {r.d0}),
                std::move(r.psis)};
      }
      case LinRule::LGenImp: {
        AntiResult r = go(d->premises[0], rule5_reduct(pattern->ty));
        return {unary(LinRule::LGenImp, r.d0->env, pattern, r.d0->type, {r.d0}),
                std::move(r.psis)};
      }
      case LinRule::LGenAll: {
        AntiResult r = go(d->premises[0], rule7_reduct(pattern->ty));
        return {unary(LinRule::LGenAll, r.d0->env, pattern, r.d0->type, {r.d0}),
                std::move(r.psis)};
      }
    }
    throw InvalidDerivation("anti-substitution hit an unknown rule");
  }
};

// d derives `after`; rebuild a derivation of `before` where before -> after
// by the rule at the head of the remaining path.
LDPtr expand_rec(const LDPtr& d, const MetatermPtr& before, const MetatermPtr& after,
                 const Path& pos, size_t i, RuleTag rule) {
  if (!term_eq(d->subject, after)) throw SubjectMismatch("expansion subject mismatch");
  if (i == pos.size()) {
    switch (rule) {
      case RuleTag::Beta: {
        const MetatermPtr& lam = before->fun;
        const MetatermPtr& arg = before->arg;
        std::set<std::string> avoid = free_names(arg).term_vars;
        auto fb = free_names(lam->body).term_vars;
        avoid.insert(fb.begin(), fb.end());
        std::string x = fresh_name("_x", avoid);
        AntiSubst anti{x, arg};
        AntiResult r = anti.go(d, open_term(lam->body, m_var(x)));
        LinMulti dom = r.d0->env.lookup(x);
        LDPtr lam_node = unary(LinRule::Llam, r.d0->env.without(x), lam,
                               lt_arrow(dom, r.d0->type), {r.d0}, x);
        LDPtr arg_node = multi_node(arg, std::move(r.psis));
        return unary(LinRule::Lapp, lam_node->env.sum(arg_node->env), before, r.d0->type,
                     {lam_node, arg_node});
      }
      case RuleTag::TyBeta: {
        LDPtr lam_node = unary(LinRule::Llamt, d->env, before->sub,
                               lt_forall(before->ty, d->type), {d});
        return unary(LinRule::Lappt, d->env, before, d->type, {lam_node});
      }
      case RuleTag::GuardStar:
        return unary(LinRule::LGuard, d->env, before, d->type, {star_axiom(), d});
      case RuleTag::VerifEig: {
        if (d->rule != LinRule::LStarIntro)
          throw InvalidDerivation("expansion of rule 4 requires the star axiom");
        LDPtr gen = unary(LinRule::LGenEig, LinEnv(), before->sub, lt_gen(before->ty->name));
        return unary(LinRule::LVerEig, LinEnv(), before, lt_star(), {gen});
      }
      case RuleTag::VerifImp:
        return unary(LinRule::LVerImp, d->env, before, lt_star(), {d});
      case RuleTag::VerifAll: {
        // The recorded reduct used some fresh name; the premise quotes the
        // canonical closure, which is alpha-insensitive.
        if (!term_eq(d->subject, rule8_reduct(before->ty, before->sub)))
          throw SubjectMismatch("rule 8 expansion premise mismatch");
        return unary(LinRule::LVerAll, d->env, before, lt_star(), {d});
      }
      case RuleTag::GenImp:
        return unary(LinRule::LGenImp, d->env, before, d->type, {d});
      case RuleTag::GenAll:
        return unary(LinRule::LGenAll, d->env, before, d->type, {d});
      case RuleTag::FreshDrop: {
        std::set<std::string> avoid = env_type_eigs(d->env, d->type);
        auto fs = free_names(before->body).eig_vars;
        avoid.insert(fs.begin(), fs.end());
        auto fd = free_names(d->subject).eig_vars;
        avoid.insert(fd.begin(), fd.end());
        std::string g = fresh_name("_g", avoid);
        return unary(LinRule::LNu, d->env, before, d->type, {d}, g);
      }
      case RuleTag::StExpand: break;
    }
    throw InvalidDerivation("cannot expand this rule");
  }

  switch (pos[i]) {
    case PathStep::Fun: {
      if (before->tag == Metaterm::Tag::App && d->rule == LinRule::Lapp) {
        LDPtr p1 = expand_rec(d->premises[0], before->fun, after->fun, pos, i + 1, rule);
        return unary(LinRule::Lapp, p1->env.sum(d->premises[1]->env), before, d->type,
                     {p1, d->premises[1]});
      }
      if (before->tag == Metaterm::Tag::TyApp && d->rule == LinRule::Lappt) {
        LDPtr p = expand_rec(d->premises[0], before->sub, after->sub, pos, i + 1, rule);
        return unary(LinRule::Lappt, p->env, before, d->type, {p});
      }
      break;
    }
    case PathStep::Arg: {
      if (before->tag == Metaterm::Tag::App && d->rule == LinRule::Lapp) {
        std::vector<LDPtr> prems;
        for (const auto& q : d->premises[1]->premises)
          prems.push_back(expand_rec(q, before->arg, after->arg, pos, i + 1, rule));
        LDPtr p2 = multi_node(before->arg, std::move(prems));
        return unary(LinRule::Lapp, d->premises[0]->env.sum(p2->env), before, d->type,
                     {d->premises[0], p2});
      }
      if (before->tag == Metaterm::Tag::Verif) {
        switch (d->rule) {
          case LinRule::LVerEig: {
            LDPtr p = expand_rec(d->premises[0], before->sub, after->sub, pos, i + 1, rule);
            return unary(LinRule::LVerEig, p->env, before, lt_star(), {p});
          }
          case LinRule::LVerImp: {
            MetatermPtr pb = m_verif(before->ty->b, m_app(before->sub, m_gen(before->ty->a)));
            MetatermPtr pa = m_verif(after->ty->b, m_app(after->sub, m_gen(after->ty->a)));
            Path remapped{PathStep::Arg, PathStep::Fun};
            remapped.insert(remapped.end(), pos.begin() + static_cast<long>(i) + 1, pos.end());
            LDPtr p = expand_rec(d->premises[0], pb, pa, remapped, 0, rule);
            return unary(LinRule::LVerImp, p->env, before, lt_star(), {p});
          }
          case LinRule::LVerAll: {
            MetatermPtr pb = rule8_reduct(before->ty, before->sub);
            MetatermPtr pa = rule8_reduct(after->ty, after->sub);
            Path remapped{PathStep::Body, PathStep::Arg, PathStep::Fun};
            remapped.insert(remapped.end(), pos.begin() + static_cast<long>(i) + 1, pos.end());
            if (!term_eq(d->premises[0]->subject, pa))
              throw SubjectMismatch("rule 8 congruence premise mismatch");
            LDPtr p = expand_rec(d->premises[0], pb, pa, remapped, 0, rule);
            return unary(LinRule::LVerAll, p->env, before, lt_star(), {p});
          }
          default: break;
        }
      }
      break;
    }
    case PathStep::Cond: {
      if (d->rule == LinRule::LGuard) {
        LDPtr p1 = expand_rec(d->premises[0], before->fun, after->fun, pos, i + 1, rule);
        return unary(LinRule::LGuard, p1->env.sum(d->premises[1]->env), before, d->type,
                     {p1, d->premises[1]});
      }
      break;
    }
    case PathStep::Next: {
      if (d->rule == LinRule::LGuard) {
        LDPtr p2 = expand_rec(d->premises[1], before->arg, after->arg, pos, i + 1, rule);
        return unary(LinRule::LGuard, d->premises[0]->env.sum(p2->env), before, p2->type,
                     {d->premises[0], p2});
      }
      break;
    }
    case PathStep::Body: {
      if (before->tag == Metaterm::Tag::Lam && d->rule == LinRule::Llam) {
        LDPtr cur = d;
        auto fb = free_names(before->body).term_vars;
        if (fb.count(cur->opened)) {
          auto avoid = fb;
          auto fa = free_names(after->body).term_vars;
          avoid.insert(fa.begin(), fa.end());
          cur = rename_opened_term(cur, fresh_name("_b", avoid));
        }
        LDPtr p = expand_rec(cur->premises[0], open_term(before->body, m_var(cur->opened)),
                             open_term(after->body, m_var(cur->opened)), pos, i + 1, rule);
        LinMulti dom = p->env.lookup(cur->opened);
        return unary(LinRule::Llam, p->env.without(cur->opened), before,
                     lt_arrow(dom, p->type), {p}, cur->opened);
      }
      if (before->tag == Metaterm::Tag::TyLam && d->rule == LinRule::Llamt) {
        // Premise subjects are instantiated bodies; the step transports along
        // the same path under the substitution.
        LDPtr p = expand_rec(d->premises[0], open_tvar_in_term(before->body, d->type->arg),
                             open_tvar_in_term(after->body, d->type->arg), pos, i + 1, rule);
        return unary(LinRule::Llamt, p->env, before, lt_forall(d->type->arg, p->type), {p});
      }
      if (before->tag == Metaterm::Tag::Fresh && d->rule == LinRule::LNu) {
        LDPtr cur = d;
        auto fb = free_names(before->body).eig_vars;
        if (fb.count(cur->opened)) {
          auto avoid = fb;
          auto fa = free_names(after->body).eig_vars;
          avoid.insert(fa.begin(), fa.end());
          cur = rename_opened_eig(cur, fresh_name("_be", avoid));
        }
        LDPtr p = expand_rec(cur->premises[0], open_eig_in_term(before->body, cur->opened),
                             open_eig_in_term(after->body, cur->opened), pos, i + 1, rule);
        return unary(LinRule::LNu, p->env, before, p->type, {p}, cur->opened);
      }
      break;
    }
  }
  throw SubjectMismatch("expansion path does not match the derivation");
}

}  // namespace

LinDerivPtr expand_lderiv(const LinDerivPtr& d, const Step& step) {
  return expand_rec(d, step.before, step.after, step.pos, 0, step.rule);
}

LinDerivPtr derive_from_trace(const Trace& trace) {
  if (trace.level != Level::F) throw InvalidTrace("witnessing is implemented at level F");
  if (trace.outcome != Outcome::StarReached)
    throw InvalidTrace("trace does not end at star");
  if (trace.steps.size() != trace.step_count)
    throw InvalidTrace("trace does not record its steps");
  MetatermPtr last = trace.steps.empty() ? trace.initial : trace.steps.back().after;
  if (last->tag != Metaterm::Tag::Star) throw InvalidTrace("final term is not star");
  for (size_t i = 0; i + 1 < trace.steps.size(); i++)
    if (!term_eq(trace.steps[i].after, trace.steps[i + 1].before))
      throw InvalidTrace("trace steps do not chain");
  LinDerivPtr d = star_axiom();
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it)
    d = expand_lderiv(d, *it);
  return d;
}

}  // namespace rlz
