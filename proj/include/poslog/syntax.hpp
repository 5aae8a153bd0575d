#pragma once

// Signatures, terms and the positive / h-inductive formula ASTs.
// Positivity is enforced by construction: the formula type has no
// negation, implication or universal node at all.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace poslog {

class sort_error : public std::runtime_error {
public:
    explicit sort_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Signature {
    std::string name;
    std::vector<std::pair<std::string, int>> functions; // (symbol, arity >= 1)
    std::vector<std::pair<std::string, int>> relations; // (symbol, arity >= 1)
    std::vector<std::string> constants;

    bool has_function(const std::string& s) const { return function_arity(s) != 0; }
    bool has_relation(const std::string& s) const { return relation_arity(s) != 0; }
    bool has_constant(const std::string& s) const {
        return std::find(constants.begin(), constants.end(), s) != constants.end();
    }
    // 0 means "absent"; declared arities are always >= 1.
    int function_arity(const std::string& s) const {
        for (auto& [f, a] : functions)
            if (f == s) return a;
        return 0;
    }
    int relation_arity(const std::string& s) const {
        for (auto& [r, a] : relations)
            if (r == s) return a;
        return 0;
    }
    bool knows_symbol(const std::string& s) const {
        return has_function(s) || has_relation(s) || has_constant(s);
    }

    void validate() const {
        std::set<std::string> seen;
        auto add = [&](const std::string& s) {
            if (!seen.insert(s).second)
                throw sort_error("signature " + name + ": duplicate symbol '" + s + "'");
        };
        for (auto& [f, a] : functions) {
            if (a < 1) throw sort_error("signature " + name + ": function " + f + " has arity < 1");
            add(f);
        }
        for (auto& [r, a] : relations) {
            if (a < 1) throw sort_error("signature " + name + ": relation " + r + " has arity < 1");
            add(r);
        }
        for (auto& c : constants) add(c);
    }

    bool operator==(const Signature& o) const {
        return functions == o.functions && relations == o.relations && constants == o.constants;
    }
};

// ---------------------------------------------------------------------------
// Terms

struct Term {
    enum class Kind : std::uint8_t { Var, Const, App };
    Kind kind = Kind::Var;
    std::string sym;        // variable name, constant symbol or function symbol
    std::vector<Term> args; // only for App

    static Term var(std::string n) { return Term{Kind::Var, std::move(n), {}}; }
    static Term cst(std::string n) { return Term{Kind::Const, std::move(n), {}}; }
    static Term app(std::string f, std::vector<Term> a) {
        return Term{Kind::App, std::move(f), std::move(a)};
    }

    bool operator==(const Term& o) const {
        return kind == o.kind && sym == o.sym && args == o.args;
    }

    int depth() const {
        if (kind != Kind::App) return 0;
        int d = 0;
        for (auto& a : args) d = std::max(d, a.depth());
        return d + 1;
    }
};

inline bool term_less(const Term& a, const Term& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.sym != b.sym) return a.sym < b.sym;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size();
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (term_less(a.args[i], b.args[i])) return true;
        if (term_less(b.args[i], a.args[i])) return false;
    }
    return false;
}

inline void print_term(std::ostream& os, const Term& t) {
    os << t.sym;
    if (t.kind == Term::Kind::App) {
        os << '(';
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) os << ", ";
            print_term(os, t.args[i]);
        }
        os << ')';
    }
}

// ---------------------------------------------------------------------------
// Atoms

struct Atom {
    bool is_equality = true;
    std::string rel;        // relation symbol when !is_equality
    std::vector<Term> args; // two terms for equality

    static Atom equality(Term l, Term r) {
        // canonical orientation, so t1=t2 and t2=t1 are one atom
        if (term_less(r, l)) std::swap(l, r);
        Atom a;
        a.is_equality = true;
        a.args = {std::move(l), std::move(r)};
        return a;
    }
    static Atom relation(std::string r, std::vector<Term> ts) {
        Atom a;
        a.is_equality = false;
        a.rel = std::move(r);
        a.args = std::move(ts);
        return a;
    }

    bool operator==(const Atom& o) const {
        return is_equality == o.is_equality && rel == o.rel && args == o.args;
    }
};

inline bool atom_less(const Atom& a, const Atom& b) {
    if (a.is_equality != b.is_equality) return a.is_equality > b.is_equality; // equalities first
    if (a.rel != b.rel) return a.rel < b.rel;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size();
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (term_less(a.args[i], b.args[i])) return true;
        if (term_less(b.args[i], a.args[i])) return false;
    }
    return false;
}

inline void print_atom(std::ostream& os, const Atom& a) {
    if (a.is_equality) {
        print_term(os, a.args[0]);
        os << " = ";
        print_term(os, a.args[1]);
    } else {
        os << a.rel << '(';
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i) os << ", ";
            print_term(os, a.args[i]);
        }
        os << ')';
    }
}

// ---------------------------------------------------------------------------
// Positive formulas: atoms closed under And, Or, Exists.

struct PositiveFormula {
    enum class Kind : std::uint8_t { Atom, And, Or, Exists };
    Kind kind = Kind::And;
    Atom atom;                           // Kind::Atom
    std::vector<std::string> bound;      // Kind::Exists
    std::vector<PositiveFormula> parts;  // And / Or children, or the Exists body (size 1)

    static PositiveFormula make_atom(Atom a) {
        PositiveFormula f;
        f.kind = Kind::Atom;
        f.atom = std::move(a);
        return f;
    }
    static PositiveFormula conj(std::vector<PositiveFormula> ps) {
        PositiveFormula f;
        f.kind = Kind::And;
        f.parts = std::move(ps);
        return f;
    }
    static PositiveFormula disj(std::vector<PositiveFormula> ps) {
        PositiveFormula f;
        f.kind = Kind::Or;
        f.parts = std::move(ps);
        return f;
    }
    static PositiveFormula exists(std::vector<std::string> vars, PositiveFormula body) {
        PositiveFormula f;
        f.kind = Kind::Exists;
        f.bound = std::move(vars);
        f.parts.push_back(std::move(body));
        return f;
    }
    static PositiveFormula truth() { return conj({}); }   // empty conjunction
    static PositiveFormula falsity() { return disj({}); } // empty disjunction

    bool is_truth() const { return kind == Kind::And && parts.empty(); }
    bool is_falsity() const { return kind == Kind::Or && parts.empty(); }

    bool quantifier_free() const {
        if (kind == Kind::Exists) return false;
        if (kind == Kind::Atom) return true;
        for (auto& p : parts)
            if (!p.quantifier_free()) return false;
        return true;
    }

    int quantifier_depth() const {
        int d = 0;
        for (auto& p : parts) d = std::max(d, p.quantifier_depth());
        return kind == Kind::Exists ? d + 1 : d;
    }

    bool operator==(const PositiveFormula& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
        case Kind::Atom: return atom == o.atom;
        case Kind::Exists: return bound == o.bound && parts == o.parts;
        default: return parts == o.parts;
        }
    }
};

inline void print_formula(std::ostream& os, const PositiveFormula& f) {
    switch (f.kind) {
    case PositiveFormula::Kind::Atom:
        print_atom(os, f.atom);
        break;
    case PositiveFormula::Kind::And:
        if (f.parts.empty()) {
            os << "true";
        } else if (f.parts.size() == 1) {
            os << '(';
            print_formula(os, f.parts[0]);
            os << ')';
        } else {
            os << '(';
            for (std::size_t i = 0; i < f.parts.size(); ++i) {
                if (i) os << " and ";
                print_formula(os, f.parts[i]);
            }
            os << ')';
        }
        break;
    case PositiveFormula::Kind::Or:
        if (f.parts.empty()) {
            os << "false";
        } else if (f.parts.size() == 1) {
            os << '(';
            print_formula(os, f.parts[0]);
            os << ')';
        } else {
            os << '(';
            for (std::size_t i = 0; i < f.parts.size(); ++i) {
                if (i) os << " or ";
                print_formula(os, f.parts[i]);
            }
            os << ')';
        }
        break;
    case PositiveFormula::Kind::Exists:
        os << "exists";
        for (auto& v : f.bound) os << ' ' << v;
        os << ". ";
        print_formula(os, f.parts[0]);
        break;
    }
}

inline std::string to_string(const PositiveFormula& f) {
    std::ostringstream os;
    print_formula(os, f);
    return os.str();
}
inline std::string to_string(const Term& t) {
    std::ostringstream os;
    print_term(os, t);
    return os.str();
}
inline std::string to_string(const Atom& a) {
    std::ostringstream os;
    print_atom(os, a);
    return os.str();
}

// ---------------------------------------------------------------------------
// Free variables, renaming, well-sortedness

inline void collect_term_vars(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Var) out.insert(t.sym);
    for (auto& a : t.args) collect_term_vars(a, out);
}

inline void collect_free_vars(const PositiveFormula& f, std::set<std::string>& out) {
    switch (f.kind) {
    case PositiveFormula::Kind::Atom:
        for (auto& t : f.atom.args) collect_term_vars(t, out);
        break;
    case PositiveFormula::Kind::Exists: {
        std::set<std::string> inner;
        collect_free_vars(f.parts[0], inner);
        for (auto& v : f.bound) inner.erase(v);
        out.insert(inner.begin(), inner.end());
        break;
    }
    default:
        for (auto& p : f.parts) collect_free_vars(p, out);
    }
}

inline std::set<std::string> free_vars(const PositiveFormula& f) {
    std::set<std::string> s;
    collect_free_vars(f, s);
    return s;
}

inline Term rename_vars(const Term& t, const std::map<std::string, std::string>& ren) {
    if (t.kind == Term::Kind::Var) {
        auto it = ren.find(t.sym);
        return it == ren.end() ? t : Term::var(it->second);
    }
    if (t.kind == Term::Kind::Const) return t;
    std::vector<Term> args;
    args.reserve(t.args.size());
    for (auto& a : t.args) args.push_back(rename_vars(a, ren));
    return Term::app(t.sym, std::move(args));
}

inline PositiveFormula rename_vars(const PositiveFormula& f,
                                   const std::map<std::string, std::string>& ren) {
    switch (f.kind) {
    case PositiveFormula::Kind::Atom: {
        Atom a = f.atom;
        for (auto& t : a.args) t = rename_vars(t, ren);
        if (a.is_equality) a = Atom::equality(a.args[0], a.args[1]);
        return PositiveFormula::make_atom(std::move(a));
    }
    case PositiveFormula::Kind::Exists: {
        // bound names shadow the renaming; callers always rename to fresh
        // targets, so capture is not a concern here
        auto inner = ren;
        for (auto& v : f.bound) inner.erase(v);
        PositiveFormula g = f;
        g.parts[0] = rename_vars(f.parts[0], inner);
        return g;
    }
    default: {
        PositiveFormula g = f;
        for (auto& p : g.parts) p = rename_vars(p, ren);
        return g;
    }
    }
}

// well-sortedness: every symbol resolves in the signature with the right arity.
inline void check_term(const Term& t, const Signature& sig) {
    switch (t.kind) {
    case Term::Kind::Var:
        if (sig.knows_symbol(t.sym))
            throw sort_error("variable '" + t.sym + "' clashes with a signature symbol");
        break;
    case Term::Kind::Const:
        if (!sig.has_constant(t.sym)) throw sort_error("unknown constant '" + t.sym + "'");
        break;
    case Term::Kind::App: {
        int a = sig.function_arity(t.sym);
        if (a == 0) throw sort_error("unknown function '" + t.sym + "'");
        if (static_cast<std::size_t>(a) != t.args.size())
            throw sort_error("arity mismatch: " + t.sym + "/" + std::to_string(a) + " applied to "
                             + std::to_string(t.args.size()) + " arguments");
        for (auto& s : t.args) check_term(s, sig);
        break;
    }
    }
}

inline void check_formula(const PositiveFormula& f, const Signature& sig) {
    switch (f.kind) {
    case PositiveFormula::Kind::Atom:
        if (!f.atom.is_equality) {
            int a = sig.relation_arity(f.atom.rel);
            if (a == 0) throw sort_error("unknown relation '" + f.atom.rel + "'");
            if (static_cast<std::size_t>(a) != f.atom.args.size())
                throw sort_error("arity mismatch: " + f.atom.rel + "/" + std::to_string(a)
                                 + " applied to " + std::to_string(f.atom.args.size())
                                 + " arguments");
        }
        for (auto& t : f.atom.args) check_term(t, sig);
        break;
    default:
        for (auto& p : f.parts) check_formula(p, sig);
    }
}

// ---------------------------------------------------------------------------
// H-inductive sentences: forall xs. antecedent -> consequent.
// antecedent == true encodes a positive sentence, consequent == false an
// h-universal one.

struct HInductiveSentence {
    std::vector<std::string> univ_vars;
    PositiveFormula antecedent = PositiveFormula::truth();
    PositiveFormula consequent = PositiveFormula::falsity();

    bool h_universal() const { return consequent.is_falsity(); }

    bool operator==(const HInductiveSentence& o) const {
        return univ_vars == o.univ_vars && antecedent == o.antecedent
            && consequent == o.consequent;
    }

    void check(const Signature& sig) const {
        check_formula(antecedent, sig);
        check_formula(consequent, sig);
        std::set<std::string> fv = free_vars(antecedent);
        auto cv = free_vars(consequent);
        fv.insert(cv.begin(), cv.end());
        for (auto& v : fv)
            if (std::find(univ_vars.begin(), univ_vars.end(), v) == univ_vars.end())
                throw sort_error("free variable '" + v + "' not bound by the universal prefix");
    }
};

inline void print_sentence(std::ostream& os, const HInductiveSentence& s) {
    if (s.h_universal()) {
        os << "not ";
        if (!s.univ_vars.empty()) {
            os << "exists";
            for (auto& v : s.univ_vars) os << ' ' << v;
            os << ". ";
        }
        print_formula(os, s.antecedent);
        return;
    }
    if (!s.univ_vars.empty()) {
        os << "forall";
        for (auto& v : s.univ_vars) os << ' ' << v;
        os << ". ";
    }
    if (!s.antecedent.is_truth()) {
        print_formula(os, s.antecedent);
        os << " -> ";
    }
    print_formula(os, s.consequent);
}

inline std::string to_string(const HInductiveSentence& s) {
    std::ostringstream os;
    print_sentence(os, s);
    return os.str();
}

// ---------------------------------------------------------------------------
// Companion axioms: forall xs. (psi or exists ys. (theta1 and not theta2)).
// Inductive but not h-inductive; produced by the T_h constructor and kept in
// a designated form, evaluated directly on finite structures.

struct CompanionAxiom {
    std::vector<std::string> univ_vars;
    PositiveFormula psi = PositiveFormula::falsity();
    std::vector<std::string> exist_vars;
    PositiveFormula theta1 = PositiveFormula::truth();
    PositiveFormula theta2 = PositiveFormula::falsity();

    bool operator==(const CompanionAxiom& o) const {
        return univ_vars == o.univ_vars && psi == o.psi && exist_vars == o.exist_vars
            && theta1 == o.theta1 && theta2 == o.theta2;
    }

    void check(const Signature& sig) const {
        check_formula(psi, sig);
        check_formula(theta1, sig);
        check_formula(theta2, sig);
    }
};

inline void print_companion(std::ostream& os, const CompanionAxiom& c) {
    if (!c.univ_vars.empty()) {
        os << "forall";
        for (auto& v : c.univ_vars) os << ' ' << v;
        os << ". ";
    }
    print_formula(os, c.psi);
    os << " or exists";
    for (auto& v : c.exist_vars) os << ' ' << v;
    os << ". ";
    print_formula(os, c.theta1);
    os << " and not ";
    print_formula(os, c.theta2);
}

// ---------------------------------------------------------------------------
// Theories

struct Theory {
    std::string name;
    Signature sig;
    std::vector<std::pair<std::string, HInductiveSentence>> axioms;
    // Extended part emitted by build_th_axioms; empty for parsed theories.
    std::vector<std::pair<std::string, CompanionAxiom>> companion_axioms;

    void check() const {
        sig.validate();
        for (auto& [n, ax] : axioms) ax.check(sig);
        for (auto& [n, ca] : companion_axioms) ca.check(sig);
    }

    std::string axiom_key() const {
        std::ostringstream os;
        for (auto& [n, ax] : axioms) {
            print_sentence(os, ax);
            os << ';';
        }
        for (auto& [n, ca] : companion_axioms) {
            print_companion(os, ca);
            os << ';';
        }
        return os.str();
    }
};

inline void print_signature(std::ostream& os, const Signature& s) {
    os << "signature " << s.name << " {";
    bool any = false;
    for (auto& [f, a] : s.functions) {
        os << " func " << f << "/" << a << ";";
        any = true;
    }
    for (auto& [r, a] : s.relations) {
        os << " rel " << r << "/" << a << ";";
        any = true;
    }
    for (auto& c : s.constants) {
        os << " const " << c << ";";
        any = true;
    }
    os << (any ? " }" : " }");
}

inline void print_theory(std::ostream& os, const Theory& t) {
    os << "theory " << t.name << " over " << t.sig.name << " {";
    for (auto& [n, ax] : t.axioms) {
        os << " axiom " << n << ": ";
        print_sentence(os, ax);
        os << ";";
    }
    for (auto& [n, ca] : t.companion_axioms) {
        os << " companion " << n << ": ";
        print_companion(os, ca);
        os << ";";
    }
    os << " }";
}

inline std::string to_string(const Signature& s) {
    std::ostringstream os;
    print_signature(os, s);
    return os.str();
}
inline std::string to_string(const Theory& t) {
    std::ostringstream os;
    print_theory(os, t);
    return os.str();
}

} // namespace poslog
