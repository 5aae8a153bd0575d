#pragma once

// Finite L-structures and Tarskian evaluation of positive formulas and
// h-inductive sentences. Universes are small (element indices fit a byte);
// function tables are flat row-major arrays, relations are bitsets.

#include "poslog/syntax.hpp"

#include <cassert>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace poslog {

using Elem = std::uint8_t;

constexpr std::size_t kMaxUniverse = 31;

inline std::size_t pow_size(std::size_t n, int k) {
    std::size_t r = 1;
    while (k-- > 0) r *= n;
    return r;
}

struct FinStructure {
    Signature sig;
    std::string name;
    std::vector<std::string> universe;           // element names, index = Elem
    std::vector<std::vector<Elem>> funcs;        // per signature function, flat row-major
    std::vector<std::vector<char>> rels;         // per signature relation, bitset over tuples
    std::vector<Elem> consts;                    // per signature constant

    std::size_t size() const { return universe.size(); }

    int element_index(const std::string& n) const {
        for (std::size_t i = 0; i < universe.size(); ++i)
            if (universe[i] == n) return static_cast<int>(i);
        return -1;
    }

    int function_index(const std::string& s) const {
        for (std::size_t i = 0; i < sig.functions.size(); ++i)
            if (sig.functions[i].first == s) return static_cast<int>(i);
        return -1;
    }
    int relation_index(const std::string& s) const {
        for (std::size_t i = 0; i < sig.relations.size(); ++i)
            if (sig.relations[i].first == s) return static_cast<int>(i);
        return -1;
    }
    int constant_index(const std::string& s) const {
        for (std::size_t i = 0; i < sig.constants.size(); ++i)
            if (sig.constants[i] == s) return static_cast<int>(i);
        return -1;
    }

    std::size_t flat_index(const std::vector<Elem>& tuple) const {
        std::size_t idx = 0;
        for (Elem e : tuple) idx = idx * size() + e;
        return idx;
    }

    Elem apply(int func, const std::vector<Elem>& args) const {
        return funcs[func][flat_index(args)];
    }
    bool holds(int rel, const std::vector<Elem>& args) const {
        return rels[rel][flat_index(args)] != 0;
    }

    void validate() const {
        sig.validate();
        if (universe.empty()) throw sort_error("structure " + name + ": empty universe");
        if (universe.size() > kMaxUniverse)
            throw sort_error("structure " + name + ": universe too large");
        {
            std::set<std::string> seen(universe.begin(), universe.end());
            if (seen.size() != universe.size())
                throw sort_error("structure " + name + ": duplicate element names");
        }
        std::size_t n = size();
        if (funcs.size() != sig.functions.size() || rels.size() != sig.relations.size()
            || consts.size() != sig.constants.size())
            throw sort_error("structure " + name + ": interpretation tables missing");
        for (std::size_t i = 0; i < funcs.size(); ++i) {
            if (funcs[i].size() != pow_size(n, sig.functions[i].second))
                throw sort_error("structure " + name + ": function " + sig.functions[i].first
                                 + " is not total");
            for (Elem v : funcs[i])
                if (v >= n) throw sort_error("structure " + name + ": function value out of range");
        }
        for (std::size_t i = 0; i < rels.size(); ++i)
            if (rels[i].size() != pow_size(n, sig.relations[i].second))
                throw sort_error("structure " + name + ": relation " + sig.relations[i].first
                                 + " table has wrong size");
        for (Elem c : consts)
            if (c >= n) throw sort_error("structure " + name + ": constant out of range");
    }
};

// Named assignment used at API boundaries; internal evaluation works on
// compiled slot vectors.
using Assignment = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Compiled formulas: symbols and variables resolved to integer indices once,
// so evaluation inside enumeration loops does no string work.

namespace detail {

struct CompiledTerm {
    enum class K : std::uint8_t { Var, Const, App };
    K k = K::Var;
    int idx = 0; // var slot / constant index / function index
    std::vector<CompiledTerm> args;
};

struct CompiledFormula {
    PositiveFormula::Kind kind = PositiveFormula::Kind::And;
    bool is_eq = true;
    int rel = -1;
    std::vector<CompiledTerm> atom_args;
    int first_slot = 0, n_bound = 0; // Exists: slots [first_slot, first_slot+n_bound)
    std::vector<CompiledFormula> parts;
};

class VarFrame {
public:
    int slot_of(const std::string& v) const {
        for (std::size_t i = names_.size(); i-- > 0;)
            if (names_[i] == v) return static_cast<int>(i);
        return -1;
    }
    int push(const std::string& v) {
        names_.push_back(v);
        return static_cast<int>(names_.size()) - 1;
    }
    void pop(int k) { names_.resize(names_.size() - k); }
    int depth() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
};

inline CompiledTerm compile_term(const Term& t, const Signature& sig, VarFrame& frame) {
    CompiledTerm c;
    switch (t.kind) {
    case Term::Kind::Var: {
        c.k = CompiledTerm::K::Var;
        c.idx = frame.slot_of(t.sym);
        if (c.idx < 0) throw sort_error("unbound variable '" + t.sym + "'");
        break;
    }
    case Term::Kind::Const: {
        c.k = CompiledTerm::K::Const;
        c.idx = -1;
        for (std::size_t i = 0; i < sig.constants.size(); ++i)
            if (sig.constants[i] == t.sym) c.idx = static_cast<int>(i);
        if (c.idx < 0) throw sort_error("unknown constant '" + t.sym + "'");
        break;
    }
    case Term::Kind::App: {
        c.k = CompiledTerm::K::App;
        c.idx = -1;
        for (std::size_t i = 0; i < sig.functions.size(); ++i)
            if (sig.functions[i].first == t.sym) c.idx = static_cast<int>(i);
        if (c.idx < 0) throw sort_error("unknown function '" + t.sym + "'");
        if (sig.functions[c.idx].second != static_cast<int>(t.args.size()))
            throw sort_error("arity mismatch on '" + t.sym + "'");
        for (auto& a : t.args) c.args.push_back(compile_term(a, sig, frame));
        break;
    }
    }
    return c;
}

inline CompiledFormula compile_formula(const PositiveFormula& f, const Signature& sig,
                                       VarFrame& frame) {
    CompiledFormula c;
    c.kind = f.kind;
    switch (f.kind) {
    case PositiveFormula::Kind::Atom:
        c.is_eq = f.atom.is_equality;
        if (!c.is_eq) {
            c.rel = -1;
            for (std::size_t i = 0; i < sig.relations.size(); ++i)
                if (sig.relations[i].first == f.atom.rel) c.rel = static_cast<int>(i);
            if (c.rel < 0) throw sort_error("unknown relation '" + f.atom.rel + "'");
            if (sig.relations[c.rel].second != static_cast<int>(f.atom.args.size()))
                throw sort_error("arity mismatch on '" + f.atom.rel + "'");
        }
        for (auto& t : f.atom.args) c.atom_args.push_back(compile_term(t, sig, frame));
        break;
    case PositiveFormula::Kind::Exists: {
        c.first_slot = frame.depth();
        for (auto& v : f.bound) frame.push(v);
        c.n_bound = static_cast<int>(f.bound.size());
        c.parts.push_back(compile_formula(f.parts[0], sig, frame));
        frame.pop(c.n_bound);
        break;
    }
    default:
        for (auto& p : f.parts) c.parts.push_back(compile_formula(p, sig, frame));
    }
    return c;
}

inline Elem eval_term(const CompiledTerm& t, const FinStructure& A, std::vector<Elem>& env) {
    switch (t.k) {
    case CompiledTerm::K::Var: return env[t.idx];
    case CompiledTerm::K::Const: return A.consts[t.idx];
    default: {
        std::size_t idx = 0;
        for (auto& a : t.args) idx = idx * A.size() + eval_term(a, A, env);
        return A.funcs[t.idx][idx];
    }
    }
}

inline bool eval_formula(const CompiledFormula& f, const FinStructure& A,
                         std::vector<Elem>& env) {
    switch (f.kind) {
    case PositiveFormula::Kind::Atom:
        if (f.is_eq) return eval_term(f.atom_args[0], A, env) == eval_term(f.atom_args[1], A, env);
        {
            std::size_t idx = 0;
            for (auto& a : f.atom_args) idx = idx * A.size() + eval_term(a, A, env);
            return A.rels[f.rel][idx] != 0;
        }
    case PositiveFormula::Kind::And:
        for (auto& p : f.parts)
            if (!eval_formula(p, A, env)) return false;
        return true;
    case PositiveFormula::Kind::Or:
        for (auto& p : f.parts)
            if (eval_formula(p, A, env)) return true;
        return false;
    case PositiveFormula::Kind::Exists: {
        if (static_cast<int>(env.size()) < f.first_slot + f.n_bound)
            env.resize(f.first_slot + f.n_bound);
        std::size_t n = A.size();
        // nested witness search over the bound slots
        int k = f.n_bound;
        std::vector<Elem>& e = env;
        for (int i = 0; i < k; ++i) e[f.first_slot + i] = 0;
        while (true) {
            if (eval_formula(f.parts[0], A, e)) return true;
            int i = k - 1;
            while (i >= 0 && e[f.first_slot + i] == n - 1) {
                e[f.first_slot + i] = 0;
                --i;
            }
            if (i < 0) return false;
            ++e[f.first_slot + i];
        }
    }
    }
    return false;
}

} // namespace detail

// A sentence (or formula in context) compiled against a fixed signature. The
// universal/free variables occupy the first slots, in the order given.
class CompiledSentence {
public:
    CompiledSentence() = default;

    static CompiledSentence for_sentence(const HInductiveSentence& s, const Signature& sig) {
        CompiledSentence c;
        detail::VarFrame frame;
        for (auto& v : s.univ_vars) frame.push(v);
        c.n_free_ = static_cast<int>(s.univ_vars.size());
        c.ant_ = detail::compile_formula(s.antecedent, sig, frame);
        c.cons_ = detail::compile_formula(s.consequent, sig, frame);
        c.has_cons_ = true;
        return c;
    }

    static CompiledSentence for_formula(const PositiveFormula& f,
                                        const std::vector<std::string>& free_order,
                                        const Signature& sig) {
        CompiledSentence c;
        detail::VarFrame frame;
        for (auto& v : free_order) frame.push(v);
        c.n_free_ = static_cast<int>(free_order.size());
        c.ant_ = detail::compile_formula(f, sig, frame);
        c.has_cons_ = false;
        return c;
    }

    int free_count() const { return n_free_; }

    // formula mode: evaluate at the given tuple
    bool eval(const FinStructure& A, const std::vector<Elem>& tuple) const {
        std::vector<Elem> env(tuple.begin(), tuple.end());
        return detail::eval_formula(ant_, A, env);
    }

    // sentence mode: forall tuples, antecedent -> consequent
    bool satisfied(const FinStructure& A, std::vector<Elem>* falsifying = nullptr) const {
        std::vector<Elem> tuple, env;
        return satisfied_ws(A, tuple, env, falsifying);
    }

    // workspace variant for enumeration loops; bound-variable slots sit above
    // the free slots, so evaluating the consequent can reuse the antecedent's
    // environment
    bool satisfied_ws(const FinStructure& A, std::vector<Elem>& tuple, std::vector<Elem>& env,
                      std::vector<Elem>* falsifying = nullptr) const {
        tuple.assign(static_cast<std::size_t>(n_free_), 0);
        std::size_t n = A.size();
        while (true) {
            if (env.size() < static_cast<std::size_t>(n_free_)) env.resize(n_free_);
            for (int i = 0; i < n_free_; ++i) env[i] = tuple[i];
            if (detail::eval_formula(ant_, A, env) && !detail::eval_formula(cons_, A, env)) {
                if (falsifying) *falsifying = tuple;
                return false;
            }
            int i = n_free_ - 1;
            while (i >= 0 && tuple[i] == n - 1) {
                tuple[i] = 0;
                --i;
            }
            if (i < 0) return true;
            ++tuple[i];
        }
    }

private:
    int n_free_ = 0;
    bool has_cons_ = false;
    detail::CompiledFormula ant_, cons_;
};

// ---------------------------------------------------------------------------
// Public evaluation API

inline std::vector<std::string> sorted_free_vars(const PositiveFormula& f) {
    auto s = free_vars(f);
    return {s.begin(), s.end()};
}

inline std::vector<Elem> resolve_assignment(const FinStructure& A,
                                            const std::vector<std::string>& vars,
                                            const Assignment& sigma) {
    std::vector<Elem> tuple;
    tuple.reserve(vars.size());
    for (auto& v : vars) {
        auto it = sigma.find(v);
        if (it == sigma.end()) throw sort_error("assignment misses free variable '" + v + "'");
        int e = A.element_index(it->second);
        if (e < 0)
            throw sort_error("assignment value '" + it->second + "' is not an element of "
                             + A.name);
        tuple.push_back(static_cast<Elem>(e));
    }
    return tuple;
}

inline bool eval_positive(const FinStructure& A, const PositiveFormula& phi,
                          const Assignment& sigma = {}) {
    check_formula(phi, A.sig);
    auto vars = sorted_free_vars(phi);
    auto compiled = CompiledSentence::for_formula(phi, vars, A.sig);
    return compiled.eval(A, resolve_assignment(A, vars, sigma));
}

inline bool satisfies(const FinStructure& A, const HInductiveSentence& s) {
    s.check(A.sig);
    return CompiledSentence::for_sentence(s, A.sig).satisfied(A);
}

inline std::optional<Assignment> find_falsifying(const FinStructure& A,
                                                 const HInductiveSentence& s) {
    s.check(A.sig);
    std::vector<Elem> tuple;
    if (CompiledSentence::for_sentence(s, A.sig).satisfied(A, &tuple)) return std::nullopt;
    Assignment out;
    for (std::size_t i = 0; i < s.univ_vars.size(); ++i)
        out[s.univ_vars[i]] = A.universe[tuple[i]];
    return out;
}

// Companion axioms are checked by direct evaluation: for every universal
// tuple, psi holds or some witness makes theta1 true and theta2 false.
inline bool satisfies_companion(const FinStructure& A, const CompanionAxiom& c) {
    c.check(A.sig);
    std::vector<std::string> order = c.univ_vars;
    auto psi = CompiledSentence::for_formula(c.psi, order, A.sig);
    std::vector<std::string> inner = order;
    for (auto& v : c.exist_vars) inner.push_back(v);
    auto th1 = CompiledSentence::for_formula(c.theta1, inner, A.sig);
    auto th2 = CompiledSentence::for_formula(c.theta2, inner, A.sig);

    std::size_t n = A.size();
    std::vector<Elem> tuple(c.univ_vars.size(), 0);
    while (true) {
        if (!psi.eval(A, tuple)) {
            std::vector<Elem> full(tuple.begin(), tuple.end());
            full.resize(tuple.size() + c.exist_vars.size(), 0);
            bool witnessed = false;
            while (true) {
                if (th1.eval(A, full) && !th2.eval(A, full)) {
                    witnessed = true;
                    break;
                }
                int i = static_cast<int>(full.size()) - 1;
                while (i >= static_cast<int>(tuple.size()) && full[i] == n - 1) {
                    full[i] = 0;
                    --i;
                }
                if (i < static_cast<int>(tuple.size())) break;
                ++full[i];
            }
            if (!witnessed) return false;
        }
        if (tuple.empty()) return true;
        int i = static_cast<int>(tuple.size()) - 1;
        while (i >= 0 && tuple[i] == n - 1) {
            tuple[i] = 0;
            --i;
        }
        if (i < 0) return true;
        ++tuple[i];
    }
}

inline bool satisfies_theory(const FinStructure& A, const Theory& T) {
    for (auto& [n, ax] : T.axioms)
        if (!satisfies(A, ax)) return false;
    for (auto& [n, ca] : T.companion_axioms)
        if (!satisfies_companion(A, ca)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Diagrams and the L(A) expansion

struct DiagFact {
    Atom atom;
    bool negated = false;
};

// L(A): adjoin one fresh constant per element. Returns the expanded structure;
// the new constants are appended after any existing ones and named after the
// elements they denote.
inline FinStructure expand_with_constants(const FinStructure& A,
                                          std::vector<std::string>* names_out = nullptr) {
    FinStructure B = A;
    B.sig.name = A.sig.name + "_" + A.name;
    for (std::size_t i = 0; i < A.universe.size(); ++i) {
        std::string c = "c_" + A.universe[i];
        while (B.sig.knows_symbol(c)) c += "_";
        B.sig.constants.push_back(c);
        B.consts.push_back(static_cast<Elem>(i));
        if (names_out) names_out->push_back(c);
    }
    return B;
}

namespace detail {

inline std::vector<Term> closed_terms_up_to(const FinStructure& AX, int depth) {
    std::vector<Term> terms;
    for (auto& c : AX.sig.constants) terms.push_back(Term::cst(c));
    std::vector<Term> frontier = terms;
    for (int d = 1; d <= depth; ++d) {
        std::vector<Term> next;
        for (auto& [f, ar] : AX.sig.functions) {
            // argument tuples drawn from all terms of depth < d, at least one
            // from the frontier would be the precise rule; at desk scale we
            // simply take all tuples over terms seen so far and deduplicate
            std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
            while (true) {
                std::vector<Term> args;
                for (auto i : idx) args.push_back(terms[i]);
                Term t = Term::app(f, std::move(args));
                if (t.depth() == d) next.push_back(std::move(t));
                int i = ar - 1;
                while (i >= 0 && idx[i] + 1 == terms.size()) {
                    idx[i] = 0;
                    --i;
                }
                if (i < 0) break;
                ++idx[i];
            }
        }
        for (auto& t : next) terms.push_back(t);
        if (next.empty()) break;
    }
    std::sort(terms.begin(), terms.end(), term_less);
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

inline Elem eval_closed_term(const FinStructure& AX, const Term& t) {
    if (t.kind == Term::Kind::Const) {
        int c = AX.constant_index(t.sym);
        if (c < 0) throw sort_error("unknown constant '" + t.sym + "'");
        return AX.consts[c];
    }
    if (t.kind != Term::Kind::App) throw sort_error("open term in closed context");
    int f = AX.function_index(t.sym);
    if (f < 0) throw sort_error("unknown function '" + t.sym + "'");
    std::vector<Elem> args;
    for (auto& a : t.args) args.push_back(eval_closed_term(AX, a));
    return AX.apply(f, args);
}

} // namespace detail

// All atomic L(A)-sentences (over constant terms of bounded depth) true in A.
// This is the finite generating set of Diag+(A); closure under and/or is
// implicit.
inline std::vector<Atom> diag_plus(const FinStructure& A, int depth = 1) {
    FinStructure AX = expand_with_constants(A);
    auto terms = detail::closed_terms_up_to(AX, depth);
    std::vector<Atom> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i; j < terms.size(); ++j)
            if (detail::eval_closed_term(AX, terms[i]) == detail::eval_closed_term(AX, terms[j]))
                out.push_back(Atom::equality(terms[i], terms[j]));
    for (std::size_t r = 0; r < AX.sig.relations.size(); ++r) {
        int ar = AX.sig.relations[r].second;
        std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Term> args;
            std::vector<Elem> vals;
            for (auto i : idx) {
                args.push_back(terms[i]);
                vals.push_back(detail::eval_closed_term(AX, terms[i]));
            }
            if (AX.holds(static_cast<int>(r), vals))
                out.push_back(Atom::relation(AX.sig.relations[r].first, std::move(args)));
            int i = ar - 1;
            while (i >= 0 && idx[i] + 1 == terms.size()) {
                idx[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++idx[i];
        }
    }
    std::sort(out.begin(), out.end(), atom_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Diag(A): the true atomic sentences plus negations of the false ones, with
// terms bounded by the same depth parameter.
inline std::vector<DiagFact> diag(const FinStructure& A, int depth = 1) {
    FinStructure AX = expand_with_constants(A);
    auto terms = detail::closed_terms_up_to(AX, depth);
    std::vector<DiagFact> out;
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i; j < terms.size(); ++j) {
            bool eq = detail::eval_closed_term(AX, terms[i])
                   == detail::eval_closed_term(AX, terms[j]);
            out.push_back({Atom::equality(terms[i], terms[j]), !eq});
        }
    for (std::size_t r = 0; r < AX.sig.relations.size(); ++r) {
        int ar = AX.sig.relations[r].second;
        std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Term> args;
            std::vector<Elem> vals;
            for (auto i : idx) {
                args.push_back(terms[i]);
                vals.push_back(detail::eval_closed_term(AX, terms[i]));
            }
            bool h = AX.holds(static_cast<int>(r), vals);
            out.push_back({Atom::relation(AX.sig.relations[r].first, std::move(args)), !h});
            int i = ar - 1;
            while (i >= 0 && idx[i] + 1 == terms.size()) {
                idx[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++idx[i];
        }
    }
    std::sort(out.begin(), out.end(), [](const DiagFact& a, const DiagFact& b) {
        if (a.negated != b.negated) return !a.negated;
        return atom_less(a.atom, b.atom);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const DiagFact& a, const DiagFact& b) {
                              return a.negated == b.negated && a.atom == b.atom;
                          }),
              out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Disjoint union (models of h-universal theories are closed under it).
// Element names from the right side are primed until fresh.

inline FinStructure disjoint_union(const FinStructure& A, const FinStructure& B,
                                   const std::string& name = "") {
    if (!(A.sig == B.sig)) throw sort_error("disjoint_union: signature mismatch");
    if (!A.sig.constants.empty())
        throw sort_error("disjoint_union: signature has constants, union is ambiguous");
    FinStructure U;
    U.sig = A.sig;
    U.name = name.empty() ? A.name + "_plus_" + B.name : name;
    U.universe = A.universe;
    std::vector<Elem> bmap(B.size());
    for (std::size_t i = 0; i < B.size(); ++i) {
        std::string nm = B.universe[i];
        while (std::find(U.universe.begin(), U.universe.end(), nm) != U.universe.end())
            nm += "'";
        bmap[i] = static_cast<Elem>(U.universe.size());
        U.universe.push_back(nm);
    }
    std::size_t n = U.size();
    U.funcs.resize(A.funcs.size());
    for (std::size_t f = 0; f < A.funcs.size(); ++f) {
        int ar = A.sig.functions[f].second;
        U.funcs[f].assign(pow_size(n, ar), 0);
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            // tuples fully inside one side copy that side; mixed tuples get a
            // harmless default (first element) -- they cannot occur for
            // arity-1 signatures, and union fixtures only use those
            bool in_a = true, in_b = true;
            for (Elem e : tup) {
                if (e >= A.size()) in_a = false;
                if (e < A.size()) in_b = false;
            }
            Elem v;
            if (in_a) {
                std::vector<Elem> at(tup.begin(), tup.end());
                v = A.apply(static_cast<int>(f), at);
            } else if (in_b) {
                std::vector<Elem> bt;
                for (Elem e : tup) bt.push_back(static_cast<Elem>(e - A.size()));
                v = bmap[B.apply(static_cast<int>(f), bt)];
            } else {
                v = tup[0];
            }
            U.funcs[f][U.flat_index(tup)] = v;
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    U.rels.resize(A.rels.size());
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        U.rels[r].assign(pow_size(n, ar), 0);
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            bool in_a = true, in_b = true;
            for (Elem e : tup) {
                if (e >= A.size()) in_a = false;
                if (e < A.size()) in_b = false;
            }
            bool h = false;
            if (in_a) {
                std::vector<Elem> at(tup.begin(), tup.end());
                h = A.holds(static_cast<int>(r), at);
            } else if (in_b) {
                std::vector<Elem> bt;
                for (Elem e : tup) bt.push_back(static_cast<Elem>(e - A.size()));
                h = B.holds(static_cast<int>(r), bt);
            }
            U.rels[r][U.flat_index(tup)] = h ? 1 : 0;
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    return U;
}

// ---------------------------------------------------------------------------
// Text form

inline void print_structure(std::ostream& os, const FinStructure& A) {
    os << "structure " << A.name << " over " << A.sig.name << " { universe {";
    for (std::size_t i = 0; i < A.universe.size(); ++i) {
        if (i) os << ", ";
        os << A.universe[i];
    }
    os << "};";
    for (std::size_t f = 0; f < A.funcs.size(); ++f) {
        os << ' ' << A.sig.functions[f].first << ':';
        int ar = A.sig.functions[f].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        bool first = true;
        while (true) {
            os << (first ? " " : ", ");
            first = false;
            if (ar == 1) {
                os << A.universe[tup[0]];
            } else {
                os << '(';
                for (int i = 0; i < ar; ++i) {
                    if (i) os << ',';
                    os << A.universe[tup[i]];
                }
                os << ')';
            }
            os << " -> " << A.universe[A.funcs[f][A.flat_index(tup)]];
            int i = ar - 1;
            while (i >= 0 && tup[i] == A.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
        os << ';';
    }
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        std::vector<std::vector<Elem>> tuples;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            if (A.holds(static_cast<int>(r), tup)) tuples.push_back(tup);
            int i = ar - 1;
            while (i >= 0 && tup[i] == A.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
        if (tuples.empty()) continue;
        os << ' ' << A.sig.relations[r].first << ':';
        for (std::size_t k = 0; k < tuples.size(); ++k) {
            os << (k ? ", (" : " (");
            for (int i = 0; i < ar; ++i) {
                if (i) os << ',';
                os << A.universe[tuples[k][i]];
            }
            os << ')';
        }
        os << ';';
    }
    for (std::size_t c = 0; c < A.consts.size(); ++c)
        os << ' ' << A.sig.constants[c] << " = " << A.universe[A.consts[c]] << ';';
    os << " }";
}

inline std::string to_string(const FinStructure& A) {
    std::ostringstream os;
    print_structure(os, A);
    return os.str();
}

} // namespace poslog
