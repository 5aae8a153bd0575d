#pragma once

// Bounded enumeration of quantifier-free positive formulas: conjunctions or
// disjunctions of atoms over a fixed variable tuple, each emitted exactly
// once under the syntactic canonical form (oriented equalities, sorted
// duplicate-free atom lists), sizes ascending.

#include "poslog/syntax.hpp"

#include <optional>

namespace poslog {

enum class QfShape : std::uint8_t { ConjunctionOfAtoms, DisjunctionOfAtoms };

// collapses the degenerate sizes so parse/print round-trips stay structural:
// zero atoms is true/false, one atom is the atom itself
inline PositiveFormula conj_of_atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) return PositiveFormula::truth();
    if (atoms.size() == 1) return PositiveFormula::make_atom(std::move(atoms[0]));
    std::vector<PositiveFormula> parts;
    for (auto& a : atoms) parts.push_back(PositiveFormula::make_atom(std::move(a)));
    return PositiveFormula::conj(std::move(parts));
}
inline PositiveFormula disj_of_atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) return PositiveFormula::falsity();
    if (atoms.size() == 1) return PositiveFormula::make_atom(std::move(atoms[0]));
    std::vector<PositiveFormula> parts;
    for (auto& a : atoms) parts.push_back(PositiveFormula::make_atom(std::move(a)));
    return PositiveFormula::disj(std::move(parts));
}

inline PositiveFormula shaped_formula(QfShape shape, std::vector<Atom> atoms) {
    return shape == QfShape::ConjunctionOfAtoms ? conj_of_atoms(std::move(atoms))
                                                : disj_of_atoms(std::move(atoms));
}

// all terms over the given variables (and the signature's constants) of the
// given maximum depth, sorted
inline std::vector<Term> terms_up_to_depth(const Signature& sig,
                                           const std::vector<std::string>& vars,
                                           int max_depth) {
    std::vector<Term> terms;
    for (auto& v : vars) terms.push_back(Term::var(v));
    for (auto& c : sig.constants) terms.push_back(Term::cst(c));
    for (int d = 1; d <= max_depth; ++d) {
        std::vector<Term> next;
        for (auto& [f, ar] : sig.functions) {
            std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
            if (terms.empty()) break;
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
        if (next.empty()) break;
        for (auto& t : next) terms.push_back(std::move(t));
    }
    std::sort(terms.begin(), terms.end(), term_less);
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

// the atom pool: oriented equalities over term pairs (reflexive ones
// included; they are syntactically distinct atoms) and all relation atoms
inline std::vector<Atom> atoms_over(const Signature& sig, const std::vector<std::string>& vars,
                                    int max_term_depth, bool include_reflexive = true) {
    auto terms = terms_up_to_depth(sig, vars, max_term_depth);
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i + (include_reflexive ? 0 : 1); j < terms.size(); ++j)
            atoms.push_back(Atom::equality(terms[i], terms[j]));
    for (auto& [r, ar] : sig.relations) {
        if (terms.empty()) break;
        std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Term> args;
            for (auto i : idx) args.push_back(terms[i]);
            atoms.push_back(Atom::relation(r, std::move(args)));
            int i = ar - 1;
            while (i >= 0 && idx[i] + 1 == terms.size()) {
                idx[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++idx[i];
        }
    }
    std::sort(atoms.begin(), atoms.end(), atom_less);
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}

// Single-consumer stream over the shaped formulas, fewer atoms first, then
// lexicographic over the sorted atom pool.
class QfFormulaStream {
public:
    QfFormulaStream(const Signature& sig, std::vector<std::string> vars, QfShape shape,
                    int max_atoms, int max_term_depth)
        : shape_(shape), max_atoms_(max_atoms) {
        if (max_atoms < 1)
            throw sort_error("enumerate_qf_positive: max_atoms must be >= 1");
        if (max_term_depth < 0)
            throw sort_error("enumerate_qf_positive: max_term_depth must be >= 0");
        atoms_ = atoms_over(sig, vars, max_term_depth);
        size_ = 1;
        idx_.assign(1, 0);
        done_ = atoms_.empty();
    }

    std::optional<PositiveFormula> next() {
        if (done_) return std::nullopt;
        std::vector<Atom> picked;
        for (auto i : idx_) picked.push_back(atoms_[i]);
        PositiveFormula out = shaped_formula(shape_, std::move(picked));
        advance();
        return out;
    }

private:
    void advance() {
        // next k-combination of atom indices in lexicographic order
        int k = static_cast<int>(idx_.size());
        int n = static_cast<int>(atoms_.size());
        int i = k - 1;
        while (i >= 0 && idx_[i] == static_cast<std::size_t>(n - k + i)) --i;
        if (i >= 0) {
            ++idx_[i];
            for (int j = i + 1; j < k; ++j) idx_[j] = idx_[j - 1] + 1;
            return;
        }
        ++size_;
        if (size_ > max_atoms_ || size_ > n) {
            done_ = true;
            return;
        }
        idx_.resize(size_);
        for (int j = 0; j < size_; ++j) idx_[j] = static_cast<std::size_t>(j);
    }

    QfShape shape_;
    int max_atoms_;
    int size_ = 1;
    std::vector<Atom> atoms_;
    std::vector<std::size_t> idx_;
    bool done_ = false;
};

inline QfFormulaStream enumerate_qf_positive(const Signature& sig,
                                             std::vector<std::string> vars, QfShape shape,
                                             int max_atoms, int max_term_depth) {
    return QfFormulaStream(sig, std::move(vars), shape, max_atoms, max_term_depth);
}

inline std::vector<PositiveFormula> collect_qf_positive(const Signature& sig,
                                                        std::vector<std::string> vars,
                                                        QfShape shape, int max_atoms,
                                                        int max_term_depth,
                                                        std::size_t limit = SIZE_MAX) {
    auto s = enumerate_qf_positive(sig, std::move(vars), shape, max_atoms, max_term_depth);
    std::vector<PositiveFormula> out;
    while (out.size() < limit) {
        auto f = s.next();
        if (!f) break;
        out.push_back(std::move(*f));
    }
    return out;
}

// ---------------------------------------------------------------------------
// The audit family used by whole-structure pc/pac checks and certificate
// sweeps: positive formulas in one free variable (quantifier-free atoms and
// one- or two-witness existential conjunctions/disjunctions) plus, for
// signatures with a unary function, the cycle sentences  exists y. f^k(y)=y.

struct FamilyOptions {
    std::string free_var = "x";
    int max_exists_vars = 2;
    int max_atoms = 3;
    int max_term_depth = 1;
    int cycle_sentences_up_to = 0; // k <= this; 0 disables
};

inline Term iterate_unary(const std::string& f, Term t, int k) {
    for (int i = 0; i < k; ++i) t = Term::app(f, {std::move(t)});
    return t;
}

inline std::vector<PositiveFormula> formula_family(const Signature& sig,
                                                   const FamilyOptions& opt = {}) {
    std::vector<PositiveFormula> out;
    // quantifier-free: single non-reflexive atoms in the free variable
    for (auto& a : atoms_over(sig, {opt.free_var}, opt.max_term_depth, false))
        out.push_back(PositiveFormula::make_atom(a));
    // existential blocks over fresh witnesses
    for (int k = 1; k <= opt.max_exists_vars; ++k) {
        std::vector<std::string> vars{opt.free_var};
        std::vector<std::string> bound;
        for (int i = 1; i <= k; ++i) {
            std::string y = "y" + std::to_string(i);
            vars.push_back(y);
            bound.push_back(y);
        }
        int atoms = std::min(opt.max_atoms, k + 1);
        for (QfShape shape : {QfShape::ConjunctionOfAtoms, QfShape::DisjunctionOfAtoms}) {
            auto body = enumerate_qf_positive(sig, vars, shape, atoms, opt.max_term_depth);
            while (auto f = body.next()) {
                // keep only bodies that actually use a bound witness
                auto fv = free_vars(*f);
                bool uses = false;
                for (auto& y : bound) uses = uses || fv.count(y);
                if (!uses) continue;
                out.push_back(PositiveFormula::exists(bound, std::move(*f)));
            }
        }
    }
    // cycle sentences
    for (auto& [f, ar] : sig.functions) {
        if (ar != 1) continue;
        for (int k = 1; k <= opt.cycle_sentences_up_to; ++k)
            out.push_back(PositiveFormula::exists(
                {"y"}, PositiveFormula::make_atom(
                           Atom::equality(iterate_unary(f, Term::var("y"), k), Term::var("y")))));
    }
    return out;
}

} // namespace poslog
