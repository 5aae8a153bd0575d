#pragma once

// The bounded semantic engine. Entailment is approximated by countermodel
// search only; verdicts say so explicitly. Holds always means "no
// counterexample within the budget" and every report carries the bound.

#include "poslog/enumerate.hpp"
#include "poslog/models.hpp"
#include "poslog/morphisms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace poslog {

class precondition_error : public std::runtime_error {
public:
    explicit precondition_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SearchBudget {
    int max_model_size = 4;
    int max_formula_atoms = 3;
    int max_term_depth = 1;
    long long max_nodes = 2'000'000'000LL;

    void validate() const {
        if (max_model_size < 1 || max_formula_atoms < 1 || max_term_depth < 0 || max_nodes < 1)
            throw precondition_error("search budget bounds must be >= 1 (term depth >= 0)");
    }
};

enum class Outcome : std::uint8_t { Holds, Fails, Unknown };

inline const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Fails: return "Fails";
    default: return "Unknown";
    }
}

struct Witness {
    std::optional<FinStructure> structure;
    std::optional<Morphism> morphism;
    std::optional<Morphism> morphism2;
    std::optional<Assignment> assignment;
    std::string note;
};

struct BoundedVerdict {
    Outcome outcome = Outcome::Unknown;
    std::optional<Witness> witness; // Fails always carries one
    SearchBudget bound_used;
    std::vector<std::string> flags;

    bool holds() const { return outcome == Outcome::Holds; }
    bool fails() const { return outcome == Outcome::Fails; }
};

// ---------------------------------------------------------------------------
// entails_bounded: refutation-sound bounded "T |- sigma".

inline BoundedVerdict entails_bounded(const Theory& T, const HInductiveSentence& sigma,
                                      const SearchBudget& budget) {
    budget.validate();
    sigma.check(T.sig);
    BoundedVerdict v;
    v.bound_used = budget;
    ModelList ml = enumerate_models(T, budget.max_model_size, budget.max_nodes);
    for (auto& m : ml.models) {
        if (auto falsifying = find_falsifying(m, sigma)) {
            v.outcome = Outcome::Fails;
            Witness w;
            w.structure = m;
            w.assignment = std::move(*falsifying);
            w.note = "countermodel";
            v.witness = std::move(w);
            return v;
        }
    }
    if (ml.truncated) {
        v.outcome = Outcome::Unknown;
        v.flags.push_back("budget_exhausted");
        return v;
    }
    v.outcome = Outcome::Holds;
    v.flags.push_back("holds_up_to_bound");
    if (ml.models.empty()) v.flags.push_back("inconsistent_up_to_bound");
    return v;
}

// convenience wrapper for "T |- not exists xs (phi)" style queries
inline HInductiveSentence negated_existential(const PositiveFormula& phi) {
    HInductiveSentence s;
    auto fv = free_vars(phi);
    s.univ_vars.assign(fv.begin(), fv.end());
    s.antecedent = phi;
    s.consequent = PositiveFormula::falsity();
    return s;
}

// ---------------------------------------------------------------------------
// Ctr_T(phi) probing: positive qf candidates psi with
// T |- not exists xs (phi and psi), within the formula budget.

struct CtrEntry {
    PositiveFormula psi;
    BoundedVerdict verdict;
};

struct CtrResult {
    std::vector<CtrEntry> members;
    long long candidates_tried = 0;
    bool truncated = false;
    SearchBudget bound_used;
};

inline CtrResult ctr_probe(const Theory& T, const PositiveFormula& phi,
                           const SearchBudget& budget, long long max_candidates = 100000) {
    budget.validate();
    check_formula(phi, T.sig);
    CtrResult out;
    out.bound_used = budget;
    std::vector<std::string> vars = sorted_free_vars(phi);
    auto stream = enumerate_qf_positive(T.sig, vars, QfShape::ConjunctionOfAtoms,
                                        budget.max_formula_atoms, budget.max_term_depth);
    while (auto psi = stream.next()) {
        if (++out.candidates_tried > max_candidates) {
            out.truncated = true;
            break;
        }
        PositiveFormula both = PositiveFormula::conj({phi, *psi});
        BoundedVerdict v = entails_bounded(T, negated_existential(both), budget);
        if (v.outcome == Outcome::Unknown) out.truncated = true;
        if (v.holds()) out.members.push_back({std::move(*psi), std::move(v)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Common continuation: D |= T with homomorphisms A -> D and B -> D.

enum class FindOutcome : std::uint8_t { Found, NotFoundWithinBudget, Unknown };

inline const char* to_string(FindOutcome o) {
    switch (o) {
    case FindOutcome::Found: return "Found";
    case FindOutcome::NotFoundWithinBudget: return "NotFoundWithinBudget";
    default: return "Unknown";
    }
}

struct ContinuationResult {
    FindOutcome outcome = FindOutcome::Unknown;
    std::optional<Witness> witness; // structure D plus the two homomorphisms
    SearchBudget bound_used;
    std::vector<std::string> flags;
};

inline ContinuationResult common_continuation(const FinStructure& A, const FinStructure& B,
                                              const Theory& T, const SearchBudget& budget) {
    budget.validate();
    if (!satisfies_theory(A, T))
        throw precondition_error("common_continuation: " + A.name + " is not a model of "
                                 + T.name);
    if (!satisfies_theory(B, T))
        throw precondition_error("common_continuation: " + B.name + " is not a model of "
                                 + T.name);
    ContinuationResult out;
    out.bound_used = budget;
    ModelList ml = enumerate_models(T, budget.max_model_size, budget.max_nodes);
    for (auto& d : ml.models) {
        auto ha = find_morphisms(A, d, MorphismKind::Hom, 1, {}, budget.max_nodes);
        if (ha.found.empty()) continue;
        auto hb = find_morphisms(B, d, MorphismKind::Hom, 1, {}, budget.max_nodes);
        if (hb.found.empty()) continue;
        out.outcome = FindOutcome::Found;
        Witness w;
        w.structure = d;
        w.morphism = std::move(ha.found[0]);
        w.morphism2 = std::move(hb.found[0]);
        w.note = "common continuation";
        out.witness = std::move(w);
        return out;
    }
    if (ml.truncated) {
        out.outcome = FindOutcome::Unknown;
        out.flags.push_back("budget_exhausted");
    } else {
        out.outcome = FindOutcome::NotFoundWithinBudget;
    }
    return out;
}

} // namespace poslog
