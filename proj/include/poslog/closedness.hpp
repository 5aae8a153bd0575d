#pragma once

// Bounded pc and pac checks, certificate search and verification for the
// syntactic pac characterization, Alc probing with disjunction combination,
// the T_h axiom constructor, the greedy saturation heuristic and e-elementary
// extension checks.
//
// All verdicts are bounded: Holds means no counterexample with target size
// within the budget, and the reports carry the bound.

#include "poslog/theories.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace poslog {

enum class CheckMode : std::uint8_t { Pc, Pac, EElementary };

inline const char* to_string(CheckMode m) {
    switch (m) {
    case CheckMode::Pc: return "pc";
    case CheckMode::Pac: return "pac";
    default: return "e-elementary";
    }
}

struct CheckReport {
    CheckMode mode = CheckMode::Pc;
    std::string subject;
    std::string theory;
    BoundedVerdict verdict;
    // a positive formula (with parameters) gained along the failing morphism,
    // when one exists in the audit family; explanatory only
    std::optional<std::pair<PositiveFormula, Assignment>> distinguisher;
};

namespace detail {

inline std::vector<std::string> fresh_vars(std::size_t count, const Signature& sig,
                                           const std::set<std::string>& avoid,
                                           const std::string& base = "y") {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= count; ++i) {
        std::string v = base + std::to_string(i);
        while (avoid.count(v) || sig.knows_symbol(v)) v += "_";
        out.push_back(std::move(v));
    }
    return out;
}

inline Atom cycle_atom(const std::string& f, int k) {
    return Atom::equality(iterate_unary(f, Term::var("y"), k), Term::var("y"));
}

// first family formula (with parameters from A) gained along map : A -> B
inline std::optional<std::pair<PositiveFormula, Assignment>>
find_distinguisher(const FinStructure& A, const FinStructure& B, const std::vector<Elem>& map,
                   const SearchBudget& budget) {
    // collapsed pairs gain an equality
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = i + 1; j < A.size(); ++j)
            if (map[i] == map[j]) {
                PositiveFormula eq = PositiveFormula::make_atom(
                    Atom::equality(Term::var("x1"), Term::var("x2")));
                Assignment at{{"x1", A.universe[i]}, {"x2", A.universe[j]}};
                return std::make_pair(std::move(eq), std::move(at));
            }
    // cycle sentences first: they are the natural witnesses over unary
    // signatures and what the worked examples quote
    std::vector<PositiveFormula> family;
    int max_cycle = std::max(budget.max_model_size, static_cast<int>(B.size()));
    for (auto& [f, ar] : A.sig.functions) {
        if (ar != 1) continue;
        for (int k = 1; k <= max_cycle; ++k)
            family.push_back(PositiveFormula::exists(
                {"y"}, PositiveFormula::make_atom(cycle_atom(f, k))));
    }
    FamilyOptions opt;
    opt.max_term_depth = budget.max_term_depth;
    opt.cycle_sentences_up_to = 0; // already prepended
    for (auto& f : formula_family(A.sig, opt)) family.push_back(f);
    for (auto& phi : family) {
        auto vars = sorted_free_vars(phi);
        if (vars.size() > 2) continue;
        std::vector<Elem> tuple(vars.size(), 0);
        while (true) {
            Assignment at;
            Assignment bt;
            for (std::size_t i = 0; i < vars.size(); ++i) {
                at[vars[i]] = A.universe[tuple[i]];
                bt[vars[i]] = B.universe[map[tuple[i]]];
            }
            if (!eval_positive(A, phi, at) && eval_positive(B, phi, bt))
                return std::make_pair(phi, at);
            if (vars.empty()) break;
            int i = static_cast<int>(vars.size()) - 1;
            while (i >= 0 && tuple[i] == A.size() - 1) {
                tuple[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tuple[i];
        }
    }
    return std::nullopt;
}

} // namespace detail

// ---------------------------------------------------------------------------
// pc / pac bounded checks

inline CheckReport closedness_check(const FinStructure& A, const Theory& T, CheckMode mode,
                                    const SearchBudget& budget) {
    budget.validate();
    if (!satisfies_theory(A, T))
        throw precondition_error(A.name + " is not a model of " + T.name);
    MorphismKind kind = mode == CheckMode::Pc ? MorphismKind::Hom : MorphismKind::Embedding;

    CheckReport report;
    report.mode = mode;
    report.subject = A.name;
    report.theory = T.name;
    report.verdict.bound_used = budget;

    ModelList ml = enumerate_models(T, budget.max_model_size, budget.max_nodes);
    bool truncated = ml.truncated;
    for (auto& B : ml.models) {
        std::vector<Elem> failing;
        bool complete = for_each_morphism(
            A, B, kind,
            [&](const std::vector<Elem>& map) {
                if (!detail::has_retraction(A, B, map, budget.max_nodes)) {
                    failing = map;
                    return false;
                }
                return true;
            },
            {}, budget.max_nodes);
        if (!complete) truncated = true;
        if (!failing.empty()) {
            report.verdict.outcome = Outcome::Fails;
            Witness w;
            w.structure = B;
            Morphism m;
            m.domain = A;
            m.codomain = B;
            m.map = failing;
            m.kind_claimed = kind;
            w.morphism = std::move(m);
            w.note = std::string(to_string(kind)) + " that is not an immersion";
            report.verdict.witness = std::move(w);
            report.distinguisher = detail::find_distinguisher(A, B, failing, budget);
            return report;
        }
    }
    if (truncated) {
        report.verdict.outcome = Outcome::Unknown;
        report.verdict.flags.push_back("budget_exhausted");
    } else {
        report.verdict.outcome = Outcome::Holds;
        report.verdict.flags.push_back("holds_up_to_bound");
    }
    return report;
}

inline CheckReport is_pc_bounded(const FinStructure& A, const Theory& T,
                                 const SearchBudget& budget) {
    return closedness_check(A, T, CheckMode::Pc, budget);
}

inline CheckReport is_pac_bounded(const FinStructure& A, const Theory& T,
                                  const SearchBudget& budget) {
    return closedness_check(A, T, CheckMode::Pac, budget);
}

// ---------------------------------------------------------------------------
// Certificates for the syntactic pac characterization: (psi, a, theta1,
// theta2, b) with  A |= theta1(a,b),  A |/= theta2(a,b)  and bounded
// T |- forall xy ((psi and theta1) -> theta2).

struct PacCertificate {
    PositiveFormula psi;
    Assignment a_tuple;               // over psi's free variables
    PositiveFormula theta1;           // conjunction of atoms over (xs, ys)
    PositiveFormula theta2;           // disjunction of atoms over (xs, ys)
    std::vector<std::string> y_vars;  // fresh variables valued by b_tuple
    std::vector<std::string> b_tuple; // element names of A
    BoundedVerdict entailment;
};

inline HInductiveSentence certificate_sentence(const PositiveFormula& psi,
                                               const PositiveFormula& theta1,
                                               const PositiveFormula& theta2,
                                               const std::vector<std::string>& y_vars) {
    HInductiveSentence s;
    s.univ_vars = sorted_free_vars(psi);
    for (auto& y : y_vars) s.univ_vars.push_back(y);
    s.antecedent = PositiveFormula::conj({psi, theta1});
    s.consequent = theta2;
    return s;
}

struct CertificateSearch {
    std::optional<PacCertificate> certificate;
    bool truncated = false;
    long long candidates_tried = 0;
    SearchBudget bound_used;
};

// Yields certificates in deterministic order: b length ascending, then theta1
// atom count, then theta2 atom count, combinations lexicographic over the
// atom pool. theta1 atoms come only from facts true at (a,b), theta2 atoms
// only from facts false there.
template <typename Yield>
inline bool search_certificates(const FinStructure& A, const Theory& T,
                                const PositiveFormula& psi, const Assignment& a_tuple,
                                const SearchBudget& budget, long long max_candidates,
                                long long& candidates_tried, Yield&& yield) {
    budget.validate();
    check_formula(psi, T.sig);
    if (!satisfies_theory(A, T))
        throw precondition_error(A.name + " is not a model of " + T.name);
    if (eval_positive(A, psi, a_tuple))
        throw precondition_error("psi already holds at the given tuple");

    std::vector<std::string> x_vars = sorted_free_vars(psi);
    std::set<std::string> avoid(x_vars.begin(), x_vars.end());

    for (int blen = 0; blen <= budget.max_formula_atoms; ++blen) {
        auto y_vars = detail::fresh_vars(static_cast<std::size_t>(blen), T.sig, avoid);
        std::vector<std::string> all_vars = x_vars;
        for (auto& y : y_vars) all_vars.push_back(y);
        // reflexive equalities are valid, hence useless on either side
        auto pool = atoms_over(T.sig, all_vars, budget.max_term_depth, false);

        std::vector<Elem> b(static_cast<std::size_t>(blen), 0);
        while (true) {
            Assignment full = a_tuple;
            for (int i = 0; i < blen; ++i) full[y_vars[i]] = A.universe[b[i]];

            std::vector<Atom> true_atoms, false_atoms;
            for (auto& at : pool) {
                PositiveFormula af = PositiveFormula::make_atom(at);
                (eval_positive(A, af, full) ? true_atoms : false_atoms).push_back(at);
            }

            // combination cursors: sizes ascending, lexicographic
            auto combos = [](const std::vector<Atom>& pool_atoms, int max_sz,
                             auto&& body) -> bool {
                int n = static_cast<int>(pool_atoms.size());
                for (int k = 0; k <= std::min(max_sz, n); ++k) {
                    std::vector<int> idx(static_cast<std::size_t>(k));
                    for (int i = 0; i < k; ++i) idx[i] = i;
                    while (true) {
                        std::vector<Atom> picked;
                        for (int i : idx) picked.push_back(pool_atoms[i]);
                        if (!body(std::move(picked))) return false;
                        int i = k - 1;
                        while (i >= 0 && idx[i] == n - k + i) --i;
                        if (i < 0) break;
                        ++idx[i];
                        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    }
                }
                return true;
            };

            bool keep_going = true;
            combos(true_atoms, budget.max_formula_atoms, [&](std::vector<Atom> t1atoms) {
                PositiveFormula theta1 = conj_of_atoms(std::move(t1atoms));
                return combos(false_atoms, budget.max_formula_atoms,
                              [&](std::vector<Atom> t2atoms) {
                    if (++candidates_tried > max_candidates) {
                        keep_going = false;
                        return false;
                    }
                    PositiveFormula theta2 = disj_of_atoms(std::move(t2atoms));
                    BoundedVerdict ent = entails_bounded(
                        T, certificate_sentence(psi, theta1, theta2, y_vars), budget);
                    if (!ent.holds()) return true;
                    PacCertificate cert;
                    cert.psi = psi;
                    cert.a_tuple = a_tuple;
                    cert.theta1 = theta1;
                    cert.theta2 = theta2;
                    cert.y_vars = y_vars;
                    for (int i = 0; i < blen; ++i) cert.b_tuple.push_back(A.universe[b[i]]);
                    cert.entailment = std::move(ent);
                    if (!yield(std::move(cert))) {
                        keep_going = false;
                        return false;
                    }
                    return true;
                });
            });
            if (!keep_going) return false;

            if (blen == 0) break;
            int i = blen - 1;
            while (i >= 0 && b[i] == A.size() - 1) {
                b[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++b[i];
        }
    }
    return true;
}

inline CertificateSearch find_certificate(const FinStructure& A, const Theory& T,
                                          const PositiveFormula& psi, const Assignment& a_tuple,
                                          const SearchBudget& budget,
                                          long long max_candidates = 500000) {
    CertificateSearch out;
    out.bound_used = budget;
    bool exhausted_space = search_certificates(
        A, T, psi, a_tuple, budget, max_candidates, out.candidates_tried,
        [&](PacCertificate&& c) {
            out.certificate = std::move(c);
            return false;
        });
    out.truncated = !out.certificate && !exhausted_space;
    return out;
}

struct CertificateCheck {
    bool ok = false;
    std::vector<std::string> reasons;
    BoundedVerdict entailment;
};

inline CertificateCheck verify_certificate(const PacCertificate& c, const FinStructure& A,
                                           const Theory& T, const SearchBudget& budget) {
    CertificateCheck out;
    Assignment full = c.a_tuple;
    if (c.y_vars.size() != c.b_tuple.size()) {
        out.reasons.push_back("b tuple does not match the y variables");
        return out;
    }
    for (std::size_t i = 0; i < c.y_vars.size(); ++i) full[c.y_vars[i]] = c.b_tuple[i];
    bool ok = true;
    try {
        if (eval_positive(A, c.psi, c.a_tuple)) {
            out.reasons.push_back("psi holds at a (expected refuted)");
            ok = false;
        }
        if (!eval_positive(A, c.theta1, full)) {
            out.reasons.push_back("theta1 fails at (a,b) (expected satisfied)");
            ok = false;
        }
        if (eval_positive(A, c.theta2, full)) {
            out.reasons.push_back("theta2 holds at (a,b) (expected refuted)");
            ok = false;
        }
        out.entailment =
            entails_bounded(T, certificate_sentence(c.psi, c.theta1, c.theta2, c.y_vars), budget);
        if (!out.entailment.holds()) {
            out.reasons.push_back(std::string("entailment verdict: ")
                                  + to_string(out.entailment.outcome));
            ok = false;
        }
    } catch (const std::exception& e) {
        out.reasons.push_back(std::string("evaluation error: ") + e.what());
        ok = false;
    }
    out.ok = ok;
    return out;
}

// ---------------------------------------------------------------------------
// Alc_T(psi) probing and the disjunction combination of pairs.

struct AlcPair {
    PositiveFormula psi;
    PositiveFormula theta1;
    PositiveFormula theta2;
    std::vector<std::string> y_vars;
};

struct AlcEntry {
    AlcPair pair;
    FinStructure structure; // the pac-verified source
    Assignment a_tuple;
    std::vector<std::string> b_tuple;
    BoundedVerdict entailment;
};

struct AlcResult {
    std::vector<AlcEntry> entries;
    bool truncated = false;
    SearchBudget bound_used;
};

inline std::string alc_pair_key(const AlcPair& p) {
    return to_string(p.theta1) + "\x1f" + to_string(p.theta2);
}

inline AlcResult alc_probe(const Theory& T, const PositiveFormula& psi,
                           const SearchBudget& budget, int per_site_limit = 64,
                           long long max_candidates_per_site = 200000) {
    budget.validate();
    check_formula(psi, T.sig);
    AlcResult out;
    out.bound_used = budget;
    std::set<std::string> seen;
    std::vector<std::string> x_vars = sorted_free_vars(psi);

    ModelList ml = enumerate_models(T, budget.max_model_size, budget.max_nodes);
    if (ml.truncated) out.truncated = true;
    for (auto& A : ml.models) {
        if (!is_pac_bounded(A, T, budget).verdict.holds()) continue;
        std::vector<Elem> tuple(x_vars.size(), 0);
        while (true) {
            Assignment a;
            for (std::size_t i = 0; i < x_vars.size(); ++i) a[x_vars[i]] = A.universe[tuple[i]];
            if (!eval_positive(A, psi, a)) {
                int harvested = 0;
                long long tried = 0;
                bool complete = search_certificates(
                    A, T, psi, a, budget, max_candidates_per_site, tried,
                    [&](PacCertificate&& c) {
                        AlcEntry e;
                        e.pair = {c.psi, c.theta1, c.theta2, c.y_vars};
                        e.structure = A;
                        e.a_tuple = c.a_tuple;
                        e.b_tuple = c.b_tuple;
                        e.entailment = c.entailment;
                        if (seen.insert(alc_pair_key(e.pair)).second)
                            out.entries.push_back(std::move(e));
                        return ++harvested < per_site_limit;
                    });
                if (!complete && harvested < per_site_limit) out.truncated = true;
            }
            if (x_vars.empty()) break;
            int i = static_cast<int>(x_vars.size()) - 1;
            while (i >= 0 && tuple[i] == A.size() - 1) {
                tuple[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tuple[i];
        }
    }
    return out;
}

// (a1 v b1, a2 v b2), with the right-hand witnesses renamed apart
inline AlcPair alc_disjunction_combine(const AlcPair& a, const AlcPair& b) {
    if (!(to_string(a.psi) == to_string(b.psi)))
        throw precondition_error("alc_disjunction_combine: pairs certify different formulas");
    AlcPair out;
    out.psi = a.psi;
    std::set<std::string> avoid(a.y_vars.begin(), a.y_vars.end());
    for (auto& v : sorted_free_vars(a.psi)) avoid.insert(v);
    std::map<std::string, std::string> ren;
    out.y_vars = a.y_vars;
    std::size_t counter = a.y_vars.size();
    for (auto& v : b.y_vars) {
        std::string fresh = "y" + std::to_string(++counter);
        while (avoid.count(fresh)) fresh += "_";
        avoid.insert(fresh);
        ren[v] = fresh;
        out.y_vars.push_back(fresh);
    }
    out.theta1 = PositiveFormula::disj({a.theta1, rename_vars(b.theta1, ren)});
    out.theta2 = PositiveFormula::disj({a.theta2, rename_vars(b.theta2, ren)});
    return out;
}

// Property (star) for a pair on a concrete site: psi refuted at a, some b
// makes theta1 true and theta2 false, and the entailment holds at the budget.
struct StarCheck {
    bool ok = false;
    std::vector<std::string> reasons;
    std::vector<std::string> b_witness;
    BoundedVerdict entailment;
};

inline StarCheck verify_star(const Theory& T, const AlcPair& p, const FinStructure& A,
                             const Assignment& a_tuple, const SearchBudget& budget) {
    StarCheck out;
    if (eval_positive(A, p.psi, a_tuple)) {
        out.reasons.push_back("psi holds at a (expected refuted)");
        return out;
    }
    out.entailment =
        entails_bounded(T, certificate_sentence(p.psi, p.theta1, p.theta2, p.y_vars), budget);
    if (!out.entailment.holds()) {
        out.reasons.push_back(std::string("entailment verdict: ")
                              + to_string(out.entailment.outcome));
        return out;
    }
    std::vector<Elem> b(p.y_vars.size(), 0);
    while (true) {
        Assignment full = a_tuple;
        for (std::size_t i = 0; i < p.y_vars.size(); ++i) full[p.y_vars[i]] = A.universe[b[i]];
        if (eval_positive(A, p.theta1, full) && !eval_positive(A, p.theta2, full)) {
            out.ok = true;
            for (std::size_t i = 0; i < p.y_vars.size(); ++i)
                out.b_witness.push_back(A.universe[b[i]]);
            return out;
        }
        if (p.y_vars.empty()) break;
        int i = static_cast<int>(p.y_vars.size()) - 1;
        while (i >= 0 && b[i] == A.size() - 1) {
            b[i] = 0;
            --i;
        }
        if (i < 0) break;
        ++b[i];
    }
    out.reasons.push_back("no witness tuple b makes theta1 true and theta2 false");
    return out;
}

// ---------------------------------------------------------------------------
// T_h: per verified binding, the entailment axiom (h-inductive) and the
// companion axiom forall x (psi or exists y (theta1 and not theta2)).

inline Theory build_th_axioms(const Theory& T, const std::vector<AlcEntry>& bindings,
                              const SearchBudget& budget) {
    Theory out = T;
    out.name = T.name + "_h";
    int i = 0;
    for (auto& b : bindings) {
        ++i;
        Assignment a = b.a_tuple;
        StarCheck check = verify_star(T, b.pair, b.structure, a, budget);
        if (!check.ok)
            throw precondition_error("build_th_axioms: binding " + std::to_string(i)
                                     + " does not verify: "
                                     + (check.reasons.empty() ? "?" : check.reasons[0]));
        HInductiveSentence ent =
            certificate_sentence(b.pair.psi, b.pair.theta1, b.pair.theta2, b.pair.y_vars);
        out.axioms.emplace_back("th_ent_" + std::to_string(i), std::move(ent));
        CompanionAxiom comp;
        comp.univ_vars = sorted_free_vars(b.pair.psi);
        comp.psi = b.pair.psi;
        comp.exist_vars = b.pair.y_vars;
        comp.theta1 = b.pair.theta1;
        comp.theta2 = b.pair.theta2;
        out.companion_axioms.emplace_back("th_comp_" + std::to_string(i), std::move(comp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Greedy bounded saturation: repeatedly jump to a bounded extension model
// that gains a family formula, until nothing gains or the step budget runs
// out. The result is not guaranteed pac; the report carries the verdict it
// reaches.

struct SaturationStep {
    PositiveFormula formula;
    Assignment at;            // parameters in the pre-step structure
    Morphism embedding;       // pre-step structure into the chosen extension
};

struct SaturationResult {
    FinStructure final_structure;
    std::vector<SaturationStep> steps;
    CheckReport final_check;
    bool step_budget_exhausted = false;
};

inline SaturationResult pac_saturate(const FinStructure& A, const Theory& T,
                                     const SearchBudget& budget, int max_steps = 32) {
    budget.validate();
    if (!satisfies_theory(A, T))
        throw precondition_error(A.name + " is not a model of " + T.name);
    SaturationResult out;
    FinStructure current = A;

    FamilyOptions opt;
    opt.max_term_depth = budget.max_term_depth;
    opt.cycle_sentences_up_to = budget.max_model_size;
    auto family = formula_family(T.sig, opt);

    ModelList ml = enumerate_models(T, budget.max_model_size, budget.max_nodes);

    for (int step = 0; step < max_steps; ++step) {
        bool advanced = false;
        for (auto& phi : family) {
            auto vars = sorted_free_vars(phi);
            if (vars.size() > 1 && current.size() > 6) continue; // parameter sweep guard
            std::vector<Elem> tuple(vars.size(), 0);
            while (!advanced) {
                Assignment at;
                for (std::size_t i = 0; i < vars.size(); ++i)
                    at[vars[i]] = current.universe[tuple[i]];
                if (!eval_positive(current, phi, at)) {
                    // bounded extension models gaining phi at the mapped tuple
                    HInductiveSentence closed = negated_existential(phi);
                    for (auto& B : ml.models) {
                        if (B.size() < current.size()) continue;
                        if (satisfies(B, closed)) continue; // B cannot gain phi anywhere
                        std::vector<Elem> found;
                        for_each_morphism(current, B, MorphismKind::Embedding,
                                          [&](const std::vector<Elem>& map) {
                                              Assignment bt;
                                              for (std::size_t i = 0; i < vars.size(); ++i)
                                                  bt[vars[i]] =
                                                      B.universe[map[tuple[i]]];
                                              if (eval_positive(B, phi, bt)) {
                                                  found = map;
                                                  return false;
                                              }
                                              return true;
                                          },
                                          {}, budget.max_nodes);
                        if (!found.empty()) {
                            SaturationStep s;
                            s.formula = phi;
                            s.at = at;
                            Morphism e;
                            e.domain = current;
                            e.codomain = B;
                            e.map = found;
                            e.kind_claimed = MorphismKind::Embedding;
                            s.embedding = std::move(e);
                            out.steps.push_back(std::move(s));
                            current = B;
                            advanced = true;
                            break;
                        }
                    }
                }
                if (advanced || vars.empty()) break;
                int i = static_cast<int>(vars.size()) - 1;
                while (i >= 0 && tuple[i] == current.size() - 1) {
                    tuple[i] = 0;
                    --i;
                }
                if (i < 0) break;
                ++tuple[i];
            }
            if (advanced) break;
        }
        if (!advanced) {
            out.final_structure = current;
            out.final_check = is_pac_bounded(current, T, budget);
            return out;
        }
    }
    out.step_budget_exhausted = true;
    out.final_structure = current;
    out.final_check = is_pac_bounded(current, T, budget);
    return out;
}

// ---------------------------------------------------------------------------
// e-elementary extension check: B is a pac model of T_A. T_A is never
// materialized; stage 1 decides "B |= T_A" through the immersion criterion on
// m, stage 2 quantifies over bounded structures D equipped with an immersion
// A -> D (the lazy models of T_A) and embeddings B -> D over A.

inline CheckReport is_e_elementary_bounded(const FinStructure& A, const FinStructure& B,
                                           const Morphism& m, const SearchBudget& budget) {
    budget.validate();
    if (!check_kind(m, MorphismKind::Embedding))
        throw precondition_error("is_e_elementary_bounded: the map is not an embedding");

    CheckReport report;
    report.mode = CheckMode::EElementary;
    report.subject = A.name + " into " + B.name;
    report.theory = "T_" + A.name;
    report.verdict.bound_used = budget;

    if (!check_kind(m, MorphismKind::Immersion)) {
        report.verdict.outcome = Outcome::Fails;
        Witness w;
        w.morphism = m;
        w.note = "stage 1: the map is not an immersion, so B does not model T_A";
        report.verdict.witness = std::move(w);
        report.distinguisher = detail::find_distinguisher(A, B, m.map, budget);
        return report;
    }

    Theory empty;
    empty.name = "L_" + A.sig.name;
    empty.sig = A.sig;
    ModelList ml = enumerate_models(empty, budget.max_model_size, budget.max_nodes);
    bool truncated = ml.truncated;

    for (auto& D : ml.models) {
        // immersions i : A -> D, i.e. D ranges over the bounded models of T_A
        std::vector<std::vector<Elem>> immersions;
        bool c1 = for_each_morphism(A, D, MorphismKind::Immersion,
                                    [&](const std::vector<Elem>& i_map) {
                                        immersions.push_back(i_map);
                                        return true;
                                    },
                                    {}, budget.max_nodes);
        if (!c1) truncated = true;
        for (auto& i_map : immersions) {
            std::map<Elem, Elem> pin;
            bool consistent = true;
            for (std::size_t a = 0; a < A.size(); ++a) {
                auto [it, fresh] = pin.emplace(m.map[a], i_map[a]);
                if (!fresh && it->second != i_map[a]) consistent = false;
            }
            if (!consistent) continue;
            std::vector<Elem> bad;
            bool c2 = for_each_morphism(B, D, MorphismKind::Embedding,
                                        [&](const std::vector<Elem>& e_map) {
                                            if (!detail::has_retraction(B, D, e_map,
                                                                        budget.max_nodes)) {
                                                bad = e_map;
                                                return false;
                                            }
                                            return true;
                                        },
                                        pin, budget.max_nodes);
            if (!c2) truncated = true;
            if (!bad.empty()) {
                report.verdict.outcome = Outcome::Fails;
                Witness w;
                w.structure = D;
                Morphism e;
                e.domain = B;
                e.codomain = D;
                e.map = bad;
                e.kind_claimed = MorphismKind::Embedding;
                w.morphism = std::move(e);
                w.note = "stage 2: an embedding of B over A into a model of T_A is not an "
                         "immersion";
                report.verdict.witness = std::move(w);
                report.distinguisher = detail::find_distinguisher(B, D, bad, budget);
                return report;
            }
        }
    }
    if (truncated) {
        report.verdict.outcome = Outcome::Unknown;
        report.verdict.flags.push_back("budget_exhausted");
    } else {
        report.verdict.outcome = Outcome::Holds;
        report.verdict.flags.push_back("holds_up_to_bound");
    }
    return report;
}

} // namespace poslog
