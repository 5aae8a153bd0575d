#pragma once

// Homomorphisms, embeddings and immersions between finite structures.
//
// Immersion is decided exactly through the retraction criterion: a
// homomorphism m : A -> B is an immersion iff some homomorphism j : B -> A
// satisfies j o m = id_A. The depth-unbounded definitional reading (same
// positive formulas at a-bar and m(a-bar)) is kept available as a second,
// independent route through the positive diagram formula, used for
// cross-validation.

#include "poslog/structures.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poslog {

enum class MorphismKind : std::uint8_t { Hom, Embedding, Immersion, Unchecked };

inline const char* to_string(MorphismKind k) {
    switch (k) {
    case MorphismKind::Hom: return "hom";
    case MorphismKind::Embedding: return "embedding";
    case MorphismKind::Immersion: return "immersion";
    default: return "unchecked";
    }
}

struct Morphism {
    FinStructure domain;
    FinStructure codomain;
    std::vector<Elem> map; // domain index -> codomain index
    MorphismKind kind_claimed = MorphismKind::Unchecked;

    void validate() const {
        if (!(domain.sig == codomain.sig)) throw sort_error("morphism: signature mismatch");
        if (map.size() != domain.size()) throw sort_error("morphism: map is not total");
        for (Elem v : map)
            if (v >= codomain.size()) throw sort_error("morphism: value outside codomain");
    }
};

inline Morphism identity_morphism(const FinStructure& A) {
    Morphism m;
    m.domain = A;
    m.codomain = A;
    for (std::size_t i = 0; i < A.size(); ++i) m.map.push_back(static_cast<Elem>(i));
    m.kind_claimed = MorphismKind::Immersion;
    return m;
}

// Inclusion by element names: every element of A must occur in U.
inline Morphism inclusion_morphism(const FinStructure& A, const FinStructure& U) {
    Morphism m;
    m.domain = A;
    m.codomain = U;
    for (auto& e : A.universe) {
        int i = U.element_index(e);
        if (i < 0) throw sort_error("inclusion: element '" + e + "' missing in " + U.name);
        m.map.push_back(static_cast<Elem>(i));
    }
    return m;
}

inline Morphism compose(const Morphism& first, const Morphism& then) {
    if (first.codomain.size() != then.domain.size() || !(first.codomain.sig == then.domain.sig))
        throw sort_error("compose: middle structures disagree");
    Morphism m;
    m.domain = first.domain;
    m.codomain = then.codomain;
    for (Elem v : first.map) m.map.push_back(then.map[v]);
    return m;
}

// `--map "a0=b1,a1=b0"`
inline Morphism parse_map_literal(const FinStructure& A, const FinStructure& B,
                                  const std::string& text) {
    Morphism m;
    m.domain = A;
    m.codomain = B;
    m.map.assign(A.size(), 0);
    std::vector<char> seen(A.size(), 0);
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t eq = text.find('=', i);
        if (eq == std::string::npos) throw sort_error("map literal: expected name=name pairs");
        std::size_t end = text.find(',', eq);
        if (end == std::string::npos) end = text.size();
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
                s.erase(s.begin());
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            return s;
        };
        std::string from = trim(text.substr(i, eq - i));
        std::string to = trim(text.substr(eq + 1, end - eq - 1));
        int a = A.element_index(from);
        int b = B.element_index(to);
        if (a < 0) throw sort_error("map literal: '" + from + "' not in " + A.name);
        if (b < 0) throw sort_error("map literal: '" + to + "' not in " + B.name);
        if (seen[a]) throw sort_error("map literal: '" + from + "' mapped twice");
        seen[a] = 1;
        m.map[a] = static_cast<Elem>(b);
        i = end + (end < text.size() ? 1 : 0);
    }
    for (std::size_t a = 0; a < A.size(); ++a)
        if (!seen[a]) throw sort_error("map literal: element '" + A.universe[a] + "' unmapped");
    return m;
}

namespace detail {

// atomic preservation: every atomic fact of A (function graphs, constants,
// relation tuples) carries over along map
inline bool preserves_atomic(const FinStructure& A, const FinStructure& B,
                             const std::vector<Elem>& map) {
    for (std::size_t f = 0; f < A.funcs.size(); ++f) {
        int ar = A.sig.functions[f].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        std::vector<Elem> img(static_cast<std::size_t>(ar), 0);
        while (true) {
            for (int i = 0; i < ar; ++i) img[i] = map[tup[i]];
            if (map[A.apply(static_cast<int>(f), tup)]
                != B.apply(static_cast<int>(f), img)) return false;
            int i = ar - 1;
            while (i >= 0 && tup[i] == A.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        std::vector<Elem> img(static_cast<std::size_t>(ar), 0);
        while (true) {
            if (A.holds(static_cast<int>(r), tup)) {
                for (int i = 0; i < ar; ++i) img[i] = map[tup[i]];
                if (!B.holds(static_cast<int>(r), img)) return false;
            }
            int i = ar - 1;
            while (i >= 0 && tup[i] == A.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (std::size_t c = 0; c < A.consts.size(); ++c)
        if (map[A.consts[c]] != B.consts[c]) return false;
    return true;
}

inline bool injective(const std::vector<Elem>& map, std::size_t codomain_size) {
    std::vector<char> used(codomain_size, 0);
    for (Elem v : map) {
        if (used[v]) return false;
        used[v] = 1;
    }
    return true;
}

// atomic reflection on top of preservation: relation facts over the image pull
// back, equalities pull back by injectivity
inline bool reflects_atomic(const FinStructure& A, const FinStructure& B,
                            const std::vector<Elem>& map) {
    if (!injective(map, B.size())) return false;
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        std::vector<Elem> img(static_cast<std::size_t>(ar), 0);
        while (true) {
            for (int i = 0; i < ar; ++i) img[i] = map[tup[i]];
            if (B.holds(static_cast<int>(r), img) && !A.holds(static_cast<int>(r), tup))
                return false;
            int i = ar - 1;
            while (i >= 0 && tup[i] == A.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    return true;
}

inline bool has_retraction(const FinStructure& A, const FinStructure& B,
                           const std::vector<Elem>& map, long long max_nodes = 50'000'000LL);

// Backtracking homomorphism search with forward propagation over function
// constraints; most-constrained variable first, values in universe order.
class MorphismSearch {
public:
    MorphismSearch(const FinStructure& A, const FinStructure& B, MorphismKind kind,
                   const std::map<Elem, Elem>& pin, long long max_nodes)
        : A_(A), B_(B), kind_(kind), max_nodes_(max_nodes) {
        n_ = A.size();
        full_ = (B.size() >= 32) ? 0xffffffffu : ((1u << B.size()) - 1);
        domains_.assign(n_, full_);
        assigned_.assign(n_, false);
        map_.assign(n_, 0);
        ok_ = true;
        for (auto& [a, b] : pin)
            if (!assign(a, b)) ok_ = false;
        if (ok_)
            for (std::size_t c = 0; c < A.sig.constants.size(); ++c)
                if (!assign(A.consts[c], B.consts[c])) ok_ = false;
    }

    bool truncated() const { return truncated_; }
    long long nodes() const { return nodes_; }

    // invokes yield for every morphism of the requested kind; yield returns
    // false to stop the search
    template <typename Yield>
    void run(Yield&& yield) {
        if (!ok_) return;
        search(yield);
    }

private:
    const FinStructure& A_;
    const FinStructure& B_;
    MorphismKind kind_;
    std::size_t n_;
    std::uint32_t full_;
    std::vector<std::uint32_t> domains_;
    std::vector<char> assigned_;
    std::vector<Elem> map_;
    bool ok_ = true, truncated_ = false, stop_ = false;
    long long nodes_ = 0, max_nodes_;

    struct Undo {
        std::vector<std::pair<std::size_t, std::uint32_t>> doms;
        std::vector<std::size_t> assigns;
    };

    bool require_injective() const {
        return kind_ == MorphismKind::Embedding || kind_ == MorphismKind::Immersion;
    }

    bool assign(Elem a, Elem b, Undo* undo = nullptr) {
        if (assigned_[a]) return map_[a] == b;
        if (!(domains_[a] & (1u << b))) return false;
        assigned_[a] = true;
        map_[a] = b;
        if (undo) undo->assigns.push_back(a);
        if (require_injective()) {
            std::uint32_t bit = ~(1u << b);
            for (std::size_t v = 0; v < n_; ++v) {
                if (assigned_[v]) {
                    if (v != a && map_[v] == b) return false;
                    continue;
                }
                std::uint32_t nd = domains_[v] & bit;
                if (nd != domains_[v]) {
                    if (undo) undo->doms.emplace_back(v, domains_[v]);
                    domains_[v] = nd;
                    if (nd == 0) return false;
                }
            }
        }
        // function propagation: tuples that become fully assigned force values
        for (std::size_t f = 0; f < A_.funcs.size(); ++f) {
            int ar = A_.sig.functions[f].second;
            std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
            std::vector<Elem> img(static_cast<std::size_t>(ar), 0);
            while (true) {
                bool touches = false, all = true;
                for (int i = 0; i < ar; ++i) {
                    if (tup[i] == a) touches = true;
                    if (!assigned_[tup[i]]) all = false;
                }
                if (touches && all) {
                    for (int i = 0; i < ar; ++i) img[i] = map_[tup[i]];
                    Elem target = A_.apply(static_cast<int>(f), tup);
                    Elem forced = B_.apply(static_cast<int>(f), img);
                    if (!assign(target, forced, undo)) return false;
                }
                int i = ar - 1;
                while (i >= 0 && tup[i] == n_ - 1) {
                    tup[i] = 0;
                    --i;
                }
                if (i < 0) break;
                ++tup[i];
            }
        }
        return true;
    }

    void undo(const Undo& u) {
        for (auto it = u.assigns.rbegin(); it != u.assigns.rend(); ++it) assigned_[*it] = false;
        for (auto it = u.doms.rbegin(); it != u.doms.rend(); ++it) domains_[it->first] = it->second;
    }

    bool leaf_accepts() const {
        if (!preserves_atomic(A_, B_, map_)) return false;
        if (kind_ == MorphismKind::Hom || kind_ == MorphismKind::Unchecked) return true;
        if (!reflects_atomic(A_, B_, map_)) return false;
        if (kind_ == MorphismKind::Embedding) return true;
        return has_retraction(A_, B_, map_, max_nodes_);
    }

    template <typename Yield>
    void search(Yield& yield) {
        if (stop_ || truncated_) return;
        if (++nodes_ > max_nodes_) {
            truncated_ = true;
            return;
        }
        int var = -1;
        int best = 33;
        for (std::size_t v = 0; v < n_; ++v) {
            if (assigned_[v]) continue;
            int pc = __builtin_popcount(domains_[v]);
            if (pc < best) {
                best = pc;
                var = static_cast<int>(v);
            }
        }
        if (var < 0) {
            if (leaf_accepts())
                if (!yield(map_)) stop_ = true;
            return;
        }
        for (std::size_t b = 0; b < B_.size(); ++b) {
            if (!(domains_[var] & (1u << b))) continue;
            Undo u;
            if (assign(static_cast<Elem>(var), static_cast<Elem>(b), &u)) search(yield);
            undo(u);
            if (stop_ || truncated_) return;
        }
    }
};

// retraction j : B -> A with j o m = id_A, decided by a pinned hom search
inline bool has_retraction(const FinStructure& A, const FinStructure& B,
                           const std::vector<Elem>& map, long long max_nodes) {
    std::map<Elem, Elem> pin;
    for (std::size_t a = 0; a < A.size(); ++a) {
        auto [it, fresh] = pin.emplace(map[a], static_cast<Elem>(a));
        if (!fresh && it->second != static_cast<Elem>(a)) return false; // map not injective
    }
    MorphismSearch search(B, A, MorphismKind::Hom, pin, max_nodes);
    bool found = false;
    search.run([&](const std::vector<Elem>&) {
        found = true;
        return false;
    });
    return found;
}

} // namespace detail

// ---------------------------------------------------------------------------
// check_kind: hom = atomic preservation; embedding = preservation +
// reflection; immersion = hom with a retraction (exact for finite total
// structures).

inline bool check_kind(const Morphism& m, MorphismKind kind) {
    m.validate();
    switch (kind) {
    case MorphismKind::Unchecked: return true;
    case MorphismKind::Hom: return detail::preserves_atomic(m.domain, m.codomain, m.map);
    case MorphismKind::Embedding:
        return detail::preserves_atomic(m.domain, m.codomain, m.map)
            && detail::reflects_atomic(m.domain, m.codomain, m.map);
    case MorphismKind::Immersion:
        return detail::preserves_atomic(m.domain, m.codomain, m.map)
            && detail::has_retraction(m.domain, m.codomain, m.map);
    }
    return false;
}

// stamps the kind after a successful check
inline Morphism claim(Morphism m, MorphismKind kind) {
    if (!check_kind(m, kind))
        throw sort_error("morphism does not pass the " + std::string(to_string(kind))
                         + " check");
    m.kind_claimed = kind;
    return m;
}

struct MorphismStream {
    std::vector<Morphism> found;
    bool truncated = false; // limit reached or node budget exhausted
    long long nodes = 0;
};

// callback core: yields raw maps of the requested kind, deterministically
template <typename Yield>
inline bool for_each_morphism(const FinStructure& A, const FinStructure& B, MorphismKind kind,
                              Yield&& yield, const std::map<Elem, Elem>& pin = {},
                              long long max_nodes = 50'000'000LL) {
    if (!(A.sig == B.sig)) throw sort_error("find_morphisms: signature mismatch");
    detail::MorphismSearch search(A, B, kind, pin, max_nodes);
    search.run(yield);
    return !search.truncated();
}

inline MorphismStream find_morphisms(const FinStructure& A, const FinStructure& B,
                                     MorphismKind kind, long long limit = -1,
                                     const std::map<Elem, Elem>& pin = {},
                                     long long max_nodes = 50'000'000LL) {
    if (limit == 0) throw sort_error("find_morphisms: limit must be >= 1 or unlimited (-1)");
    MorphismStream out;
    bool complete = for_each_morphism(
        A, B, kind,
        [&](const std::vector<Elem>& map) {
            Morphism m;
            m.domain = A;
            m.codomain = B;
            m.map = map;
            m.kind_claimed = kind;
            out.found.push_back(std::move(m));
            if (limit > 0 && static_cast<long long>(out.found.size()) >= limit) {
                out.truncated = true;
                return false;
            }
            return true;
        },
        pin, max_nodes);
    if (!complete) out.truncated = true;
    return out;
}

// ---------------------------------------------------------------------------
// Independent immersion oracle: the existentially quantified positive diagram
// formula of B, with free variables at the image positions, evaluated in A by
// the generic formula evaluator. Used to cross-validate the retraction route.

inline PositiveFormula diagram_formula(const FinStructure& B,
                                       std::vector<std::string>& var_names) {
    var_names.clear();
    for (std::size_t i = 0; i < B.size(); ++i) var_names.push_back("v" + std::to_string(i));
    std::vector<PositiveFormula> atoms;
    for (std::size_t f = 0; f < B.funcs.size(); ++f) {
        int ar = B.sig.functions[f].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Term> args;
            for (int i = 0; i < ar; ++i) args.push_back(Term::var(var_names[tup[i]]));
            Elem v = B.apply(static_cast<int>(f), tup);
            atoms.push_back(PositiveFormula::make_atom(
                Atom::equality(Term::app(B.sig.functions[f].first, std::move(args)),
                               Term::var(var_names[v]))));
            int i = ar - 1;
            while (i >= 0 && tup[i] == B.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (std::size_t r = 0; r < B.rels.size(); ++r) {
        int ar = B.sig.relations[r].second;
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            if (B.holds(static_cast<int>(r), tup)) {
                std::vector<Term> args;
                for (int i = 0; i < ar; ++i) args.push_back(Term::var(var_names[tup[i]]));
                atoms.push_back(PositiveFormula::make_atom(
                    Atom::relation(B.sig.relations[r].first, std::move(args))));
            }
            int i = ar - 1;
            while (i >= 0 && tup[i] == B.size() - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (std::size_t c = 0; c < B.consts.size(); ++c)
        atoms.push_back(PositiveFormula::make_atom(
            Atom::equality(Term::cst(B.sig.constants[c]), Term::var(var_names[B.consts[c]]))));
    return PositiveFormula::conj(std::move(atoms));
}

inline bool immersion_by_diagram_formula(const Morphism& m) {
    m.validate();
    if (!detail::preserves_atomic(m.domain, m.codomain, m.map)) return false;
    if (!detail::injective(m.map, m.codomain.size())) return false;
    std::vector<std::string> vars;
    PositiveFormula delta = diagram_formula(m.codomain, vars);
    std::vector<char> in_image(m.codomain.size(), 0);
    Assignment sigma;
    for (std::size_t a = 0; a < m.domain.size(); ++a) {
        in_image[m.map[a]] = 1;
        sigma[vars[m.map[a]]] = m.domain.universe[a];
    }
    std::vector<std::string> bound;
    for (std::size_t b = 0; b < m.codomain.size(); ++b)
        if (!in_image[b]) bound.push_back(vars[b]);
    PositiveFormula phi = bound.empty()
                              ? std::move(delta)
                              : PositiveFormula::exists(std::move(bound), std::move(delta));
    // evaluate in the domain: the diagram formula mentions only shared
    // signature symbols, so it is well-sorted over A as well
    return eval_positive(m.domain, phi, sigma);
}

} // namespace poslog
