#pragma once

// Canonical forms for isomorphism pruning.
//
// Structures over a single unary function are functional digraphs; those get
// a complete linear-time code (cycles of AHU-encoded rooted trees), which is
// what makes enumeration feasible at universe size 9. Everything else falls
// back to the lexicographically minimal encoding over all universe orderings,
// which is fine for the small mixed-signature universes the workbench uses.

#include "poslog/structures.hpp"

#include <array>
#include <string>

namespace poslog {

inline bool single_unary_signature(const Signature& s) {
    return s.relations.empty() && s.constants.empty() && s.functions.size() == 1
        && s.functions[0].second == 1;
}

namespace detail {

struct FDigraphDecomp {
    int n = 0;
    std::array<bool, kMaxUniverse> cyclic{};
    std::array<int, kMaxUniverse> kid_head{};  // first tree child, -1 none
    std::array<int, kMaxUniverse> kid_next{};  // sibling link
    std::array<std::string, kMaxUniverse> tree_code{};
    // one entry per component: roots in f-order starting at the canonical rotation
    std::vector<std::vector<int>> components;
    std::vector<std::string> component_codes;
};

inline void fdigraph_decompose(const Elem* f, int n, FDigraphDecomp& d) {
    d.n = n;
    d.components.clear();
    d.component_codes.clear();
    std::array<signed char, kMaxUniverse> color{}; // 0 white 1 gray 2 black
    color.fill(0);
    d.cyclic.fill(false);
    d.kid_head.fill(-1);
    std::array<int, kMaxUniverse> path{};
    for (int s = 0; s < n; ++s) {
        if (color[s] != 0) continue;
        int len = 0, v = s;
        while (color[v] == 0) {
            color[v] = 1;
            path[len++] = v;
            v = f[v];
        }
        if (color[v] == 1) {
            // ran into the current path: everything from v onward is a cycle
            int i = len - 1;
            while (path[i] != v) --i;
            for (int j = i; j < len; ++j) d.cyclic[path[j]] = true;
        }
        for (int j = 0; j < len; ++j) color[path[j]] = 2;
    }
    for (int v = 0; v < n; ++v) {
        if (d.cyclic[v]) continue;
        int p = f[v];
        d.kid_next[v] = d.kid_head[p];
        d.kid_head[p] = v;
    }

    // AHU codes for the hanging trees (children sorted by code)
    std::array<signed char, kMaxUniverse> done{};
    done.fill(0);
    // compute bottom-up: repeat until all coded (n <= 31, so a simple loop is fine)
    auto compute = [&](auto&& self, int v) -> const std::string& {
        if (done[v]) return d.tree_code[v];
        std::vector<const std::string*> kids;
        for (int c = d.kid_head[v]; c >= 0; c = d.kid_next[c]) kids.push_back(&self(self, c));
        std::sort(kids.begin(), kids.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        std::string code = "(";
        for (auto* k : kids) code += *k;
        code += ")";
        d.tree_code[v] = std::move(code);
        done[v] = 1;
        return d.tree_code[v];
    };
    for (int v = 0; v < n; ++v)
        if (d.cyclic[v]) compute(compute, v);

    // components: canonical rotation of the cycle's tree-code sequence
    std::array<bool, kMaxUniverse> in_comp{};
    in_comp.fill(false);
    for (int s = 0; s < n; ++s) {
        if (!d.cyclic[s] || in_comp[s]) continue;
        std::vector<int> cyc;
        int v = s;
        do {
            in_comp[v] = true;
            cyc.push_back(v);
            v = f[v];
        } while (v != s);
        int k = static_cast<int>(cyc.size());
        int best = 0;
        for (int r = 1; r < k; ++r) {
            for (int i = 0; i < k; ++i) {
                const std::string& a = d.tree_code[cyc[(r + i) % k]];
                const std::string& b = d.tree_code[cyc[(best + i) % k]];
                if (a != b) {
                    if (a < b) best = r;
                    break;
                }
            }
        }
        std::vector<int> rot;
        std::string code = "[";
        for (int i = 0; i < k; ++i) {
            int u = cyc[(best + i) % k];
            rot.push_back(u);
            code += d.tree_code[u];
            code += ';';
        }
        code += "]";
        d.components.push_back(std::move(rot));
        d.component_codes.push_back(std::move(code));
    }

    // sort components by code (stable pairing of codes and root lists)
    std::vector<std::size_t> order(d.components.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (d.component_codes[a] != d.component_codes[b])
            return d.component_codes[a] < d.component_codes[b];
        return a < b;
    });
    std::vector<std::vector<int>> comps;
    std::vector<std::string> codes;
    for (auto i : order) {
        comps.push_back(std::move(d.components[i]));
        codes.push_back(std::move(d.component_codes[i]));
    }
    d.components = std::move(comps);
    d.component_codes = std::move(codes);
}

inline std::string fdigraph_code(const Elem* f, int n) {
    FDigraphDecomp d;
    fdigraph_decompose(f, n, d);
    std::string out;
    out.reserve(2 * n + 4);
    out.push_back(static_cast<char>('0' + n));
    for (auto& c : d.component_codes) out += c;
    return out;
}

// canonical relabelled table: components in code order, each cycle laid out in
// f-order from its canonical rotation, trees DFS'd with children in code order
inline std::vector<Elem> fdigraph_canonical_table(const Elem* f, int n) {
    FDigraphDecomp d;
    fdigraph_decompose(f, n, d);
    std::array<int, kMaxUniverse> relabel{};
    int next = 0;
    auto dfs = [&](auto&& self, int v) -> void {
        std::vector<int> kids;
        for (int c = d.kid_head[v]; c >= 0; c = d.kid_next[c]) kids.push_back(c);
        std::sort(kids.begin(), kids.end(),
                  [&](int a, int b) { return d.tree_code[a] < d.tree_code[b]; });
        for (int c : kids) {
            relabel[c] = next++;
            self(self, c);
        }
    };
    for (auto& comp : d.components) {
        for (int v : comp) relabel[v] = next++;
        for (int v : comp) dfs(dfs, v);
    }
    std::vector<Elem> table(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) table[relabel[v]] = static_cast<Elem>(relabel[f[v]]);
    return table;
}

// Generic path: encoding of A under one universe ordering. perm[i] = old index
// shown at new position i.
inline std::string encode_under(const FinStructure& A, const std::vector<Elem>& perm) {
    std::size_t n = A.size();
    std::vector<Elem> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = static_cast<Elem>(i);
    std::string out;
    out.push_back(static_cast<char>('0' + n));
    std::vector<Elem> tup;
    for (std::size_t f = 0; f < A.funcs.size(); ++f) {
        int ar = A.sig.functions[f].second;
        tup.assign(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Elem> old(tup.size());
            for (std::size_t i = 0; i < tup.size(); ++i) old[i] = perm[tup[i]];
            out.push_back(static_cast<char>('a' + inv[A.apply(static_cast<int>(f), old)]));
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        tup.assign(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Elem> old(tup.size());
            for (std::size_t i = 0; i < tup.size(); ++i) old[i] = perm[tup[i]];
            out.push_back(A.holds(static_cast<int>(r), old) ? '1' : '0');
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
    }
    for (Elem c : A.consts) out.push_back(static_cast<char>('a' + inv[c]));
    return out;
}

} // namespace detail

inline std::string canonical_key(const FinStructure& A) {
    if (single_unary_signature(A.sig)) {
        return detail::fdigraph_code(A.funcs[0].data(), static_cast<int>(A.size()));
    }
    std::size_t n = A.size();
    if (n > 8) throw sort_error("canonical_key: universe too large for generic canonicalization");
    std::vector<Elem> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Elem>(i);
    std::string best = detail::encode_under(A, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        std::string cand = detail::encode_under(A, perm);
        if (cand < best) best = std::move(cand);
    }
    return best;
}

// Deterministic representative of A's isomorphism class, with standard
// element names a0, a1, ...
inline FinStructure canonical_form(const FinStructure& A, const std::string& name) {
    std::size_t n = A.size();
    FinStructure R;
    R.sig = A.sig;
    R.name = name;
    for (std::size_t i = 0; i < n; ++i) R.universe.push_back("a" + std::to_string(i));

    if (single_unary_signature(A.sig)) {
        R.funcs.push_back(detail::fdigraph_canonical_table(A.funcs[0].data(),
                                                           static_cast<int>(n)));
        return R;
    }

    if (n > 8) throw sort_error("canonical_form: universe too large for generic canonicalization");
    std::vector<Elem> perm(n), best_perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Elem>(i);
    best_perm = perm;
    std::string best = detail::encode_under(A, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        std::string cand = detail::encode_under(A, perm);
        if (cand < best) {
            best = std::move(cand);
            best_perm = perm;
        }
    }
    std::vector<Elem> inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[best_perm[i]] = static_cast<Elem>(i);

    for (std::size_t f = 0; f < A.funcs.size(); ++f) {
        int ar = A.sig.functions[f].second;
        std::vector<Elem> table(pow_size(n, ar));
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Elem> old(tup.size());
            for (std::size_t i = 0; i < tup.size(); ++i) old[i] = best_perm[tup[i]];
            table[R.flat_index(tup)] = inv[A.apply(static_cast<int>(f), old)];
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
        R.funcs.push_back(std::move(table));
    }
    for (std::size_t r = 0; r < A.rels.size(); ++r) {
        int ar = A.sig.relations[r].second;
        std::vector<char> table(pow_size(n, ar), 0);
        std::vector<Elem> tup(static_cast<std::size_t>(ar), 0);
        while (true) {
            std::vector<Elem> old(tup.size());
            for (std::size_t i = 0; i < tup.size(); ++i) old[i] = best_perm[tup[i]];
            table[R.flat_index(tup)] = A.holds(static_cast<int>(r), old) ? 1 : 0;
            int i = ar - 1;
            while (i >= 0 && tup[i] == n - 1) {
                tup[i] = 0;
                --i;
            }
            if (i < 0) break;
            ++tup[i];
        }
        R.rels.push_back(std::move(table));
    }
    for (Elem c : A.consts) R.consts.push_back(inv[c]);
    return R;
}

inline bool isomorphic(const FinStructure& A, const FinStructure& B) {
    if (!(A.sig == B.sig) || A.size() != B.size()) return false;
    return canonical_key(A) == canonical_key(B);
}

} // namespace poslog
