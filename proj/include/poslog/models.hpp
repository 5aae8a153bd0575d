#pragma once

// Bounded enumeration of the finite models of a theory, one representative
// per isomorphism class, in canonical order. Complete size classes are cached
// per (signature, axioms, size) so repeated bounded checks share the work.

#include "poslog/canonical.hpp"
#include "poslog/structures.hpp"

#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace poslog {

struct ModelList {
    std::vector<FinStructure> models; // sizes ascending, canonical order within a size
    bool truncated = false;           // node budget ran out before the bound
    long long nodes_used = 0;         // raw candidate interpretations examined
};

namespace detail {

// Generates every interpretation of T.sig on a fixed universe of size n and
// keeps one canonical representative per isomorphism class of the models.
inline std::vector<FinStructure> enumerate_size_class(const Theory& T, int n,
                                                      long long max_nodes,
                                                      long long& nodes_used, bool& truncated) {
    FinStructure scratch;
    scratch.sig = T.sig;
    scratch.name = "scratch";
    for (int i = 0; i < n; ++i) scratch.universe.push_back("a" + std::to_string(i));
    for (auto& [f, ar] : T.sig.functions)
        scratch.funcs.emplace_back(pow_size(static_cast<std::size_t>(n), ar), 0);
    for (auto& [r, ar] : T.sig.relations)
        scratch.rels.emplace_back(pow_size(static_cast<std::size_t>(n), ar), 0);
    scratch.consts.assign(T.sig.constants.size(), 0);

    std::vector<CompiledSentence> axioms;
    for (auto& [nm, ax] : T.axioms) axioms.push_back(CompiledSentence::for_sentence(ax, T.sig));

    const bool fast = single_unary_signature(T.sig);
    std::unordered_set<std::string> seen;
    std::vector<std::pair<std::string, FinStructure>> reps;

    // flattened digit view over all interpretation choices
    struct Digit {
        Elem* slot;
        char* bit;
        Elem radix;
    };
    std::vector<Digit> digits;
    for (auto& tab : scratch.funcs)
        for (auto& v : tab) digits.push_back({&v, nullptr, static_cast<Elem>(n)});
    for (auto& tab : scratch.rels)
        for (auto& b : tab) digits.push_back({nullptr, &b, 2});
    for (auto& c : scratch.consts) digits.push_back({&c, nullptr, static_cast<Elem>(n)});

    std::vector<Elem> ws_tuple, ws_env;
    bool more = true;
    while (more) {
        if (nodes_used >= max_nodes) {
            truncated = true;
            return {};
        }
        ++nodes_used;
        bool ok = true;
        for (auto& ax : axioms)
            if (!ax.satisfied_ws(scratch, ws_tuple, ws_env)) {
                ok = false;
                break;
            }
        if (ok)
            for (auto& [nm, ca] : T.companion_axioms)
                if (!satisfies_companion(scratch, ca)) {
                    ok = false;
                    break;
                }
        if (ok) {
            std::string key = fast ? detail::fdigraph_code(scratch.funcs[0].data(), n)
                                   : canonical_key(scratch);
            if (seen.insert(key).second)
                reps.emplace_back(std::move(key), canonical_form(scratch, ""));
        }
        // odometer step, last digit fastest
        more = false;
        for (std::size_t i = digits.size(); i-- > 0;) {
            Elem cur = digits[i].slot ? *digits[i].slot : static_cast<Elem>(*digits[i].bit);
            if (cur + 1 < digits[i].radix) {
                if (digits[i].slot)
                    *digits[i].slot = static_cast<Elem>(cur + 1);
                else
                    *digits[i].bit = static_cast<char>(cur + 1);
                more = true;
                break;
            }
            if (digits[i].slot)
                *digits[i].slot = 0;
            else
                *digits[i].bit = 0;
        }
        if (digits.empty()) break; // single interpretation (empty signature tables)
    }

    std::sort(reps.begin(), reps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<FinStructure> out;
    out.reserve(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        FinStructure m = std::move(reps[i].second);
        m.name = "m" + std::to_string(n) + "_" + std::to_string(i);
        out.push_back(std::move(m));
    }
    return out;
}

struct ModelCache {
    std::mutex mu;
    std::unordered_map<std::string, std::shared_ptr<const std::vector<FinStructure>>> by_key;

    static ModelCache& instance() {
        static ModelCache c;
        return c;
    }
};

inline std::string cache_key(const Theory& T, int n) {
    return to_string(T.sig) + "\x1f" + T.axiom_key() + "\x1f" + std::to_string(n);
}

} // namespace detail

// Every model of T with universe size <= max_size, one representative per
// isomorphism class, deterministically ordered. A truncated list (node budget
// exhausted) is marked, never silent; truncation drops whole size classes so
// the emitted prefix stays deterministic.
inline ModelList enumerate_models(const Theory& T, int max_size,
                                  long long max_nodes = 2'000'000'000LL) {
    if (max_size < 1) throw sort_error("enumerate_models: max_size must be >= 1");
    T.check();
    ModelList out;
    auto& cache = detail::ModelCache::instance();
    for (int n = 1; n <= max_size; ++n) {
        std::string key = detail::cache_key(T, n);
        std::shared_ptr<const std::vector<FinStructure>> hit;
        {
            std::lock_guard<std::mutex> lock(cache.mu);
            auto it = cache.by_key.find(key);
            if (it != cache.by_key.end()) hit = it->second;
        }
        if (!hit) {
            bool truncated = false;
            auto fresh = detail::enumerate_size_class(T, n, max_nodes, out.nodes_used, truncated);
            if (truncated) {
                out.truncated = true;
                return out;
            }
            hit = std::make_shared<const std::vector<FinStructure>>(std::move(fresh));
            std::lock_guard<std::mutex> lock(cache.mu);
            cache.by_key.emplace(key, hit);
        }
        for (auto& m : *hit) out.models.push_back(m);
    }
    return out;
}

} // namespace poslog
