#pragma once

// Text front-end for signatures, theories, structures and formulas.
// `not` is accepted only as the outermost symbol of an axiom and `->` only at
// the top level of an axiom; anywhere else they are positivity violations,
// reported as their own error category with position information.

#include "poslog/structures.hpp"
#include "poslog/syntax.hpp"

#include <cctype>
#include <functional>
#include <string>
#include <vector>

namespace poslog {

class ParseError : public std::runtime_error {
public:
    enum class Category { Syntax, Positivity, UnknownSymbol, Arity };

    ParseError(Category c, int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col)
                             + ": " + msg),
          category(c), line(line), col(col) {}

    Category category;
    int line;
    int col;
};

inline const char* to_string(ParseError::Category c) {
    switch (c) {
    case ParseError::Category::Syntax: return "syntax";
    case ParseError::Category::Positivity: return "positivity";
    case ParseError::Category::UnknownSymbol: return "unknown-symbol";
    case ParseError::Category::Arity: return "arity";
    }
    return "?";
}

namespace detail {

struct Token {
    enum class Kind { Ident, Number, Punct, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 0, col = 0;
};

inline std::vector<Token> tokenize(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t k) {
        for (std::size_t j = 0; j < k; ++j) {
            if (src[i + j] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += k;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size()
                   && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'
                       || src[j] == '\'')) ++j;
            t.kind = Token::Kind::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Token::Kind::Number;
            t.text = src.substr(i, j - i);
            advance(j - i);
        } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
            t.kind = Token::Kind::Punct;
            t.text = "->";
            advance(2);
        } else if (std::string("{}();:,=./").find(c) != std::string::npos) {
            t.kind = Token::Kind::Punct;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(ParseError::Category::Syntax, line, col,
                             std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

    using SigLookup = std::function<const Signature*(const std::string&)>;

    // --- token helpers -----------------------------------------------------

    const Token& peek(int k = 0) const {
        std::size_t j = std::min(pos_ + k, toks_.size() - 1);
        return toks_[j];
    }
    bool at_end() const { return peek().kind == Token::Kind::End; }
    const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    bool is_ident(const char* s, int k = 0) const {
        return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
    }
    bool is_punct(const char* s, int k = 0) const {
        return peek(k).kind == Token::Kind::Punct && peek(k).text == s;
    }
    bool accept_ident(const char* s) {
        if (!is_ident(s)) return false;
        take();
        return true;
    }
    bool accept_punct(const char* s) {
        if (!is_punct(s)) return false;
        take();
        return true;
    }
    void expect_punct(const char* s) {
        if (!accept_punct(s)) fail_syntax(std::string("expected '") + s + "'");
    }
    void expect_ident(const char* s) {
        if (!accept_ident(s)) fail_syntax(std::string("expected '") + s + "'");
    }
    std::string take_name() {
        if (peek().kind != Token::Kind::Ident) fail_syntax("expected an identifier");
        if (is_keyword(peek().text)) fail_syntax("'" + peek().text + "' is a reserved word");
        return take().text;
    }

    [[noreturn]] void fail(ParseError::Category c, const std::string& msg) const {
        throw ParseError(c, peek().line, peek().col, msg);
    }
    [[noreturn]] void fail_syntax(const std::string& msg) const {
        fail(ParseError::Category::Syntax, msg);
    }

    static bool is_keyword(const std::string& s) {
        static const char* kw[] = {"signature", "theory", "structure", "over", "func",
                                   "rel",       "const",  "axiom",     "companion",
                                   "universe",  "forall", "exists",    "and",
                                   "or",        "not",    "true",      "false"};
        for (auto* k : kw)
            if (s == k) return true;
        return false;
    }

    // --- formulas ----------------------------------------------------------

    Term parse_term(const Signature& sig) {
        if (peek().kind != Token::Kind::Ident) fail_syntax("expected a term");
        if (is_keyword(peek().text)) fail_syntax("'" + peek().text + "' is a reserved word");
        Token t = take();
        if (accept_punct("(")) {
            int arity = sig.function_arity(t.text);
            if (arity == 0)
                throw ParseError(ParseError::Category::UnknownSymbol, t.line, t.col,
                                 "unknown function '" + t.text + "'");
            std::vector<Term> args;
            args.push_back(parse_term(sig));
            while (accept_punct(",")) args.push_back(parse_term(sig));
            expect_punct(")");
            if (static_cast<int>(args.size()) != arity)
                throw ParseError(ParseError::Category::Arity, t.line, t.col,
                                 "function " + t.text + "/" + std::to_string(arity)
                                     + " applied to " + std::to_string(args.size())
                                     + " arguments");
            return Term::app(t.text, std::move(args));
        }
        if (sig.has_constant(t.text)) return Term::cst(t.text);
        if (sig.has_function(t.text))
            throw ParseError(ParseError::Category::Arity, t.line, t.col,
                             "function symbol '" + t.text + "' used without arguments");
        if (sig.has_relation(t.text))
            throw ParseError(ParseError::Category::Syntax, t.line, t.col,
                             "relation symbol '" + t.text + "' used as a term");
        return Term::var(t.text);
    }

    PositiveFormula parse_atom(const Signature& sig) {
        if (peek().kind == Token::Kind::Ident && !is_keyword(peek().text)
            && sig.has_relation(peek().text) && is_punct("(", 1)) {
            Token t = take();
            take(); // '('
            std::vector<Term> args;
            args.push_back(parse_term(sig));
            while (accept_punct(",")) args.push_back(parse_term(sig));
            expect_punct(")");
            int arity = sig.relation_arity(t.text);
            if (static_cast<int>(args.size()) != arity)
                throw ParseError(ParseError::Category::Arity, t.line, t.col,
                                 "relation " + t.text + "/" + std::to_string(arity)
                                     + " applied to " + std::to_string(args.size())
                                     + " arguments");
            return PositiveFormula::make_atom(Atom::relation(t.text, std::move(args)));
        }
        Term lhs = parse_term(sig);
        expect_punct("=");
        Term rhs = parse_term(sig);
        return PositiveFormula::make_atom(Atom::equality(std::move(lhs), std::move(rhs)));
    }

    PositiveFormula parse_unit(const Signature& sig) {
        if (is_ident("not"))
            fail(ParseError::Category::Positivity,
                 "negation inside a positive context (only legal as the outermost symbol of an "
                 "axiom)");
        if (is_ident("forall"))
            fail(ParseError::Category::Positivity,
                 "universal quantifier inside a positive context");
        if (accept_ident("true")) return PositiveFormula::truth();
        if (accept_ident("false")) return PositiveFormula::falsity();
        if (accept_ident("exists")) {
            std::vector<std::string> vars;
            while (peek().kind == Token::Kind::Ident && !is_keyword(peek().text))
                vars.push_back(take().text);
            if (vars.empty()) fail_syntax("expected bound variables after 'exists'");
            expect_punct(".");
            PositiveFormula body = parse_or(sig);
            return PositiveFormula::exists(std::move(vars), std::move(body));
        }
        if (accept_punct("(")) {
            PositiveFormula f = parse_or(sig);
            if (is_punct("->"))
                fail(ParseError::Category::Positivity,
                     "implication inside a positive context (only legal at the top level of an "
                     "axiom)");
            expect_punct(")");
            return f;
        }
        return parse_atom(sig);
    }

    PositiveFormula parse_and(const Signature& sig) {
        PositiveFormula f = parse_unit(sig);
        if (!is_ident("and")) return f;
        std::vector<PositiveFormula> parts;
        parts.push_back(std::move(f));
        while (accept_ident("and")) parts.push_back(parse_unit(sig));
        return PositiveFormula::conj(std::move(parts));
    }

    PositiveFormula parse_or(const Signature& sig) {
        PositiveFormula f = parse_and(sig);
        if (!is_ident("or")) return f;
        std::vector<PositiveFormula> parts;
        parts.push_back(std::move(f));
        while (accept_ident("or")) parts.push_back(parse_and(sig));
        return PositiveFormula::disj(std::move(parts));
    }

    // axiom body: "not" sentence | "forall" xs "." F ["->" F] | F ["->" F]
    HInductiveSentence parse_axiom_body(const Signature& sig) {
        HInductiveSentence s;
        if (accept_ident("not")) {
            PositiveFormula phi = parse_or(sig);
            if (phi.kind == PositiveFormula::Kind::Exists) {
                s.univ_vars = phi.bound;
                s.antecedent = phi.parts[0];
            } else {
                s.antecedent = std::move(phi);
            }
            s.consequent = PositiveFormula::falsity();
            return s;
        }
        if (accept_ident("forall")) {
            while (peek().kind == Token::Kind::Ident && !is_keyword(peek().text))
                s.univ_vars.push_back(take().text);
            if (s.univ_vars.empty()) fail_syntax("expected variables after 'forall'");
            expect_punct(".");
        }
        PositiveFormula first = parse_or(sig);
        if (accept_punct("->")) {
            s.antecedent = std::move(first);
            s.consequent = parse_or(sig);
        } else {
            s.antecedent = PositiveFormula::truth();
            s.consequent = std::move(first);
        }
        return s;
    }

    CompanionAxiom parse_companion_body(const Signature& sig) {
        CompanionAxiom c;
        if (accept_ident("forall")) {
            while (peek().kind == Token::Kind::Ident && !is_keyword(peek().text))
                c.univ_vars.push_back(take().text);
            expect_punct(".");
        }
        expect_punct("(");
        c.psi = parse_or(sig);
        expect_punct(")");
        expect_ident("or");
        if (accept_ident("exists")) {
            while (peek().kind == Token::Kind::Ident && !is_keyword(peek().text))
                c.exist_vars.push_back(take().text);
            expect_punct(".");
        }
        expect_punct("(");
        c.theta1 = parse_or(sig);
        expect_punct(")");
        expect_ident("and");
        expect_ident("not");
        expect_punct("(");
        c.theta2 = parse_or(sig);
        expect_punct(")");
        return c;
    }

    // --- declarations ------------------------------------------------------

    Signature parse_signature_decl() {
        expect_ident("signature");
        Signature s;
        s.name = take_name();
        expect_punct("{");
        while (!accept_punct("}")) {
            if (accept_ident("func")) {
                std::string f = take_name();
                expect_punct("/");
                s.functions.emplace_back(f, take_arity());
            } else if (accept_ident("rel")) {
                std::string r = take_name();
                expect_punct("/");
                s.relations.emplace_back(r, take_arity());
            } else if (accept_ident("const")) {
                s.constants.push_back(take_name());
            } else {
                fail_syntax("expected 'func', 'rel' or 'const'");
            }
            expect_punct(";");
        }
        try {
            s.validate();
        } catch (const sort_error& e) {
            fail_syntax(e.what());
        }
        return s;
    }

    int take_arity() {
        if (peek().kind != Token::Kind::Number) fail_syntax("expected an arity");
        int a = std::stoi(take().text);
        if (a < 1) fail(ParseError::Category::Arity, "arities must be positive");
        return a;
    }

    Theory parse_theory_decl(const SigLookup& lookup) {
        expect_ident("theory");
        Theory t;
        t.name = take_name();
        expect_ident("over");
        Token sig_tok = peek();
        std::string sig_name = take_name();
        const Signature* sig = lookup(sig_name);
        if (!sig)
            throw ParseError(ParseError::Category::UnknownSymbol, sig_tok.line, sig_tok.col,
                             "unknown signature '" + sig_name + "'");
        t.sig = *sig;
        expect_punct("{");
        while (!accept_punct("}")) {
            if (accept_ident("axiom")) {
                std::string name = take_name();
                expect_punct(":");
                Token start = peek();
                HInductiveSentence ax = parse_axiom_body(t.sig);
                try {
                    ax.check(t.sig);
                } catch (const sort_error& e) {
                    throw ParseError(ParseError::Category::Syntax, start.line, start.col,
                                     e.what());
                }
                t.axioms.emplace_back(std::move(name), std::move(ax));
            } else if (accept_ident("companion")) {
                std::string name = take_name();
                expect_punct(":");
                CompanionAxiom ca = parse_companion_body(t.sig);
                t.companion_axioms.emplace_back(std::move(name), std::move(ca));
            } else {
                fail_syntax("expected 'axiom' or 'companion'");
            }
            expect_punct(";");
        }
        return t;
    }

    FinStructure parse_structure_decl(const SigLookup& lookup) {
        expect_ident("structure");
        FinStructure a;
        a.name = take_name();
        expect_ident("over");
        Token sig_tok = peek();
        std::string sig_name = take_name();
        const Signature* sig = lookup(sig_name);
        if (!sig)
            throw ParseError(ParseError::Category::UnknownSymbol, sig_tok.line, sig_tok.col,
                             "unknown signature '" + sig_name + "'");
        a.sig = *sig;
        expect_punct("{");
        expect_ident("universe");
        expect_punct("{");
        a.universe.push_back(take_name());
        while (accept_punct(",")) a.universe.push_back(take_name());
        expect_punct("}");
        expect_punct(";");

        std::size_t n = a.universe.size();
        if (n > kMaxUniverse) fail_syntax("universe too large");
        for (auto& [f, ar] : a.sig.functions) a.funcs.emplace_back();
        for (auto& [r, ar] : a.sig.relations) a.rels.emplace_back(pow_size(n, ar), 0);
        a.consts.assign(a.sig.constants.size(), 0);
        std::vector<std::vector<char>> func_seen;
        for (auto& [f, ar] : a.sig.functions) {
            func_seen.emplace_back(pow_size(n, ar), 0);
            a.funcs[func_seen.size() - 1].assign(pow_size(n, ar), 0);
        }
        std::vector<char> const_seen(a.sig.constants.size(), 0);

        auto element = [&]() -> Elem {
            Token t = peek();
            std::string nm = take_name();
            int e = a.element_index(nm);
            if (e < 0)
                throw ParseError(ParseError::Category::UnknownSymbol, t.line, t.col,
                                 "'" + nm + "' is not an element of the universe");
            return static_cast<Elem>(e);
        };
        auto tuple = [&](int arity) -> std::vector<Elem> {
            std::vector<Elem> tup;
            Token t = peek();
            if (accept_punct("(")) {
                tup.push_back(element());
                while (accept_punct(",")) tup.push_back(element());
                expect_punct(")");
            } else {
                tup.push_back(element());
            }
            if (static_cast<int>(tup.size()) != arity)
                throw ParseError(ParseError::Category::Arity, t.line, t.col,
                                 "expected a tuple of arity " + std::to_string(arity));
            return tup;
        };

        while (!accept_punct("}")) {
            Token t = peek();
            std::string sym = take_name();
            if (accept_punct("=")) {
                int c = a.constant_index(sym);
                if (c < 0)
                    throw ParseError(ParseError::Category::UnknownSymbol, t.line, t.col,
                                     "unknown constant '" + sym + "'");
                a.consts[c] = element();
                const_seen[c] = 1;
            } else {
                expect_punct(":");
                int f = a.function_index(sym);
                int r = a.relation_index(sym);
                if (f >= 0) {
                    int ar = a.sig.functions[f].second;
                    do {
                        auto tup = tuple(ar);
                        expect_punct("->");
                        Elem v = element();
                        std::size_t idx = a.flat_index(tup);
                        if (func_seen[f][idx])
                            throw ParseError(ParseError::Category::Syntax, t.line, t.col,
                                             "duplicate entry for function '" + sym + "'");
                        func_seen[f][idx] = 1;
                        a.funcs[f][idx] = v;
                    } while (accept_punct(","));
                } else if (r >= 0) {
                    int ar = a.sig.relations[r].second;
                    do {
                        auto tup = tuple(ar);
                        a.rels[r][a.flat_index(tup)] = 1;
                    } while (accept_punct(","));
                } else {
                    throw ParseError(ParseError::Category::UnknownSymbol, t.line, t.col,
                                     "unknown symbol '" + sym + "'");
                }
            }
            expect_punct(";");
        }

        for (std::size_t f = 0; f < func_seen.size(); ++f)
            for (std::size_t i = 0; i < func_seen[f].size(); ++i)
                if (!func_seen[f][i])
                    fail_syntax("function '" + a.sig.functions[f].first
                                + "' is not total (missing entries)");
        for (std::size_t c = 0; c < const_seen.size(); ++c)
            if (!const_seen[c])
                fail_syntax("constant '" + a.sig.constants[c] + "' has no value");
        a.validate();
        return a;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace detail

struct ParsedFile {
    std::vector<Signature> signatures;
    std::vector<Theory> theories;
    std::vector<FinStructure> structures;
};

// Parse a document of declarations. Signature references resolve against the
// file itself first, then against `external` (used by workspaces that load
// several files).
inline ParsedFile
parse_document(const std::string& src,
               const std::function<const Signature*(const std::string&)>& external = nullptr) {
    detail::Parser p(src);
    ParsedFile out;
    auto lookup = [&](const std::string& name) -> const Signature* {
        for (auto& s : out.signatures)
            if (s.name == name) return &s;
        return external ? external(name) : nullptr;
    };
    while (!p.at_end()) {
        if (p.is_ident("signature")) {
            out.signatures.push_back(p.parse_signature_decl());
        } else if (p.is_ident("theory")) {
            out.theories.push_back(p.parse_theory_decl(lookup));
        } else if (p.is_ident("structure")) {
            out.structures.push_back(p.parse_structure_decl(lookup));
        } else {
            p.fail_syntax("expected 'signature', 'theory' or 'structure'");
        }
    }
    return out;
}

// A positive formula; `not`, `->` and `forall` are rejected with a
// positivity-violation error.
inline PositiveFormula parse_positive_formula(const std::string& src, const Signature& sig) {
    detail::Parser p(src);
    PositiveFormula f = p.parse_or(sig);
    if (p.is_punct("->"))
        p.fail(ParseError::Category::Positivity,
               "implication inside a positive context (only legal at the top level of an axiom)");
    if (!p.at_end()) p.fail_syntax("trailing input after formula");
    check_formula(f, sig);
    return f;
}

// An axiom-shaped sentence: h-inductive, positive or h-universal form.
inline HInductiveSentence parse_axiom_sentence(const std::string& src, const Signature& sig) {
    detail::Parser p(src);
    HInductiveSentence s = p.parse_axiom_body(sig);
    if (!p.at_end()) p.fail_syntax("trailing input after sentence");
    s.check(sig);
    return s;
}

inline Signature parse_signature(const std::string& src) {
    detail::Parser p(src);
    Signature s = p.parse_signature_decl();
    if (!p.at_end()) p.fail_syntax("trailing input after signature");
    return s;
}

} // namespace poslog
