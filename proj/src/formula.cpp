#include "hanflab/formula.hpp"

#include "hanflab/error.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace hanflab {

namespace {

using Kind = FormulaNode::Kind;

std::vector<std::string> merge_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodePtr make_leaf(Kind kind) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = kind;
    return node;
}

Term resolve_term(const Signature& sig, const std::string& name) {
    if (sig.relation_index(name))
        throw input_error("relation symbol '" + name + "' used as a term");
    Term t;
    if (auto idx = sig.constant_index(name)) {
        t.kind = Term::Kind::Constant;
        t.constant_index = *idx;
    }
    t.name = name;
    return t;
}

std::vector<std::string> term_variables(const std::vector<Term>& terms) {
    std::vector<std::string> vars;
    for (const auto& t : terms)
        if (t.kind == Term::Kind::Variable) vars.push_back(t.name);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

NodePtr binary_node(Kind kind, NodePtr a, NodePtr b) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = kind;
    node->rank = std::max(a->rank, b->rank);
    node->free = merge_sorted(a->free, b->free);
    node->left = std::move(a);
    node->right = std::move(b);
    return node;
}

NodePtr quantifier_node(Kind kind, const std::string& variable, NodePtr body) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = kind;
    node->variable = variable;
    node->rank = body->rank + 1;
    node->free = body->free;
    auto it = std::find(node->free.begin(), node->free.end(), variable);
    if (it != node->free.end()) node->free.erase(it);
    node->left = std::move(body);
    return node;
}

void require_same_signature(const Formula& a, const Formula& b) {
    if (a.signature != b.signature)
        throw signature_mismatch("cannot combine formulas over different signatures");
}

} // namespace

Formula f_true(const Signature& sig) { return {sig, make_leaf(Kind::True)}; }
Formula f_false(const Signature& sig) { return {sig, make_leaf(Kind::False)}; }

Formula f_atom(const Signature& sig, const std::string& relation, const std::vector<std::string>& term_names) {
    auto idx = sig.relation_index(relation);
    if (!idx) throw input_error("unknown relation '" + relation + "'");
    if (sig.relations[*idx].arity != static_cast<int>(term_names.size()))
        throw input_error("relation '" + relation + "' expects " + std::to_string(sig.relations[*idx].arity) +
                          " arguments, got " + std::to_string(term_names.size()));
    auto node = std::make_shared<FormulaNode>();
    node->kind = Kind::Atom;
    node->relation_name = relation;
    node->relation = *idx;
    for (const auto& name : term_names) node->terms.push_back(resolve_term(sig, name));
    node->free = term_variables(node->terms);
    return {sig, std::move(node)};
}

Formula f_equal(const Signature& sig, const std::string& lhs, const std::string& rhs) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = Kind::Equal;
    node->terms = {resolve_term(sig, lhs), resolve_term(sig, rhs)};
    node->free = term_variables(node->terms);
    return {sig, std::move(node)};
}

Formula f_not(Formula f) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = Kind::Not;
    node->rank = f.root->rank;
    node->free = f.root->free;
    node->left = std::move(f.root);
    return {std::move(f.signature), std::move(node)};
}

Formula f_and(Formula a, Formula b) {
    require_same_signature(a, b);
    return {std::move(a.signature), binary_node(Kind::And, std::move(a.root), std::move(b.root))};
}
Formula f_or(Formula a, Formula b) {
    require_same_signature(a, b);
    return {std::move(a.signature), binary_node(Kind::Or, std::move(a.root), std::move(b.root))};
}
Formula f_implies(Formula a, Formula b) {
    require_same_signature(a, b);
    return {std::move(a.signature), binary_node(Kind::Implies, std::move(a.root), std::move(b.root))};
}
Formula f_iff(Formula a, Formula b) {
    require_same_signature(a, b);
    return {std::move(a.signature), binary_node(Kind::Iff, std::move(a.root), std::move(b.root))};
}

Formula f_exists(const std::string& variable, Formula body) {
    return {std::move(body.signature), quantifier_node(Kind::Exists, variable, std::move(body.root))};
}
Formula f_forall(const std::string& variable, Formula body) {
    return {std::move(body.signature), quantifier_node(Kind::Forall, variable, std::move(body.root))};
}

Formula f_and_all(const Signature& sig, std::vector<Formula> parts) {
    if (parts.empty()) return f_true(sig);
    Formula out = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) out = f_and(std::move(out), std::move(parts[i]));
    return out;
}
Formula f_or_all(const Signature& sig, std::vector<Formula> parts) {
    if (parts.empty()) return f_false(sig);
    Formula out = std::move(parts.front());
    for (std::size_t i = 1; i < parts.size(); ++i) out = f_or(std::move(out), std::move(parts[i]));
    return out;
}

// --- parser -------------------------------------------------------------

namespace {

struct Token {
    enum class Kind { Ident, LParen, RParen, Comma, Equal, Not, And, Or, Implies, Iff, Dot, End };
    Kind kind;
    std::string text;
    std::size_t pos;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& message, std::size_t pos) const {
        throw input_error("syntax error at offset " + std::to_string(pos) + ": " + message);
    }

private:
    void advance() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        std::size_t start = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Token::Kind::End, "", start};
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
                ++end;
            current_ = {Token::Kind::Ident, text_.substr(pos_, end - pos_), start};
            pos_ = end;
            return;
        }
        switch (c) {
            case '(': current_ = {Token::Kind::LParen, "(", start}; ++pos_; return;
            case ')': current_ = {Token::Kind::RParen, ")", start}; ++pos_; return;
            case ',': current_ = {Token::Kind::Comma, ",", start}; ++pos_; return;
            case '=': current_ = {Token::Kind::Equal, "=", start}; ++pos_; return;
            case '!': current_ = {Token::Kind::Not, "!", start}; ++pos_; return;
            case '&': current_ = {Token::Kind::And, "&", start}; ++pos_; return;
            case '|': current_ = {Token::Kind::Or, "|", start}; ++pos_; return;
            case '.': current_ = {Token::Kind::Dot, ".", start}; ++pos_; return;
            case '-':
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
                    current_ = {Token::Kind::Implies, "->", start};
                    pos_ += 2;
                    return;
                }
                fail("expected '->'", start);
            case '<':
                if (pos_ + 2 < text_.size() && text_[pos_ + 1] == '-' && text_[pos_ + 2] == '>') {
                    current_ = {Token::Kind::Iff, "<->", start};
                    pos_ += 3;
                    return;
                }
                fail("expected '<->'", start);
            default:
                if (c == '_') fail("identifiers may not start with '_' (the prefix is reserved)", start);
                fail(std::string("unexpected character '") + c + "'", start);
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    Token current_{Token::Kind::End, "", 0};
};

class Parser {
public:
    Parser(const std::string& text, const Signature& sig) : lexer_(text), sig_(sig) {}

    Formula parse() {
        Formula f = parse_iff();
        if (lexer_.peek().kind != Token::Kind::End)
            lexer_.fail("unexpected trailing input", lexer_.peek().pos);
        return f;
    }

private:
    Formula parse_iff() {
        Formula f = parse_implies();
        while (lexer_.peek().kind == Token::Kind::Iff) {
            lexer_.take();
            f = f_iff(std::move(f), parse_implies());
        }
        return f;
    }

    Formula parse_implies() {
        Formula f = parse_or();
        if (lexer_.peek().kind == Token::Kind::Implies) {
            lexer_.take();
            return f_implies(std::move(f), parse_implies());
        }
        return f;
    }

    Formula parse_or() {
        Formula f = parse_and();
        while (lexer_.peek().kind == Token::Kind::Or) {
            lexer_.take();
            f = f_or(std::move(f), parse_and());
        }
        return f;
    }

    Formula parse_and() {
        Formula f = parse_unary();
        while (lexer_.peek().kind == Token::Kind::And) {
            lexer_.take();
            f = f_and(std::move(f), parse_unary());
        }
        return f;
    }

    Formula parse_unary() {
        if (lexer_.peek().kind == Token::Kind::Not) {
            lexer_.take();
            return f_not(parse_unary());
        }
        if (lexer_.peek().kind == Token::Kind::Ident) {
            const std::string& word = lexer_.peek().text;
            if (word == "forall" || word == "exists") return parse_quantifier();
        }
        return parse_primary();
    }

    Formula parse_quantifier() {
        Token q = lexer_.take();
        Token var = lexer_.take();
        if (var.kind != Token::Kind::Ident) lexer_.fail("expected a variable name", var.pos);
        if (var.text == "forall" || var.text == "exists" || var.text == "true" || var.text == "false")
            lexer_.fail("'" + var.text + "' is a keyword", var.pos);
        Token dot = lexer_.take();
        if (dot.kind != Token::Kind::Dot) lexer_.fail("expected '.' after the bound variable", dot.pos);
        Formula body = parse_iff();
        return q.text == "forall" ? f_forall(var.text, std::move(body)) : f_exists(var.text, std::move(body));
    }

    Formula parse_primary() {
        Token t = lexer_.take();
        if (t.kind == Token::Kind::LParen) {
            Formula f = parse_iff();
            Token close = lexer_.take();
            if (close.kind != Token::Kind::RParen) lexer_.fail("expected ')'", close.pos);
            return f;
        }
        if (t.kind != Token::Kind::Ident) lexer_.fail("expected a formula", t.pos);
        if (t.text == "true") return f_true(sig_);
        if (t.text == "false") return f_false(sig_);
        if (t.text == "forall" || t.text == "exists") lexer_.fail("misplaced quantifier", t.pos);

        if (lexer_.peek().kind == Token::Kind::LParen) {
            lexer_.take();
            std::vector<std::string> args;
            if (lexer_.peek().kind != Token::Kind::RParen) {
                for (;;) {
                    Token arg = lexer_.take();
                    if (arg.kind != Token::Kind::Ident) lexer_.fail("expected a term", arg.pos);
                    args.push_back(arg.text);
                    if (lexer_.peek().kind == Token::Kind::Comma) {
                        lexer_.take();
                        continue;
                    }
                    break;
                }
            }
            Token close = lexer_.take();
            if (close.kind != Token::Kind::RParen) lexer_.fail("expected ')'", close.pos);
            try {
                return f_atom(sig_, t.text, args);
            } catch (const Error& e) {
                lexer_.fail(e.what(), t.pos);
            }
        }
        Token eq = lexer_.take();
        if (eq.kind != Token::Kind::Equal) lexer_.fail("expected '=' or '(' after '" + t.text + "'", eq.pos);
        Token rhs = lexer_.take();
        if (rhs.kind != Token::Kind::Ident) lexer_.fail("expected a term after '='", rhs.pos);
        try {
            return f_equal(sig_, t.text, rhs.text);
        } catch (const Error& e) {
            lexer_.fail(e.what(), t.pos);
        }
    }

    Lexer lexer_;
    const Signature& sig_;
};

} // namespace

Formula parse_formula(const std::string& text, const Signature& sig) {
    return Parser(text, sig).parse();
}

// --- render -------------------------------------------------------------

namespace {

// Precedence levels for parenthesization; quantifiers bind their whole body.
int precedence(Kind k) {
    switch (k) {
        case Kind::Exists:
        case Kind::Forall: return 0;
        case Kind::Iff: return 1;
        case Kind::Implies: return 2;
        case Kind::Or: return 3;
        case Kind::And: return 4;
        case Kind::Not: return 5;
        default: return 6;
    }
}

void render_node(const FormulaNode& node, std::ostringstream& out, int parent_level, bool right_operand) {
    int level = precedence(node.kind);
    bool parens = false;
    if (level < parent_level) parens = true;
    // Associativity: `&`, `|`, `<->` fold left; `->` folds right.
    if (level == parent_level && level >= 1 && level <= 4) {
        bool left_assoc = (node.kind != Kind::Implies);
        parens = left_assoc ? right_operand : !right_operand;
    }
    if (parens) out << "(";
    switch (node.kind) {
        case Kind::True: out << "true"; break;
        case Kind::False: out << "false"; break;
        case Kind::Atom: {
            out << node.relation_name << "(";
            for (std::size_t i = 0; i < node.terms.size(); ++i) {
                if (i) out << ",";
                out << node.terms[i].name;
            }
            out << ")";
            break;
        }
        case Kind::Equal:
            out << node.terms[0].name << "=" << node.terms[1].name;
            break;
        case Kind::Not:
            out << "!";
            if (node.left->kind == Kind::Equal) {
                out << "(";
                render_node(*node.left, out, 0, false);
                out << ")";
            } else {
                render_node(*node.left, out, precedence(Kind::Not), false);
            }
            break;
        case Kind::And:
        case Kind::Or:
        case Kind::Implies:
        case Kind::Iff: {
            const char* op = node.kind == Kind::And ? " & "
                             : node.kind == Kind::Or ? " | "
                             : node.kind == Kind::Implies ? " -> "
                                                          : " <-> ";
            render_node(*node.left, out, level, false);
            out << op;
            render_node(*node.right, out, level, true);
            break;
        }
        case Kind::Exists:
        case Kind::Forall:
            out << (node.kind == Kind::Exists ? "exists " : "forall ") << node.variable << ". ";
            render_node(*node.left, out, 0, false);
            break;
    }
    if (parens) out << ")";
}

} // namespace

std::string render_formula(const Formula& f) {
    std::ostringstream out;
    render_node(*f.root, out, 0, false);
    return out.str();
}

// --- evaluation ---------------------------------------------------------

namespace {

class Evaluator {
public:
    Evaluator(const Structure& s, const Assignment& assignment) : s_(s) {
        for (const auto& [name, value] : assignment) {
            if (value < 0 || value >= s.universe_size)
                throw input_error("assignment maps '" + name + "' to out-of-range element " + std::to_string(value));
            env_.emplace_back(name, value);
        }
    }

    bool value(const FormulaNode& node) {
        switch (node.kind) {
            case Kind::True: return true;
            case Kind::False: return false;
            case Kind::Atom: {
                scratch_.clear();
                for (const auto& t : node.terms) scratch_.push_back(term_value(t));
                const Table& table = s_.tables[node.relation];
                return std::binary_search(table.begin(), table.end(), scratch_);
            }
            case Kind::Equal: return term_value(node.terms[0]) == term_value(node.terms[1]);
            case Kind::Not: return !value(*node.left);
            case Kind::And: return value(*node.left) && value(*node.right);
            case Kind::Or: return value(*node.left) || value(*node.right);
            case Kind::Implies: return !value(*node.left) || value(*node.right);
            case Kind::Iff: return value(*node.left) == value(*node.right);
            case Kind::Exists:
            case Kind::Forall: {
                bool universal = node.kind == Kind::Forall;
                env_.emplace_back(node.variable, 0);
                for (Element e = 0; e < s_.universe_size; ++e) {
                    env_.back().second = e;
                    bool v = value(*node.left);
                    if (v != universal) {
                        env_.pop_back();
                        return v;
                    }
                }
                env_.pop_back();
                return universal;
            }
        }
        return false;
    }

private:
    Element term_value(const Term& t) {
        if (t.kind == Term::Kind::Constant) return s_.constant_values[t.constant_index];
        for (auto it = env_.rbegin(); it != env_.rend(); ++it)
            if (it->first == t.name) return it->second;
        throw input_error("unbound free variable '" + t.name + "'");
    }

    const Structure& s_;
    std::vector<std::pair<std::string, Element>> env_;
    Tuple scratch_;
};

} // namespace

bool eval(const Structure& s, const Formula& f, const Assignment& assignment) {
    if (s.signature != f.signature)
        throw signature_mismatch("formula and structure have different signatures");
    for (const auto& v : f.root->free)
        if (!assignment.count(v)) throw input_error("unbound free variable '" + v + "'");
    Evaluator e(s, assignment);
    return e.value(*f.root);
}

int quantifier_rank(const Formula& f) { return f.root->rank; }

// --- signature surgery --------------------------------------------------

namespace {

Formula rebuild(const FormulaNode& node, const Signature& target) {
    switch (node.kind) {
        case Kind::True: return f_true(target);
        case Kind::False: return f_false(target);
        case Kind::Atom: {
            std::vector<std::string> names;
            for (const auto& t : node.terms) names.push_back(t.name);
            return f_atom(target, node.relation_name, names);
        }
        case Kind::Equal: return f_equal(target, node.terms[0].name, node.terms[1].name);
        case Kind::Not: return f_not(rebuild(*node.left, target));
        case Kind::And: return f_and(rebuild(*node.left, target), rebuild(*node.right, target));
        case Kind::Or: return f_or(rebuild(*node.left, target), rebuild(*node.right, target));
        case Kind::Implies: return f_implies(rebuild(*node.left, target), rebuild(*node.right, target));
        case Kind::Iff: return f_iff(rebuild(*node.left, target), rebuild(*node.right, target));
        case Kind::Exists: return f_exists(node.variable, rebuild(*node.left, target));
        case Kind::Forall: return f_forall(node.variable, rebuild(*node.left, target));
    }
    throw Error("internal", "unreachable formula kind");
}

Formula substitute(const FormulaNode& node, const Signature& sig, const std::string& relation,
                   const std::function<Formula(const std::vector<Term>&)>& build) {
    switch (node.kind) {
        case Kind::True: return f_true(sig);
        case Kind::False: return f_false(sig);
        case Kind::Atom: {
            if (node.relation_name == relation) {
                Formula replaced = build(node.terms);
                if (replaced.signature != sig)
                    throw signature_mismatch("substitution produced a formula over a different signature");
                return replaced;
            }
            std::vector<std::string> names;
            for (const auto& t : node.terms) names.push_back(t.name);
            return f_atom(sig, node.relation_name, names);
        }
        case Kind::Equal: return f_equal(sig, node.terms[0].name, node.terms[1].name);
        case Kind::Not: return f_not(substitute(*node.left, sig, relation, build));
        case Kind::And:
            return f_and(substitute(*node.left, sig, relation, build), substitute(*node.right, sig, relation, build));
        case Kind::Or:
            return f_or(substitute(*node.left, sig, relation, build), substitute(*node.right, sig, relation, build));
        case Kind::Implies:
            return f_implies(substitute(*node.left, sig, relation, build),
                             substitute(*node.right, sig, relation, build));
        case Kind::Iff:
            return f_iff(substitute(*node.left, sig, relation, build), substitute(*node.right, sig, relation, build));
        case Kind::Exists: return f_exists(node.variable, substitute(*node.left, sig, relation, build));
        case Kind::Forall: return f_forall(node.variable, substitute(*node.left, sig, relation, build));
    }
    throw Error("internal", "unreachable formula kind");
}

} // namespace

Formula retype_formula(const Formula& f, const Signature& target) {
    return rebuild(*f.root, target);
}

Formula substitute_relation(const Formula& f, const std::string& relation,
                            const std::function<Formula(const std::vector<Term>&)>& build) {
    return substitute(*f.root, f.signature, relation, build);
}

} // namespace hanflab
