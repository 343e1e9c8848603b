#pragma once

#include "hanflab/structure.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hanflab {

struct Term {
    enum class Kind { Variable, Constant };
    Kind kind = Kind::Variable;
    std::string name;
    std::size_t constant_index = 0; // meaningful for constants

    friend bool operator==(const Term&, const Term&) = default;
};

struct FormulaNode;
using NodePtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
    enum class Kind { True, False, Atom, Equal, Not, And, Or, Implies, Iff, Exists, Forall };

    Kind kind = Kind::True;
    std::string relation_name;  // Atom
    std::size_t relation = 0;   // Atom: index into the signature
    std::vector<Term> terms;    // Atom (arity many), Equal (two)
    NodePtr left, right;        // binary connectives; Not and quantifiers use left
    std::string variable;       // quantifier variable

    int rank = 0;                   // quantifier rank
    std::vector<std::string> free;  // free variables, sorted
};

/// A formula tied to the signature its atoms were resolved against.
struct Formula {
    Signature signature;
    NodePtr root;

    int rank() const { return root->rank; }
    const std::vector<std::string>& free_variables() const { return root->free; }
};

using Assignment = std::map<std::string, Element>;

// --- construction ------------------------------------------------------

Formula f_true(const Signature& sig);
Formula f_false(const Signature& sig);
/// Term names resolve against the signature: declared constants become
/// constant terms, anything else is a variable.
Formula f_atom(const Signature& sig, const std::string& relation, const std::vector<std::string>& term_names);
Formula f_equal(const Signature& sig, const std::string& lhs, const std::string& rhs);
Formula f_not(Formula f);
Formula f_and(Formula a, Formula b);
Formula f_or(Formula a, Formula b);
Formula f_implies(Formula a, Formula b);
Formula f_iff(Formula a, Formula b);
Formula f_exists(const std::string& variable, Formula body);
Formula f_forall(const std::string& variable, Formula body);
/// Left-folded conjunction/disjunction; empty input gives true/false.
Formula f_and_all(const Signature& sig, std::vector<Formula> parts);
Formula f_or_all(const Signature& sig, std::vector<Formula> parts);

// --- text form ----------------------------------------------------------

/// Grammar: quantifiers `forall x.` / `exists x.`; connectives
/// `!` > `&` > `|` > `->` (right-assoc) > `<->`; atoms `R(t1,...,tk)`,
/// `t1=t2`, `true`, `false`; parentheses; identifiers [A-Za-z][A-Za-z0-9_]*;
/// `#` comments to end of line. Names with the internal `_v` prefix cannot
/// be written (identifiers may not start with an underscore).
Formula parse_formula(const std::string& text, const Signature& sig);

/// Canonical text; parsing it back yields the identical tree, except that
/// internally generated `_v` variables are not re-parseable by design.
std::string render_formula(const Formula& f);

// --- semantics ----------------------------------------------------------

/// Tarskian satisfaction; the assignment must cover the free variables.
bool eval(const Structure& s, const Formula& f, const Assignment& assignment = {});

int quantifier_rank(const Formula& f);

/// Rebuilds the formula over another signature (relation/constant indices
/// re-resolved by name). Fails if a symbol is missing or changed arity.
Formula retype_formula(const Formula& f, const Signature& target);

/// Replaces every atom of `relation` via the callback (receives the atom's
/// terms; must return a formula over f's signature).
Formula substitute_relation(const Formula& f, const std::string& relation,
                            const std::function<Formula(const std::vector<Term>&)>& build);

} // namespace hanflab
