#include "hanflab/locality.hpp"

#include "hanflab/error.hpp"

#include <algorithm>

namespace hanflab {

Formula adjacency_formula(const Signature& sig, const std::string& u, const std::string& v,
                          const std::string& skip_relation) {
    std::vector<Formula> cases;
    for (const auto& rel : sig.relations) {
        if (rel.name == skip_relation || rel.arity < 2) continue;
        for (int i = 0; i < rel.arity; ++i) {
            for (int j = 0; j < rel.arity; ++j) {
                if (i == j) continue;
                std::vector<std::string> args(static_cast<std::size_t>(rel.arity));
                std::vector<std::string> bound;
                for (int k = 0; k < rel.arity; ++k) {
                    if (k == i) {
                        args[static_cast<std::size_t>(k)] = u;
                    } else if (k == j) {
                        args[static_cast<std::size_t>(k)] = v;
                    } else {
                        std::string w = "_va" + std::to_string(k);
                        args[static_cast<std::size_t>(k)] = w;
                        bound.push_back(w);
                    }
                }
                Formula atom = f_atom(sig, rel.name, args);
                for (auto it = bound.rbegin(); it != bound.rend(); ++it) atom = f_exists(*it, std::move(atom));
                cases.push_back(std::move(atom));
            }
        }
    }
    return f_or_all(sig, std::move(cases));
}

Formula distance_formula(const Signature& sig, std::int64_t r, const std::string& x, const std::string& y) {
    if (r < 0) throw input_error("radius must be >= 0");
    auto chain_var = [](std::int64_t i) { return "_vd" + std::to_string(i); };
    // Innermost step first: the chain ends by pinning the last variable to y.
    Formula body = f_equal(sig, chain_var(r), y);
    for (std::int64_t i = r; i >= 1; --i) {
        Formula step = f_or(adjacency_formula(sig, chain_var(i - 1), chain_var(i)),
                            f_equal(sig, chain_var(i - 1), chain_var(i)));
        body = f_exists(chain_var(i), f_and(std::move(step), std::move(body)));
    }
    return f_exists(chain_var(0), f_and(f_equal(sig, chain_var(0), x), std::move(body)));
}

namespace {

using Kind = FormulaNode::Kind;

// Renames free occurrences of a variable (stops at a rebinding quantifier).
Formula rename_free_variable(const Formula& f, const std::string& from, const std::string& to);

Formula rename_node(const FormulaNode& node, const Signature& sig, const std::string& from,
                    const std::string& to) {
    auto rename_term = [&](const Term& t) { return t.kind == Term::Kind::Variable && t.name == from ? to : t.name; };
    switch (node.kind) {
        case Kind::True: return f_true(sig);
        case Kind::False: return f_false(sig);
        case Kind::Atom: {
            std::vector<std::string> names;
            for (const auto& t : node.terms) names.push_back(rename_term(t));
            return f_atom(sig, node.relation_name, names);
        }
        case Kind::Equal: return f_equal(sig, rename_term(node.terms[0]), rename_term(node.terms[1]));
        case Kind::Not: return f_not(rename_node(*node.left, sig, from, to));
        case Kind::And: return f_and(rename_node(*node.left, sig, from, to), rename_node(*node.right, sig, from, to));
        case Kind::Or: return f_or(rename_node(*node.left, sig, from, to), rename_node(*node.right, sig, from, to));
        case Kind::Implies:
            return f_implies(rename_node(*node.left, sig, from, to), rename_node(*node.right, sig, from, to));
        case Kind::Iff: return f_iff(rename_node(*node.left, sig, from, to), rename_node(*node.right, sig, from, to));
        case Kind::Exists:
        case Kind::Forall: {
            if (node.variable == from) {
                // The variable is rebound here; nothing free below.
                Formula body{sig, node.left};
                return node.kind == Kind::Exists ? f_exists(node.variable, std::move(body))
                                                 : f_forall(node.variable, std::move(body));
            }
            Formula body = rename_node(*node.left, sig, from, to);
            return node.kind == Kind::Exists ? f_exists(node.variable, std::move(body))
                                             : f_forall(node.variable, std::move(body));
        }
    }
    throw Error("internal", "unreachable formula kind");
}

Formula rename_free_variable(const Formula& f, const std::string& from, const std::string& to) {
    return rename_node(*f.root, f.signature, from, to);
}

struct Localizer {
    const Signature& sig;
    std::int64_t r;
    const std::vector<std::string>& centers;
    std::vector<std::pair<std::string, std::string>>& renamed;
    int fresh_counter = 0;

    Formula guard_for(const std::string& variable) const {
        std::vector<Formula> parts;
        for (const auto& c : centers) parts.push_back(distance_formula(sig, r, c, variable));
        return f_or_all(sig, std::move(parts));
    }

    Formula transform(const FormulaNode& node) {
        switch (node.kind) {
            case Kind::True: return f_true(sig);
            case Kind::False: return f_false(sig);
            case Kind::Atom: {
                std::vector<std::string> names;
                for (const auto& t : node.terms) names.push_back(t.name);
                return f_atom(sig, node.relation_name, names);
            }
            case Kind::Equal: return f_equal(sig, node.terms[0].name, node.terms[1].name);
            case Kind::Not: return f_not(transform(*node.left));
            case Kind::And: return f_and(transform(*node.left), transform(*node.right));
            case Kind::Or: return f_or(transform(*node.left), transform(*node.right));
            case Kind::Implies: return f_implies(transform(*node.left), transform(*node.right));
            case Kind::Iff: return f_iff(transform(*node.left), transform(*node.right));
            case Kind::Exists:
            case Kind::Forall: {
                std::string variable = node.variable;
                Formula body{sig, node.left};
                if (std::find(centers.begin(), centers.end(), variable) != centers.end()) {
                    std::string fresh = "_vr" + std::to_string(fresh_counter++);
                    body = rename_free_variable(body, variable, fresh);
                    renamed.emplace_back(variable, fresh);
                    variable = fresh;
                }
                Formula inner = transform(*body.root);
                Formula guard = guard_for(variable);
                if (node.kind == Kind::Exists)
                    return f_exists(variable, f_and(std::move(guard), std::move(inner)));
                return f_forall(variable, f_implies(std::move(guard), std::move(inner)));
            }
        }
        throw Error("internal", "unreachable formula kind");
    }
};

} // namespace

LocalizeResult localize(const Formula& f, std::int64_t r, const std::vector<std::string>& centers) {
    if (centers.empty()) throw input_error("localization needs at least one center variable");
    LocalizeResult out{f, {}};
    Localizer loc{f.signature, r, centers, out.renamed};
    out.formula = loc.transform(*f.root);
    return out;
}

bool eval_in_neighborhood(const Structure& s, const Formula& f, std::int64_t r,
                          const std::vector<std::string>& centers, const Assignment& assignment) {
    std::vector<Element> points;
    for (const auto& c : centers) {
        auto it = assignment.find(c);
        if (it == assignment.end()) throw input_error("center '" + c + "' is not assigned");
        points.push_back(it->second);
    }
    auto g = gaifman(s);
    auto kept = ball_union(g, points, Radius::finite(r));
    auto induced = restrict_to(s, kept);
    std::vector<Element> old_to_new(static_cast<std::size_t>(s.universe_size), -1);
    for (std::size_t i = 0; i < induced.kept.size(); ++i)
        old_to_new[static_cast<std::size_t>(induced.kept[i])] = static_cast<Element>(i);
    Assignment local;
    for (const auto& [name, value] : assignment) {
        Element m = old_to_new[static_cast<std::size_t>(value)];
        if (m < 0) throw input_error("assigned element for '" + name + "' lies outside the neighborhood");
        local[name] = m;
    }
    Formula retyped = induced.structure.signature == f.signature ? f : retype_formula(f, induced.structure.signature);
    return eval(induced.structure, retyped, local);
}

NeighborhoodType local_type(const Structure& s, const std::vector<Element>& tuple, const Radius& r) {
    auto nb = pointed_neighborhood(s, tuple, r);
    return canonical_key(nb.pointed, r);
}

} // namespace hanflab
