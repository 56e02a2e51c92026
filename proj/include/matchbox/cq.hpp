#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "matchbox/instance.hpp"
#include "matchbox/md.hpp"
#include "matchbox/simstore.hpp"

namespace matchbox {

// One atom of a conjunctive query body. `side` records which source rule the
// atom came from when the query was assembled from two rule bodies: 0 and 1
// for the two rules, 2 for an atom shared between them.
struct CqAtom {
    std::string relation;
    std::vector<std::string> vars;
    int side = 0;

    bool operator==(const CqAtom&) const = default;
};

struct CqSim {
    std::string tag; // "=" demands equal non-null values
    std::string x;
    std::string y;

    bool operator==(const CqSim&) const = default;
};

// Boolean conjunctive query with similarity built-ins and disequality
// constraints over tuple-id variables.
struct ConjunctiveQuery {
    std::string name;
    std::vector<CqAtom> atoms;
    std::vector<CqSim> sims;
    std::vector<std::pair<std::string, std::string>> distinct;

    bool operator==(const ConjunctiveQuery&) const = default;
};

// A satisfying assignment: variable bindings plus the tuple matched by each
// atom, indexed as in the query's atom list.
struct CqWitness {
    std::map<std::string, Value> bindings;
    std::vector<Tid> atom_tids;
};

namespace detail {

class CqEvaluator {
public:
    CqEvaluator(const ConjunctiveQuery& q, const Instance& inst,
                const SimilarityFactStore& sims)
        : query_(q), inst_(inst), sims_(sims) {
        // Try atoms over the smallest relations first; ties keep query order.
        order_.resize(q.atoms.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            return inst.tuples(q.atoms[a].relation).size() <
                   inst.tuples(q.atoms[b].relation).size();
        });
        tids_.assign(q.atoms.size(), 0);
    }

    std::optional<CqWitness> run() {
        std::optional<CqWitness> first;
        search(0, [&](CqWitness w) {
            first = std::move(w);
            return false; // stop at the first satisfying assignment
        });
        return first;
    }

    std::vector<CqWitness> run_all(std::size_t limit) {
        std::vector<CqWitness> all;
        search(0, [&](CqWitness w) {
            all.push_back(std::move(w));
            return all.size() < limit;
        });
        return all;
    }

private:
    // Depth-first join; `sink` receives each satisfying assignment and
    // returns whether to keep searching.
    template <class Sink>
    bool search(std::size_t depth, Sink&& sink) {
        if (depth == order_.size())
            return !constraints_hold(true) || sink(CqWitness{bindings_, tids_});
        const CqAtom& atom = query_.atoms[order_[depth]];
        for (const Tuple& tuple : inst_.tuples(atom.relation)) {
            if (tuple.values.size() != atom.vars.size()) continue;
            std::vector<std::string> bound;
            bool ok = true;
            for (std::size_t i = 0; i < atom.vars.size() && ok; ++i) {
                auto it = bindings_.find(atom.vars[i]);
                if (it == bindings_.end()) {
                    bindings_.emplace(atom.vars[i], tuple.values[i]);
                    bound.push_back(atom.vars[i]);
                } else if (it->second != tuple.values[i]) {
                    ok = false;
                }
            }
            bool keep_going = true;
            if (ok) {
                tids_[order_[depth]] = tuple.tid;
                if (constraints_hold(false)) keep_going = search(depth + 1, sink);
            }
            for (const auto& v : bound) bindings_.erase(v);
            if (!keep_going) return false;
        }
        return true;
    }

    // Checks every sim and disequality constraint whose variables are bound;
    // when `final_pass` every constraint must have been bindable.
    bool constraints_hold(bool final_pass) const {
        for (const CqSim& sim : query_.sims) {
            const auto x = bindings_.find(sim.x);
            const auto y = bindings_.find(sim.y);
            if (x == bindings_.end() || y == bindings_.end()) {
                if (final_pass) return false;
                continue;
            }
            if (sim.tag == kEqualityTag) {
                if (x->second.is_null() || x->second != y->second) return false;
            } else if (!sims_.similar(sim.tag, x->second, y->second)) {
                return false;
            }
        }
        for (const auto& [a, b] : query_.distinct) {
            const auto x = bindings_.find(a);
            const auto y = bindings_.find(b);
            if (x == bindings_.end() || y == bindings_.end()) {
                if (final_pass) return false;
                continue;
            }
            if (x->second == y->second) return false;
        }
        return true;
    }

    const ConjunctiveQuery& query_;
    const Instance& inst_;
    const SimilarityFactStore& sims_;
    std::vector<std::size_t> order_;
    std::map<std::string, Value> bindings_;
    std::vector<Tid> tids_;
};

} // namespace detail

inline std::optional<CqWitness> evaluate_cq(const ConjunctiveQuery& q, const Instance& inst,
                                            const SimilarityFactStore& sims) {
    return detail::CqEvaluator(q, inst, sims).run();
}

// Every satisfying assignment, in the evaluator's deterministic search order,
// capped at `limit`.
inline std::vector<CqWitness> evaluate_cq_all(const ConjunctiveQuery& q, const Instance& inst,
                                              const SimilarityFactStore& sims,
                                              std::size_t limit = 100000) {
    return detail::CqEvaluator(q, inst, sims).run_all(limit);
}

// Renders the query body in a conventional notation, mostly for diagnostics.
inline std::string render_cq(const ConjunctiveQuery& q) {
    std::string out = q.name + ": ";
    bool first = true;
    auto sep = [&] {
        if (!first) out += ", ";
        first = false;
    };
    for (const auto& atom : q.atoms) {
        sep();
        out += atom.relation + "(";
        for (std::size_t i = 0; i < atom.vars.size(); ++i) {
            if (i) out += ", ";
            out += atom.vars[i];
        }
        out += ")";
    }
    for (const auto& sim : q.sims) {
        sep();
        if (sim.tag == kEqualityTag)
            out += sim.x + " = " + sim.y;
        else
            out += "sim-" + sim.tag + "(" + sim.x + ", " + sim.y + ")";
    }
    for (const auto& [a, b] : q.distinct) {
        sep();
        out += a + " != " + b;
    }
    return out;
}

} // namespace matchbox
