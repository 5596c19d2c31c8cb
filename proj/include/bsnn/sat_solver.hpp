#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bsnn::sat {

using Var = int; // 0-based

// Literal encoded as 2*var + (1 if negated).
struct Lit {
    int x = -2;

    static Lit make(Var v, bool negated = false) { return Lit{2 * v + (negated ? 1 : 0)}; }
    Lit operator~() const { return Lit{x ^ 1}; }
    Var var() const { return x >> 1; }
    bool sign() const { return x & 1; } // true = negated
    bool operator==(const Lit&) const = default;
};

enum class Value : std::uint8_t { False = 0, True = 1, Undef = 2 };

struct SolverStats {
    std::uint64_t decisions = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t propagations = 0;
    std::uint64_t solve_calls = 0;
};

// Conflict-driven clause-learning solver with watched literals, activity
// ordering, phase saving, Luby restarts and solving under assumptions.
// Clauses may be added between solve() calls.
class Solver {
public:
    Solver();

    Var new_var();
    int num_vars() const { return static_cast<int>(assigns_.size()); }

    // Returns false if the clause makes the formula trivially unsat at the
    // top level. Tautologies are silently dropped.
    bool add_clause(std::vector<Lit> lits);

    bool solve(std::span<const Lit> assumptions = {}); // true = sat
    bool okay() const { return ok_; }

    Value model_value(Var v) const { return model_[v]; }
    const SolverStats& stats() const { return stats_; }

private:
    using ClauseRef = std::uint32_t;
    static constexpr ClauseRef kNullClause = 0xffffffffu;

    struct Watcher {
        ClauseRef cref;
        Lit blocker;
    };

    // clause layout in mem_: [size<<2 | learnt<<1 | deleted, activity(float bits), lits...]
    int clause_size(ClauseRef c) const { return static_cast<int>(mem_[c] >> 2); }
    bool clause_learnt(ClauseRef c) const { return (mem_[c] >> 1) & 1; }
    bool clause_deleted(ClauseRef c) const { return mem_[c] & 1; }
    void mark_deleted(ClauseRef c) { mem_[c] |= 1; }
    Lit clause_lit(ClauseRef c, int i) const { return Lit{static_cast<int>(mem_[c + 2 + i])}; }
    void set_clause_lit(ClauseRef c, int i, Lit l) { mem_[c + 2 + i] = static_cast<std::uint32_t>(l.x); }
    float clause_activity(ClauseRef c) const;
    void set_clause_activity(ClauseRef c, float a);

    ClauseRef alloc_clause(const std::vector<Lit>& lits, bool learnt);
    void attach_clause(ClauseRef c);
    void detach_clause(ClauseRef c);
    void remove_clause(ClauseRef c);

    Value value(Lit l) const {
        const Value v = assigns_[l.var()];
        if (v == Value::Undef) return Value::Undef;
        return (v == Value::True) != l.sign() ? Value::True : Value::False;
    }

    void enqueue(Lit l, ClauseRef from);
    ClauseRef propagate();
    void analyze(ClauseRef conflict, std::vector<Lit>& learnt, int& bt_level);
    bool lit_redundant(Lit l);
    void cancel_until(int level);
    void new_decision_level() { trail_lim_.push_back(static_cast<int>(trail_.size())); }
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    void var_bump(Var v);
    void var_decay() { var_inc_ /= 0.95; }
    void clause_bump(ClauseRef c);
    void insert_order(Var v);
    Var pick_branch_var();
    void reduce_db();

    // thin indexed max-heap over var activity
    void heap_up(int i);
    void heap_down(int i);
    void heap_insert(Var v);
    Var heap_pop();
    bool heap_contains(Var v) const { return heap_pos_[v] >= 0; }

    bool search_done(bool& result, std::span<const Lit> assumptions, std::int64_t conflict_budget);

    bool ok_ = true;
    std::vector<std::uint32_t> mem_;
    std::vector<ClauseRef> clauses_;
    std::vector<ClauseRef> learnts_;
    std::vector<std::vector<Watcher>> watches_; // indexed by Lit.x
    std::vector<Value> assigns_;
    std::vector<std::uint8_t> polarity_; // saved phase, 1 = last was true
    std::vector<int> level_;
    std::vector<ClauseRef> reason_;
    std::vector<Lit> trail_;
    std::vector<int> trail_lim_;
    std::size_t qhead_ = 0;

    std::vector<double> activity_;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    std::vector<Var> heap_;
    std::vector<int> heap_pos_;

    std::vector<std::uint8_t> seen_;
    std::vector<Value> model_;
    double max_learnts_ = 0;
    SolverStats stats_;
};

} // namespace bsnn::sat
