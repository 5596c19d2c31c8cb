#include "bsnn/sat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace bsnn::sat {

namespace {

double luby(double y, int x) {
    int size = 1, seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    return std::pow(y, seq);
}

} // namespace

Solver::Solver() = default;

Var Solver::new_var() {
    const Var v = num_vars();
    assigns_.push_back(Value::Undef);
    polarity_.push_back(0);
    level_.push_back(0);
    reason_.push_back(kNullClause);
    activity_.push_back(0.0);
    seen_.push_back(0);
    heap_pos_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(v);
    return v;
}

float Solver::clause_activity(ClauseRef c) const {
    float a;
    std::memcpy(&a, &mem_[c + 1], sizeof(float));
    return a;
}

void Solver::set_clause_activity(ClauseRef c, float a) {
    std::memcpy(&mem_[c + 1], &a, sizeof(float));
}

Solver::ClauseRef Solver::alloc_clause(const std::vector<Lit>& lits, bool learnt) {
    const ClauseRef c = static_cast<ClauseRef>(mem_.size());
    mem_.push_back((static_cast<std::uint32_t>(lits.size()) << 2) | (learnt ? 2u : 0u));
    mem_.push_back(0);
    set_clause_activity(c, 0.0f);
    for (const Lit l : lits) mem_.push_back(static_cast<std::uint32_t>(l.x));
    return c;
}

void Solver::attach_clause(ClauseRef c) {
    const Lit l0 = clause_lit(c, 0), l1 = clause_lit(c, 1);
    watches_[(~l0).x].push_back({c, l1});
    watches_[(~l1).x].push_back({c, l0});
}

void Solver::detach_clause(ClauseRef c) {
    for (int i = 0; i < 2; ++i) {
        auto& ws = watches_[(~clause_lit(c, i)).x];
        for (std::size_t j = 0; j < ws.size(); ++j) {
            if (ws[j].cref == c) {
                ws[j] = ws.back();
                ws.pop_back();
                break;
            }
        }
    }
}

void Solver::remove_clause(ClauseRef c) {
    detach_clause(c);
    mark_deleted(c);
}

bool Solver::add_clause(std::vector<Lit> lits) {
    if (!ok_) return false;

    std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) { return a.x < b.x; });
    std::vector<Lit> out;
    Lit prev{-2};
    for (const Lit l : lits) {
        if (value(l) == Value::True || l == ~prev) return true; // satisfied or tautology
        if (value(l) != Value::False && !(l == prev)) {
            out.push_back(l);
            prev = l;
        }
    }

    if (out.empty()) return ok_ = false;
    if (out.size() == 1) {
        enqueue(out[0], kNullClause);
        return ok_ = (propagate() == kNullClause);
    }
    const ClauseRef c = alloc_clause(out, false);
    clauses_.push_back(c);
    attach_clause(c);
    return true;
}

void Solver::enqueue(Lit l, ClauseRef from) {
    assigns_[l.var()] = l.sign() ? Value::False : Value::True;
    level_[l.var()] = decision_level();
    reason_[l.var()] = from;
    trail_.push_back(l);
}

Solver::ClauseRef Solver::propagate() {
    ClauseRef conflict = kNullClause;
    while (qhead_ < trail_.size()) {
        const Lit p = trail_[qhead_++];
        ++stats_.propagations;
        auto& ws = watches_[p.x];
        std::size_t i = 0, j = 0;
        const Lit false_lit = ~p;
        while (i < ws.size()) {
            const Watcher w = ws[i];
            if (value(w.blocker) == Value::True) {
                ws[j++] = ws[i++];
                continue;
            }
            const ClauseRef c = w.cref;
            if (clause_lit(c, 0) == false_lit) {
                set_clause_lit(c, 0, clause_lit(c, 1));
                set_clause_lit(c, 1, false_lit);
            }
            ++i;
            const Lit first = clause_lit(c, 0);
            if (value(first) == Value::True) {
                ws[j++] = {c, first};
                continue;
            }
            const int size = clause_size(c);
            bool moved = false;
            for (int k = 2; k < size; ++k) {
                const Lit lk = clause_lit(c, k);
                if (value(lk) != Value::False) {
                    set_clause_lit(c, 1, lk);
                    set_clause_lit(c, k, false_lit);
                    watches_[(~lk).x].push_back({c, first});
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            // unit or conflict
            ws[j++] = {c, first};
            if (value(first) == Value::False) {
                conflict = c;
                qhead_ = trail_.size();
                while (i < ws.size()) ws[j++] = ws[i++];
            } else {
                enqueue(first, c);
            }
        }
        ws.resize(j);
        if (conflict != kNullClause) break;
    }
    return conflict;
}

void Solver::var_bump(Var v) {
    if ((activity_[v] += var_inc_) > 1e100) {
        for (auto& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_contains(v)) heap_up(heap_pos_[v]);
}

void Solver::clause_bump(ClauseRef c) {
    float a = clause_activity(c) + static_cast<float>(cla_inc_);
    if (a > 1e20f) {
        for (const ClauseRef l : learnts_)
            if (!clause_deleted(l)) set_clause_activity(l, clause_activity(l) * 1e-20f);
        cla_inc_ *= 1e-20;
        a = clause_activity(c) + static_cast<float>(cla_inc_);
    }
    set_clause_activity(c, a);
}

void Solver::analyze(ClauseRef conflict, std::vector<Lit>& learnt, int& bt_level) {
    learnt.clear();
    learnt.push_back(Lit{-2}); // placeholder for the asserting literal
    int counter = 0;
    Lit p{-2};
    int index = static_cast<int>(trail_.size()) - 1;
    ClauseRef confl = conflict;

    do {
        if (clause_learnt(confl)) clause_bump(confl);
        const int size = clause_size(confl);
        for (int j = (p.x == -2 ? 0 : 1); j < size; ++j) {
            const Lit q = clause_lit(confl, j);
            if (!seen_[q.var()] && level_[q.var()] > 0) {
                seen_[q.var()] = 1;
                var_bump(q.var());
                if (level_[q.var()] >= decision_level())
                    ++counter;
                else
                    learnt.push_back(q);
            }
        }
        while (!seen_[trail_[index--].var()]) {}
        p = trail_[index + 1];
        confl = reason_[p.var()];
        seen_[p.var()] = 0;
        --counter;
    } while (counter > 0);
    learnt[0] = ~p;

    // conflict clause minimization (local check against reasons)
    std::size_t out = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
        if (reason_[learnt[i].var()] == kNullClause || !lit_redundant(learnt[i]))
            learnt[out++] = learnt[i];
    }
    const std::size_t kept = out;
    for (std::size_t i = 1; i < learnt.size(); ++i) seen_[learnt[i].var()] = 0;
    seen_[learnt[0].var()] = 0;
    learnt.resize(kept);

    if (learnt.size() == 1) {
        bt_level = 0;
    } else {
        int max_i = 1;
        for (std::size_t i = 2; i < learnt.size(); ++i)
            if (level_[learnt[i].var()] > level_[learnt[max_i].var()]) max_i = static_cast<int>(i);
        std::swap(learnt[1], learnt[max_i]);
        bt_level = level_[learnt[1].var()];
    }
}

bool Solver::lit_redundant(Lit l) {
    const ClauseRef c = reason_[l.var()];
    const int size = clause_size(c);
    for (int j = 1; j < size; ++j) {
        const Lit q = clause_lit(c, j);
        if (!seen_[q.var()] && level_[q.var()] > 0) return false;
    }
    return true;
}

void Solver::cancel_until(int target) {
    if (decision_level() <= target) return;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[target]; --i) {
        const Var v = trail_[i].var();
        polarity_[v] = trail_[i].sign() ? 0 : 1;
        assigns_[v] = Value::Undef;
        reason_[v] = kNullClause;
        if (!heap_contains(v)) heap_insert(v);
    }
    trail_.resize(trail_lim_[target]);
    trail_lim_.resize(target);
    qhead_ = trail_.size();
}

void Solver::heap_up(int i) {
    const Var v = heap_[i];
    while (i > 0) {
        const int parent = (i - 1) >> 1;
        if (activity_[heap_[parent]] >= activity_[v]) break;
        heap_[i] = heap_[parent];
        heap_pos_[heap_[i]] = i;
        i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void Solver::heap_down(int i) {
    const Var v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
        int child = 2 * i + 1;
        if (child >= n) break;
        if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]]) ++child;
        if (activity_[heap_[child]] <= activity_[v]) break;
        heap_[i] = heap_[child];
        heap_pos_[heap_[i]] = i;
        i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
}

void Solver::heap_insert(Var v) {
    heap_.push_back(v);
    heap_pos_[v] = static_cast<int>(heap_.size()) - 1;
    heap_up(heap_pos_[v]);
}

Var Solver::heap_pop() {
    const Var top = heap_[0];
    heap_pos_[top] = -1;
    heap_[0] = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_pos_[heap_[0]] = 0;
        heap_down(0);
    }
    return top;
}

Var Solver::pick_branch_var() {
    while (!heap_.empty()) {
        const Var v = heap_pop();
        if (assigns_[v] == Value::Undef) return v;
    }
    return -1;
}

void Solver::reduce_db() {
    std::vector<ClauseRef> live;
    live.reserve(learnts_.size());
    for (const ClauseRef c : learnts_)
        if (!clause_deleted(c)) live.push_back(c);
    std::sort(live.begin(), live.end(),
              [this](ClauseRef a, ClauseRef b) { return clause_activity(a) < clause_activity(b); });

    const std::size_t target = live.size() / 2;
    std::size_t removed = 0;
    learnts_.clear();
    for (const ClauseRef c : live) {
        const Lit l0 = clause_lit(c, 0);
        const bool locked = reason_[l0.var()] == c && value(l0) == Value::True;
        if (removed < target && clause_size(c) > 2 && !locked) {
            remove_clause(c);
            ++removed;
        } else {
            learnts_.push_back(c);
        }
    }
    max_learnts_ *= 1.3;
}

bool Solver::search_done(bool& result, std::span<const Lit> assumptions, std::int64_t budget) {
    std::int64_t conflicts_here = 0;
    std::vector<Lit> learnt;
    for (;;) {
        const ClauseRef confl = propagate();
        if (confl != kNullClause) {
            ++stats_.conflicts;
            ++conflicts_here;
            if (decision_level() == 0) {
                result = false;
                ok_ = false;
                return true;
            }
            int bt = 0;
            analyze(confl, learnt, bt);
            cancel_until(bt);
            if (learnt.size() == 1) {
                enqueue(learnt[0], kNullClause);
            } else {
                const ClauseRef c = alloc_clause(learnt, true);
                learnts_.push_back(c);
                attach_clause(c);
                clause_bump(c);
                enqueue(learnt[0], c);
            }
            var_decay();
            cla_inc_ *= 1.0 / 0.999;
        } else {
            if (conflicts_here >= budget) {
                cancel_until(0);
                return false; // restart
            }
            if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >=
                max_learnts_)
                reduce_db();

            Lit next{-2};
            while (decision_level() < static_cast<int>(assumptions.size())) {
                const Lit a = assumptions[decision_level()];
                if (value(a) == Value::True) {
                    new_decision_level(); // already implied; placeholder level
                } else if (value(a) == Value::False) {
                    result = false; // conflicts with the assumptions
                    return true;
                } else {
                    next = a;
                    break;
                }
            }
            if (next.x == -2) {
                ++stats_.decisions;
                const Var v = pick_branch_var();
                if (v == -1) {
                    result = true;
                    return true;
                }
                next = Lit::make(v, polarity_[v] == 0);
            }
            new_decision_level();
            enqueue(next, kNullClause);
        }
    }
}

bool Solver::solve(std::span<const Lit> assumptions) {
    ++stats_.solve_calls;
    if (!ok_) return false;

    max_learnts_ = std::max(10000.0, static_cast<double>(clauses_.size()) * 0.3);
    bool result = false;
    bool done = false;
    for (int restarts = 0; !done; ++restarts) {
        const auto budget = static_cast<std::int64_t>(luby(2.0, restarts) * 100);
        done = search_done(result, assumptions, budget);
    }

    if (result) {
        model_.assign(assigns_.begin(), assigns_.end());
        for (auto& v : model_)
            if (v == Value::Undef) v = Value::False;
    }
    cancel_until(0);
    return result;
}

} // namespace bsnn::sat
