// liasolve: a small SMT-LIB2 solver for QF_LIA problems whose integer
// variables are each pinned to {0,1} by a domain assertion (the hyp-style
// "(or (= x 1) (= x 0))" shape). Reads commands from stdin, answers
// check-sat with "sat"/"unsat" on stdout, supports push/pop and get-value.
//
// Formulas are lowered to CNF: linear atoms become sequential-counter
// cardinality constraints, the Boolean skeleton becomes Tseitin gates, and
// a CDCL solver decides the result. Assertions above level 0 are guarded
// by per-level activation literals so pop never re-encodes the core.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bsnn/cardinality.hpp"
#include "bsnn/cnf.hpp"
#include "bsnn/sat_solver.hpp"

namespace {

using bsnn::sat::Lit;
using bsnn::sat::Solver;
using bsnn::sat::Value;

// ---------------------------------------------------------------------------
// s-expressions

struct Node {
    enum class Kind { Sym, Num, List } kind;
    std::string sym;
    long long num = 0;
    std::vector<Node> items;
};

class Tokenizer {
public:
    void feed(const std::string& chunk) { buf_ += chunk; }

    // extracts one complete top-level form, if available
    std::optional<std::string> next_form() {
        std::size_t i = skip_ws(0);
        if (i >= buf_.size()) {
            buf_.clear();
            return std::nullopt;
        }
        if (buf_[i] != '(') { // bare token (unlikely but legal, e.g. symbols)
            std::size_t j = i;
            while (j < buf_.size() && !std::isspace(static_cast<unsigned char>(buf_[j])) &&
                   buf_[j] != '(' && buf_[j] != ')')
                ++j;
            if (j == buf_.size()) return std::nullopt; // may be incomplete
            std::string form = buf_.substr(i, j - i);
            buf_.erase(0, j);
            return form;
        }
        int depth = 0;
        bool in_str = false;
        for (std::size_t j = i; j < buf_.size(); ++j) {
            const char ch = buf_[j];
            if (in_str) {
                if (ch == '"') in_str = false;
                continue;
            }
            if (ch == '"') in_str = true;
            else if (ch == ';') {
                while (j < buf_.size() && buf_[j] != '\n') ++j;
                if (j >= buf_.size()) return std::nullopt;
            } else if (ch == '(')
                ++depth;
            else if (ch == ')') {
                --depth;
                if (depth == 0) {
                    std::string form = buf_.substr(i, j - i + 1);
                    buf_.erase(0, j + 1);
                    return form;
                }
            }
        }
        return std::nullopt;
    }

private:
    std::size_t skip_ws(std::size_t i) {
        while (i < buf_.size()) {
            const char ch = buf_[i];
            if (std::isspace(static_cast<unsigned char>(ch))) {
                ++i;
            } else if (ch == ';') {
                while (i < buf_.size() && buf_[i] != '\n') ++i;
            } else {
                if (i > 0) buf_.erase(0, i);
                return 0;
            }
        }
        buf_.clear();
        return 0;
    }

    std::string buf_;
};

Node parse(const std::string& text, std::size_t& pos) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) throw std::runtime_error("unexpected end of form");
    if (text[pos] == '(') {
        ++pos;
        Node list{Node::Kind::List};
        for (;;) {
            while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos >= text.size()) throw std::runtime_error("unbalanced form");
            if (text[pos] == ')') {
                ++pos;
                return list;
            }
            list.items.push_back(parse(text, pos));
        }
    }
    if (text[pos] == '"') {
        std::size_t end = text.find('"', pos + 1);
        Node s{Node::Kind::Sym};
        s.sym = text.substr(pos, end - pos + 1);
        pos = end + 1;
        return s;
    }
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end])) &&
           text[end] != '(' && text[end] != ')')
        ++end;
    std::string tok = text.substr(pos, end - pos);
    pos = end;
    if (!tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])))) {
        Node n{Node::Kind::Num};
        n.num = std::stoll(tok);
        return n;
    }
    Node s{Node::Kind::Sym};
    s.sym = std::move(tok);
    return s;
}

const std::string& head(const Node& n) {
    static const std::string empty;
    if (n.kind != Node::Kind::List || n.items.empty() || n.items[0].kind != Node::Kind::Sym)
        return empty;
    return n.items[0].sym;
}

// ---------------------------------------------------------------------------
// translation to CNF

struct LinearTerm {
    std::map<std::string, long long> coefs;
    long long constant = 0;
};

class Context {
public:
    Context() { reset(); }

    void reset() {
        solver_ = std::make_unique<Solver>();
        formula_ = bsnn::CnfFormula{};
        vars_.clear();
        levels_.clear();
        atom_cache_.clear();
        true_lit_.reset();
        last_sat_ = false;
    }

    void declare(const std::string& name) { vars_.emplace(name, -1); }
    bool declared(const std::string& name) const { return vars_.count(name) != 0; }

    void assert_term(const Node& term) {
        note_domain_pattern(term);
        const Lit root = translate_bool(term);
        flush();
        if (levels_.empty()) {
            solver_->add_clause({root});
        } else {
            solver_->add_clause({~levels_.back(), root});
        }
    }

    void push(int n) {
        for (int i = 0; i < n; ++i) {
            const int v = new_formula_var();
            flush();
            levels_.push_back(Lit::make(v));
        }
    }

    void pop(int n) {
        for (int i = 0; i < n && !levels_.empty(); ++i) {
            solver_->add_clause({~levels_.back()});
            levels_.pop_back();
        }
    }

    bool check_sat() {
        for (const auto& [name, var] : vars_) {
            if (var >= 0 && !domained_.count(name))
                throw std::runtime_error("variable " + name +
                                         " lacks a {0,1} domain assertion; fragment unsupported");
        }
        last_sat_ = solver_->solve(levels_);
        return last_sat_;
    }

    std::string value_of(const std::string& name) {
        const auto it = vars_.find(name);
        if (it == vars_.end() || !last_sat_) return "0";
        if (it->second < 0) return "0"; // unconstrained variable
        return solver_->model_value(it->second) == Value::True ? "1" : "0";
    }

private:
    int new_formula_var() {
        const int v = formula_.new_var();
        while (solver_->num_vars() < formula_.variable_count) solver_->new_var();
        return v - 1; // 0-based solver var
    }

    // move freshly produced CNF clauses into the incremental solver
    void flush() {
        while (solver_->num_vars() < formula_.variable_count) solver_->new_var();
        for (const auto& clause : formula_.clauses) {
            std::vector<Lit> lits;
            lits.reserve(clause.size());
            for (const int l : clause) lits.push_back(Lit::make(std::abs(l) - 1, l < 0));
            solver_->add_clause(std::move(lits));
        }
        formula_.clauses.clear();
    }

    Lit true_lit() {
        if (!true_lit_) {
            const int v = new_formula_var();
            solver_->add_clause({Lit::make(v)});
            true_lit_ = Lit::make(v);
        }
        return *true_lit_;
    }

    int var_bool(const std::string& name) {
        auto it = vars_.find(name);
        if (it == vars_.end()) throw std::runtime_error("undeclared symbol " + name);
        if (it->second < 0) it->second = new_formula_var();
        return it->second;
    }

    // (or (= x 1) (= x 0)) and plain (= x c) both witness a finite domain
    void note_domain_pattern(const Node& term) {
        auto eq_var_const = [this](const Node& n) -> std::optional<std::string> {
            if (head(n) != "=" || n.items.size() != 3) return std::nullopt;
            const Node *sym = nullptr, *num = nullptr;
            for (int i = 1; i <= 2; ++i) {
                if (n.items[i].kind == Node::Kind::Sym && declared(n.items[i].sym)) sym = &n.items[i];
                if (n.items[i].kind == Node::Kind::Num) num = &n.items[i];
            }
            if (sym && num && (num->num == 0 || num->num == 1)) return sym->sym;
            return std::nullopt;
        };
        if (head(term) == "or") {
            std::optional<std::string> name;
            for (std::size_t i = 1; i < term.items.size(); ++i) {
                const auto v = eq_var_const(term.items[i]);
                if (!v || (name && *name != *v)) return;
                name = v;
            }
            if (name) domained_.insert(*name);
            return;
        }
        if (const auto v = eq_var_const(term)) domained_.insert(*v);
    }

    bool is_int_term(const Node& n) const {
        if (n.kind == Node::Kind::Num) return true;
        if (n.kind == Node::Kind::Sym) return declared(n.sym);
        const std::string& h = head(n);
        return h == "+" || h == "-" || h == "*";
    }

    LinearTerm linear(const Node& n) {
        LinearTerm out;
        if (n.kind == Node::Kind::Num) {
            out.constant = n.num;
            return out;
        }
        if (n.kind == Node::Kind::Sym) {
            if (!declared(n.sym)) throw std::runtime_error("undeclared symbol " + n.sym);
            out.coefs[n.sym] += 1;
            return out;
        }
        const std::string& h = head(n);
        auto absorb = [&out](const LinearTerm& sub, long long scale) {
            out.constant += sub.constant * scale;
            for (const auto& [name, c] : sub.coefs) out.coefs[name] += c * scale;
        };
        if (h == "+") {
            for (std::size_t i = 1; i < n.items.size(); ++i) absorb(linear(n.items[i]), 1);
            return out;
        }
        if (h == "-") {
            if (n.items.size() == 2) {
                absorb(linear(n.items[1]), -1);
                return out;
            }
            absorb(linear(n.items[1]), 1);
            for (std::size_t i = 2; i < n.items.size(); ++i) absorb(linear(n.items[i]), -1);
            return out;
        }
        if (h == "*") {
            if (n.items.size() != 3) throw std::runtime_error("only binary * supported");
            const LinearTerm a = linear(n.items[1]);
            const LinearTerm b = linear(n.items[2]);
            if (a.coefs.empty()) {
                absorb(b, a.constant);
                return out;
            }
            if (b.coefs.empty()) {
                absorb(a, b.constant);
                return out;
            }
            throw std::runtime_error("nonlinear product unsupported");
        }
        throw std::runtime_error("unsupported arithmetic operator " + h);
    }

    // at least `bound` of the multiset `lits` (DIMACS ints over formula vars)
    Lit at_least_lit(std::vector<int> lits, long long bound) {
        const long long n = static_cast<long long>(lits.size());
        if (bound <= 0) return true_lit();
        if (bound > n) return ~true_lit();
        if (n == 1) return Lit::make(std::abs(lits[0]) - 1, lits[0] < 0);
        std::ostringstream key;
        std::sort(lits.begin(), lits.end());
        for (const int l : lits) key << l << ',';
        key << '#' << bound;
        const auto it = atom_cache_.find(key.str());
        if (it != atom_cache_.end()) return it->second;
        const bsnn::CardResult r = bsnn::at_least(formula_, lits, static_cast<int>(bound));
        flush();
        const Lit lit = Lit::make(r.literal - 1); // always Literal here
        atom_cache_.emplace(key.str(), lit);
        return lit;
    }

    // lhs >= rhs over {0,1} variables
    Lit linear_geq(const LinearTerm& lhs, long long rhs) {
        std::vector<int> lits;
        long long bound = rhs - lhs.constant;
        for (const auto& [name, coef] : lhs.coefs) {
            if (coef == 0) continue;
            const int b = var_bool(name) + 1;
            if (coef > 0)
                for (long long i = 0; i < coef; ++i) lits.push_back(b);
            else {
                for (long long i = 0; i < -coef; ++i) lits.push_back(-b);
                bound += -coef;
            }
        }
        return at_least_lit(std::move(lits), bound);
    }

    Lit gate_and(const std::vector<Lit>& parts) {
        if (parts.empty()) return true_lit();
        if (parts.size() == 1) return parts[0];
        const int g = new_formula_var();
        const Lit gl = Lit::make(g);
        std::vector<Lit> back{gl};
        for (const Lit l : parts) {
            solver_->add_clause({~gl, l});
            back.push_back(~l);
        }
        solver_->add_clause(std::move(back));
        return gl;
    }

    Lit gate_or(const std::vector<Lit>& parts) {
        if (parts.empty()) return ~true_lit();
        if (parts.size() == 1) return parts[0];
        const int g = new_formula_var();
        const Lit gl = Lit::make(g);
        std::vector<Lit> fwd{~gl};
        for (const Lit l : parts) {
            solver_->add_clause({gl, ~l});
            fwd.push_back(l);
        }
        solver_->add_clause(std::move(fwd));
        return gl;
    }

    Lit gate_iff(Lit a, Lit b) {
        const int g = new_formula_var();
        const Lit gl = Lit::make(g);
        solver_->add_clause({~gl, ~a, b});
        solver_->add_clause({~gl, a, ~b});
        solver_->add_clause({gl, a, b});
        solver_->add_clause({gl, ~a, ~b});
        return gl;
    }

    Lit translate_bool(const Node& n) {
        if (n.kind == Node::Kind::Sym) {
            if (n.sym == "true") return true_lit();
            if (n.sym == "false") return ~true_lit();
            throw std::runtime_error("boolean symbol unsupported: " + n.sym);
        }
        const std::string& h = head(n);
        if (h == "not") return ~translate_bool(n.items[1]);
        if (h == "and" || h == "or") {
            std::vector<Lit> parts;
            for (std::size_t i = 1; i < n.items.size(); ++i)
                parts.push_back(translate_bool(n.items[i]));
            return h == "and" ? gate_and(parts) : gate_or(parts);
        }
        if (h == "=>") {
            Lit cur = translate_bool(n.items.back());
            for (std::size_t i = n.items.size() - 1; i-- > 1;)
                cur = gate_or({~translate_bool(n.items[i]), cur});
            return cur;
        }
        if (h == "=" && n.items.size() == 3 && !is_int_term(n.items[1])) {
            return gate_iff(translate_bool(n.items[1]), translate_bool(n.items[2]));
        }
        if (h == "=" || h == ">=" || h == "<=" || h == ">" || h == "<") {
            const LinearTerm a = linear(n.items[1]);
            const LinearTerm b = linear(n.items[2]);
            LinearTerm d = a; // d = a - b
            d.constant -= b.constant;
            for (const auto& [name, c] : b.coefs) d.coefs[name] -= c;
            if (h == ">=") return linear_geq(d, 0);
            if (h == ">") return linear_geq(d, 1);
            LinearTerm neg; // -d
            neg.constant = -d.constant;
            for (const auto& [name, c] : d.coefs) neg.coefs[name] = -c;
            if (h == "<=") return linear_geq(neg, 0);
            if (h == "<") return linear_geq(neg, 1);
            // equality; single unit-coefficient variables decide directly
            if (d.coefs.size() == 1) {
                const auto& [name, coef] = *d.coefs.begin();
                if (coef == 1 || coef == -1) {
                    const long long rhs = -d.constant * (coef == 1 ? 1 : -1); // x == rhs
                    if (rhs == 0) return ~Lit::make(var_bool(name));
                    if (rhs == 1) return Lit::make(var_bool(name));
                    return ~true_lit();
                }
            }
            return gate_and({linear_geq(d, 0), linear_geq(neg, 0)});
        }
        throw std::runtime_error("unsupported boolean operator " + (h.empty() ? "?" : h));
    }

    std::unique_ptr<Solver> solver_;
    bsnn::CnfFormula formula_;
    std::map<std::string, int> vars_; // name -> solver var (-1 until used)
    std::set<std::string> domained_;
    std::vector<Lit> levels_;
    std::map<std::string, Lit> atom_cache_;
    std::optional<Lit> true_lit_;
    bool last_sat_ = false;
};

int run() {
    Context ctx;
    Tokenizer tok;
    char buf[1 << 16];
    for (;;) {
        std::optional<std::string> form;
        while (!(form = tok.next_form())) {
            const ssize_t n = ::read(STDIN_FILENO, buf, sizeof(buf));
            if (n <= 0) return 0;
            tok.feed(std::string(buf, static_cast<std::size_t>(n)));
        }
        std::size_t pos = 0;
        Node node = parse(*form, pos);
        const std::string& cmd = head(node);
        try {
            if (cmd == "set-logic" || cmd == "set-info" || cmd == "set-option") {
                continue;
            } else if (cmd == "declare-const") {
                ctx.declare(node.items[1].sym);
            } else if (cmd == "declare-fun") {
                if (node.items[2].kind == Node::Kind::List && !node.items[2].items.empty())
                    throw std::runtime_error("only 0-ary declare-fun supported");
                ctx.declare(node.items[1].sym);
            } else if (cmd == "assert") {
                ctx.assert_term(node.items[1]);
            } else if (cmd == "push") {
                ctx.push(node.items.size() > 1 ? static_cast<int>(node.items[1].num) : 1);
            } else if (cmd == "pop") {
                ctx.pop(node.items.size() > 1 ? static_cast<int>(node.items[1].num) : 1);
            } else if (cmd == "check-sat") {
                std::cout << (ctx.check_sat() ? "sat" : "unsat") << std::endl;
            } else if (cmd == "get-value") {
                std::cout << '(';
                for (std::size_t i = 0; i < node.items[1].items.size(); ++i) {
                    const std::string& name = node.items[1].items[i].sym;
                    if (i > 0) std::cout << ' ';
                    std::cout << '(' << name << ' ' << ctx.value_of(name) << ')';
                }
                std::cout << ')' << std::endl;
            } else if (cmd == "get-model") {
                std::cout << "(model)" << std::endl;
            } else if (cmd == "reset") {
                ctx.reset();
            } else if (cmd == "exit") {
                return 0;
            } else if (cmd == "echo") {
                std::cout << node.items[1].sym << std::endl;
            } else {
                throw std::runtime_error("unknown command " + (cmd.empty() ? *form : cmd));
            }
        } catch (const std::exception& ex) {
            std::cout << "(error \"" << ex.what() << "\")" << std::endl;
            return 1;
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--help" || arg == "-h") {
            std::cout << "liasolve: SMT-LIB2 QF_LIA solver for formulas whose integer\n"
                         "variables each carry a {0,1} domain assertion. Reads a script\n"
                         "on stdin; supports assert/push/pop/check-sat/get-value.\n";
            return 0;
        }
    }
    return run();
}
