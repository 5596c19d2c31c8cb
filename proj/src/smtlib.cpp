#include "bsnn/smtlib.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <sstream>

namespace bsnn {

std::string smt_var_name(const CausalModel& model, int var_id) {
    const Variable v = model.var_of(var_id);
    return "p_" + to_string(v.neuron) + "_" + std::to_string(v.time);
}

namespace {

std::string smt_int(int value) {
    if (value < 0) return "(- " + std::to_string(-value) + ")";
    return std::to_string(value);
}

// sum of predecessor variables (negative ones subtracted) plus an optional
// integer constant, as a well-formed term even when pieces are missing
std::string sum_term(const CausalModel& model, NeuronId neuron, int time, int constant,
                     bool with_constant) {
    const int n = model.arch().neuron_count();
    std::vector<std::string> terms;
    for (const int g : model.positive_pre(neuron))
        terms.push_back(smt_var_name(model, time * n + g));
    for (const int g : model.negative_pre(neuron))
        terms.push_back("(- " + smt_var_name(model, time * n + g) + ")");
    if (with_constant && constant != 0) terms.push_back(smt_int(constant));
    if (terms.empty()) return "0";
    if (terms.size() == 1) return terms[0];
    std::string out = "(+";
    for (const auto& t : terms) out += " " + t;
    return out + ")";
}

std::string tr_expr(const CausalModel& model, const BoolExpr& e) {
    using Kind = BoolExpr::Kind;
    switch (e.kind()) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Var: return "(= " + smt_var_name(model, e.var_id()) + " 1)";
    case Kind::Not: return "(not " + tr_expr(model, e.children()[0]) + ")";
    case Kind::And:
    case Kind::Or: {
        std::string out = e.kind() == Kind::And ? "(and" : "(or";
        for (const auto& c : e.children()) out += " " + tr_expr(model, c);
        return out + ")";
    }
    case Kind::Implies:
        return "(=> " + tr_expr(model, e.children()[0]) + " " + tr_expr(model, e.children()[1]) + ")";
    case Kind::Iff:
        return "(= " + tr_expr(model, e.children()[0]) + " " + tr_expr(model, e.children()[1]) + ")";
    }
    return "false";
}

} // namespace

std::string emit_smt_core(const CausalModel& model) {
    std::ostringstream out;
    out << "(set-logic QF_LIA)\n";
    const int var_count = model.variable_count();
    for (int v = 0; v < var_count; ++v)
        out << "(declare-const " << smt_var_name(model, v) << " Int)\n";
    for (int v = 0; v < var_count; ++v) {
        const std::string name = smt_var_name(model, v);
        out << "(assert (or (= " << name << " 1) (= " << name << " 0)))\n";
    }

    const auto& arch = model.arch();
    for (int t = 0; t <= model.t_end(); ++t) {
        for (int g = arch.input_count(); g < arch.neuron_count(); ++g) {
            const NeuronId id = arch.neuron_at(g);
            const std::string p = smt_var_name(model, model.var_id(id, t));
            if (t == 0) {
                out << "(assert (= " << p << " 0))\n";
                continue;
            }
            const Equation& eq = model.equation(id, t);
            const std::string prev = smt_var_name(model, model.var_id(id, t - 1));
            const std::string tau = smt_int(arch.threshold(id));
            out << "(assert (= (= " << p << " 1) (and "
                << "(=> (= " << prev << " 0) (>= "
                << sum_term(model, id, t, eq.carried_potential, true) << " " << tau << ")) "
                << "(=> (= " << prev << " 1) (>= " << sum_term(model, id, t, 0, false) << " "
                << tau << ")))))\n";
        }
    }
    return out.str();
}

SmtScript emit_smtlib(const CausalModel& model, const PartialAssignment& assumptions,
                      const BoolExpr& conclusion, bool get_values) {
    SmtScript script;
    std::ostringstream out;
    out << emit_smt_core(model);
    for (const auto& [var, value] : assumptions)
        out << "(assert (= " << smt_var_name(model, var) << " " << (value ? 1 : 0) << "))\n";
    out << "(assert (not " << tr_expr(model, conclusion) << "))\n";
    out << "(check-sat)\n";
    if (get_values) {
        out << "(get-value (";
        for (int v = 0; v < model.variable_count(); ++v) {
            if (v > 0) out << ' ';
            out << smt_var_name(model, v);
        }
        out << "))\n";
    }
    script.text = out.str();
    return script;
}

std::string default_smt_solver_command() {
    if (const char* env = std::getenv("BSNN_SMT_SOLVER"); env && *env) return env;
    std::error_code ec;
    const auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        const auto sibling = self.parent_path() / "liasolve";
        if (std::filesystem::exists(sibling, ec)) return sibling.string();
    }
    return "liasolve";
}

// ---------------------------------------------------------------------------
// subprocess plumbing

namespace {

struct ChildProcess {
    int in_fd = -1;  // write end of child's stdin
    int out_fd = -1; // read end of child's stdout
    pid_t pid = -1;
};

ChildProcess spawn_shell(const std::string& command) {
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw SolverCrashError("pipe() failed");
    const pid_t pid = fork();
    if (pid < 0) throw SolverCrashError("fork() failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    return {in_pipe[1], out_pipe[0], pid};
}

void write_all(int fd, const std::string& text) {
    std::size_t off = 0;
    while (off < text.size()) {
        const ssize_t n = ::write(fd, text.data() + off, text.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw SolverCrashError("solver process closed its input");
        }
        off += static_cast<std::size_t>(n);
    }
}

} // namespace

SolverVerdict run_external_solver(const SmtScript& script, const std::string& command,
                                  std::chrono::milliseconds timeout,
                                  const CausalModel* model_for_values) {
    const auto start = std::chrono::steady_clock::now();
    ChildProcess child = spawn_shell(command);
    try {
        write_all(child.in_fd, script.text);
        write_all(child.in_fd, "(exit)\n");
    } catch (const SolverError&) {
        // fall through; output (if any) decides the failure mode below
    }
    close(child.in_fd);

    std::string output;
    char buf[4096];
    for (;;) {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        const auto remaining = timeout - std::chrono::duration_cast<std::chrono::milliseconds>(elapsed);
        if (remaining.count() <= 0) {
            kill(child.pid, SIGKILL);
            waitpid(child.pid, nullptr, 0);
            close(child.out_fd);
            throw SolverTimeoutError("external solver exceeded " + std::to_string(timeout.count()) +
                                     " ms");
        }
        pollfd pfd{child.out_fd, POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (pr <= 0) continue;
        const ssize_t n = ::read(child.out_fd, buf, sizeof(buf));
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (n == 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    close(child.out_fd);
    int wstatus = 0;
    waitpid(child.pid, &wstatus, 0);

    SolverVerdict verdict;
    std::istringstream lines(output);
    std::string line;
    bool got_status = false;
    while (std::getline(lines, line)) {
        if (line == "sat") {
            verdict.status = SolveStatus::Sat;
            got_status = true;
            break;
        }
        if (line == "unsat") {
            verdict.status = SolveStatus::Unsat;
            got_status = true;
            break;
        }
        if (line.rfind("(error", 0) == 0)
            throw SolverOutputError("solver reported: " + line);
    }
    if (!got_status) {
        if (WIFEXITED(wstatus) && WEXITSTATUS(wstatus) != 0)
            throw SolverCrashError("solver exited with status " +
                                   std::to_string(WEXITSTATUS(wstatus)) + " and no verdict");
        throw SolverOutputError("no sat/unsat status in solver output");
    }

    if (verdict.status == SolveStatus::Sat && model_for_values != nullptr) {
        // remainder of the stream holds the (get-value ...) s-expression
        std::string rest;
        std::getline(lines, rest, '\0');
        std::vector<std::uint8_t> values(model_for_values->variable_count(), 0);
        for (int v = 0; v < model_for_values->variable_count(); ++v) {
            const std::string name = smt_var_name(*model_for_values, v);
            const auto pos = rest.find("(" + name + " ");
            if (pos == std::string::npos)
                throw SolverOutputError("get-value output missing " + name);
            const std::size_t val_pos = pos + name.size() + 2;
            values[v] = rest.compare(val_pos, 1, "1") == 0 ? 1 : 0;
        }
        verdict.model = std::move(values);
    }
    verdict.stats.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return verdict;
}

SmtSolverProcess::SmtSolverProcess(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    const ChildProcess child = spawn_shell(command);
    to_child_ = child.in_fd;
    from_child_ = child.out_fd;
    pid_ = child.pid;
}

SmtSolverProcess::~SmtSolverProcess() { kill_process(); }

void SmtSolverProcess::kill_process() {
    if (pid_ < 0) return;
    if (to_child_ >= 0) {
        ::write(to_child_, "(exit)\n", 7);
        close(to_child_);
        to_child_ = -1;
    }
    // give it a moment to exit cleanly, then force
    for (int i = 0; i < 50; ++i) {
        if (waitpid(static_cast<pid_t>(pid_), nullptr, WNOHANG) != 0) {
            pid_ = -1;
            break;
        }
        usleep(2000);
    }
    if (pid_ >= 0) {
        kill(static_cast<pid_t>(pid_), SIGKILL);
        waitpid(static_cast<pid_t>(pid_), nullptr, 0);
        pid_ = -1;
    }
    if (from_child_ >= 0) {
        close(from_child_);
        from_child_ = -1;
    }
}

void SmtSolverProcess::send(const std::string& text) {
    if (to_child_ < 0) throw SolverCrashError("solver process is gone");
    write_all(to_child_, text);
}

std::string SmtSolverProcess::read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            kill_process();
            throw SolverTimeoutError("external solver exceeded " +
                                     std::to_string(timeout_.count()) + " ms");
        }
        pollfd pfd{from_child_, POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (pr <= 0) continue;
        char buf[4096];
        const ssize_t n = ::read(from_child_, buf, sizeof(buf));
        if (n < 0) {
            if (errno == EINTR) continue;
            kill_process();
            throw SolverCrashError("read from solver failed");
        }
        if (n == 0) {
            kill_process();
            throw SolverCrashError("solver process closed its output unexpectedly");
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

SolveStatus SmtSolverProcess::check_sat() {
    send("(check-sat)\n");
    for (;;) {
        const std::string line = read_line();
        if (line == "sat") return SolveStatus::Sat;
        if (line == "unsat") return SolveStatus::Unsat;
        if (line.empty()) continue;
        kill_process();
        throw SolverOutputError("unexpected solver output: " + line);
    }
}

SmtEntailmentSession::SmtEntailmentSession(const CausalModel& model, const BoolExpr& conclusion,
                                           const std::string& command,
                                           std::chrono::milliseconds timeout)
    : model_(model), process_(command, timeout) {
    std::string core = emit_smt_core(model);
    core += "(assert (not " + tr_expr(model, conclusion) + "))\n";
    process_.send(core);
}

bool SmtEntailmentSession::entails(std::span<const std::pair<int, bool>> assumptions) {
    ++queries_;
    std::ostringstream frame;
    frame << "(push 1)\n";
    for (const auto& [var, value] : assumptions)
        frame << "(assert (= " << smt_var_name(model_, var) << " " << (value ? 1 : 0) << "))\n";
    process_.send(frame.str());
    const SolveStatus status = process_.check_sat();
    process_.send("(pop 1)\n");
    return status == SolveStatus::Unsat;
}

} // namespace bsnn
