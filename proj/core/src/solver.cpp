#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "cellmorph/solver.hpp"

namespace cellmorph {

std::string solver_name(SolverKind k) {
    switch (k) {
        case SolverKind::Spacer: return "spacer";
        case SolverKind::Z3Pdr: return "z3pdr";
        case SolverKind::Eldarica: return "eldarica";
    }
    return "?";
}

std::optional<SolverKind> solver_from_name(const std::string& name) {
    if (name == "spacer") return SolverKind::Spacer;
    if (name == "z3pdr") return SolverKind::Z3Pdr;
    if (name == "eldarica") return SolverKind::Eldarica;
    return std::nullopt;
}

std::string solver_binary(SolverKind k) {
    const char* env = k == SolverKind::Eldarica ? std::getenv("CELLMORPH_ELDARICA")
                                                : std::getenv("CELLMORPH_Z3");
    if (env && *env) return env;
    return k == SolverKind::Eldarica ? "eldarica" : "z3";
}

namespace {

std::string run_capture(const std::string& cmd, int* exit_code) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        *exit_code = -1;
        return out;
    }
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int status = pclose(pipe);
    *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'')
            q += "'\\''";
        else
            q += c;
    }
    return q + "'";
}

}  // namespace

bool solver_available(SolverKind k) {
    int code = 0;
    run_capture("command -v " + shell_quote(solver_binary(k)) + " 2>/dev/null", &code);
    return code == 0;
}

SolverVerdict run_solver(const std::string& file, SolverKind kind, int timeout_sec) {
    SolverVerdict v;
    std::string bin = solver_binary(kind);
    std::ostringstream cmd;
    cmd << "timeout " << timeout_sec << "s " << shell_quote(bin) << " ";
    switch (kind) {
        case SolverKind::Spacer:
            cmd << "fp.engine=spacer " << shell_quote(file);
            break;
        case SolverKind::Z3Pdr:
            // Modern Z3 routes its PDR engine through Spacer.
            cmd << "fp.engine=spacer " << shell_quote(file);
            break;
        case SolverKind::Eldarica:
            cmd << "-splitClauses " << shell_quote(file);
            break;
    }
    cmd << " 2>&1";
    int code = 0;
    std::string out = run_capture(cmd.str(), &code);
    if (code == 124) {
        v.kind = SolverVerdict::Kind::Timeout;
        v.diagnostic = out;
        return v;
    }
    // Scan line-wise for the verdict token.
    std::istringstream is(out);
    std::string line;
    bool sat = false, unsat = false, unknown = false;
    while (std::getline(is, line)) {
        if (line == "sat") sat = true;
        if (line == "unsat") unsat = true;
        if (line == "unknown") unknown = true;
    }
    if (unsat) {
        v.kind = SolverVerdict::Kind::Unsat;
        v.diagnostic = out;
    } else if (sat) {
        v.kind = SolverVerdict::Kind::Sat;
        v.model = out;
    } else if (unknown) {
        v.kind = SolverVerdict::Kind::Unknown;
        v.diagnostic = out;
    } else {
        v.kind = SolverVerdict::Kind::Crash;
        v.diagnostic = out;
    }
    return v;
}

}  // namespace cellmorph
