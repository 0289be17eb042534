#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lockleak {

/// Clause list over variables 1..num_vars; a literal is a signed variable index.
struct Cnf {
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;

    int new_var() { return ++num_vars; }
    void add_clause(std::vector<int> lits) { clauses.push_back(std::move(lits)); }
    void add_clause(std::initializer_list<int> lits) { clauses.emplace_back(lits); }
};

/// Either bound may be absent. Classification runs should set at least one.
struct SolveBudget {
    std::optional<std::int64_t> time_ms;
    std::optional<std::int64_t> conflicts;

    /// 10 s wall clock and 2,000,000 conflicts, whichever is hit first.
    static SolveBudget classification_default() { return {10'000, 2'000'000}; }
};

enum class SolveStatus { Sat, Unsat, Unknown };
enum class ExhaustedBound { None, WallClock, Conflicts };

std::string_view to_string(ExhaustedBound bound);

struct SolveResult {
    SolveStatus status = SolveStatus::Unknown;
    ExhaustedBound exhausted = ExhaustedBound::None;
    std::vector<bool> model; // indexed by variable; model[0] unused
    std::int64_t conflicts = 0;
    double elapsed_ms = 0.0;

    bool value(int lit) const { return lit > 0 ? model[static_cast<std::size_t>(lit)] : !model[static_cast<std::size_t>(-lit)]; }
};

/// CDCL solver: two watched literals, first-UIP learning with clause minimization,
/// VSIDS decisions with phase saving, Luby restarts and learnt clause reduction.
/// Clauses may be added between solve() calls. Identical call sequences produce
/// identical results whenever the wall clock bound is not hit.
class Solver {
public:
    Solver();
    ~Solver();
    Solver(Solver&&) noexcept;
    Solver& operator=(Solver&&) noexcept;

    int new_var();
    int num_vars() const;
    /// Returns false once the clause set is known to be unsatisfiable at the root.
    bool add_clause(std::span<const int> lits);
    bool add_clause(std::initializer_list<int> lits) { return add_clause(std::span<const int>(lits.begin(), lits.size())); }
    void add_cnf(const Cnf& cnf);

    SolveResult solve(const SolveBudget& budget, std::span<const int> assumptions = {});

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SolveResult solve(const Cnf& cnf, const SolveBudget& budget, std::span<const int> assumptions = {});

/// "p cnf V C" header followed by one zero-terminated clause per line.
std::string emit_dimacs(const Cnf& cnf);
Cnf parse_dimacs(std::string_view text);

} // namespace lockleak
