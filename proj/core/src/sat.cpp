#include "lockleak/sat.hpp"

#include "lockleak/errors.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <sstream>

namespace lockleak {

std::string_view to_string(ExhaustedBound bound) {
    switch (bound) {
    case ExhaustedBound::None: return "none";
    case ExhaustedBound::WallClock: return "wall_clock";
    case ExhaustedBound::Conflicts: return "conflicts";
    }
    return "none";
}

namespace {

// Internal literal: 2 * var + sign, var 0-based.
using Lit = std::uint32_t;
constexpr int kNoReason = -1;

inline Lit make_lit(int dimacs) {
    const auto v = static_cast<Lit>(std::abs(dimacs) - 1);
    return 2 * v + (dimacs < 0 ? 1u : 0u);
}
inline Lit neg(Lit l) { return l ^ 1u; }
inline std::uint32_t var_of(Lit l) { return l >> 1; }

enum class Val : std::int8_t { False = -1, Undef = 0, True = 1 };

struct Clause {
    std::vector<Lit> lits;
    double activity = 0.0;
    bool learnt = false;
    bool deleted = false;
};

struct Watcher {
    std::uint32_t cref;
    Lit blocker;
};

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
    double r = 1.0;
    for (int i = 0; i < seq; ++i) r *= y;
    return r;
}

} // namespace

struct Solver::Impl {
    std::vector<Clause> clauses;
    std::vector<std::uint32_t> free_slots;
    std::vector<std::vector<Watcher>> watches; // indexed by literal
    std::vector<Val> assigns;
    std::vector<int> level;
    std::vector<int> reason;
    std::vector<char> polarity; // saved phase, 1 = negative
    std::vector<double> activity;
    std::vector<char> seen;
    std::vector<Lit> trail;
    std::vector<std::size_t> trail_lim;
    std::size_t qhead = 0;
    bool ok = true;

    // Original (non-learnt) clauses in DIMACS form, for model checking.
    std::vector<std::vector<int>> originals;

    // VSIDS heap of variables keyed by activity.
    std::vector<std::uint32_t> heap;
    std::vector<int> heap_pos;
    double var_inc = 1.0;
    double cla_inc = 1.0;
    static constexpr double var_decay = 0.95;
    static constexpr double cla_decay = 0.999;

    std::size_t num_learnts = 0;
    double max_learnts = 0.0;

    int nvars() const { return static_cast<int>(assigns.size()); }
    int decision_level() const { return static_cast<int>(trail_lim.size()); }

    Val value(Lit l) const {
        const Val v = assigns[var_of(l)];
        if (v == Val::Undef) return v;
        return (l & 1u) ? static_cast<Val>(-static_cast<int>(v)) : v;
    }

    // --- heap ---
    bool heap_less(std::uint32_t a, std::uint32_t b) const {
        if (activity[a] != activity[b]) return activity[a] > activity[b];
        return a < b;
    }
    void heap_up(std::size_t i) {
        const std::uint32_t x = heap[i];
        while (i > 0) {
            const std::size_t p = (i - 1) / 2;
            if (!heap_less(x, heap[p])) break;
            heap[i] = heap[p];
            heap_pos[heap[i]] = static_cast<int>(i);
            i = p;
        }
        heap[i] = x;
        heap_pos[x] = static_cast<int>(i);
    }
    void heap_down(std::size_t i) {
        const std::uint32_t x = heap[i];
        const std::size_t n = heap.size();
        for (;;) {
            std::size_t c = 2 * i + 1;
            if (c >= n) break;
            if (c + 1 < n && heap_less(heap[c + 1], heap[c])) ++c;
            if (!heap_less(heap[c], x)) break;
            heap[i] = heap[c];
            heap_pos[heap[i]] = static_cast<int>(i);
            i = c;
        }
        heap[i] = x;
        heap_pos[x] = static_cast<int>(i);
    }
    void heap_insert(std::uint32_t v) {
        if (heap_pos[v] >= 0) return;
        heap.push_back(v);
        heap_pos[v] = static_cast<int>(heap.size() - 1);
        heap_up(heap.size() - 1);
    }
    std::uint32_t heap_pop() {
        const std::uint32_t top = heap.front();
        heap_pos[top] = -1;
        const std::uint32_t last = heap.back();
        heap.pop_back();
        if (!heap.empty()) {
            heap[0] = last;
            heap_pos[last] = 0;
            heap_down(0);
        }
        return top;
    }

    void bump_var(std::uint32_t v) {
        activity[v] += var_inc;
        if (activity[v] > 1e100) {
            for (auto& a : activity) a *= 1e-100;
            var_inc *= 1e-100;
        }
        if (heap_pos[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos[v]));
    }
    void bump_clause(Clause& c) {
        c.activity += cla_inc;
        if (c.activity > 1e20) {
            for (auto& cl : clauses)
                if (cl.learnt) cl.activity *= 1e-20;
            cla_inc *= 1e-20;
        }
    }

    int new_var() {
        const auto v = static_cast<std::uint32_t>(assigns.size());
        assigns.push_back(Val::Undef);
        level.push_back(0);
        reason.push_back(kNoReason);
        polarity.push_back(1);
        activity.push_back(0.0);
        seen.push_back(0);
        heap_pos.push_back(-1);
        watches.emplace_back();
        watches.emplace_back();
        heap_insert(v);
        return static_cast<int>(v) + 1;
    }

    void assign(Lit l, int from) {
        const auto v = var_of(l);
        assigns[v] = (l & 1u) ? Val::False : Val::True;
        level[v] = decision_level();
        reason[v] = from;
        trail.push_back(l);
    }

    std::uint32_t store(Clause c) {
        if (!free_slots.empty()) {
            const auto idx = free_slots.back();
            free_slots.pop_back();
            clauses[idx] = std::move(c);
            return idx;
        }
        clauses.push_back(std::move(c));
        return static_cast<std::uint32_t>(clauses.size() - 1);
    }

    void attach(std::uint32_t cref) {
        const auto& c = clauses[cref];
        watches[neg(c.lits[0])].push_back({cref, c.lits[1]});
        watches[neg(c.lits[1])].push_back({cref, c.lits[0]});
    }

    bool add_clause(std::span<const int> dimacs) {
        if (!ok) return false;
        assert(decision_level() == 0);
        for (int l : dimacs) {
            if (l == 0) throw InputError("clause literal 0 is not allowed");
            while (std::abs(l) > nvars()) new_var();
        }
        originals.emplace_back(dimacs.begin(), dimacs.end());

        std::vector<Lit> lits;
        lits.reserve(dimacs.size());
        for (int l : dimacs) lits.push_back(make_lit(l));
        std::sort(lits.begin(), lits.end());
        std::size_t w = 0;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            const Val v = value(lits[i]);
            if (v == Val::True) return true;
            if (w > 0 && lits[i] == neg(lits[w - 1])) return true;
            if (v == Val::False || (w > 0 && lits[i] == lits[w - 1])) continue;
            lits[w++] = lits[i];
        }
        lits.resize(w);
        if (lits.empty()) return ok = false;
        if (lits.size() == 1) {
            assign(lits[0], kNoReason);
            return ok = (propagate() < 0);
        }
        attach(store(Clause{std::move(lits), 0.0, false, false}));
        return true;
    }

    // Returns the conflicting clause index, or -1.
    int propagate() {
        int conflict = -1;
        while (qhead < trail.size()) {
            const Lit p = trail[qhead++];
            const Lit false_lit = neg(p);
            auto& ws = watches[p];
            std::size_t i = 0, j = 0;
            while (i < ws.size()) {
                const Watcher w = ws[i];
                if (value(w.blocker) == Val::True) {
                    ws[j++] = ws[i++];
                    continue;
                }
                Clause& c = clauses[w.cref];
                if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
                ++i;
                const Lit first = c.lits[0];
                if (first != w.blocker && value(first) == Val::True) {
                    ws[j++] = {w.cref, first};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.lits.size(); ++k) {
                    if (value(c.lits[k]) != Val::False) {
                        std::swap(c.lits[1], c.lits[k]);
                        watches[neg(c.lits[1])].push_back({w.cref, first});
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = {w.cref, first};
                if (value(first) == Val::False) {
                    conflict = static_cast<int>(w.cref);
                    qhead = trail.size();
                    while (i < ws.size()) ws[j++] = ws[i++];
                } else {
                    assign(first, static_cast<int>(w.cref));
                }
            }
            ws.resize(j);
            if (conflict >= 0) break;
        }
        return conflict;
    }

    bool redundant(Lit p, std::uint32_t level_mask, std::vector<Lit>& to_clear) {
        std::vector<Lit> stack{p};
        const std::size_t top = to_clear.size();
        while (!stack.empty()) {
            const Lit q = stack.back();
            stack.pop_back();
            const Clause& c = clauses[static_cast<std::size_t>(reason[var_of(q)])];
            for (std::size_t i = 1; i < c.lits.size(); ++i) {
                const Lit l = c.lits[i];
                const auto v = var_of(l);
                if (seen[v] || level[v] == 0) continue;
                if (reason[v] != kNoReason && ((1u << (level[v] & 31)) & level_mask)) {
                    seen[v] = 1;
                    stack.push_back(l);
                    to_clear.push_back(l);
                } else {
                    for (std::size_t k = top; k < to_clear.size(); ++k) seen[var_of(to_clear[k])] = 0;
                    to_clear.resize(top);
                    return false;
                }
            }
        }
        return true;
    }

    void analyze(int confl, std::vector<Lit>& learnt, int& back_level) {
        learnt.clear();
        learnt.push_back(0);
        int path = 0;
        Lit p = 0;
        bool have_p = false;
        std::size_t index = trail.size();
        do {
            Clause& c = clauses[static_cast<std::size_t>(confl)];
            if (c.learnt) bump_clause(c);
            for (std::size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
                const Lit q = c.lits[k];
                const auto v = var_of(q);
                if (!seen[v] && level[v] > 0) {
                    bump_var(v);
                    seen[v] = 1;
                    if (level[v] >= decision_level())
                        ++path;
                    else
                        learnt.push_back(q);
                }
            }
            while (!seen[var_of(trail[--index])]) {}
            p = trail[index];
            have_p = true;
            confl = reason[var_of(p)];
            seen[var_of(p)] = 0;
            --path;
        } while (path > 0);
        learnt[0] = neg(p);

        std::uint32_t mask = 0;
        for (std::size_t i = 1; i < learnt.size(); ++i) mask |= 1u << (level[var_of(learnt[i])] & 31);
        std::vector<Lit> to_clear(learnt.begin(), learnt.end());
        std::size_t w = 1;
        for (std::size_t i = 1; i < learnt.size(); ++i) {
            const auto v = var_of(learnt[i]);
            if (reason[v] == kNoReason || !redundant(learnt[i], mask, to_clear)) learnt[w++] = learnt[i];
        }
        learnt.resize(w);
        for (Lit l : to_clear) seen[var_of(l)] = 0;

        back_level = 0;
        if (learnt.size() > 1) {
            std::size_t max_i = 1;
            for (std::size_t i = 2; i < learnt.size(); ++i)
                if (level[var_of(learnt[i])] > level[var_of(learnt[max_i])]) max_i = i;
            std::swap(learnt[1], learnt[max_i]);
            back_level = level[var_of(learnt[1])];
        }
    }

    void cancel_until(int lvl) {
        if (decision_level() <= lvl) return;
        for (std::size_t c = trail.size(); c-- > trail_lim[static_cast<std::size_t>(lvl)];) {
            const auto v = var_of(trail[c]);
            assigns[v] = Val::Undef;
            reason[v] = kNoReason;
            polarity[v] = static_cast<char>(trail[c] & 1u);
            heap_insert(v);
        }
        trail.resize(trail_lim[static_cast<std::size_t>(lvl)]);
        trail_lim.resize(static_cast<std::size_t>(lvl));
        qhead = trail.size();
    }

    bool locked(std::uint32_t cref) const {
        const Clause& c = clauses[cref];
        const auto v = var_of(c.lits[0]);
        return value(c.lits[0]) == Val::True && reason[v] == static_cast<int>(cref);
    }

    void reduce_db() {
        std::vector<std::uint32_t> learnts;
        for (std::uint32_t i = 0; i < clauses.size(); ++i)
            if (clauses[i].learnt && !clauses[i].deleted) learnts.push_back(i);
        std::sort(learnts.begin(), learnts.end(), [&](std::uint32_t a, std::uint32_t b) {
            const auto& ca = clauses[a];
            const auto& cb = clauses[b];
            if ((ca.lits.size() > 2) != (cb.lits.size() > 2)) return ca.lits.size() > 2;
            if (ca.activity != cb.activity) return ca.activity < cb.activity;
            return a < b;
        });
        const double limit = cla_inc / static_cast<double>(std::max<std::size_t>(learnts.size(), 1));
        std::vector<char> drop(clauses.size(), 0);
        for (std::size_t i = 0; i < learnts.size(); ++i) {
            const auto cref = learnts[i];
            const Clause& c = clauses[cref];
            if (c.lits.size() > 2 && !locked(cref) && (i < learnts.size() / 2 || c.activity < limit)) drop[cref] = 1;
        }
        for (auto& ws : watches)
            ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return drop[w.cref] != 0; }),
                     ws.end());
        for (std::uint32_t i = 0; i < clauses.size(); ++i) {
            if (!drop[i]) continue;
            clauses[i] = Clause{};
            clauses[i].deleted = true;
            free_slots.push_back(i);
            --num_learnts;
        }
    }

    void check_model(const std::vector<bool>& model) const {
        for (const auto& c : originals) {
            bool sat = false;
            for (int l : c) {
                const bool v = model[static_cast<std::size_t>(std::abs(l))];
                if ((l > 0) == v) {
                    sat = true;
                    break;
                }
            }
            if (!sat) throw SoundnessError("SAT model violates an input clause");
        }
    }

    SolveResult solve(const SolveBudget& budget, std::span<const int> assumptions) {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        SolveResult res;
        auto elapsed = [&] { return std::chrono::duration<double, std::milli>(clock::now() - start).count(); };
        auto finish = [&](SolveStatus st, ExhaustedBound b) {
            res.status = st;
            res.exhausted = b;
            res.elapsed_ms = elapsed();
            if (st == SolveStatus::Sat) {
                res.model.assign(static_cast<std::size_t>(nvars()) + 1, false);
                for (int v = 0; v < nvars(); ++v) res.model[static_cast<std::size_t>(v) + 1] = assigns[static_cast<std::size_t>(v)] == Val::True;
                check_model(res.model);
                for (int a : assumptions)
                    if (!res.value(a)) throw SoundnessError("SAT model violates an assumption");
            }
            cancel_until(0);
            return res;
        };

        for (int a : assumptions) {
            if (a == 0) throw InputError("assumption literal 0 is not allowed");
            while (std::abs(a) > nvars()) new_var();
        }
        if (!ok) return finish(SolveStatus::Unsat, ExhaustedBound::None);
        if (propagate() >= 0) {
            ok = false;
            return finish(SolveStatus::Unsat, ExhaustedBound::None);
        }

        std::vector<Lit> assume;
        for (int a : assumptions) assume.push_back(make_lit(a));

        max_learnts = std::max(originals.size() / 3.0, 2000.0);
        int restart_no = 0;
        std::int64_t conflicts_total = 0;
        std::vector<Lit> learnt;

        for (;;) {
            const auto restart_budget = static_cast<std::int64_t>(luby(2.0, restart_no++) * 100);
            std::int64_t local = 0;
            for (;;) {
                const int confl = propagate();
                if (confl >= 0) {
                    ++conflicts_total;
                    ++local;
                    res.conflicts = conflicts_total;
                    if (decision_level() == 0) {
                        ok = false;
                        return finish(SolveStatus::Unsat, ExhaustedBound::None);
                    }
                    int back = 0;
                    analyze(confl, learnt, back);
                    cancel_until(back);
                    if (learnt.size() == 1) {
                        assign(learnt[0], kNoReason);
                    } else {
                        const auto cref = store(Clause{learnt, 0.0, true, false});
                        attach(cref);
                        bump_clause(clauses[cref]);
                        ++num_learnts;
                        assign(learnt[0], static_cast<int>(cref));
                    }
                    var_inc /= var_decay;
                    cla_inc /= cla_decay;

                    if (budget.conflicts && conflicts_total >= *budget.conflicts)
                        return finish(SolveStatus::Unknown, ExhaustedBound::Conflicts);
                    if (budget.time_ms && (conflicts_total & 63) == 0 && elapsed() >= static_cast<double>(*budget.time_ms))
                        return finish(SolveStatus::Unknown, ExhaustedBound::WallClock);
                    continue;
                }

                if (local >= restart_budget) {
                    cancel_until(0);
                    break;
                }
                if (static_cast<double>(num_learnts) - static_cast<double>(trail.size()) >= max_learnts) {
                    reduce_db();
                    max_learnts *= 1.1;
                }

                Lit next = 0;
                bool have_next = false;
                while (decision_level() < static_cast<int>(assume.size())) {
                    const Lit a = assume[static_cast<std::size_t>(decision_level())];
                    const Val v = value(a);
                    if (v == Val::True) {
                        trail_lim.push_back(trail.size());
                    } else if (v == Val::False) {
                        return finish(SolveStatus::Unsat, ExhaustedBound::None);
                    } else {
                        next = a;
                        have_next = true;
                        break;
                    }
                }
                if (!have_next) {
                    while (!heap.empty()) {
                        const auto v = heap_pop();
                        if (assigns[v] == Val::Undef) {
                            next = 2 * v + static_cast<Lit>(polarity[v]);
                            have_next = true;
                            break;
                        }
                    }
                    if (!have_next) return finish(SolveStatus::Sat, ExhaustedBound::None);
                }
                trail_lim.push_back(trail.size());
                assign(next, kNoReason);
            }
            if (budget.time_ms && elapsed() >= static_cast<double>(*budget.time_ms))
                return finish(SolveStatus::Unknown, ExhaustedBound::WallClock);
        }
    }
};

Solver::Solver() : impl_(std::make_unique<Impl>()) {}
Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

int Solver::new_var() { return impl_->new_var(); }
int Solver::num_vars() const { return impl_->nvars(); }
bool Solver::add_clause(std::span<const int> lits) { return impl_->add_clause(lits); }

void Solver::add_cnf(const Cnf& cnf) {
    while (impl_->nvars() < cnf.num_vars) impl_->new_var();
    for (const auto& c : cnf.clauses) impl_->add_clause(c);
}

SolveResult Solver::solve(const SolveBudget& budget, std::span<const int> assumptions) {
    return impl_->solve(budget, assumptions);
}

SolveResult solve(const Cnf& cnf, const SolveBudget& budget, std::span<const int> assumptions) {
    Solver s;
    s.add_cnf(cnf);
    return s.solve(budget, assumptions);
}

std::string emit_dimacs(const Cnf& cnf) {
    std::ostringstream out;
    out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
    for (const auto& c : cnf.clauses) {
        for (int l : c) out << l << ' ';
        out << "0\n";
    }
    return out.str();
}

Cnf parse_dimacs(std::string_view text) {
    Cnf cnf;
    bool header = false;
    long declared_clauses = 0;
    std::vector<int> current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](const std::string& msg) -> InputError {
        return InputError("DIMACS line " + std::to_string(line_no) + ": " + msg);
    };
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        line.remove_prefix(first);
        if (line[0] == 'c' || line[0] == '%') continue;
        if (line[0] == 'p') {
            if (header) throw fail("duplicate problem line");
            std::istringstream in{std::string(line)};
            std::string p, fmt;
            long v = -1, c = -1;
            if (!(in >> p >> fmt >> v >> c) || fmt != "cnf" || v < 0 || c < 0)
                throw fail("malformed problem line");
            cnf.num_vars = static_cast<int>(v);
            declared_clauses = c;
            header = true;
            continue;
        }
        if (!header) throw fail("clause before problem line");
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i >= line.size()) break;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            int lit = 0;
            const auto tok = line.substr(i, j - i);
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), lit);
            if (ec != std::errc{} || ptr != tok.data() + tok.size())
                throw fail("bad literal '" + std::string(tok) + "'");
            if (lit == 0) {
                cnf.clauses.push_back(std::move(current));
                current.clear();
            } else {
                if (std::abs(lit) > cnf.num_vars) throw fail("literal " + std::to_string(lit) + " exceeds variable count");
                current.push_back(lit);
            }
            i = j;
        }
    }
    if (!current.empty()) {
        line_no = 0;
        throw InputError("DIMACS: last clause is not terminated by 0");
    }
    if (!header) throw InputError("DIMACS: missing problem line");
    if (static_cast<long>(cnf.clauses.size()) != declared_clauses)
        throw InputError("DIMACS: header declares " + std::to_string(declared_clauses) + " clauses, found " +
                         std::to_string(cnf.clauses.size()));
    return cnf;
}

} // namespace lockleak
