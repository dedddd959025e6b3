#include "spex/identify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "spex/errors.hpp"

namespace spex {

std::string to_string(Direction d) { return d == Direction::max ? "max" : "min"; }
std::string to_string(Optimality o) { return o == Optimality::proven ? "proven" : "heuristic"; }

Direction parse_direction(const std::string& s) {
  if (s == "max") return Direction::max;
  if (s == "min") return Direction::min;
  throw InvalidArgument("unknown direction '" + s + "' (expected max or min)");
}

SolveMethod parse_method(const std::string& s) {
  if (s == "brute") return SolveMethod::brute;
  if (s == "bnb") return SolveMethod::bnb;
  throw InvalidArgument("unknown method '" + s + "' (expected brute or bnb)");
}

IdentProgram build_program(const MobiusSpectrum& mobius, std::size_t remove, Direction direction) {
  const std::size_t n = mobius.n();
  if (remove > n)
    throw InvalidArgument("cannot remove " + std::to_string(remove) + " of " + std::to_string(n) +
                          " features");
  IdentProgram p{mobius, direction, n - remove, {}};
  Mask used(n);
  for (const auto& t : mobius.terms()) used = used | t.set;
  p.relevant_vars = used.indices();
  return p;
}

IdentProgram build_program(const FourierSpectrum& spec, std::size_t remove, Direction direction) {
  if (remove > spec.n())
    throw InvalidArgument("cannot remove " + std::to_string(remove) + " of " +
                          std::to_string(spec.n()) + " features");
  return build_program(fourier_to_mobius(spec), remove, direction);
}

namespace {

// Program restated over positions 0..m-1 of the relevant variables.
struct Compiled {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t retain = 0;
  std::size_t min_ones = 0;  // relevant features that must be retained
  std::size_t max_ones = 0;
  double sign = 1.0;         // internal objective is sign * f̂
  std::vector<std::size_t> var_feature;         // position -> feature
  std::vector<std::vector<std::size_t>> term_vars;  // canonical term order
  std::vector<double> term_coef;
  std::vector<std::size_t> irrelevant;          // ascending

  explicit Compiled(const IdentProgram& p, const std::vector<std::size_t>& order) {
    n = p.n();
    m = p.relevant_vars.size();
    retain = p.retain;
    sign = p.direction == Direction::max ? 1.0 : -1.0;
    var_feature = order;
    std::vector<std::size_t> pos_of(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < order.size(); ++i) pos_of[order[i]] = i;
    for (const auto& t : p.mobius.terms()) {
      std::vector<std::size_t> vars;
      t.set.for_each([&](std::size_t f) { vars.push_back(pos_of[f]); });
      term_vars.push_back(std::move(vars));
      term_coef.push_back(t.coef);
    }
    Mask rel = Mask::from_indices(n, std::span<const std::size_t>(p.relevant_vars));
    for (std::size_t f = 0; f < n; ++f)
      if (!rel.test(f)) irrelevant.push_back(f);
    max_ones = std::min(m, retain);
    min_ones = retain > irrelevant.size() ? retain - irrelevant.size() : 0;
  }

  // f̂ at the assignment, summed in the same term order as MobiusSpectrum::evaluate.
  template <class IsOn>
  double score(IsOn&& on) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < term_vars.size(); ++t) {
      bool all = true;
      for (auto v : term_vars[t])
        if (!on(v)) {
          all = false;
          break;
        }
      if (all) acc += term_coef[t];
    }
    return acc;
  }

  template <class IsOn>
  Mask to_mask(IsOn&& on) const {
    Mask mask(n);
    std::size_t ones = 0;
    for (std::size_t v = 0; v < m; ++v)
      if (on(v)) {
        mask.set(var_feature[v]);
        ++ones;
      }
    for (std::size_t i = 0; ones < retain && i < irrelevant.size(); ++i, ++ones) mask.set(irrelevant[i]);
    return mask;
  }
};

// Candidate comparison in the internal (maximize) sense with the
// lexicographic tie rule.
bool better(double value, const Mask& mask, double best_value, const Mask* best_mask) {
  if (!best_mask) return true;
  if (value != best_value) return value > best_value;
  return lex_less(mask, *best_mask);
}

IdentSolution solve_brute(const IdentProgram& program) {
  const auto m = program.relevant_vars.size();
  if (m > kMaxBruteVars)
    throw CapacityError("brute force supports at most " + std::to_string(kMaxBruteVars) +
                        " relevant features, program has " + std::to_string(m));
  const Compiled c(program, program.relevant_vars);
  std::vector<std::uint32_t> term_bits;
  for (const auto& vars : c.term_vars) {
    std::uint32_t b = 0;
    for (auto v : vars) b |= std::uint32_t{1} << v;
    term_bits.push_back(b);
  }

  IdentSolution sol;
  sol.direction = program.direction;
  bool have = false;
  double best = 0.0;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
    const auto ones = static_cast<std::size_t>(std::popcount(code));
    if (ones < c.min_ones || ones > c.max_ones) continue;
    ++sol.nodes_explored;
    double acc = 0.0;
    for (std::size_t t = 0; t < term_bits.size(); ++t)
      if ((code & term_bits[t]) == term_bits[t]) acc += c.term_coef[t];
    const double value = c.sign * acc;
    auto on = [&](std::size_t v) { return ((code >> v) & 1U) != 0; };
    if (have && value < best) continue;
    const Mask mask = c.to_mask(on);
    if (better(value, mask, best, have ? &sol.mask : nullptr)) {
      best = value;
      sol.mask = mask;
      sol.objective = acc;
      have = true;
    }
  }
  sol.optimality = Optimality::proven;
  return sol;
}

class BranchAndBound {
 public:
  BranchAndBound(const IdentProgram& program, const SolveLimits& limits)
      : c_(program, branching_order(program)), limits_(limits) {
    const std::size_t terms = c_.term_vars.size();
    need_.resize(terms);
    dead_.assign(terms, 0);
    var_terms_.resize(c_.m);
    std::size_t max_deg = 0;
    for (std::size_t t = 0; t < terms; ++t) {
      need_[t] = c_.term_vars[t].size();
      max_deg = std::max(max_deg, need_[t]);
      for (auto v : c_.term_vars[t]) var_terms_[v].push_back(t);
      const double w = c_.sign * c_.term_coef[t];
      if (need_[t] == 0) fixed_ += w;
    }
    bucket_.assign(max_deg + 1, 0.0);
    for (std::size_t t = 0; t < terms; ++t)
      if (need_[t] > 0) bucket_add(t, +1.0);
    assign_.assign(c_.m, 0);
    sol_.direction = program.direction;
  }

  IdentSolution run() {
    start_ = std::chrono::steady_clock::now();
    search(0, 0);
    sol_.optimality = aborted_ ? Optimality::heuristic : Optimality::proven;
    sol_.nodes_explored = nodes_;
    if (!have_) {
      // Node budget ran out before any leaf: fall back to a feasible completion.
      for (std::size_t v = 0; v < c_.min_ones; ++v) assign_[v] = 1;
      for (std::size_t v = c_.min_ones; v < c_.m; ++v) assign_[v] = 0;
      auto on = [&](std::size_t v) { return assign_[v] == 1; };
      sol_.mask = c_.to_mask(on);
      sol_.objective = c_.score(on);
      sol_.optimality = Optimality::heuristic;
    }
    return sol_;
  }

 private:
  static std::vector<std::size_t> branching_order(const IdentProgram& p) {
    std::vector<double> weight(p.n(), 0.0);
    for (const auto& t : p.mobius.terms()) t.set.for_each([&](std::size_t f) { weight[f] += std::abs(t.coef); });
    auto order = p.relevant_vars;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
    return order;
  }

  void bucket_add(std::size_t t, double dir) {
    const double w = c_.sign * c_.term_coef[t];
    if (w > 0.0) bucket_[need_[t]] += dir * w;
  }

  double bound(std::size_t ones) const {
    double b = fixed_;
    const std::size_t room = c_.max_ones - ones;
    for (std::size_t k = 1; k < bucket_.size() && k <= room; ++k) b += bucket_[k];
    return b;
  }

  void set_one(std::size_t v) {
    for (auto t : var_terms_[v]) {
      if (dead_[t]) continue;
      bucket_add(t, -1.0);
      if (--need_[t] == 0)
        fixed_ += c_.sign * c_.term_coef[t];
      else
        bucket_add(t, +1.0);
    }
  }
  void unset_one(std::size_t v) {
    for (auto t : var_terms_[v]) {
      if (dead_[t]) continue;
      if (need_[t] == 0)
        fixed_ -= c_.sign * c_.term_coef[t];
      else
        bucket_add(t, -1.0);
      ++need_[t];
      bucket_add(t, +1.0);
    }
  }
  void set_zero(std::size_t v) {
    for (auto t : var_terms_[v]) {
      if (dead_[t]++) continue;
      bucket_add(t, -1.0);
    }
  }
  void unset_zero(std::size_t v) {
    for (auto t : var_terms_[v]) {
      if (--dead_[t]) continue;
      bucket_add(t, +1.0);
    }
  }

  bool out_of_budget() {
    if (nodes_ >= limits_.max_nodes) return true;
    if (limits_.max_seconds > 0.0 && (nodes_ & 1023) == 0) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
      if (dt.count() > limits_.max_seconds) return true;
    }
    return false;
  }

  void search(std::size_t depth, std::size_t ones) {
    if (aborted_) return;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    ++nodes_;
    if (ones > c_.max_ones || ones + (c_.m - depth) < c_.min_ones) return;
    if (have_) {
      const double tol = 1e-9 * (1.0 + std::abs(best_));
      if (bound(ones) < best_ - tol) return;
    }
    if (depth == c_.m) {
      auto on = [&](std::size_t v) { return assign_[v] == 1; };
      const double f = c_.score(on);
      const double value = c_.sign * f;
      if (have_ && value < best_) return;
      const Mask mask = c_.to_mask(on);
      if (better(value, mask, best_, have_ ? &sol_.mask : nullptr)) {
        best_ = value;
        sol_.mask = mask;
        sol_.objective = f;
        have_ = true;
      }
      return;
    }
    assign_[depth] = 1;
    set_one(depth);
    search(depth + 1, ones + 1);
    unset_one(depth);
    assign_[depth] = 0;
    set_zero(depth);
    search(depth + 1, ones);
    unset_zero(depth);
  }

  Compiled c_;
  SolveLimits limits_;
  std::vector<std::size_t> need_;
  std::vector<std::size_t> dead_;
  std::vector<std::vector<std::size_t>> var_terms_;
  std::vector<double> bucket_;
  double fixed_ = 0.0;
  std::vector<char> assign_;
  std::size_t nodes_ = 0;
  bool aborted_ = false;
  bool have_ = false;
  double best_ = -std::numeric_limits<double>::infinity();
  IdentSolution sol_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

IdentSolution solve(const IdentProgram& program, SolveMethod method, const SolveLimits& limits) {
  if (program.retain > program.n())
    throw InvalidArgument("cardinality target exceeds n");
  if (method == SolveMethod::brute) return solve_brute(program);
  return BranchAndBound(program, limits).run();
}

RemovalResult identify_removal(const FourierSpectrum& spec, std::size_t remove, SolveMethod method,
                               const SolveLimits& limits) {
  const auto mobius = fourier_to_mobius(spec);
  RemovalResult r;
  r.maximizer = solve(build_program(mobius, remove, Direction::max), method, limits);
  r.minimizer = solve(build_program(mobius, remove, Direction::min), method, limits);
  r.full_value = mobius.evaluate(Mask::full(spec.n()));
  const double up = std::abs(r.full_value - r.maximizer.objective);
  const double down = std::abs(r.full_value - r.minimizer.objective);
  r.best = down > up ? r.minimizer : r.maximizer;
  r.gap = std::max(up, down);
  return r;
}

}  // namespace spex
