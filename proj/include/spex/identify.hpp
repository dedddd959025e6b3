#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spex/spectrum.hpp"

namespace spex {

enum class Direction { max, min };
enum class Optimality { proven, heuristic };
enum class SolveMethod { brute, bnb };

/// Cardinality-constrained optimization of a sparse surrogate written as a
/// 0/1 polynomial Σ_R I(R) Π_{i∈R} x_i. A monomial variable y_R equals the
/// product of its singletons, so the solvers branch on the singletons of the
/// relevant features and read every y_R off the assignment.
struct IdentProgram {
  MobiusSpectrum mobius;
  Direction direction = Direction::max;
  std::size_t retain = 0;                    // |S| = n - r
  std::vector<std::size_t> relevant_vars;    // features in some support set, ascending

  std::size_t n() const { return mobius.n(); }
};

struct IdentSolution {
  Mask mask;
  double objective = 0.0;
  Optimality optimality = Optimality::proven;
  std::size_t nodes_explored = 0;
  Direction direction = Direction::max;
};

struct SolveLimits {
  std::size_t max_nodes = 1'000'000;
  double max_seconds = 0.0;  // 0: no time limit
};

/// Largest relevant-variable count the brute-force solver enumerates.
inline constexpr std::size_t kMaxBruteVars = 24;

/// Program removing `remove` features (retaining n - remove).
IdentProgram build_program(const FourierSpectrum& spec, std::size_t remove, Direction direction);
IdentProgram build_program(const MobiusSpectrum& mobius, std::size_t remove, Direction direction);

/// Exact optimum over |S| = retain. Ties prefer the lexicographically
/// smallest retained index list; unused slots take the lowest-index
/// irrelevant features.
IdentSolution solve(const IdentProgram& program, SolveMethod method,
                    const SolveLimits& limits = {});

struct RemovalResult {
  IdentSolution best;       // farther of the two from f̂([n])
  IdentSolution maximizer;
  IdentSolution minimizer;
  double full_value = 0.0;  // f̂([n])
  double gap = 0.0;         // |f̂([n]) - f̂(S*)|
};

/// argmax_{|S| = n-r} |f̂([n]) - f̂(S)|, as one max and one min solve.
RemovalResult identify_removal(const FourierSpectrum& spec, std::size_t remove,
                               SolveMethod method = SolveMethod::bnb,
                               const SolveLimits& limits = {});

std::string to_string(Direction d);
std::string to_string(Optimality o);
Direction parse_direction(const std::string& s);
SolveMethod parse_method(const std::string& s);

}  // namespace spex
