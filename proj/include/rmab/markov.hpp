#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rmab/random.hpp"

namespace rmab {

using StateIndex = std::size_t;

namespace tolerance {
/// Row sums, stationary normalization.
inline constexpr double kStructural = 1e-12;
/// Fixed-point residual of pi * P = pi.
inline constexpr double kFixedPoint = 1e-10;
}  // namespace tolerance

/// Row-stochastic square matrix.  Construction enforces the structural
/// invariants (square, entries in [0,1], rows summing to one); graph-level
/// properties are checked by `validate`.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  /// Throws ValidationError naming the offending row.
  explicit TransitionMatrix(const std::vector<std::vector<double>>& rows);

  static TransitionMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(StateIndex from, StateIndex to) const { return p_[from * n_ + to]; }
  std::span<const double> row(StateIndex from) const {
    return {p_.data() + from * n_, n_};
  }
  std::vector<std::vector<double>> rows() const;

  /// Draws the successor of `from`.  Exactly one engine draw per call.
  StateIndex sample_next(StateIndex from, RandomStream& rng) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
  std::vector<double> cumulative_;
};

struct ChainProperties {
  bool irreducible = false;
  bool aperiodic = false;
};

/// Irreducibility by strong connectivity of the positive-entry digraph;
/// period from BFS levels (gcd of level[u] + 1 - level[v] over edges).
ChainProperties validate(const TransitionMatrix& p);

/// Throws ValidationError unless the chain is irreducible and aperiodic.
void require_ergodic(const TransitionMatrix& p, const char* what);

/// Unique pi with pi P = pi, sum(pi) = 1, via a direct linear solve.
std::vector<double> stationary_distribution(const TransitionMatrix& p);

/// Modulus of the eigenvalue with the second-largest modulus (SLEM).
/// A one-state chain has no second eigenvalue; 0 is returned.
double second_eigenvalue_modulus(const TransitionMatrix& p);

/// M[x][y] = expected number of steps to first reach y from x, M[y][y] = 0.
std::vector<std::vector<double>> mean_hitting_times(const TransitionMatrix& p);

struct ChainAnalysis {
  std::vector<double> stationary;
  double slem = 0.0;
  std::vector<std::vector<double>> hitting;
};

ChainAnalysis analyze(const TransitionMatrix& p);

/// Free-function form of TransitionMatrix::sample_next.
inline StateIndex sample_next(const TransitionMatrix& p, StateIndex x, RandomStream& rng) {
  return p.sample_next(x, rng);
}

/// Draws an index from a probability vector (one engine draw).
StateIndex sample_from(std::span<const double> distribution, RandomStream& rng);

}  // namespace rmab
