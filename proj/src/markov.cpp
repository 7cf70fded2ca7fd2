#include "rmab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "rmab/errors.hpp"

namespace rmab {

TransitionMatrix::TransitionMatrix(const std::vector<std::vector<double>>& rows) {
  n_ = rows.size();
  if (n_ == 0) throw ValidationError("transition matrix must have at least one state");
  p_.reserve(n_ * n_);
  cumulative_.reserve(n_ * n_);
  for (std::size_t r = 0; r < n_; ++r) {
    if (rows[r].size() != n_) {
      throw ValidationError(fmt::format("transition matrix row {} has {} entries, expected {}", r,
                                        rows[r].size(), n_));
    }
    double sum = 0.0;
    for (double v : rows[r]) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError(
            fmt::format("transition matrix row {} has entry {} outside [0,1]", r, v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance::kStructural) {
      throw ValidationError(
          fmt::format("transition matrix row {} sums to {:.17g}, expected 1", r, sum));
    }
    // The last positive entry closes the cumulative row at exactly 1 so a
    // draw can never land on a zero-probability successor.
    std::size_t last_positive = 0;
    for (std::size_t c = 0; c < n_; ++c)
      if (rows[r][c] > 0.0) last_positive = c;
    double acc = 0.0;
    for (std::size_t c = 0; c < n_; ++c) {
      p_.push_back(rows[r][c]);
      acc += rows[r][c];
      cumulative_.push_back(c >= last_positive ? 1.0 : acc);
    }
  }
}

TransitionMatrix TransitionMatrix::identity(std::size_t n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
  return TransitionMatrix(rows);
}

std::vector<std::vector<double>> TransitionMatrix::rows() const {
  std::vector<std::vector<double>> out(n_);
  for (std::size_t r = 0; r < n_; ++r) out[r].assign(p_.begin() + r * n_, p_.begin() + (r + 1) * n_);
  return out;
}

StateIndex TransitionMatrix::sample_next(StateIndex from, RandomStream& rng) const {
  const double u = uniform01(rng);
  const double* cum = cumulative_.data() + from * n_;
  return static_cast<StateIndex>(std::upper_bound(cum, cum + n_, u) - cum);
}

StateIndex sample_from(std::span<const double> distribution, RandomStream& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  StateIndex last_positive = 0;
  for (StateIndex i = 0; i < distribution.size(); ++i) {
    if (distribution[i] <= 0.0) continue;
    last_positive = i;
    acc += distribution[i];
    if (u < acc) return i;
  }
  return last_positive;
}

namespace {

std::vector<int> bfs_levels(const TransitionMatrix& p, bool reverse) {
  const std::size_t n = p.size();
  std::vector<int> level(n, -1);
  std::queue<StateIndex> frontier;
  level[0] = 0;
  frontier.push(0);
  while (!frontier.empty()) {
    const StateIndex u = frontier.front();
    frontier.pop();
    for (StateIndex v = 0; v < n; ++v) {
      const double w = reverse ? p(v, u) : p(u, v);
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

Eigen::MatrixXd to_eigen(const TransitionMatrix& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = p(static_cast<StateIndex>(r), static_cast<StateIndex>(c));
  return m;
}

void require_irreducible(const TransitionMatrix& p, const char* op) {
  if (!validate(p).irreducible) {
    throw ValidationError(fmt::format("{}: chain is not irreducible", op));
  }
}

}  // namespace

ChainProperties validate(const TransitionMatrix& p) {
  const std::size_t n = p.size();
  const auto forward = bfs_levels(p, false);
  const auto backward = bfs_levels(p, true);
  ChainProperties props;
  props.irreducible = std::all_of(forward.begin(), forward.end(), [](int l) { return l >= 0; }) &&
                      std::all_of(backward.begin(), backward.end(), [](int l) { return l >= 0; });
  if (!props.irreducible) return props;
  long period = 0;
  for (StateIndex u = 0; u < n; ++u)
    for (StateIndex v = 0; v < n; ++v)
      if (p(u, v) > 0.0) period = std::gcd(period, std::labs(forward[u] + 1 - forward[v]));
  props.aperiodic = period == 1;
  return props;
}

void require_ergodic(const TransitionMatrix& p, const char* what) {
  const auto props = validate(p);
  if (!props.irreducible) throw ValidationError(fmt::format("{}: chain is not irreducible", what));
  if (!props.aperiodic) throw ValidationError(fmt::format("{}: chain is periodic", what));
}

std::vector<double> stationary_distribution(const TransitionMatrix& p) {
  require_irreducible(p, "stationary_distribution");
  const auto n = static_cast<Eigen::Index>(p.size());
  // (P^T - I) pi = 0 with one equation swapped for sum(pi) = 1.
  Eigen::MatrixXd a = to_eigen(p).transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(b);
  std::vector<double> out(pi.data(), pi.data() + n);
  for (double& v : out) v = std::max(v, 0.0);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

double second_eigenvalue_modulus(const TransitionMatrix& p) {
  if (p.size() == 1) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(to_eigen(p), false);
  const auto& values = solver.eigenvalues();
  std::vector<double> moduli(static_cast<std::size_t>(values.size()));
  for (Eigen::Index k = 0; k < values.size(); ++k) moduli[static_cast<std::size_t>(k)] = std::abs(values(k));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli[1];
}

std::vector<std::vector<double>> mean_hitting_times(const TransitionMatrix& p) {
  require_irreducible(p, "mean_hitting_times");
  const std::size_t n = p.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  if (n == 1) return m;
  const auto k = static_cast<Eigen::Index>(n - 1);
  for (StateIndex target = 0; target < n; ++target) {
    // (I - Q) h = 1, Q = P restricted to states other than the target.
    std::vector<StateIndex> others;
    for (StateIndex z = 0; z < n; ++z)
      if (z != target) others.push_back(z);
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
      for (Eigen::Index c = 0; c < k; ++c)
        a(r, c) -= p(others[static_cast<std::size_t>(r)], others[static_cast<std::size_t>(c)]);
    const auto lu = a.fullPivLu();
    if (!lu.isInvertible()) {
      throw ValidationError(fmt::format("mean_hitting_times: singular system for target {}", target));
    }
    const Eigen::VectorXd h = lu.solve(Eigen::VectorXd::Ones(k));
    for (Eigen::Index r = 0; r < k; ++r) m[others[static_cast<std::size_t>(r)]][target] = h(r);
  }
  return m;
}

ChainAnalysis analyze(const TransitionMatrix& p) {
  return {stationary_distribution(p), second_eigenvalue_modulus(p), mean_hitting_times(p)};
}

}  // namespace rmab
