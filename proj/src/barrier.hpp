#pragma once

// Primal path-following barrier method for
//   minimize  -1/2 ln det Sigma
//   s.t.      Q - Sigma >= 0,  tr(Sigma11) <= D1,  tr(Sigma22) <= D2
// over symmetric Sigma, parametrized by its upper triangle.

#include <utility>
#include <vector>

#include "jointrdf/linalg.hpp"
#include "jointrdf/solver.hpp"

namespace jointrdf::detail {

class SymCoords {
 public:
  explicit SymCoords(int n);

  int dim() const { return static_cast<int>(pairs_.size()); }
  int n() const { return n_; }
  const std::pair<int, int>& pair(int a) const { return pairs_[a]; }

  Matrix to_matrix(const Vector& x) const;
  // <G, E_a> for every basis element E_a.
  Vector pairing(const Matrix& g) const;
  // tr(A E_a A E_b) for symmetric A.
  Matrix logdet_hessian(const Matrix& a) const;

 private:
  int n_;
  std::vector<std::pair<int, int>> pairs_;
};

struct BarrierResult {
  Matrix sigma;
  Matrix slack;  // Q - Sigma, tracked alongside sigma
  double s1 = 0.0;
  double s2 = 0.0;
  double t = 0.0;
  int newton_steps = 0;
};

BarrierResult run_barrier(const Matrix& q, int p1, int p2, double d1, double d2,
                          const SolverConfig& cfg);

}  // namespace jointrdf::detail
