#pragma once

// Finite-horizon MDP over states (remaining nominal s, intensity node z) plus
// the cemetery. Nominals are integers in units of 1/K; actions are redemption
// amounts in the same units, paid together with the coupon at t_{n+1}.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sinkbond/intensity_tree.hpp"
#include "sinkbond/market_data.hpp"

namespace sinkbond {

/// Fills `out` with D_n(s) for the given stage and nominal.
using ActionSource = std::function<void(std::size_t stage, int nominal, std::vector<int>& out)>;
/// Optional node-dependent restriction of D_n(s) to D_n(s, z).
using NodeFilter = std::function<bool(std::size_t stage, int nominal, std::size_t node, int action)>;
/// A Markovian decision rule sequence f_n(s, z).
using DecisionRule = std::function<int(std::size_t stage, int nominal, std::size_t node)>;

struct MdpProblem {
  const IntensityTree* tree = nullptr;  // augmented; must outlive the problem
  std::vector<double> discount;         // exp(-r(t_n) dt_{n+1}), n < N
  std::vector<double> coupons;          // C_{n+1}, n < N
  double recovery = 0.0;
  int nominal_units = 1;                // K
  ActionSource actions;
  NodeFilter admissible;

  std::size_t steps() const noexcept { return discount.size(); }
  void validate() const;
};

MdpProblem make_problem(const IntensityTree& tree, const DiscountCurve& curve,
                        std::vector<double> coupons, double recovery, int nominal_units,
                        ActionSource actions);

/// Value and decision tables of one stage, for the reachable nominals only.
struct StageTable {
  std::vector<int> nominals;                       // ascending
  std::vector<int> row_of;                         // nominal -> row or -1
  std::vector<std::vector<double>> values;         // [row][node]
  std::vector<std::vector<std::int32_t>> actions;  // [row][node]; empty at stage N

  bool contains(int s) const noexcept {
    return s >= 0 && static_cast<std::size_t>(s) < row_of.size() && row_of[s] >= 0;
  }
  std::span<const double> values_of(int s) const;
};

class MdpSolution {
 public:
  MdpSolution() = default;
  explicit MdpSolution(std::vector<StageTable> stages) : stages_(std::move(stages)) {}

  std::size_t steps() const noexcept { return stages_.empty() ? 0 : stages_.size() - 1; }
  const StageTable& stage(std::size_t n) const { return stages_.at(n); }
  double value(std::size_t n, int s, std::size_t node) const;
  int action(std::size_t n, int s, std::size_t node) const;
  /// V_0(1, root): the bond value per unit of currently outstanding nominal.
  double price() const;

 private:
  std::vector<StageTable> stages_;
};

/// One-stage cost c_n(s, z, a) per unit initial nominal. Throws when a is not
/// admissible.
double stage_cost(const MdpProblem& problem, std::size_t n, int s, std::size_t node, int a);

/// Nominals reachable from s = K at each stage 0..N under the action sets.
std::vector<std::vector<int>> reachable_nominals(const MdpProblem& problem);

/// V_n and a minimizer f*_n from V_{n+1}. Ties go to the largest action.
StageTable bellman_step(const MdpProblem& problem, const PackedTree& packed, std::size_t n,
                        std::span<const int> nominals, const StageTable& next);

MdpSolution backward_induction(const MdpProblem& problem);

/// V_{n,pi} by the same recursion with the rule's action plugged in.
MdpSolution evaluate_policy(const MdpProblem& problem, const DecisionRule& rule);

struct BellmanCheck {
  double max_residual = 0.0;   // |V_n - L_n V_{n+1}(f*)|
  double max_violation = 0.0;  // max over admissible a of V_n - L_n V_{n+1}(a)
  std::size_t states = 0;
};

/// Recomputes L_n V_{n+1} from the tree nodes directly (no kernels).
BellmanCheck check_bellman(const MdpProblem& problem, const MdpSolution& solution);

}  // namespace sinkbond
