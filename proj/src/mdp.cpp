#include "sinkbond/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sinkbond/error.hpp"
#include "sinkbond/kernels.hpp"

namespace sinkbond {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string state_name(std::size_t n, int s, std::size_t node) {
  return "(stage " + std::to_string(n) + ", nominal " + std::to_string(s) + ", node " +
         std::to_string(node) + ")";
}

// Sorted, deduplicated and checked action set D_n(s).
std::vector<int> actions_at(const MdpProblem& problem, std::size_t n, int s) {
  std::vector<int> out;
  problem.actions(n, s, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) {
    throw ValidationError("empty action set at stage " + std::to_string(n) + ", nominal " +
                          std::to_string(s));
  }
  if (out.front() < 0 || out.back() > s) {
    throw ValidationError("action outside [0, s] at stage " + std::to_string(n) + ", nominal " +
                          std::to_string(s));
  }
  if (n + 1 == problem.steps() && (out.size() != 1 || out.front() != s)) {
    throw ValidationError("the last stage must redeem the full remaining nominal");
  }
  return out;
}

StageTable empty_table(std::span<const int> nominals, int units) {
  StageTable t;
  t.nominals.assign(nominals.begin(), nominals.end());
  t.row_of.assign(static_cast<std::size_t>(units) + 1, -1);
  for (std::size_t r = 0; r < t.nominals.size(); ++r) t.row_of[t.nominals[r]] = static_cast<int>(r);
  return t;
}

kernels::StageTerms terms_for(const MdpProblem& problem, std::size_t n, int s, int a) {
  const double K = problem.nominal_units;
  const double nominal = s / K;
  return {problem.discount[n], a / K, problem.coupons[n] * nominal, problem.recovery * nominal};
}

StageTable terminal_table(const MdpProblem& problem, std::span<const int> nominals,
                          std::size_t size) {
  StageTable t = empty_table(nominals, problem.nominal_units);
  t.values.assign(t.nominals.size(), std::vector<double>(size, 0.0));
  return t;
}

double unchecked_cost(const MdpProblem& problem, std::size_t n, int s, std::size_t node, int a) {
  const TreeNode& z = problem.tree->layers.at(n).nodes.at(node);
  const double survival = std::exp(-z.intensity * problem.tree->grid.dt(n + 1));
  const auto t = terms_for(problem, n, s, a);
  const double cost = (t.redemption + t.coupon) * survival + z.default_prob * t.recovery;
  return t.discount * cost;
}

}  // namespace

void MdpProblem::validate() const {
  if (tree == nullptr) throw ValidationError("MDP problem has no tree");
  if (!tree->augmented) throw ValidationError("MDP needs a default-augmented tree");
  const std::size_t N = tree->steps();
  if (discount.size() != N || coupons.size() != N) {
    throw ValidationError("MDP stage data must have one entry per step");
  }
  if (nominal_units < 1) throw ValidationError("nominal resolution K must be >= 1");
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw ValidationError("recovery must lie in [0,1]");
  if (!actions) throw ValidationError("MDP problem has no action source");
}

MdpProblem make_problem(const IntensityTree& tree, const DiscountCurve& curve,
                        std::vector<double> coupons, double recovery, int nominal_units,
                        ActionSource actions) {
  const GridDiscounting disc(curve, tree.grid);
  MdpProblem p;
  p.tree = &tree;
  p.discount.resize(tree.steps());
  for (std::size_t n = 0; n < tree.steps(); ++n) p.discount[n] = disc.step(n);
  p.coupons = std::move(coupons);
  p.recovery = recovery;
  p.nominal_units = nominal_units;
  p.actions = std::move(actions);
  p.validate();
  return p;
}

std::span<const double> StageTable::values_of(int s) const {
  if (!contains(s)) throw ValidationError("nominal " + std::to_string(s) + " not reachable");
  return values[row_of[s]];
}

double MdpSolution::value(std::size_t n, int s, std::size_t node) const {
  const auto row = stage(n).values_of(s);
  if (node >= row.size()) throw ValidationError("node index out of range");
  return row[node];
}

int MdpSolution::action(std::size_t n, int s, std::size_t node) const {
  const StageTable& t = stage(n);
  if (!t.contains(s) || t.actions.empty()) {
    throw ValidationError("no decision stored for stage " + std::to_string(n));
  }
  return t.actions[t.row_of[s]].at(node);
}

double MdpSolution::price() const {
  const StageTable& t = stage(0);
  return t.values.at(0).at(0);
}

double stage_cost(const MdpProblem& problem, std::size_t n, int s, std::size_t node, int a) {
  problem.validate();
  const auto allowed = actions_at(problem, n, s);
  if (!std::binary_search(allowed.begin(), allowed.end(), a) ||
      (problem.admissible && !problem.admissible(n, s, node, a))) {
    throw ValidationError("inadmissible action " + std::to_string(a) + " at " +
                          state_name(n, s, node));
  }
  return unchecked_cost(problem, n, s, node, a);
}

std::vector<std::vector<int>> reachable_nominals(const MdpProblem& problem) {
  problem.validate();
  const std::size_t N = problem.steps();
  std::vector<std::vector<int>> reach(N + 1);
  reach[0] = {problem.nominal_units};
  std::vector<char> seen;
  for (std::size_t n = 0; n < N; ++n) {
    seen.assign(static_cast<std::size_t>(problem.nominal_units) + 1, 0);
    for (int s : reach[n]) {
      for (int a : actions_at(problem, n, s)) seen[s - a] = 1;
    }
    for (int s = 0; s <= problem.nominal_units; ++s) {
      if (seen[s]) reach[n + 1].push_back(s);
    }
  }
  return reach;
}

StageTable bellman_step(const MdpProblem& problem, const PackedTree& packed, std::size_t n,
                        std::span<const int> nominals, const StageTable& next) {
  const auto layer = packed.view(n);
  StageTable out = empty_table(nominals, problem.nominal_units);
  out.values.resize(out.nominals.size());
  out.actions.resize(out.nominals.size());
  std::vector<double> cand(layer.size);

  for (std::size_t r = 0; r < out.nominals.size(); ++r) {
    const int s = out.nominals[r];
    auto& best = out.values[r];
    auto& arg = out.actions[r];
    best.assign(layer.size, kInf);
    arg.assign(layer.size, -1);
    for (int a : actions_at(problem, n, s)) {
      if (!next.contains(s - a)) {
        throw ValidationError("missing successor value for nominal " + std::to_string(s - a) +
                              " at stage " + std::to_string(n + 1));
      }
      kernels::stage_candidates(layer, next.values_of(s - a).data(), terms_for(problem, n, s, a),
                                cand.data());
      if (problem.admissible) {
        for (std::size_t j = 0; j < layer.size; ++j) {
          if (!problem.admissible(n, s, j, a)) cand[j] = kInf;
        }
      }
      kernels::argmin_update(cand, a, best, arg);
    }
    for (std::size_t j = 0; j < layer.size; ++j) {
      if (arg[j] < 0) throw ValidationError("no admissible action at " + state_name(n, s, j));
    }
  }
  return out;
}

MdpSolution backward_induction(const MdpProblem& problem) {
  const auto reach = reachable_nominals(problem);
  const PackedTree packed(*problem.tree);
  const std::size_t N = problem.steps();
  std::vector<StageTable> stages(N + 1);
  stages[N] = terminal_table(problem, reach[N], packed.layer_size(N));
  for (std::size_t n = N; n-- > 0;) {
    stages[n] = bellman_step(problem, packed, n, reach[n], stages[n + 1]);
  }
  return MdpSolution(std::move(stages));
}

MdpSolution evaluate_policy(const MdpProblem& problem, const DecisionRule& rule) {
  const auto reach = reachable_nominals(problem);
  const PackedTree packed(*problem.tree);
  const std::size_t N = problem.steps();
  std::vector<StageTable> stages(N + 1);
  stages[N] = terminal_table(problem, reach[N], packed.layer_size(N));

  std::vector<double> cand;
  for (std::size_t n = N; n-- > 0;) {
    const auto layer = packed.view(n);
    const StageTable& next = stages[n + 1];
    StageTable t = empty_table(reach[n], problem.nominal_units);
    t.values.resize(t.nominals.size());
    t.actions.resize(t.nominals.size());
    cand.resize(layer.size);

    for (std::size_t r = 0; r < t.nominals.size(); ++r) {
      const int s = t.nominals[r];
      const auto allowed = actions_at(problem, n, s);
      auto& chosen = t.actions[r];
      chosen.resize(layer.size);
      for (std::size_t j = 0; j < layer.size; ++j) {
        const int a = rule(n, s, j);
        if (!std::binary_search(allowed.begin(), allowed.end(), a) ||
            (problem.admissible && !problem.admissible(n, s, j, a))) {
          throw ValidationError("policy chooses inadmissible action " + std::to_string(a) +
                                " at " + state_name(n, s, j));
        }
        chosen[j] = a;
      }
      auto& values = t.values[r];
      values.assign(layer.size, 0.0);
      for (int a : allowed) {
        if (std::find(chosen.begin(), chosen.end(), a) == chosen.end()) continue;
        kernels::stage_candidates(layer, next.values_of(s - a).data(),
                                  terms_for(problem, n, s, a), cand.data());
        for (std::size_t j = 0; j < layer.size; ++j) {
          if (chosen[j] == a) values[j] = cand[j];
        }
      }
    }
    stages[n] = std::move(t);
  }
  return MdpSolution(std::move(stages));
}

BellmanCheck check_bellman(const MdpProblem& problem, const MdpSolution& solution) {
  problem.validate();
  const IntensityTree& tree = *problem.tree;
  BellmanCheck check;
  for (std::size_t n = 0; n < problem.steps(); ++n) {
    const StageTable& t = solution.stage(n);
    const StageTable& next = solution.stage(n + 1);
    const auto& nodes = tree.layers[n].nodes;
    for (int s : t.nominals) {
      const auto allowed = actions_at(problem, n, s);
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        auto bellman = [&](int a) {
          const auto succ = next.values_of(s - a);
          double expected = 0.0;
          for (const Branch& b : nodes[j].successors) expected += b.prob * succ[b.index];
          return unchecked_cost(problem, n, s, j, a) + problem.discount[n] * expected;
        };
        const double v = solution.value(n, s, j);
        check.max_residual =
            std::max(check.max_residual, std::abs(v - bellman(solution.action(n, s, j))));
        for (int a : allowed) {
          if (problem.admissible && !problem.admissible(n, s, j, a)) continue;
          check.max_violation = std::max(check.max_violation, v - bellman(a));
        }
        ++check.states;
      }
    }
  }
  return check;
}

}  // namespace sinkbond
