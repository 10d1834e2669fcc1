#include "sinkbond/intensity_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sinkbond/error.hpp"

namespace sinkbond {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Branching {
  std::int64_t center;
  std::array<double, 3> prob;  // down, mid, up
};

// Three-point moment matching around the node nearest to `mean`, with the
// center restricted to [lo, hi]. A mean more than half a spacing from the
// chosen center is pulled back to that distance and reported as clipped.
Branching match_moments(double mean, double variance, double origin, double spacing,
                        std::int64_t lo, std::int64_t hi, bool& clipped) {
  const double offset_steps = (mean - origin) / spacing;
  const auto center = std::clamp<std::int64_t>(std::llround(offset_steps), lo, hi);
  double mu = mean - (origin + static_cast<double>(center) * spacing);
  clipped = std::abs(mu) > 0.5 * spacing;
  if (clipped) mu = std::copysign(0.5 * spacing, mu);
  const double second = (variance + mu * mu) / (spacing * spacing);
  const double skew = mu / spacing;
  return {center, {0.5 * (second - skew), 1.0 - second, 0.5 * (second + skew)}};
}

TreeNode make_node(const JdcevParams& params, double x, double cap) {
  TreeNode node;
  node.x = x;
  if (x > 0.0) {
    node.z_level = from_bessel(params, x);
    node.intensity = intensity(params, node.z_level, cap);
  } else {
    node.z_level = 0.0;
    node.intensity = cap;
    node.kind = NodeKind::boundary;
  }
  return node;
}

IntensityTree build_chain(const JdcevParams& params, const TimeGrid& grid,
                          const TreeOptions& options) {
  IntensityTree tree{grid, params, options, {}, false};
  tree.layers.resize(grid.steps() + 1);
  double z = params.z0;
  for (std::size_t n = 0; n <= grid.steps(); ++n) {
    TreeNode node;
    node.z_level = z;
    node.x = to_bessel(params, z);
    node.intensity = intensity(params, z, options.intensity_cap);
    node.kind = NodeKind::deterministic;
    if (n < grid.steps()) {
      node.successors = {Branch{0, 0.0}, Branch{0, 1.0}, Branch{0, 0.0}};
      z += z * node.intensity * grid.dt(n + 1);
    }
    tree.layers[n].nodes.push_back(node);
  }
  return tree;
}

}  // namespace

IntensityTree build_trinomial(const JdcevParams& params, const TimeGrid& grid,
                              const TreeOptions& options) {
  params.validate();
  if (!(options.intensity_cap > 0.0)) throw ValidationError("intensity cap must be positive");
  if (!(options.max_drift_steps > 0.0)) throw ValidationError("max_drift_steps must be positive");
  if (options.degenerate) return build_chain(params, grid, options);

  const double origin = to_bessel(params, params.z0);
  IntensityTree tree{grid, params, options, {}, false};
  tree.layers.reserve(grid.steps() + 1);

  TreeLayer root;
  TreeNode first = make_node(params, origin, options.intensity_cap);
  first.z_level = params.z0;
  first.intensity = intensity(params, params.z0, options.intensity_cap);
  root.nodes.push_back(first);
  tree.layers.push_back(std::move(root));

  std::vector<Branching> branching;
  for (std::size_t n = 0; n < grid.steps(); ++n) {
    const double dt = grid.dt(n + 1);
    const double spacing = std::sqrt(3.0 * dt);
    const double max_shift = options.max_drift_steps * spacing;
    TreeLayer& layer = tree.layers[n];

    branching.clear();
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    // Centers stay within the index range spanned by the current layer, so
    // each layer grows by at most one node per side on a uniform grid.
    const auto first = std::llround((layer.nodes.front().x - origin) / spacing);
    const auto last = std::llround((layer.nodes.back().x - origin) / spacing);
    for (TreeNode& node : layer.nodes) {
      double mean = node.x;
      if (node.kind != NodeKind::boundary) {
        double shift = bessel_drift(params, node.x) * dt;
        if (!std::isfinite(shift) || std::abs(shift) > max_shift) {
          shift = std::isnan(shift) ? 0.0 : std::clamp(shift, -max_shift, max_shift);
          node.kind = NodeKind::drift_limited;
        }
        mean += shift;
      }
      bool clipped = false;
      const Branching b = match_moments(mean, dt, origin, spacing, first, last, clipped);
      if (clipped && node.kind == NodeKind::regular) node.kind = NodeKind::drift_limited;
      lo = std::min(lo, b.center - 1);
      hi = std::max(hi, b.center + 1);
      branching.push_back(b);
    }

    TreeLayer next;
    next.spacing = spacing;
    next.nodes.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t j = lo; j <= hi; ++j) {
      next.nodes.push_back(
          make_node(params, origin + static_cast<double>(j) * spacing, options.intensity_cap));
    }

    for (std::size_t i = 0; i < layer.nodes.size(); ++i) {
      const Branching& b = branching[i];
      for (int k = 0; k < 3; ++k) {
        const double p = b.prob[k];
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream msg;
          msg << "branch probability " << p << " outside [0,1] at layer " << n << ", node " << i
              << " (x = " << layer.nodes[i].x << ")";
          throw NumericalError(msg.str());
        }
        layer.nodes[i].successors[k] = Branch{static_cast<std::int32_t>(b.center - 1 + k - lo), p};
      }
    }
    tree.layers.push_back(std::move(next));
  }
  return tree;
}

IntensityTree build_deterministic(const TimeGrid& grid, std::span<const double> intensities) {
  const std::size_t N = grid.steps();
  if (intensities.size() != 1 && intensities.size() != N + 1) {
    throw ValidationError("deterministic chain needs 1 or N+1 intensities");
  }
  IntensityTree tree{grid, std::nullopt, {}, {}, false};
  tree.layers.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    const double lambda = intensities.size() == 1 ? intensities[0] : intensities[n];
    if (!std::isfinite(lambda)) throw ValidationError("deterministic intensity must be finite");
    TreeNode node;
    node.x = kNaN;
    node.z_level = kNaN;
    node.intensity = lambda;
    node.kind = NodeKind::deterministic;
    if (n < N) node.successors = {Branch{0, 0.0}, Branch{0, 1.0}, Branch{0, 0.0}};
    tree.layers[n].nodes.push_back(node);
  }
  return tree;
}

IntensityTree augment_default(IntensityTree tree) {
  if (tree.augmented) throw ValidationError("tree already carries the default branch");
  for (std::size_t n = 0; n < tree.steps(); ++n) {
    const double dt = tree.grid.dt(n + 1);
    for (TreeNode& node : tree.layers[n].nodes) {
      const double survival = std::exp(-node.intensity * dt);
      node.default_prob = -std::expm1(-node.intensity * dt);
      for (Branch& b : node.successors) b.prob *= survival;
    }
  }
  tree.augmented = true;
  return tree;
}

IntensityTree build_default_tree(const JdcevParams& params, const TimeGrid& grid,
                                 const TreeOptions& options) {
  return augment_default(build_trinomial(params, grid, options));
}

std::vector<double> survival_curve(const IntensityTree& tree) {
  if (!tree.augmented) throw ValidationError("survival_curve needs an augmented tree");
  std::vector<double> curve(tree.steps() + 1);
  std::vector<double> mass{1.0};
  std::vector<double> next;
  curve[0] = 1.0;
  for (std::size_t n = 0; n < tree.steps(); ++n) {
    next.assign(tree.layers[n + 1].nodes.size(), 0.0);
    const auto& nodes = tree.layers[n].nodes;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      for (const Branch& b : nodes[j].successors) next[b.index] += mass[j] * b.prob;
    }
    mass.swap(next);
    double total = 0.0;
    for (double m : mass) total += m;
    curve[n + 1] = total;
  }
  return curve;
}

TreeDiagnostics validate_tree(const IntensityTree& tree, double sum_tolerance) {
  TreeDiagnostics report;
  for (std::size_t n = 0; n < tree.steps(); ++n) {
    const auto& nodes = tree.layers[n].nodes;
    const auto& next = tree.layers[n + 1].nodes;
    const double dt = tree.grid.dt(n + 1);
    LayerDiagnostics diag;
    diag.layer = n;
    diag.size = nodes.size();

    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const TreeNode& node = nodes[j];
      auto flag = [&](std::string what) { report.issues.push_back({n, j, std::move(what)}); };

      double sum = node.default_prob;
      bool probs_valid = node.default_prob >= 0.0 && node.default_prob <= 1.0;
      for (const Branch& b : node.successors) {
        sum += b.prob;
        diag.min_prob = std::min(diag.min_prob, b.prob);
        diag.max_prob = std::max(diag.max_prob, b.prob);
        if (!(b.prob >= 0.0 && b.prob <= 1.0)) probs_valid = false;
        if (b.index < 0 || static_cast<std::size_t>(b.index) >= next.size()) {
          flag("successor index out of range");
        }
      }
      if (!probs_valid) flag("probability outside [0,1]");
      const double sum_error = std::abs(sum - 1.0);
      diag.max_sum_error = std::max(diag.max_sum_error, sum_error);
      if (!(sum_error <= sum_tolerance)) flag("probabilities do not sum to one");

      if (node.kind == NodeKind::boundary) ++diag.boundary_nodes;
      if (node.kind == NodeKind::drift_limited) ++diag.drift_limited_nodes;
      if (node.kind != NodeKind::regular || !tree.params) continue;

      const double survival = tree.augmented ? 1.0 - node.default_prob : 1.0;
      if (!(survival > 1e-300)) continue;
      const double target = node.x + bessel_drift(*tree.params, node.x) * dt;
      double mean = 0.0;
      double second = 0.0;
      bool indices_ok = true;
      for (const Branch& b : node.successors) {
        if (b.index < 0 || static_cast<std::size_t>(b.index) >= next.size()) {
          indices_ok = false;
          break;
        }
        const double p = b.prob / survival;
        const double d = next[b.index].x - target;
        mean += p * next[b.index].x;
        second += p * d * d;
      }
      if (!indices_ok) continue;
      const double mean_error = std::abs(mean - target);
      const double variance_error = std::abs(second - dt);
      diag.max_mean_error = std::max(diag.max_mean_error, mean_error);
      diag.max_variance_error = std::max(diag.max_variance_error, variance_error);
      report.variance_constant = std::max(report.variance_constant, variance_error / (dt * dt));
      ++report.checked_nodes;
    }
    report.max_sum_error = std::max(report.max_sum_error, diag.max_sum_error);
    report.max_mean_error = std::max(report.max_mean_error, diag.max_mean_error);
    report.max_variance_error = std::max(report.max_variance_error, diag.max_variance_error);
    report.layers.push_back(diag);
  }
  return report;
}

nlohmann::json to_json(const TreeDiagnostics& d) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : d.layers) {
    layers.push_back({{"layer", l.layer},
                      {"size", l.size},
                      {"max_sum_error", l.max_sum_error},
                      {"min_prob", l.min_prob},
                      {"max_prob", l.max_prob},
                      {"max_mean_error", l.max_mean_error},
                      {"max_variance_error", l.max_variance_error},
                      {"boundary_nodes", l.boundary_nodes},
                      {"drift_limited_nodes", l.drift_limited_nodes}});
  }
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& i : d.issues) {
    issues.push_back({{"layer", i.layer}, {"node", i.node}, {"issue", i.what}});
  }
  return {{"ok", d.ok()},
          {"violations", d.issues.size()},
          {"max_sum_error", d.max_sum_error},
          {"max_mean_error", d.max_mean_error},
          {"max_variance_error", d.max_variance_error},
          {"variance_constant", d.variance_constant},
          {"checked_nodes", d.checked_nodes},
          {"issues", issues},
          {"layers", layers}};
}

nlohmann::json tree_to_json(const IntensityTree& tree) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t n = 0; n < tree.layers.size(); ++n) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& node : tree.layers[n].nodes) {
      nlohmann::json successors = nlohmann::json::array();
      if (n < tree.steps()) {
        for (const Branch& b : node.successors) {
          successors.push_back({{"index", b.index}, {"prob", b.prob}});
        }
      }
      nodes.push_back({{"x", node.x},
                       {"z_level", node.z_level},
                       {"intensity", node.intensity},
                       {"default_prob", node.default_prob},
                       {"successors", successors}});
    }
    layers.push_back({{"time", tree.grid.time(n)}, {"nodes", nodes}});
  }
  return {{"augmented", tree.augmented}, {"layers", layers}};
}

PackedTree::PackedTree(const IntensityTree& tree) {
  if (!tree.augmented) throw ValidationError("pricing needs a default-augmented tree");
  const std::size_t N = tree.steps();
  if (tree.layers.size() != N + 1) throw ValidationError("tree layer count does not match grid");
  layers_.resize(N);
  sizes_.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) sizes_[n] = tree.layers[n].nodes.size();
  for (std::size_t n = 0; n < N; ++n) {
    const auto& nodes = tree.layers[n].nodes;
    const double dt = tree.grid.dt(n + 1);
    Layer& out = layers_[n];
    for (int k = 0; k < 3; ++k) {
      out.index[k].resize(nodes.size());
      out.prob[k].resize(nodes.size());
    }
    out.survival.resize(nodes.size());
    out.default_prob.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      for (int k = 0; k < 3; ++k) {
        const Branch& b = nodes[j].successors[k];
        if (b.index < 0 || static_cast<std::size_t>(b.index) >= sizes_[n + 1]) {
          throw ValidationError("successor index out of range at layer " + std::to_string(n));
        }
        out.index[k][j] = b.index;
        out.prob[k][j] = b.prob;
      }
      out.survival[j] = std::exp(-nodes[j].intensity * dt);
      out.default_prob[j] = nodes[j].default_prob;
    }
  }
}

std::size_t PackedTree::layer_size(std::size_t n) const { return sizes_.at(n); }

kernels::LayerView PackedTree::view(std::size_t n) const {
  const Layer& l = layers_.at(n);
  kernels::LayerView v;
  v.size = l.survival.size();
  for (int k = 0; k < 3; ++k) {
    v.index[k] = l.index[k].data();
    v.prob[k] = l.prob[k].data();
  }
  v.survival = l.survival.data();
  v.default_prob = l.default_prob.data();
  return v;
}

}  // namespace sinkbond
