#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sinkbond/jdcev.hpp"
#include "sinkbond/kernels.hpp"
#include "sinkbond/market_data.hpp"

namespace sinkbond {

struct Branch {
  std::int32_t index = -1;  // node index in the next layer
  double prob = 0.0;
};

enum class NodeKind : std::uint8_t {
  regular,        // moment-matched trinomial branching
  drift_limited,  // drift displacement clipped to the layer spacing
  boundary,       // x <= 0: intensity at the cap, zero drift
  deterministic,  // single-successor chain
};

struct TreeNode {
  double x = 0.0;
  double z_level = 0.0;
  double intensity = 0.0;
  /// Probability of jumping to the cemetery over (t_n, t_{n+1}]. Zero before
  /// augment_default() and on the last layer.
  double default_prob = 0.0;
  std::array<Branch, 3> successors{};
  NodeKind kind = NodeKind::regular;
};

struct TreeLayer {
  std::vector<TreeNode> nodes;
  double spacing = 0.0;  // x-distance between neighbouring nodes
};

struct TreeOptions {
  double intensity_cap = kDefaultIntensityCap;
  /// Collapse the lattice to the deterministic path dZ = Z lambda(Z) dt.
  bool degenerate = false;
  /// Largest drift displacement per step, in units of the target spacing.
  double max_drift_steps = 1.0;
};

/// Recombining lattice Z^(0), ..., Z^(N) for the default intensity. Nodes of
/// a layer are ordered by increasing x, i.e. by decreasing intensity.
struct IntensityTree {
  TimeGrid grid;
  std::optional<JdcevParams> params;
  TreeOptions options;
  std::vector<TreeLayer> layers;
  bool augmented = false;

  std::size_t steps() const noexcept { return grid.steps(); }
  const TreeNode& root() const { return layers.front().nodes.front(); }
};

/// Trinomial lattice in the Bessel coordinate (spacing sqrt(3 dt) per layer,
/// nearest-node centering, exact first and second moments), mapped back to
/// stock level and intensity node by node. No default branch yet.
IntensityTree build_trinomial(const JdcevParams& params, const TimeGrid& grid,
                              const TreeOptions& options = {});

/// Single-node-per-layer chain with the given intensities: either one value
/// (constant) or N + 1 values. Any finite value is accepted so the chain can
/// carry a negative spread.
IntensityTree build_deterministic(const TimeGrid& grid, std::span<const double> intensities);

/// Adds the cemetery branch: default_prob = 1 - exp(-lambda dt) and every
/// diffusion branch scaled by exp(-lambda dt).
IntensityTree augment_default(IntensityTree tree);

/// Convenience: build_trinomial followed by augment_default.
IntensityTree build_default_tree(const JdcevParams& params, const TimeGrid& grid,
                                 const TreeOptions& options = {});

/// P(tau > t_n) for n = 0..N by a layer-forward pass over an augmented tree.
std::vector<double> survival_curve(const IntensityTree& tree);

struct LayerDiagnostics {
  std::size_t layer = 0;
  std::size_t size = 0;
  double max_sum_error = 0.0;
  double min_prob = 1.0;
  double max_prob = 0.0;
  double max_mean_error = 0.0;
  double max_variance_error = 0.0;
  std::size_t boundary_nodes = 0;
  std::size_t drift_limited_nodes = 0;
};

struct NodeIssue {
  std::size_t layer = 0;
  std::size_t node = 0;
  std::string what;
};

struct TreeDiagnostics {
  std::vector<LayerDiagnostics> layers;
  std::vector<NodeIssue> issues;
  double max_sum_error = 0.0;
  double max_mean_error = 0.0;
  double max_variance_error = 0.0;
  /// max over checked nodes of variance_error / dt^2.
  double variance_constant = 0.0;
  std::size_t checked_nodes = 0;

  bool ok() const noexcept { return issues.empty(); }
};

/// Read-only re-check of the lattice invariants. Moments are measured in x
/// before the survival scaling and only on regular nodes.
TreeDiagnostics validate_tree(const IntensityTree& tree, double sum_tolerance = 1e-12);

nlohmann::json to_json(const TreeDiagnostics& diagnostics);
nlohmann::json tree_to_json(const IntensityTree& tree);

/// Kernel-ready copy of the transition data of layers 0..N-1.
class PackedTree {
 public:
  explicit PackedTree(const IntensityTree& tree);

  std::size_t steps() const noexcept { return layers_.size(); }
  std::size_t layer_size(std::size_t n) const;
  kernels::LayerView view(std::size_t n) const;

 private:
  struct Layer {
    std::array<std::vector<std::int32_t>, 3> index;
    std::array<std::vector<double>, 3> prob;
    std::vector<double> survival;
    std::vector<double> default_prob;
  };
  std::vector<Layer> layers_;
  std::vector<std::size_t> sizes_;  // N + 1 layer sizes
};

}  // namespace sinkbond
