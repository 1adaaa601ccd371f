#pragma once

#include <functional>
#include <optional>

#include "bronchopt/benchmark.hpp"
#include "bronchopt/metrics.hpp"
#include "bronchopt/refiner.hpp"

namespace bronchopt {

struct BatchOptions {
  RefinerConfig cfg;
  RefineLossWeights weights;
  SdfLossParams sdf_params;
  bool pseudo = false;  // treat the stored GT depth as a scale-ambiguous map
  int threads = 1;

  /// Pairs for which this returns true are not refined (resume support).
  std::function<bool(const BenchmarkPair&)> skip;
};

struct BatchItem {
  int pair_index = 0;
  bool failed = false;
  std::string error;
  RefineResult result;
  PairMetrics metrics;
};

struct BatchOutcome {
  std::vector<BatchItem> items;  // ordered by pair index
  MetricsReport report;          // successful items only
};

/// Independent refinement of every pair in the dataset; observed views are
/// the stored GT depth renders. Per-pair errors are recorded and the batch
/// continues. Parallel across pairs; the mesh and BVH are shared read-only.
BatchOutcome batch_refine(const AirwayMesh& mesh, const Bvh& bvh,
                          const Dataset& dataset, const BatchOptions& opts);

/// Metrics for one finished registration: similarity between the rendered
/// final view and the observed map, pose errors against GT, and the in-lumen
/// success flag.
PairMetrics evaluate_pair(const AirwayMesh& mesh, const Bvh& bvh,
                          const BenchmarkPair& pair, const Pose& final_pose,
                          const DepthMap& observed, const DepthMap& rendered,
                          const CameraIntrinsics& K);

}  // namespace bronchopt
