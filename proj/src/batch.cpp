#include "bronchopt/batch.hpp"

#include <mutex>

#include "bronchopt/errors.hpp"
#include "bronchopt/render.hpp"
#include "bronchopt/threading.hpp"

namespace bronchopt {

PairMetrics evaluate_pair(const AirwayMesh& mesh, const Bvh& bvh,
                          const BenchmarkPair& pair, const Pose& final_pose,
                          const DepthMap& observed, const DepthMap& rendered,
                          const CameraIntrinsics& K) {
  PairMetrics m;
  m.case_id = pair.case_id;
  m.frame_id = pair.frame_id;
  m.difficulty = pair.difficulty;
  m.ds = metric_ds(rendered, observed);
  m.nc = metric_nc(rendered, observed, K);
  m.si = metric_si(rendered, observed);
  const PoseErrors err = pose_errors(final_pose, pair.gt_pose);
  m.trans_err_mm = err.trans_mm;
  m.rot_err_rad = err.rot_rad;
  m.success = success(mesh, bvh, final_pose);
  const PoseErrors init_err = pose_errors(pair.init_pose, pair.gt_pose);
  m.init_trans_err_mm = init_err.trans_mm;
  m.init_rot_err_rad = init_err.rot_rad;
  return m;
}

BatchOutcome batch_refine(const AirwayMesh& mesh, const Bvh& bvh,
                          const Dataset& dataset, const BatchOptions& opts) {
  std::vector<int> todo;
  for (size_t i = 0; i < dataset.pairs.size(); ++i) {
    if (opts.skip && opts.skip(dataset.pairs[i])) continue;
    todo.push_back(static_cast<int>(i));
  }

  std::vector<BatchItem> items(todo.size());
  parallel_for(static_cast<int>(todo.size()), opts.threads, [&](int k) {
    const int pair_index = todo[k];
    const BenchmarkPair& pair = dataset.pairs[pair_index];
    BatchItem& item = items[k];
    item.pair_index = pair_index;
    try {
      const DepthMap observed = read_pfm(dataset.root / pair.depth_path);
      item.result = opts.pseudo
                        ? refine_with_pseudo_depth(mesh, bvh, observed,
                                                   dataset.intrinsics,
                                                   pair.init_pose, opts.cfg,
                                                   opts.weights, opts.sdf_params)
                        : refine(mesh, bvh, observed, dataset.intrinsics,
                                 pair.init_pose, opts.cfg, opts.weights,
                                 opts.sdf_params);
      const DepthMap rendered =
          render_depth(bvh, item.result.final_pose, dataset.intrinsics);
      item.metrics = evaluate_pair(mesh, bvh, pair, item.result.final_pose,
                                   observed, rendered, dataset.intrinsics);
    } catch (const std::exception& e) {
      item.failed = true;
      item.error = e.what();
    }
  });

  BatchOutcome outcome;
  outcome.items = std::move(items);
  for (const BatchItem& item : outcome.items) {
    if (!item.failed) outcome.report.pairs.push_back(item.metrics);
  }
  return outcome;
}

}  // namespace bronchopt
