#include "bronchopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bronchopt/errors.hpp"
#include "bronchopt/sdf.hpp"

namespace bronchopt {

namespace {

constexpr int kMinJointPixels = 100;

std::vector<size_t> joint_indices(const DepthMap& a, const DepthMap& b) {
  if (!a.same_shape(b)) throw SizeMismatch("metric: map dimensions differ");
  std::vector<size_t> idx;
  idx.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.valid[i] && b.valid[i]) idx.push_back(i);
  }
  return idx;
}

// x -> (x - mean) / MAD over the given indices.
std::vector<double> mad_normalize(const DepthMap& m,
                                  const std::vector<size_t>& idx) {
  double mean = 0.0;
  for (size_t i : idx) mean += m.values[i];
  mean /= static_cast<double>(idx.size());

  double mad = 0.0;
  for (size_t i : idx) mad += std::abs(m.values[i] - mean);
  mad /= static_cast<double>(idx.size());
  if (mad < 1e-12) {
    throw DegenerateMap("metric_ds: constant depth map (MAD < 1e-12)");
  }

  std::vector<double> out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    out[k] = (m.values[idx[k]] - mean) / mad;
  }
  return out;
}

}  // namespace

double metric_ds(const DepthMap& pred, const DepthMap& ref) {
  const std::vector<size_t> idx = joint_indices(pred, ref);
  if (idx.size() < kMinJointPixels) {
    throw DegenerateMap("metric_ds: fewer than 100 jointly valid pixels");
  }
  const std::vector<double> x = mad_normalize(pred, idx);
  const std::vector<double> y = mad_normalize(ref, idx);

  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    dot += x[k] * y[k];
    nx += x[k] * x[k];
    ny += y[k] * y[k];
  }
  if (nx < 1e-24 || ny < 1e-24) {
    throw DegenerateMap("metric_ds: zero-variance normalized map");
  }
  return dot / (std::sqrt(nx) * std::sqrt(ny));
}

namespace {

// Per-pixel surface normals from central differences on the back-projected
// point grid. Returns a mask of pixels with defined normals.
void normal_grid(const DepthMap& d, const CameraIntrinsics& K,
                 std::vector<Eigen::Vector3d>& normals,
                 std::vector<uint8_t>& defined) {
  normals.assign(d.size(), Eigen::Vector3d::Zero());
  defined.assign(d.size(), 0);

  std::vector<Eigen::Vector3d> points(d.size(), Eigen::Vector3d::Zero());
  for (int v = 0; v < d.height; ++v) {
    for (int u = 0; u < d.width; ++u) {
      if (!d.is_valid(u, v)) continue;
      points[d.index(u, v)] =
          back_project({static_cast<double>(u), static_cast<double>(v)},
                       d.value(u, v), K);
    }
  }

  for (int v = 1; v + 1 < d.height; ++v) {
    for (int u = 1; u + 1 < d.width; ++u) {
      if (!d.is_valid(u, v) || !d.is_valid(u - 1, v) || !d.is_valid(u + 1, v) ||
          !d.is_valid(u, v - 1) || !d.is_valid(u, v + 1)) {
        continue;
      }
      const Eigen::Vector3d du =
          points[d.index(u + 1, v)] - points[d.index(u - 1, v)];
      const Eigen::Vector3d dv =
          points[d.index(u, v + 1)] - points[d.index(u, v - 1)];
      const Eigen::Vector3d n = du.cross(dv);
      const double len = n.norm();
      if (len < 1e-12) continue;
      normals[d.index(u, v)] = n / len;
      defined[d.index(u, v)] = 1;
    }
  }
}

}  // namespace

double metric_nc(const DepthMap& pred, const DepthMap& ref,
                 const CameraIntrinsics& K) {
  if (!pred.same_shape(ref)) throw SizeMismatch("metric_nc: dimensions differ");

  std::vector<Eigen::Vector3d> na, nb;
  std::vector<uint8_t> da, db;
  normal_grid(pred, K, na, da);
  normal_grid(ref, K, nb, db);

  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (da[i] && db[i]) {
      sum += na[i].dot(nb[i]);
      ++n;
    }
  }
  if (n < kMinJointPixels) {
    throw DegenerateMap("metric_nc: fewer than 100 pixels with normals");
  }
  return sum / n;
}

double metric_si(const DepthMap& pred, const DepthMap& ref) {
  if (!pred.same_shape(ref)) throw SizeMismatch("metric_si: dimensions differ");

  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!pred.valid[i] || !ref.valid[i]) continue;
    if (pred.values[i] <= 0.0f || ref.values[i] <= 0.0f) continue;
    const double z = std::log(static_cast<double>(pred.values[i])) -
                     std::log(static_cast<double>(ref.values[i]));
    sum += z;
    sum2 += z * z;
    ++n;
  }
  if (n < kMinJointPixels) {
    throw DegenerateMap("metric_si: fewer than 100 usable pixels");
  }
  const double nd = static_cast<double>(n);
  return sum2 / nd - (sum * sum) / (nd * nd);
}

PoseErrors pose_errors(const Pose& pred, const Pose& gt) {
  PoseErrors e;
  e.trans_mm = (pred.translation - gt.translation).norm();
  e.rot_rad = geodesic_distance(pred.rotation, gt.rotation);
  return e;
}

bool success(const AirwayMesh& mesh, const Bvh& bvh, const Pose& pred) {
  return sdf(mesh, bvh, pred.camera_center()).value < 0.0;
}

namespace {

struct Accumulator {
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double stddev() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(sum2 / n - m * m, 0.0));
  }
};

MetricStats stats_for(const std::vector<const PairMetrics*>& rows) {
  MetricStats s;
  s.n = static_cast<int>(rows.size());
  Accumulator ds, nc, si, tr, rot;
  for (const PairMetrics* r : rows) {
    if (!r->success) continue;
    ++s.n_success;
    ds.add(r->ds);
    nc.add(r->nc);
    si.add(r->si);
    tr.add(r->trans_err_mm);
    rot.add(r->rot_err_rad);
  }
  s.ds_mean = ds.mean();
  s.ds_std = ds.stddev();
  s.nc_mean = nc.mean();
  s.nc_std = nc.stddev();
  s.si_mean = si.mean();
  s.si_std = si.stddev();
  s.trans_mean = tr.mean();
  s.trans_std = tr.stddev();
  s.rot_mean = rot.mean();
  s.rot_std = rot.stddev();
  s.success_rate = s.n > 0 ? 100.0 * s.n_success / s.n : 0.0;
  return s;
}

}  // namespace

std::map<std::string, MetricStats> MetricsReport::aggregate() const {
  std::vector<const PairMetrics*> sorted;
  sorted.reserve(pairs.size());
  for (const auto& p : pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](const PairMetrics* a, const PairMetrics* b) {
              return std::tie(a->case_id, a->frame_id) <
                     std::tie(b->case_id, b->frame_id);
            });

  std::map<std::string, std::vector<const PairMetrics*>> by_level;
  for (const PairMetrics* p : sorted) by_level[p->difficulty].push_back(p);

  std::map<std::string, MetricStats> out;
  for (const auto& [level, rows] : by_level) out[level] = stats_for(rows);
  if (!sorted.empty()) out["average"] = stats_for(sorted);
  return out;
}

void MetricsReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write csv: " + path.string());
  out << "case_id,frame_id,difficulty,ds,nc,si,trans_err_mm,rot_err_rad,"
         "success,init_trans_err_mm,init_rot_err_rad\n";
  char buf[512];
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  p.case_id.c_str(), p.frame_id, p.difficulty.c_str(), p.ds,
                  p.nc, p.si, p.trans_err_mm, p.rot_err_rad,
                  p.success ? 1 : 0, p.init_trans_err_mm, p.init_rot_err_rad);
    out << buf;
  }
}

MetricsReport MetricsReport::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open csv: " + path.string());

  std::string header;
  if (!std::getline(in, header) || header.rfind("case_id,", 0) != 0) {
    throw MalformedCsv("unexpected csv header in " + path.string());
  }

  MetricsReport report;
  std::string line;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 11) {
      throw MalformedCsv("line " + std::to_string(lineno) + " has " +
                         std::to_string(fields.size()) + " fields");
    }
    try {
      PairMetrics p;
      p.case_id = fields[0];
      p.frame_id = std::stoi(fields[1]);
      p.difficulty = fields[2];
      p.ds = std::stod(fields[3]);
      p.nc = std::stod(fields[4]);
      p.si = std::stod(fields[5]);
      p.trans_err_mm = std::stod(fields[6]);
      p.rot_err_rad = std::stod(fields[7]);
      p.success = std::stoi(fields[8]) != 0;
      p.init_trans_err_mm = std::stod(fields[9]);
      p.init_rot_err_rad = std::stod(fields[10]);
      report.pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw MalformedCsv("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return report;
}

namespace {

nlohmann::json stats_json(const MetricStats& s) {
  return {
      {"n", s.n},
      {"n_success", s.n_success},
      {"success_rate_percent", s.success_rate},
      {"ds", {{"mean", s.ds_mean}, {"std", s.ds_std}}},
      {"nc", {{"mean", s.nc_mean}, {"std", s.nc_std}}},
      {"si", {{"mean", s.si_mean}, {"std", s.si_std}}},
      {"trans_err_mm", {{"mean", s.trans_mean}, {"std", s.trans_std}}},
      {"rot_err_rad", {{"mean", s.rot_mean}, {"std", s.rot_std}}},
  };
}

std::string cell(double mean, double sd, int n_success) {
  if (n_success == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f +- %.3f", mean, sd);
  return buf;
}

}  // namespace

void MetricsReport::write_summary_json(
    const std::filesystem::path& path) const {
  nlohmann::json j;
  for (const auto& [level, stats] : aggregate()) {
    j[level] = stats_json(stats);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write summary json: " + path.string());
  out << j.dump(2) << "\n";
}

std::string MetricsReport::format_table() const {
  const auto agg = aggregate();
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-8s %5s %-17s %-17s %-17s %-17s %-17s %8s\n",
                "Level", "N", "DS", "NC", "SI", "TransErr(mm)", "RotErr(rad)",
                "Succ(%)");
  out << buf;

  auto emit = [&](const std::string& name, const MetricStats& s) {
    std::snprintf(buf, sizeof(buf),
                  "%-8s %5d %-17s %-17s %-17s %-17s %-17s %8.1f\n",
                  name.c_str(), s.n, cell(s.ds_mean, s.ds_std, s.n_success).c_str(),
                  cell(s.nc_mean, s.nc_std, s.n_success).c_str(),
                  cell(s.si_mean, s.si_std, s.n_success).c_str(),
                  cell(s.trans_mean, s.trans_std, s.n_success).c_str(),
                  cell(s.rot_mean, s.rot_std, s.n_success).c_str(),
                  s.success_rate);
    out << buf;
  };

  for (const char* level : {"easy", "medium", "hard"}) {
    auto it = agg.find(level);
    if (it != agg.end()) emit(level, it->second);
  }
  auto avg = agg.find("average");
  if (avg != agg.end()) emit("average", avg->second);
  return out.str();
}

}  // namespace bronchopt
