#include <conceptpose/io/report.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/io/manifest.hpp>

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace conceptpose::io {

using nlohmann::ordered_json;

namespace {

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double read_number(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

ordered_json pose_json(const RigidTransform& t) {
  ordered_json rot = ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  }
  return {{"rotation", rot},
          {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

ordered_json counts_json(const CloudCounts& c) {
  return {{"backprojected", c.backprojected},
          {"after_local_filter", c.after_local},
          {"after_global_filter", c.after_global},
          {"matched", c.matched}};
}

ordered_json diagnostics_json(const PipelineDiagnostics& d, bool include_timings) {
  ordered_json j = {{"anchor", counts_json(d.anchor)},
                    {"query", counts_json(d.query)},
                    {"correspondences", d.correspondences},
                    {"ransac_inliers", d.ransac_inliers},
                    {"ransac_best_iteration", d.best_iteration},
                    {"ransac_refit_applied", d.refit_applied},
                    {"icp_iterations", d.icp_iterations},
                    {"icp_rmse", number(d.icp_rmse)}};
  if (include_timings) {
    ordered_json t = ordered_json::object();
    for (const auto& s : d.timings) t[s.stage] = s.seconds;
    j["timings_s"] = t;
  }
  return j;
}

ordered_json evaluation_json(const PairEvaluation& e) {
  ordered_json vsd = ordered_json::array();
  for (double v : e.vsd_errors) vsd.push_back(number(v));
  return {{"estimate_valid", e.estimate_valid},
          {"is_symmetric", e.is_symmetric},
          {"diameter", e.diameter},
          {"image_dimension", e.image_dimension},
          {"add", number(e.add)},
          {"add_s", number(e.add_s)},
          {"add_adaptive", number(e.add_adaptive)},
          {"mssd", number(e.mssd)},
          {"mspd", number(e.mspd)},
          {"vsd_supported", e.vsd_supported},
          {"vsd_errors", vsd},
          {"rotation_err_deg", number(e.rotation_err)},
          {"translation_err_m", number(e.translation_err)},
          {"iou3d", e.iou3d}};
}

PairEvaluation evaluation_from_json(const ordered_json& j) {
  PairEvaluation e;
  e.estimate_valid = j.at("estimate_valid").get<bool>();
  e.is_symmetric = j.at("is_symmetric").get<bool>();
  e.diameter = j.at("diameter").get<double>();
  e.image_dimension = j.at("image_dimension").get<double>();
  e.add = read_number(j.at("add"));
  e.add_s = read_number(j.at("add_s"));
  e.add_adaptive = read_number(j.at("add_adaptive"));
  e.mssd = read_number(j.at("mssd"));
  e.mspd = read_number(j.at("mspd"));
  e.vsd_supported = j.at("vsd_supported").get<bool>();
  const auto& vsd = j.at("vsd_errors");
  if (vsd.size() != e.vsd_errors.size()) throw Error(ErrorKind::Format, "vsd_errors length");
  for (std::size_t i = 0; i < e.vsd_errors.size(); ++i) e.vsd_errors[i] = read_number(vsd[i]);
  e.rotation_err = read_number(j.at("rotation_err_deg"));
  e.translation_err = read_number(j.at("translation_err_m"));
  e.iou3d = j.at("iou3d").get<double>();
  return e;
}

ordered_json aggregates_json(const DatasetAggregates& a) {
  return {{"pairs", a.pairs},
          {"vsd_pairs", a.vsd_pairs},
          {"add_recall", a.add_recall},
          {"add_s_recall", a.add_s_recall},
          {"add_adaptive_recall", a.add_adaptive_recall},
          {"add_auc", a.add_auc},
          {"add_s_auc", a.add_s_auc},
          {"ar_vsd", a.ar_vsd},
          {"ar_mssd", a.ar_mssd},
          {"ar_mspd", a.ar_mspd},
          {"bop_ar", a.bop_ar},
          {"recall_10deg_5cm", a.recall_10deg_5cm},
          {"recall_5deg_2cm", a.recall_5deg_2cm},
          {"miou3d", a.miou3d},
          {"iou3d_50", a.iou3d_50},
          {"iou3d_75", a.iou3d_75}};
}

DatasetAggregates aggregates_from_json(const ordered_json& j) {
  DatasetAggregates a;
  a.pairs = j.at("pairs").get<std::size_t>();
  a.vsd_pairs = j.at("vsd_pairs").get<std::size_t>();
  a.add_recall = j.at("add_recall").get<double>();
  a.add_s_recall = j.at("add_s_recall").get<double>();
  a.add_adaptive_recall = j.at("add_adaptive_recall").get<double>();
  a.add_auc = j.at("add_auc").get<double>();
  a.add_s_auc = j.at("add_s_auc").get<double>();
  a.ar_vsd = j.at("ar_vsd").get<double>();
  a.ar_mssd = j.at("ar_mssd").get<double>();
  a.ar_mspd = j.at("ar_mspd").get<double>();
  a.bop_ar = j.at("bop_ar").get<double>();
  a.recall_10deg_5cm = j.at("recall_10deg_5cm").get<double>();
  a.recall_5deg_2cm = j.at("recall_5deg_2cm").get<double>();
  a.miou3d = j.at("miou3d").get<double>();
  a.iou3d_50 = j.at("iou3d_50").get<double>();
  a.iou3d_75 = j.at("iou3d_75").get<double>();
  return a;
}

}  // namespace

std::string estimate_json(const PipelineResult& result, bool include_timings, int indent) {
  const auto& e = result.estimate;
  ordered_json j = {{"status", "ok"},
                    {"pose", pose_json(e.transform)},
                    {"inlier_count", e.inlier_count},
                    {"inlier_rmse", e.inlier_rmse},
                    {"refined", e.refined},
                    {"diagnostics", diagnostics_json(result.diagnostics, include_timings)}};
  return j.dump(indent);
}

std::string report_json(const ReportDocument& report, int indent) {
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) {
    ordered_json rec = {{"pair_id", r.pair_id}, {"object_id", r.object_id}};
    if (r.outcome.estimate) {
      rec["status"] = "ok";
      rec["relative_pose"] = pose_to_numbers(r.outcome.estimate->transform);
      rec["inlier_count"] = r.outcome.estimate->inlier_count;
    } else {
      rec["status"] = "failed";
      rec["failure_stage"] = r.outcome.failure_stage;
      rec["failure"] = r.outcome.failure;
    }
    if (r.outcome.diagnostics) rec["diagnostics"] = diagnostics_json(*r.outcome.diagnostics, false);
    rec["metrics"] = evaluation_json(r.evaluation);
    records.push_back(rec);
  }
  ordered_json j = {{"records", records}, {"aggregates", aggregates_json(report.aggregates)}};
  return j.dump(indent);
}

ReportDocument parse_report_json(const std::string& text) {
  ReportDocument doc;
  try {
    const auto j = ordered_json::parse(text);
    for (const auto& rec : j.at("records")) {
      ReportRecord r;
      r.pair_id = rec.at("pair_id").get<std::string>();
      r.object_id = rec.at("object_id").get<std::string>();
      if (rec.at("status") == "ok") {
        PoseEstimate est;
        est.transform = pose_from_numbers(rec.at("relative_pose").get<std::vector<double>>());
        est.inlier_count = rec.value("inlier_count", 0);
        r.outcome.estimate = est;
      } else {
        r.outcome.failure_stage = rec.value("failure_stage", std::string());
        r.outcome.failure = rec.value("failure", std::string());
      }
      r.evaluation = evaluation_from_json(rec.at("metrics"));
      doc.records.push_back(std::move(r));
    }
    doc.aggregates = aggregates_from_json(j.at("aggregates"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Format, std::string("report: ") + e.what());
  }
  return doc;
}

void write_report_text(std::ostream& os, const ReportDocument& report) {
  const auto flags = os.flags();
  os << std::left << std::setw(16) << "pair" << std::right << std::setw(10) << "rot_deg"
     << std::setw(10) << "trans_mm" << std::setw(10) << "add_mm" << std::setw(10) << "mssd_mm"
     << std::setw(10) << "mspd_px" << std::setw(8) << "iou" << "\n";
  os << std::fixed;
  for (const auto& r : report.records) {
    const auto& e = r.evaluation;
    os << std::left << std::setw(16) << r.pair_id << std::right << std::setprecision(3);
    if (!e.estimate_valid) {
      os << "  failed (" << r.outcome.failure_stage << ")\n";
      continue;
    }
    os << std::setw(10) << e.rotation_err << std::setw(10) << e.translation_err * 1e3
       << std::setw(10) << e.add * 1e3 << std::setw(10) << e.mssd * 1e3 << std::setw(10) << e.mspd
       << std::setw(8) << e.iou3d << "\n";
  }
  const auto& a = report.aggregates;
  os << std::setprecision(4) << "\npairs            " << a.pairs << "\nADD(-S) recall   "
     << a.add_adaptive_recall << "\nADD AUC          " << a.add_auc << "\nADD-S AUC        "
     << a.add_s_auc << "\nAR_VSD           " << a.ar_vsd << "\nAR_MSSD          " << a.ar_mssd
     << "\nAR_MSPD          " << a.ar_mspd << "\nBOP AR           " << a.bop_ar
     << "\n10deg/5cm        " << a.recall_10deg_5cm << "\n5deg/2cm         "
     << a.recall_5deg_2cm << "\nmIoU3D           " << a.miou3d << "\nIoU3D@50         "
     << a.iou3d_50 << "\nIoU3D@75         " << a.iou3d_75 << "\n";
  os.flags(flags);
}

}  // namespace conceptpose::io
