#include <conceptpose/io/manifest.hpp>

#include <conceptpose/error.hpp>

#include <json.hpp>

#include <fstream>

namespace conceptpose::io {

using nlohmann::json;

void PairManifestEntry::validate() const {
  auto need = [&](const std::string& v, const char* what) {
    if (v.empty()) throw Error(ErrorKind::Ingestion, std::string("manifest entry has empty ") + what);
  };
  need(pair_id, "pair_id");
  need(anchor.scene_id, "anchor.scene_id");
  need(anchor.frame_id, "anchor.frame_id");
  need(query.scene_id, "query.scene_id");
  need(query.frame_id, "query.frame_id");
  need(object_id, "object_id");
  for (const auto* pose : {&anchor_pose, &query_pose}) {
    if (*pose && !(*pose)->is_valid(1e-6)) {
      throw Error(ErrorKind::Ingestion, "manifest entry " + pair_id + " has an invalid pose");
    }
  }
}

std::vector<double> pose_to_numbers(const RigidTransform& t) {
  std::vector<double> v;
  v.reserve(12);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) v.push_back(t.rotation(r, c));
  }
  for (int i = 0; i < 3; ++i) v.push_back(t.translation[i]);
  return v;
}

RigidTransform pose_from_numbers(const std::vector<double>& v) {
  if (v.size() != 12) {
    throw Error(ErrorKind::Ingestion, "pose needs 12 numbers, got " + std::to_string(v.size()));
  }
  RigidTransform t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = v[3 * r + c];
  }
  t.translation = Eigen::Vector3d(v[9], v[10], v[11]);
  if (!t.is_valid(1e-6)) throw Error(ErrorKind::Ingestion, "pose rotation is not orthonormal");
  return t;
}

namespace {

FrameRef frame_ref(const json& j) {
  return {j.at("scene_id").get<std::string>(), j.at("frame_id").get<std::string>()};
}

json frame_ref_json(const FrameRef& r) { return {{"scene_id", r.scene_id}, {"frame_id", r.frame_id}}; }

}  // namespace

std::vector<PairManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Ingestion, path.string() + ": missing or unreadable");
  std::vector<PairManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      PairManifestEntry e;
      e.pair_id = j.at("pair_id").get<std::string>();
      e.anchor = frame_ref(j.at("anchor"));
      e.query = frame_ref(j.at("query"));
      e.object_id = j.at("object_id").get<std::string>();
      e.category = j.value("category", std::string());
      if (j.contains("anchor_pose") && !j["anchor_pose"].is_null()) {
        e.anchor_pose = pose_from_numbers(j["anchor_pose"].get<std::vector<double>>());
      }
      if (j.contains("query_pose") && !j["query_pose"].is_null()) {
        e.query_pose = pose_from_numbers(j["query_pose"].get<std::vector<double>>());
      }
      e.validate();
      entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(ErrorKind::Ingestion,
                  path.string() + ": line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<PairManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Ingestion, "cannot write " + path.string());
  for (const auto& e : entries) {
    json j = {{"pair_id", e.pair_id},
              {"anchor", frame_ref_json(e.anchor)},
              {"query", frame_ref_json(e.query)},
              {"object_id", e.object_id},
              {"category", e.category}};
    if (e.anchor_pose) j["anchor_pose"] = pose_to_numbers(*e.anchor_pose);
    if (e.query_pose) j["query_pose"] = pose_to_numbers(*e.query_pose);
    out << j.dump() << "\n";
  }
}

}  // namespace conceptpose::io
