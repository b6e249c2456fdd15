#include <conceptpose/io/model_io.hpp>

#include <conceptpose/error.hpp>
#include <conceptpose/io/manifest.hpp>

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace conceptpose::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& what) {
  throw Error(ErrorKind::Ingestion, path.string() + ": " + what);
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

double decode_binary(const std::string& t, const unsigned char* p) {
  auto le = [&](int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  };
  if (t == "char" || t == "int8") return static_cast<std::int8_t>(p[0]);
  if (t == "uchar" || t == "uint8") return p[0];
  if (t == "short" || t == "int16") return static_cast<std::int16_t>(le(2));
  if (t == "ushort" || t == "uint16") return static_cast<std::uint16_t>(le(2));
  if (t == "int" || t == "int32") return static_cast<std::int32_t>(le(4));
  if (t == "uint" || t == "uint32") return static_cast<std::uint32_t>(le(4));
  if (t == "float" || t == "float32") return std::bit_cast<float>(static_cast<std::uint32_t>(le(4)));
  return std::bit_cast<double>(le(8));
}

class ValueSource {
 public:
  ValueSource(std::istream& in, bool binary, const fs::path& path)
      : in_(in), binary_(binary), path_(path) {}

  double next(const std::string& type) {
    if (binary_) {
      unsigned char buf[8];
      const std::size_t n = type_size(type);
      if (!in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
        fail(path_, "truncated binary body");
      }
      return decode_binary(type, buf);
    }
    double v = 0.0;
    if (!(in_ >> v)) fail(path_, "truncated or malformed ASCII body");
    return v;
  }

 private:
  std::istream& in_;
  bool binary_;
  const fs::path& path_;
};

}  // namespace

ObjectModel read_ply(const fs::path& path, double unit_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "missing or unreadable");
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") fail(path, "not a PLY file");

  bool binary = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        fail(path, "unsupported PLY format " + fmt);
      }
    } else if (word == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (word == "property") {
      if (elements.empty()) fail(path, "property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.type >> p.name;
        if (type_size(p.count_type) == 0) fail(path, "unknown PLY type " + p.count_type);
      } else {
        p.type = type;
        ls >> p.name;
      }
      if (type_size(p.type) == 0) fail(path, "unknown PLY type " + p.type);
      elements.back().properties.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }

  ObjectModel model;
  ValueSource values(in, binary, path);
  for (const auto& e : elements) {
    int ix = -1, iy = -1, iz = -1, ifaces = -1;
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
      const auto& n = e.properties[i].name;
      if (n == "x") ix = static_cast<int>(i);
      if (n == "y") iy = static_cast<int>(i);
      if (n == "z") iz = static_cast<int>(i);
      if (n == "vertex_indices" || n == "vertex_index") ifaces = static_cast<int>(i);
    }
    if (e.name == "vertex" && (ix < 0 || iy < 0 || iz < 0)) fail(path, "vertex lacks x/y/z");
    for (std::size_t r = 0; r < e.count; ++r) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      std::vector<int> poly;
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& prop = e.properties[i];
        if (prop.is_list) {
          const auto n = static_cast<long long>(values.next(prop.count_type));
          if (n < 0) fail(path, "negative list length");
          for (long long j = 0; j < n; ++j) {
            const double v = values.next(prop.type);
            if (static_cast<int>(i) == ifaces) poly.push_back(static_cast<int>(v));
          }
        } else {
          const double v = values.next(prop.type);
          if (static_cast<int>(i) == ix) p.x() = v;
          if (static_cast<int>(i) == iy) p.y() = v;
          if (static_cast<int>(i) == iz) p.z() = v;
        }
      }
      if (e.name == "vertex") {
        model.vertices.push_back(unit_scale * p);
      } else if (e.name == "face" && poly.size() >= 3) {
        for (std::size_t j = 1; j + 1 < poly.size(); ++j) {
          model.triangles.emplace_back(poly[0], poly[j], poly[j + 1]);
        }
      }
    }
  }
  for (const auto& t : model.triangles) {
    for (int c = 0; c < 3; ++c) {
      if (t[c] < 0 || t[c] >= static_cast<int>(model.vertices.size())) {
        fail(path, "face references a missing vertex");
      }
    }
  }
  if (model.vertices.empty()) fail(path, "no vertices");
  model.diameter = compute_diameter(model.vertices);
  return model;
}

void write_ply(const fs::path& path, const ObjectModel& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(path, "cannot write");
  out << "ply\nformat ascii 1.0\nelement vertex " << model.vertices.size()
      << "\nproperty double x\nproperty double y\nproperty double z\n";
  if (!model.triangles.empty()) {
    out << "element face " << model.triangles.size()
        << "\nproperty list uchar int vertex_indices\n";
  }
  out << "end_header\n";
  out.precision(17);
  for (const auto& v : model.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : model.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

std::map<std::string, ObjectModel> read_models(const fs::path& models_dir) {
  const fs::path info_path = models_dir / "models_info.json";
  std::ifstream in(info_path);
  if (!in) fail(info_path, "missing or unreadable");
  std::map<std::string, ObjectModel> models;
  try {
    const json info = json::parse(in);
    for (const auto& [id, entry] : info.items()) {
      ObjectModel m = read_ply(models_dir / entry.at("file").get<std::string>(),
                               entry.value("unit_scale", 1.0));
      if (entry.contains("diameter")) m.diameter = entry["diameter"].get<double>();
      for (const auto& s : entry.value("symmetries_discrete", json::array())) {
        m.discrete_symmetries.push_back(pose_from_numbers(s.get<std::vector<double>>()));
      }
      for (const auto& s : entry.value("symmetries_continuous", json::array())) {
        const auto axis = s.at("axis").get<std::vector<double>>();
        const auto offset = s.value("offset", std::vector<double>{0.0, 0.0, 0.0});
        if (axis.size() != 3 || offset.size() != 3) fail(info_path, "bad continuous symmetry");
        m.continuous_symmetries.push_back(
            {Eigen::Vector3d(axis[0], axis[1], axis[2]).normalized(),
             Eigen::Vector3d(offset[0], offset[1], offset[2])});
      }
      m.is_symmetric = entry.value(
          "symmetric", !m.discrete_symmetries.empty() || !m.continuous_symmetries.empty());
      m.validate();
      models.emplace(id, std::move(m));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(info_path, e.what());
  }
  return models;
}

void write_models(const fs::path& models_dir, const std::map<std::string, ObjectModel>& models) {
  fs::create_directories(models_dir);
  json info = json::object();
  for (const auto& [id, m] : models) {
    const std::string file = id + ".ply";
    write_ply(models_dir / file, m);
    json entry = {{"file", file}, {"diameter", m.diameter}, {"symmetric", m.is_symmetric}};
    json discrete = json::array();
    for (const auto& s : m.discrete_symmetries) discrete.push_back(pose_to_numbers(s));
    json continuous = json::array();
    for (const auto& s : m.continuous_symmetries) {
      continuous.push_back({{"axis", {s.axis.x(), s.axis.y(), s.axis.z()}},
                            {"offset", {s.offset.x(), s.offset.y(), s.offset.z()}}});
    }
    entry["symmetries_discrete"] = discrete;
    entry["symmetries_continuous"] = continuous;
    info[id] = entry;
  }
  std::ofstream out(models_dir / "models_info.json", std::ios::trunc);
  if (!out) fail(models_dir / "models_info.json", "cannot write");
  out << info.dump(2) << "\n";
}

}  // namespace conceptpose::io
