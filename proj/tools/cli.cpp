#include "cli.hpp"

#include <conceptpose/concept_selection.hpp>
#include <conceptpose/error.hpp>
#include <conceptpose/io/csal.hpp>
#include <conceptpose/io/frame_io.hpp>
#include <conceptpose/io/manifest.hpp>
#include <conceptpose/io/model_io.hpp>
#include <conceptpose/io/report.hpp>
#include <conceptpose/pipeline.hpp>
#include <conceptpose/synth.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace conceptpose::cli {

namespace fs = std::filesystem;

namespace {

struct PipelineFlags {
  bool voxelize = false;
  int resolution = 64;
  double tau = 0.1;
  std::string measure = "forward_kl";
  std::optional<int> iterations;
  double threshold = 0.01;
  std::optional<std::size_t> max_corr;
  std::uint64_t seed = 42;
  int k = 20;
  double std_ratio = 2.0;
  double sigma_mult = 2.5;
  bool no_icp = false;
  bool serial = false;
  bool voxelize_first = false;
  std::string icp_cloud = "filtered";

  PipelineConfig to_config() const {
    PipelineConfig c;
    c.temperature = tau;
    c.voxelize = voxelize;
    c.resolution = resolution;
    c.filter_before_voxelize = !voxelize_first;
    c.filter = {k, std_ratio, sigma_mult};
    c.measure = *parse_measure(measure);
    c.max_correspondences = max_corr;
    c.ransac_iterations = iterations;
    c.inlier_threshold = threshold;
    c.icp = !no_icp;
    c.icp_cloud = icp_cloud == "matched" ? IcpCloud::Matched : IcpCloud::Filtered;
    c.seed = seed;
    c.execution = serial ? Execution::Serial : Execution::Parallel;
    return c;
  }
};

void add_pipeline_options(CLI::App& app, PipelineFlags& f) {
  std::vector<std::string> measures;
  for (auto m : kAllMeasures) measures.emplace_back(to_string(m));
  app.add_flag("--voxelize", f.voxelize, "Pool clouds on a voxel grid before matching");
  app.add_option("--resolution", f.resolution, "Voxel grid resolution per axis")
      ->check(CLI::Range(2, 1024));
  app.add_option("--tau", f.tau, "Softmax temperature")->check(CLI::PositiveNumber);
  app.add_option("--measure", f.measure, "Concept similarity measure")
      ->check(CLI::IsMember(measures));
  app.add_option("--iterations", f.iterations, "RANSAC iterations")->check(CLI::PositiveNumber);
  app.add_option("--threshold", f.threshold, "RANSAC inlier threshold (m)")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-corr", f.max_corr, "Maximum query points matched")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--k", f.k, "Neighbours for the local outlier filter")->check(CLI::PositiveNumber);
  app.add_option("--std-ratio", f.std_ratio, "Local filter standard-deviation ratio")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--sigma-mult", f.sigma_mult, "Global filter sigma multiplier")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--no-icp", f.no_icp, "Skip ICP refinement");
  app.add_flag("--serial", f.serial, "Run every kernel on one thread");
  app.add_flag("--voxelize-first", f.voxelize_first, "Voxelize before the outlier filters");
  app.add_option("--icp-cloud", f.icp_cloud, "Clouds aligned by ICP")
      ->check(CLI::IsMember({"filtered", "matched"}));
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Eigen::Vector3d parse_vec3(const std::string& s) {
  const auto parts = split_csv(s);
  if (parts.size() != 3) throw Error(ErrorKind::Configuration, "expected x,y,z but got " + s);
  return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
}

struct LoadedDataset {
  std::vector<io::PairManifestEntry> entries;
  std::vector<EvaluationCase> cases;
  std::vector<ObjectModel> models;
  std::vector<std::string> object_ids;
};

LoadedDataset load_dataset(const fs::path& manifest, fs::path root, fs::path models_dir,
                           std::ostream& err) {
  LoadedDataset d;
  d.entries = io::read_manifest(manifest);
  if (d.entries.empty()) {
    throw Error(ErrorKind::Ingestion, manifest.string() + ": manifest has no pairs");
  }
  if (root.empty()) root = manifest.parent_path();
  if (models_dir.empty()) models_dir = root / "models";
  const auto models = io::read_models(models_dir);
  std::map<std::string, std::size_t> index;
  for (const auto& [id, m] : models) {
    index.emplace(id, d.models.size());
    d.models.push_back(m);
  }
  for (const auto& e : d.entries) {
    if (!e.anchor_pose || !e.query_pose) {
      throw Error(ErrorKind::Ingestion, "pair " + e.pair_id + " lacks ground-truth poses");
    }
    const auto it = index.find(e.object_id);
    if (it == index.end()) {
      throw Error(ErrorKind::Ingestion, "pair " + e.pair_id + ": unknown object " + e.object_id);
    }
    EvaluationCase c;
    c.id = e.pair_id;
    c.anchor = io::load_view(root / e.anchor.scene_id, e.anchor.frame_id);
    c.query = io::load_view(root / e.query.scene_id, e.query.frame_id);
    c.anchor_object_pose = *e.anchor_pose;
    c.query_object_pose = *e.query_pose;
    c.model_index = it->second;
    d.cases.push_back(std::move(c));
    d.object_ids.push_back(e.object_id);
  }
  err << "loaded " << d.cases.size() << " pairs and " << d.models.size() << " models\n";
  return d;
}

int run_estimate(const PipelineFlags& flags, const fs::path& anchor_dir,
                 const std::string& anchor_id, fs::path query_dir, const std::string& query_id,
                 bool timings, std::ostream& out, std::ostream& err) {
  if (query_dir.empty()) query_dir = anchor_dir;
  const SyntheticView anchor = io::load_view(anchor_dir, anchor_id);
  const SyntheticView query = io::load_view(query_dir, query_id);
  const auto result = estimate_relative_pose({anchor.frame, anchor.saliency},
                                             {query.frame, query.saliency}, flags.to_config());
  out << io::estimate_json(result, timings) << "\n";
  for (const auto& t : result.diagnostics.timings) {
    err << "stage " << t.stage << ": " << t.seconds << " s\n";
  }
  return kExitOk;
}

int run_evaluate(const PipelineFlags& flags, const fs::path& manifest, const fs::path& root,
                 const fs::path& models_dir, const std::string& format, const fs::path& output,
                 std::ostream& out, std::ostream& err) {
  const LoadedDataset d = load_dataset(manifest, root, models_dir, err);
  const DatasetEvaluation eval = evaluate_dataset(d.cases, d.models, flags.to_config());
  io::ReportDocument doc;
  for (std::size_t i = 0; i < d.cases.size(); ++i) {
    doc.records.push_back({d.entries[i].pair_id, d.object_ids[i], eval.outcomes[i],
                           eval.report.records[i]});
    if (!eval.outcomes[i].estimate) {
      err << "pair " << d.entries[i].pair_id << " failed: " << eval.outcomes[i].failure << "\n";
    }
  }
  doc.aggregates = eval.report.aggregates;
  const std::string json = io::report_json(doc);
  if (!output.empty()) {
    std::ofstream f(output, std::ios::trunc);
    if (!f) throw Error(ErrorKind::Ingestion, "cannot write " + output.string());
    f << json << "\n";
  }
  if (format == "text") {
    io::write_report_text(out, doc);
  } else {
    out << json << "\n";
  }
  return kExitOk;
}

struct SynthFlags {
  fs::path out_dir;
  std::string kind = "cup_with_handle";
  double size = 0.12;
  int pairs = 1;
  std::uint64_t seed = 42;
  double depth_sigma = 0.0;
  double saliency_sigma = 0.0;
  double outlier_frac = 0.0;
  double max_angle = 30.0;
  double max_shift = 0.05;
  std::optional<double> rot_deg;
  std::string rot_axis = "0,1,0";
  std::string shift = "0,0,0";
};

int run_synth(const SynthFlags& s, std::ostream& out, std::ostream& err) {
  const auto kind = parse_object_kind(s.kind);
  if (!kind) throw Error(ErrorKind::Configuration, "unknown object kind " + s.kind);
  const SyntheticObject object = make_object(*kind, s.size);
  const CameraIntrinsics k = default_intrinsics();
  const NoiseConfig noise{s.depth_sigma, s.saliency_sigma, s.outlier_frac};
  const std::string object_id(to_string(*kind));
  const fs::path scene = s.out_dir / "synth";

  std::vector<io::PairManifestEntry> entries;
  for (int i = 0; i < s.pairs; ++i) {
    const std::uint64_t pair_seed = s.seed + static_cast<std::uint64_t>(i);
    RigidTransform rel;
    if (s.rot_deg) {
      rel = {rot_axis(parse_vec3(s.rot_axis), *s.rot_deg), parse_vec3(s.shift)};
    } else {
      rel = random_relative_pose(pair_seed, s.max_angle, s.max_shift);
    }
    const SyntheticPair pair = make_pair(object, rel, k, noise, pair_seed);
    char id[32];
    std::snprintf(id, sizeof id, "%06d", i);
    io::save_view(scene, std::string(id) + "_a", pair.anchor);
    io::save_view(scene, std::string(id) + "_q", pair.query);
    io::PairManifestEntry e;
    e.pair_id = std::string("pair_") + id;
    e.anchor = {"synth", std::string(id) + "_a"};
    e.query = {"synth", std::string(id) + "_q"};
    e.object_id = object_id;
    e.category = object.field.category;
    e.anchor_pose = pair.anchor_pose;
    e.query_pose = pair.query_pose;
    entries.push_back(e);
    err << "wrote " << e.pair_id << "\n";
  }
  io::write_manifest(s.out_dir / "manifest.jsonl", entries);
  io::write_models(s.out_dir / "models", {{object_id, object.model}});

  nlohmann::ordered_json summary = {{"pairs", entries.size()},
                                    {"manifest", (s.out_dir / "manifest.jsonl").string()},
                                    {"object_id", object_id},
                                    {"labels", object.field.labels}};
  nlohmann::ordered_json rels = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    rels.push_back(io::pose_to_numbers(compose(*e.query_pose, invert(*e.anchor_pose))));
  }
  summary["relative_poses"] = rels;
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int run_select(const PipelineFlags& flags, const fs::path& manifest, const fs::path& root,
               const fs::path& models_dir, const std::string& candidates, std::size_t budget,
               bool no_reference, std::ostream& out, std::ostream& err) {
  const LoadedDataset d = load_dataset(manifest, root, models_dir, err);
  std::vector<std::string> labels = split_csv(candidates);
  if (labels.empty()) labels = d.cases.front().anchor.saliency.labels;
  SelectionConfig cfg;
  cfg.pipeline = flags.to_config();
  cfg.reference_channel = !no_reference;
  const auto sel = select_concepts_greedy(d.cases, d.models, labels, budget, cfg);
  for (const auto& w : sel.warnings) err << "warning: " << w << "\n";
  nlohmann::ordered_json j = {{"selected", sel.selected},
                              {"step_bop_ar", sel.step_bop_ar},
                              {"best_so_far", sel.best_so_far}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

constexpr const char* kFormats = R"(CSAL saliency tensor (little-endian)
  offset 0   "CSAL"
  offset 4   u32 version = 1
  offset 8   u32 L, u32 H, u32 W
  offset 20  u16 length + UTF-8 bytes: object category
             L x (u16 length + UTF-8 bytes): labels in channel order
             L*H*W float32: channel-major, then row-major, values in [0,1]

Frame directory
  <dir>/rgb/<id>.png          8-bit RGB
  <dir>/depth/<id>.png        16-bit gray, millimeters, 0 = invalid
  <dir>/mask/<id>.png         nonzero = object
  <dir>/intrinsics/<id>.txt   fx= fy= cx= cy= width= height= (or <dir>/intrinsics.txt)
  <dir>/saliency/<id>.csal

Pair manifest (one JSON object per line)
  {"pair_id", "anchor": {"scene_id", "frame_id"}, "query": {...},
   "object_id", "category", "anchor_pose": [12], "query_pose": [12]}
  poses: row-major rotation then translation (m); frames live in <root>/<scene_id>/

Models
  <root>/models/models_info.json: {"<object_id>": {"file", "diameter", "unit_scale",
    "symmetric", "symmetries_discrete": [[12]], "symmetries_continuous": [{"axis", "offset"}]}}
  meshes: ASCII or binary little-endian PLY

Configuration file (--config)
  key=value lines named after the long flags, e.g. tau=0.1, max-corr=5000, voxelize=true
  command-line flags override the file

Exit status
  0 success, 1 input or configuration error, 2 no consensus
)";

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Training-free relative object pose from concept saliency", "conceptpose"};
  app.set_config("--config", "", "key=value file mirroring the flags");
  app.require_subcommand(1);
  app.fallthrough();

  PipelineFlags flags;
  add_pipeline_options(app, flags);

  auto* estimate = app.add_subcommand("estimate", "Estimate the relative pose of one pair");
  fs::path anchor_dir, query_dir;
  std::string anchor_id, query_id;
  bool timings = false;
  estimate->add_option("--anchor-dir", anchor_dir, "Anchor frame directory")->required();
  estimate->add_option("--anchor-id", anchor_id, "Anchor frame id")->required();
  estimate->add_option("--query-dir", query_dir, "Query frame directory (default: anchor dir)");
  estimate->add_option("--query-id", query_id, "Query frame id")->required();
  estimate->add_flag("--timings", timings, "Include stage timings in the output");

  auto* evaluate = app.add_subcommand("evaluate", "Score the pipeline on a pair manifest");
  fs::path manifest, root, models_dir, output;
  std::string format = "json";
  for (auto* sub : {evaluate}) {
    sub->add_option("--manifest", manifest, "Pair manifest (JSON lines)")->required();
    sub->add_option("--root", root, "Dataset root (default: manifest directory)");
    sub->add_option("--models", models_dir, "Model directory (default: <root>/models)");
  }
  evaluate->add_option("--format", format, "Standard output format")
      ->check(CLI::IsMember({"json", "text"}));
  evaluate->add_option("--output", output, "Also write the JSON report here");

  auto* synth = app.add_subcommand("synth", "Write synthetic fixture pairs");
  SynthFlags sf;
  synth->add_option("--out", sf.out_dir, "Output directory")->required();
  synth->add_option("--kind", sf.kind, "Object kind")
      ->check(CLI::IsMember({"cup_with_handle", "box", "cylinder", "asymmetric_blob"}));
  synth->add_option("--size", sf.size, "Object size (m)")->check(CLI::PositiveNumber);
  synth->add_option("--pairs", sf.pairs, "Number of pairs")->check(CLI::PositiveNumber);
  synth->add_option("--pair-seed", sf.seed, "Seed of the first pair");
  synth->add_option("--depth-sigma", sf.depth_sigma, "Depth noise (m)");
  synth->add_option("--saliency-sigma", sf.saliency_sigma, "Saliency noise");
  synth->add_option("--outlier-frac", sf.outlier_frac, "Fraction of depth outliers");
  synth->add_option("--max-angle", sf.max_angle, "Random rotation bound (deg)");
  synth->add_option("--max-shift", sf.max_shift, "Random shift bound (m)");
  synth->add_option("--rot-deg", sf.rot_deg, "Fixed rotation angle (deg) instead of random");
  synth->add_option("--rot-axis", sf.rot_axis, "Fixed rotation axis x,y,z");
  synth->add_option("--shift", sf.shift, "Fixed translation x,y,z (m)");

  auto* select = app.add_subcommand("select-concepts", "Greedy forward concept selection");
  std::string candidates;
  std::size_t budget = 5;
  bool no_reference = false;
  select->add_option("--manifest", manifest, "Pair manifest (JSON lines)")->required();
  select->add_option("--root", root, "Dataset root (default: manifest directory)");
  select->add_option("--models", models_dir, "Model directory (default: <root>/models)");
  select->add_option("--candidates", candidates, "Comma-separated labels (default: all)");
  select->add_option("--budget", budget, "Number of labels to select");
  select->add_flag("--no-reference-channel", no_reference,
                   "Score subsets without the constant reference channel");

  auto* formats = app.add_subcommand("formats", "Print the on-disk format specifications");

  std::vector<const char*> argv{"conceptpose"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitInputError;
  }

  try {
    if (*estimate) {
      return run_estimate(flags, anchor_dir, anchor_id, query_dir, query_id, timings, out, err);
    }
    if (*evaluate) {
      return run_evaluate(flags, manifest, root, models_dir, format, output, out, err);
    }
    if (*synth) return run_synth(sf, out, err);
    if (*select) {
      return run_select(flags, manifest, root, models_dir, candidates, budget, no_reference, out,
                        err);
    }
    if (*formats) {
      out << kFormats;
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.kind() == ErrorKind::NoConsensus ? kExitNoConsensus : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace conceptpose::cli
