#pragma once

// Command-line front end: one subcommand per stage plus the end-to-end
// pipeline. Exit codes: 0 ok, 2 validation error, 3 I/O error, 4 TIP rejected
// by --min-score.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voltip/insertion.hpp"
#include "voltip/io.hpp"
#include "voltip/metal_artefact.hpp"
#include "voltip/phantoms.hpp"
#include "voltip/png.hpp"
#include "voltip/threat_isolation.hpp"
#include "voltip/void_determination.hpp"

namespace voltip {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitIo = 3, kExitRejected = 4 };

struct PipelineConfig {
  IsolationParams isolation;
  VoidParams bag;
  ObjectiveParams objective;
  PsoConfig pso;
  MagParams mag;
  bool mag_enabled = true;
  std::uint64_t seed = 0;
};

namespace cli_detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ValidationError(key + ": '" + v + "' is not a number");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ValidationError(key + ": '" + v + "' is not an integer");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(key + ": '" + v + "' is not a boolean");
}

inline Connectivity parse_connectivity(const std::string& key, const std::string& v) {
  if (v == "6") return Connectivity::Six;
  if (v == "26") return Connectivity::TwentySix;
  throw ValidationError(key + ": connectivity must be 6 or 26");
}

inline Axis parse_axis(const std::string& key, const std::string& v) {
  if (v == "x") return Axis::X;
  if (v == "y") return Axis::Y;
  if (v == "z") return Axis::Z;
  throw ValidationError(key + ": axis must be x, y or z");
}

inline Interp parse_interp(const std::string& key, const std::string& v) {
  if (v == "nearest") return Interp::Nearest;
  if (v == "linear") return Interp::Linear;
  if (v == "cubic-spline") return Interp::CubicSpline;
  throw ValidationError(key + ": interpolation must be nearest, linear or cubic-spline");
}

inline ReconFilter parse_filter(const std::string& key, const std::string& v) {
  if (v == "ram-lak") return ReconFilter::RamLak;
  if (v == "shepp-logan") return ReconFilter::SheppLogan;
  throw ValidationError(key + ": filter must be ram-lak or shepp-logan");
}

template <class T>
T positive(const std::string& key, long long v) {
  if (v < 1) throw ValidationError(key + " must be >= 1");
  return static_cast<T>(v);
}

struct Setting {
  std::string key;
  std::string help;
  std::function<void(PipelineConfig&, const std::string&)> apply;
};

inline const std::vector<Setting>& settings() {
  using C = PipelineConfig;
  using S = const std::string&;
  static const std::vector<Setting> table = {
      {"isolation.binarize_threshold", "threat binarisation threshold",
       [](C& c, S v) { c.isolation.binarize_threshold = parse_double("isolation.binarize_threshold", v); }},
      {"isolation.body_dilate_radius", "threat body dilation radius (voxels)",
       [](C& c, S v) { c.isolation.body_dilate_radius = positive<int>("isolation.body_dilate_radius", parse_int("", v)); }},
      {"isolation.background_dilate_radius", "threat background dilation radius (voxels)",
       [](C& c, S v) {
         c.isolation.background_dilate_radius = positive<int>("isolation.background_dilate_radius", parse_int("", v));
       }},
      {"isolation.connectivity", "threat CCL connectivity (6|26)",
       [](C& c, S v) { c.isolation.connectivity = parse_connectivity("isolation.connectivity", v); }},
      {"void.binarize_threshold",
       "bag binarisation threshold; prefer a high value, a low one lets noise around the bag become void",
       [](C& c, S v) { c.bag.binarize_threshold = parse_double("void.binarize_threshold", v); }},
      {"void.bag_dilate_radius", "bag dilation radius (voxels)",
       [](C& c, S v) { c.bag.bag_dilate_radius = positive<int>("void.bag_dilate_radius", parse_int("", v)); }},
      {"void.content_threshold", "intensity below which inner voxels are void",
       [](C& c, S v) { c.bag.content_threshold = parse_double("void.content_threshold", v); }},
      {"void.c", "cost of projecting onto outer-bag voxels",
       [](C& c, S v) { c.bag.c = parse_double("void.c", v); }},
      {"void.connectivity", "bag CCL connectivity (6|26)",
       [](C& c, S v) { c.bag.connectivity = parse_connectivity("void.connectivity", v); }},
      {"objective.lambda1", "weight of the count of voxels above c_prime",
       [](C& c, S v) { c.objective.lambda1 = parse_double("objective.lambda1", v); }},
      {"objective.lambda2", "weight of the height term",
       [](C& c, S v) { c.objective.lambda2 = parse_double("objective.lambda2", v); }},
      {"objective.c_prime", "step threshold on weighted cost",
       [](C& c, S v) { c.objective.c_prime = parse_double("objective.c_prime", v); }},
      {"objective.gravity_axis", "gravity axis (x|y|z)",
       [](C& c, S v) { c.objective.gravity_axis = parse_axis("objective.gravity_axis", v); }},
      {"objective.gravity_points_positive", "larger coordinates are lower (true|false)",
       [](C& c, S v) { c.objective.gravity_points_positive = parse_bool("objective.gravity_points_positive", v); }},
      {"objective.interp", "rotation interpolation (nearest|linear|cubic-spline)",
       [](C& c, S v) { c.objective.interp = parse_interp("objective.interp", v); }},
      {"pso.w", "inertia weight", [](C& c, S v) { c.pso.w = parse_double("pso.w", v); }},
      {"pso.c1", "cognitive parameter", [](C& c, S v) { c.pso.c1 = parse_double("pso.c1", v); }},
      {"pso.c2", "social parameter", [](C& c, S v) { c.pso.c2 = parse_double("pso.c2", v); }},
      {"pso.N", "particle count",
       [](C& c, S v) { c.pso.particles = positive<std::size_t>("pso.N", parse_int("pso.N", v)); }},
      {"pso.T", "iteration count",
       [](C& c, S v) { c.pso.iterations = positive<std::size_t>("pso.T", parse_int("pso.T", v)); }},
      {"mag.enabled", "run metal artefact generation in the pipeline (true|false)",
       [](C& c, S v) { c.mag_enabled = parse_bool("mag.enabled", v); }},
      {"mag.metal_threshold", "metal intensity threshold",
       [](C& c, S v) { c.mag.metal_threshold = parse_double("mag.metal_threshold", v); }},
      {"mag.q", "sinogram corruption strength in [0,1]", [](C& c, S v) { c.mag.q = parse_double("mag.q", v); }},
      {"mag.n_angles", "projection angle count",
       [](C& c, S v) { c.mag.n_angles = positive<std::size_t>("mag.n_angles", parse_int("mag.n_angles", v)); }},
      {"mag.recon_filter", "reconstruction filter (ram-lak|shepp-logan)",
       [](C& c, S v) { c.mag.recon_filter = parse_filter("mag.recon_filter", v); }},
      {"mag.slice_axis", "slicing axis (x|y|z)",
       [](C& c, S v) { c.mag.slice_axis = parse_axis("mag.slice_axis", v); }},
      {"mag.bypass_metal_free", "copy metal-free slices unchanged (true|false)",
       [](C& c, S v) { c.mag.bypass_metal_free = parse_bool("mag.bypass_metal_free", v); }},
      {"seed", "global random seed",
       [](C& c, S v) {
         const long long s = parse_int("seed", v);
         if (s < 0) throw ValidationError("seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return table;
}

inline void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& s : settings())
    if (s.key == key) {
      s.apply(cfg, value);
      return;
    }
  throw ValidationError("unknown configuration key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <std::size_t N>
std::array<double, N> parse_list(const std::string& what, const std::string& s) {
  std::array<double, N> out{};
  std::stringstream ss(s);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == N) throw ValidationError(what + ": expected " + std::to_string(N) + " comma-separated values");
    out[n++] = parse_double(what, trim(item));
  }
  if (n == 1 && N == 3) out[1] = out[2] = out[0];
  else if (n != N) throw ValidationError(what + ": expected " + std::to_string(N) + " comma-separated values");
  return out;
}

inline Dims parse_dims(const std::string& s) {
  const auto a = parse_list<3>("dims", s);
  for (double x : a)
    if (!(x >= 1) || x != std::floor(x)) throw ValidationError("dims must be positive integers");
  return {static_cast<std::size_t>(a[0]), static_cast<std::size_t>(a[1]), static_cast<std::size_t>(a[2])};
}

inline ThreatIndicator indicator_from_field(const Grid<float>& f) {
  ThreatIndicator ind{Grid<double>(f.dims(), 0.0, f.spacing()), Grid<std::uint8_t>(f.dims(), 0, f.spacing())};
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double w = f[n];
    if (w > 1.0) throw ValidationError("indicator weight exceeds 1");
    ind.w[n] = w;
    ind.region[n] = static_cast<std::uint8_t>(w == 1.0 ? ThreatRegion::Body
                                                       : (w > 0 ? ThreatRegion::Uncertain : ThreatRegion::Background));
  }
  return ind;
}

inline nlohmann::ordered_json pose_json(const Pose& p) {
  return {{"x", p.x}, {"y", p.y}, {"z", p.z}, {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

inline Pose pose_from_json(const nlohmann::json& j) {
  try {
    const auto& p = j.at("pose");
    return {p.at("x").get<double>(),     p.at("y").get<double>(),    p.at("z").get<double>(),
            p.at("alpha").get<double>(), p.at("beta").get<double>(), p.at("gamma").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metadata has no usable pose: ") + e.what());
  }
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Centre of the placed threat box in bag voxel coordinates.
inline Index3 placed_centre(const ThreatIndicator& ind, const Pose& pose) {
  const Dims e = rotated_dims(ind.dims(), pose.angles());
  const Index3 o = pose.origin();
  return {o.i + static_cast<std::int64_t>(e.nx / 2), o.j + static_cast<std::int64_t>(e.ny / 2),
          o.k + static_cast<std::int64_t>(e.nz / 2)};
}

inline nlohmann::ordered_json tip_metadata(const TipResult& r, const PipelineConfig& cfg, const ThreatIndicator& ind) {
  nlohmann::ordered_json j;
  j["pose"] = pose_json(r.pose);
  j["cost"] = r.cost;
  j["score"] = r.score;
  j["seed"] = cfg.seed;
  j["threat_voxels"] = r.threat_voxels;
  j["feasible"] = r.feasible;
  const Index3 c = placed_centre(ind, r.pose);
  j["centroid"] = {c.i, c.j, c.k};
  return j;
}

inline std::string trace_csv(const std::vector<double>& trace) {
  std::string s = "iteration,best_cost\n";
  for (std::size_t t = 0; t < trace.size(); ++t) s += std::to_string(t) + "," + fmt(trace[t]) + "\n";
  return s;
}

inline PsoConfig finalize_pso(PipelineConfig cfg, const ThreatIndicator& ind, const BagCostMap& cmap) {
  cfg.pso.seed = cfg.seed;
  cfg.pso.bounds = default_bounds(ind, cmap);
  return cfg.pso;
}

}  // namespace cli_detail

/// End-to-end result of the pipeline on in-memory volumes.
struct PipelineOutput {
  TipResult tip;
  IsolationResult isolated;
  /// Final volume: the blended TIP, with artefacts when enabled.
  Volume volume;
};

inline PipelineOutput run_pipeline(const Volume& threat_scan, const Volume& bag, const PipelineConfig& cfg) {
  IsolationResult iso = isolate_threat(threat_scan, cfg.isolation);
  const BagCostMap cmap = determine_voids(bag, cfg.bag);
  const PsoConfig pso = cli_detail::finalize_pso(cfg, iso.indicator, cmap);
  TipResult tip = insert(iso.threat, iso.indicator, bag, cmap, cfg.objective, pso);
  Volume out = tip.volume;
  if (cfg.mag_enabled && tip.feasible)
    out = generate_artefacts(bag, iso.threat, iso.indicator, tip.pose, cfg.mag, cfg.objective.interp);
  return {std::move(tip), std::move(iso), std::move(out)};
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"voltip: threat image projection for 3D CT volumes"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::map<std::string, std::string> overrides;
  std::string config_path;
  unsigned threads = 0;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file; flags take precedence");
    sub->add_option("--threads", threads, "worker threads (0 = all; VOLTIP_THREADS caps this)");
    for (const auto& s : settings()) {
      auto* opt = sub->add_option_function<std::string>(
          "--" + s.key, [&overrides, key = s.key](const std::string& v) { overrides[key] = v; }, s.help);
      opt->type_name("VALUE");
    }
  };
  auto load_config = [&]() {
    PipelineConfig cfg;
    if (!config_path.empty())
      for (const auto& [k, v] : read_config(config_path)) apply_setting(cfg, k, v);
    for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
    cfg.pso.threads = threads;
    cfg.mag.threads = threads;
    return cfg;
  };

  std::function<int()> action;

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic bag or threat volume with ground truth");
  std::string kind = "hollow-box-bag", dims_s = "32", truth_path, phantom_out;
  double clutter = 0.0, noise = 20.0;
  std::uint64_t phantom_seed = 0;
  bool no_metal = false;
  phantom->add_option("--kind", kind,
                      "hollow-box-bag|cluttered-bag|cube-threat|hollow-sphere-threat|gun-like-threat|metal-insert");
  phantom->add_option("--dims", dims_s, "N or nx,ny,nz");
  phantom->add_option("--seed", phantom_seed);
  phantom->add_option("--clutter", clutter, "clutter density in [0,1]");
  phantom->add_option("--noise", noise, "Gaussian noise sigma");
  phantom->add_flag("--no-metal", no_metal, "gun-like-threat without a metal barrel");
  phantom->add_option("-o,--output", phantom_out, "output VTIP volume")->required();
  phantom->add_option("--truth", truth_path, "ground-truth tag volume (u8 VTIP)");
  phantom->callback([&] {
    action = [&] {
      PhantomSpec spec{parse_phantom_kind(kind), parse_dims(dims_s), phantom_seed, clutter, noise, !no_metal};
      const Phantom p = generate(spec);
      save_volume(p.volume, phantom_out);
      if (!truth_path.empty()) save_u8(p.truth.region, 3, truth_path);
      return int{kExitOk};
    };
  });

  // import-raw
  auto* import_raw_cmd = app.add_subcommand("import-raw", "Wrap a headerless u16 little-endian payload as VTIP");
  std::string raw_in, raw_out, raw_dims, raw_spacing = "1";
  int raw_max = kDefaultMaxIntensity;
  import_raw_cmd->add_option("-i,--input", raw_in)->required();
  import_raw_cmd->add_option("-o,--output", raw_out)->required();
  import_raw_cmd->add_option("--dims", raw_dims, "nx,ny,nz")->required();
  import_raw_cmd->add_option("--spacing", raw_spacing, "sx,sy,sz in mm");
  import_raw_cmd->add_option("--max-intensity", raw_max);
  import_raw_cmd->callback([&] {
    action = [&] {
      const auto sp = parse_list<3>("spacing", raw_spacing);
      if (raw_max < 1 || raw_max > 65535) throw ValidationError("max-intensity must be in [1, 65535]");
      const Volume v = import_raw(raw_in, parse_dims(raw_dims),
                                  {static_cast<float>(sp[0]), static_cast<float>(sp[1]), static_cast<float>(sp[2])},
                                  static_cast<std::uint16_t>(raw_max));
      save_volume(v, raw_out);
      return int{kExitOk};
    };
  });

  // isolate
  auto* isolate = app.add_subcommand("isolate", "Segment a threat scan into cropped threat + indicator");
  std::string iso_in, iso_out, iso_ind;
  isolate->add_option("-i,--input", iso_in, "threat scan (VTIP)")->required();
  isolate->add_option("-o,--output", iso_out, "cropped threat volume")->required();
  isolate->add_option("--indicator", iso_ind, "indicator weights (f32 VTIP)")->required();
  add_config(isolate);
  isolate->callback([&] {
    action = [&] {
      const PipelineConfig cfg = load_config();
      const Volume scan = load_volume(iso_in);
      const IsolationResult r = isolate_threat(scan, cfg.isolation);
      save_volume(r.threat, iso_out);
      save_f32(r.indicator.w, 1, iso_ind);
      out << "threat " << to_string(r.threat.dims()) << " at " << r.box.origin.i << "," << r.box.origin.j << ","
          << r.box.origin.k << ", active voxels " << r.indicator.active_voxels() << "\n";
      return int{kExitOk};
    };
  });

  // segment-bag
  auto* segment = app.add_subcommand("segment-bag", "Segment a bag into outer/void/content and emit the cost map");
  std::string seg_in, seg_cost, seg_regions;
  segment->add_option("-i,--input", seg_in, "bag volume (VTIP)")->required();
  segment->add_option("--cost", seg_cost, "cost map (f32 VTIP)")->required();
  segment->add_option("--regions", seg_regions, "region tags 0=outer 1=void 2=content (u8 VTIP)")->required();
  add_config(segment);
  segment->callback([&] {
    action = [&] {
      const PipelineConfig cfg = load_config();
      const Volume bag = load_volume(seg_in);
      const BagCostMap m = determine_voids(bag, cfg.bag);
      save_f32(m.cost, static_cast<std::uint32_t>(std::ceil(m.c)), seg_cost);
      save_u8(m.region, 2, seg_regions);
      return int{kExitOk};
    };
  });

  // insert
  auto* insert_cmd = app.add_subcommand("insert", "Optimise the insertion pose and blend the threat into the bag");
  std::string ins_threat, ins_ind, ins_bag, ins_out, ins_meta, ins_trace;
  insert_cmd->add_option("--threat", ins_threat, "cropped threat volume")->required();
  insert_cmd->add_option("--indicator", ins_ind, "indicator weights (f32 VTIP)")->required();
  insert_cmd->add_option("--bag", ins_bag, "bag volume")->required();
  insert_cmd->add_option("-o,--output", ins_out, "TIP volume")->required();
  insert_cmd->add_option("--meta", ins_meta, "JSON metadata sidecar");
  insert_cmd->add_option("--trace", ins_trace, "CSV of the per-iteration best cost");
  add_config(insert_cmd);
  insert_cmd->callback([&] {
    action = [&] {
      const PipelineConfig cfg = load_config();
      const Volume threat = load_volume(ins_threat);
      const ThreatIndicator ind = indicator_from_field(load_f32(ins_ind));
      const Volume bag = load_volume(ins_bag);
      const BagCostMap cmap = determine_voids(bag, cfg.bag);
      const PsoConfig pso = finalize_pso(cfg, ind, cmap);
      const TipResult r = insert(threat, ind, bag, cmap, cfg.objective, pso);
      save_volume(r.volume, ins_out);
      if (!ins_meta.empty()) write_text_atomic(ins_meta, tip_metadata(r, cfg, ind).dump(2) + "\n");
      if (!ins_trace.empty()) write_text_atomic(ins_trace, trace_csv(r.trace));
      out << "score " << fmt(r.score) << "\n";
      return int{kExitOk};
    };
  });

  // mag
  auto* mag = app.add_subcommand("mag", "Insert the threat at a given pose with metal artefact generation");
  std::string mag_bag, mag_threat, mag_ind, mag_meta, mag_pose, mag_out, mag_dump;
  mag->add_option("--bag", mag_bag, "benign bag volume")->required();
  mag->add_option("--threat", mag_threat, "cropped threat volume")->required();
  mag->add_option("--indicator", mag_ind, "indicator weights (f32 VTIP)")->required();
  mag->add_option("--meta", mag_meta, "metadata JSON providing the pose");
  mag->add_option("--pose", mag_pose, "x,y,z,alpha,beta,gamma");
  mag->add_option("-o,--output", mag_out, "TIP volume with artefacts")->required();
  mag->add_option("--dump-sinograms", mag_dump, "prefix for clean/corrupted sinogram stacks (f32 VTIP)");
  add_config(mag);
  mag->callback([&] {
    action = [&] {
      const PipelineConfig cfg = load_config();
      if (mag_meta.empty() == mag_pose.empty()) throw ValidationError("mag: give exactly one of --meta or --pose");
      Pose pose;
      if (!mag_pose.empty())
        pose = Pose::from_array(parse_list<6>("pose", mag_pose));
      else
        pose = pose_from_json(read_json(mag_meta));
      const Volume bag = load_volume(mag_bag);
      const Volume threat = load_volume(mag_threat);
      const ThreatIndicator ind = indicator_from_field(load_f32(mag_ind));
      MagDebug dbg;
      const Volume v =
          generate_artefacts(bag, threat, ind, pose, cfg.mag, cfg.objective.interp, mag_dump.empty() ? nullptr : &dbg);
      if (!mag_dump.empty()) {
        auto bound = [](const Grid<double>& g) {
          double mx = 0;
          for (double x : g.data()) mx = std::max(mx, x);
          return static_cast<std::uint32_t>(std::ceil(mx)) + 1;
        };
        save_f32(dbg.clean, bound(dbg.clean), mag_dump + "_clean.vtip");
        save_f32(dbg.corrupted, bound(dbg.corrupted), mag_dump + "_corrupted.vtip");
      }
      save_volume(v, mag_out);
      return int{kExitOk};
    };
  });

  // score
  auto* score = app.add_subcommand("score", "TIP quality score for a cost and inserted threat volume");
  double score_cost = 0, score_c = 100;
  long long score_voxels = 0;
  score->add_option("--cost", score_cost)->required();
  score->add_option("--threat-voxels", score_voxels)->required();
  score->add_option("--c", score_c, "outer-bag cost constant");
  score->callback([&] {
    action = [&] {
      if (score_voxels < 1) throw ValidationError("threat-voxels must be >= 1");
      out << fmt(quality_score(score_cost, static_cast<std::size_t>(score_voxels), score_c)) << "\n";
      return int{kExitOk};
    };
  });

  // slices
  auto* slices = app.add_subcommand("slices", "Export axial/coronal/sagittal views as one PNG");
  std::string sl_in, sl_out, sl_at, sl_meta;
  slices->add_option("-i,--input", sl_in)->required();
  slices->add_option("-o,--output", sl_out, "PNG file")->required();
  slices->add_option("--at", sl_at, "i,j,k slice indices (default: centre)");
  slices->add_option("--meta", sl_meta, "TIP metadata; slices go through the inserted threat");
  slices->callback([&] {
    action = [&] {
      const Volume v = load_volume(sl_in);
      Index3 at{static_cast<std::int64_t>(v.dims().nx / 2), static_cast<std::int64_t>(v.dims().ny / 2),
                static_cast<std::int64_t>(v.dims().nz / 2)};
      if (!sl_at.empty()) {
        const auto a = parse_list<3>("at", sl_at);
        at = {static_cast<std::int64_t>(a[0]), static_cast<std::int64_t>(a[1]), static_cast<std::int64_t>(a[2])};
      } else if (!sl_meta.empty()) {
        const auto j = read_json(sl_meta);
        try {
          const auto c = j.at("centroid");
          at = {c.at(0).get<std::int64_t>(), c.at(1).get<std::int64_t>(), c.at(2).get<std::int64_t>()};
        } catch (const nlohmann::json::exception& e) {
          throw ValidationError(std::string("metadata has no centroid: ") + e.what());
        }
      }
      write_png(triptych(v, at), sl_out);
      return int{kExitOk};
    };
  });

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Threat scan + bag scan -> TIP volume + metadata");
  std::string pl_threat, pl_bag, pl_out, pl_meta, pl_trace;
  std::optional<double> min_score;
  pipeline->add_option("--threat-scan", pl_threat, "controlled-condition threat scan")->required();
  pipeline->add_option("--bag", pl_bag, "benign bag volume")->required();
  pipeline->add_option("-o,--output", pl_out, "TIP volume")->required();
  pipeline->add_option("--meta", pl_meta, "JSON metadata sidecar")->required();
  pipeline->add_option("--trace", pl_trace, "CSV of the per-iteration best cost");
  pipeline->add_option("--min-score", min_score, "reject (exit 4, no TIP written) when the score is below this");
  add_config(pipeline);
  pipeline->callback([&] {
    action = [&] {
      const PipelineConfig cfg = load_config();
      const Volume threat_scan = load_volume(pl_threat);
      const Volume bag = load_volume(pl_bag);
      const PipelineOutput r = run_pipeline(threat_scan, bag, cfg);
      const bool rejected = min_score && r.tip.score < *min_score;
      auto meta = tip_metadata(r.tip, cfg, r.isolated.indicator);
      meta["mag"] = cfg.mag_enabled && r.tip.feasible;
      meta["rejected"] = rejected;
      if (!rejected) save_volume(r.volume, pl_out);
      write_text_atomic(pl_meta, meta.dump(2) + "\n");
      if (!pl_trace.empty()) write_text_atomic(pl_trace, trace_csv(r.tip.trace));
      out << "score " << fmt(r.tip.score) << (rejected ? " (rejected)" : "") << "\n";
      return rejected ? int{kExitRejected} : int{kExitOk};
    };
  });

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  try {
    return action ? action() : int{kExitValidation};
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace voltip
