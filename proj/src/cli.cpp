#include "motionskill/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "motionskill/classifiers.hpp"
#include "motionskill/dae.hpp"
#include "motionskill/error.hpp"
#include "motionskill/kinematics.hpp"
#include "motionskill/motion_data.hpp"
#include "motionskill/parallel.hpp"
#include "motionskill/report.hpp"
#include "motionskill/signal_filter.hpp"
#include "motionskill/synth.hpp"

namespace motionskill::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kSubcommands{"synth", "filter", "features", "cv", "dae", "report"};

// ---- option sets ----------------------------------------------------------------

struct SynthArgs {
  int subjects = 10;
  std::uint64_t seed = 42;
  std::string out;
  int segments = 3;
  double fps = 120.0;
  double duration = 4.0;
  int reaches = 4;
  double expert_tremor = 1.0;
  double novice_tremor = 2.5;
  int submovements = 2;
  double pause_prob = 0.3;
  bool coordinated_novices = false;
  bool null_case = false;
};

struct FilterArgs {
  std::string input;
  std::string output;
  double fps = 0.0;
  double cutoff = 24.0;
  int order = 4;
  bool zero_phase = true;
};

// Optional low-pass step applied to loaded trials.
struct SmoothingArgs {
  std::optional<double> cutoff;
  int order = 4;
};

struct FeaturesArgs {
  std::string input;
  std::string output;
  double fps = 0.0;
  std::string granularity = "per-segment";
  bool include_excluded = false;
  SmoothingArgs smoothing;
};

struct CvArgs {
  std::string features;
  std::string input;
  double fps = 0.0;
  std::string granularity = "per-segment";
  SmoothingArgs smoothing;
  std::string model = "rf";
  std::string scaler = "robust";
  std::string pca = "on";
  int pca_components = 3;
  int k = 10;
  std::uint64_t seed = 42;
  std::string grouping = "none";
  bool global_fit = false;
  bool keep_acceleration = false;
  int trees = 100;
  std::string report;
};

struct DaeArgs {
  std::string input;
  double fps = 0.0;
  SmoothingArgs smoothing;
  int image_size = 32;
  int channels = 1;
  int latent = 128;
  double noise = 0.5;
  int epochs = 50;
  double lr = 0.05;
  int batch_size = 8;
  std::vector<int> blocks{8, 16};
  std::string classifier = "cnn";
  std::string scaler = "robust";
  int k = 10;
  std::uint64_t seed = 42;
  std::string pad = "zero";
  bool per_sample_range = false;
  bool global_dae = false;
  int cnn_epochs = 150;
  double cnn_lr = 0.05;
  double cnn_l2 = 0.0;
  int cnn_batch = 8;
  std::string report;
  std::string save_model;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string output;
  int precision = 3;
  std::string features;
  std::string radar;
  bool keep_acceleration = false;
  std::string trajectory;
  double fps = 0.0;
  double cutoff = 24.0;
  int order = 4;
  std::string tool = "L";
  std::string axis = "x";
  std::string overlay;
};

// ---- helpers --------------------------------------------------------------------

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, dump(j)); }

fs::path sidecar(const fs::path& output) { return fs::path(output.string() + ".config.json"); }

void require_distinct(const std::string& input, const std::string& output) {
  std::error_code ec;
  if (fs::exists(output, ec) && fs::equivalent(input, output, ec)) {
    throw Error(ErrorKind::ConfigConflict, "output would overwrite the input " + input);
  }
}

json smoothing_json(const SmoothingArgs& s) {
  if (!s.cutoff) return nullptr;
  return {{"cutoff_hz", *s.cutoff}, {"order", s.order}, {"zero_phase", true}};
}

std::optional<FilterConfig> smoothing_config(const SmoothingArgs& s, double fps) {
  if (!s.cutoff) return std::nullopt;
  FilterConfig cfg{.cutoff_hz = *s.cutoff, .order = s.order, .fps = fps, .zero_phase = true};
  cfg.validate();
  return cfg;
}

void filter_dataset(Dataset& d, const FilterConfig& cfg) {
  for (auto& trial : d.trials) {
    for (auto& [id, seg] : trial.segments) {
      seg.left = filter_track(seg.left, cfg);
      seg.right = filter_track(seg.right, cfg);
    }
  }
}

void require_fps(double fps) {
  if (!(fps > 0.0)) throw Error(ErrorKind::InvalidConfig, "--fps must be positive");
}

Dataset load_smoothed(const std::string& dir, double fps, const SmoothingArgs& s) {
  require_fps(fps);
  const auto filter = smoothing_config(s, fps);
  Dataset d = load_dataset(dir, fps);
  if (filter) filter_dataset(d, *filter);
  return d;
}

std::vector<FeatureVector> features_of(const Dataset& d, Granularity g, bool include_excluded) {
  validate_dataset(d);
  std::vector<FeatureVector> rows;
  for (const auto& trial : d.trials) {
    for (auto& f : extract_features(trial, {g, include_excluded})) rows.push_back(std::move(f));
  }
  return rows;
}

Labels labels_of(const std::vector<FeatureVector>& rows) {
  Labels y;
  for (const auto& r : rows) y.push_back(r.label == Label::Expert ? 1 : 0);
  return y;
}

// ---- subcommands ----------------------------------------------------------------

json synth_config(const SynthArgs& a) {
  return {{"subcommand", "synth"},     {"subjects", a.subjects},       {"seed", a.seed},
          {"out", a.out},              {"segments", a.segments},       {"fps", a.fps},
          {"duration", a.duration},    {"reaches", a.reaches},         {"expert_tremor", a.expert_tremor},
          {"novice_tremor", a.novice_tremor}, {"submovements", a.submovements}, {"pause_prob", a.pause_prob},
          {"coordinated_novices", a.coordinated_novices}, {"null_case", a.null_case}};
}

int do_synth(const SynthArgs& a, std::size_t jobs, std::ostream& out) {
  GeneratorConfig g;
  g.n_subjects_per_class = a.subjects;
  g.seed = a.seed;
  g.segments_per_trial = a.segments;
  g.fps = a.fps;
  g.segment_duration_s = a.duration;
  g.reaches_per_segment = a.reaches;
  g.expert_tremor_px = a.expert_tremor;
  g.novice_tremor_px = a.novice_tremor;
  g.novice_submovements = a.submovements;
  g.novice_pause_probability = a.pause_prob;
  g.novice_uncoordinated = !a.coordinated_novices;
  if (a.null_case) g = GeneratorConfig::null_case(g);
  const auto recs = generate_recordings(g, jobs);
  write_recordings(a.out, recs);
  write_json(fs::path(a.out) / "run_config.json", synth_config(a));
  out << "wrote " << recs.size() << " recordings to " << a.out << "\n";
  return 0;
}

json filter_config(const FilterArgs& a) {
  return {{"subcommand", "filter"}, {"input", a.input}, {"output", a.output},      {"fps", a.fps},
          {"cutoff", a.cutoff},     {"order", a.order}, {"zero_phase", a.zero_phase}};
}

std::string filtered_csv(const fs::path& file, const FilterConfig& cfg) {
  const auto parsed = parse_trajectory_csv(file, cfg.fps);
  TrackMap tracks;
  for (const auto& [tool, track] : parsed.tracks) tracks[tool] = filter_track(track, cfg);
  std::ostringstream os;
  write_trajectory_csv(os, tracks);
  return os.str();
}

int do_filter(const FilterArgs& a, std::ostream& out) {
  require_fps(a.fps);
  const FilterConfig cfg{.cutoff_hz = a.cutoff, .order = a.order, .fps = a.fps, .zero_phase = a.zero_phase};
  cfg.validate();
  if (!fs::exists(a.input)) throw Error(ErrorKind::Io, "no such input: " + a.input);
  require_distinct(a.input, a.output);

  if (!fs::is_directory(a.input)) {
    write_file_atomic(a.output, filtered_csv(a.input, cfg));
    write_json(sidecar(a.output), filter_config(a));
    out << "filtered " << a.input << " -> " << a.output << "\n";
    return 0;
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.input)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".csv" && name != "segments.csv") {
      files.push_back(entry.path());
    }
  }
  std::ranges::sort(files);
  const fs::path dest(a.output);
  fs::create_directories(dest);
  for (const auto& f : files) write_file_atomic(dest / f.filename(), filtered_csv(f, cfg));
  const auto segments = fs::path(a.input) / "segments.csv";
  if (fs::exists(segments)) {
    std::ifstream in(segments, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    write_file_atomic(dest / "segments.csv", ss.str());
  }
  write_json(dest / "run_config.json", filter_config(a));
  out << "filtered " << files.size() << " trajectory files into " << a.output << "\n";
  return 0;
}

json features_config(const FeaturesArgs& a) {
  return {{"subcommand", "features"}, {"input", a.input},
          {"output", a.output},       {"fps", a.fps},
          {"granularity", a.granularity}, {"include_excluded", a.include_excluded},
          {"filter", smoothing_json(a.smoothing)}};
}

int do_features(const FeaturesArgs& a, std::ostream& out) {
  const Granularity g = parse_granularity(a.granularity);
  const Dataset d = load_smoothed(a.input, a.fps, a.smoothing);
  const auto rows = features_of(d, g, a.include_excluded);
  std::ostringstream os;
  write_features_csv(os, rows);
  write_file_atomic(a.output, os.str());
  write_json(sidecar(a.output), features_config(a));
  out << "wrote " << rows.size() << " feature rows to " << a.output << "\n";
  return 0;
}

json cv_config(const CvArgs& a) {
  return {{"subcommand", "cv"},
          {"features", a.features},
          {"input", a.input},
          {"fps", a.fps},
          {"granularity", a.granularity},
          {"filter", smoothing_json(a.smoothing)},
          {"model", a.model},
          {"scaler", a.scaler},
          {"pca", a.pca},
          {"pca_components", a.pca_components},
          {"k", a.k},
          {"seed", a.seed},
          {"grouping", a.grouping},
          {"global_fit", a.global_fit},
          {"keep_acceleration", a.keep_acceleration},
          {"trees", a.trees},
          {"report", a.report}};
}

bool parse_switch(const std::string& v, const char* name) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw Error(ErrorKind::InvalidConfig, std::string("--") + name + " expects on|off, got '" + v + "'");
}

int do_cv(const CvArgs& a, std::size_t jobs, std::ostream& out) {
  if (!a.features.empty() && !a.input.empty()) {
    throw Error(ErrorKind::ConfigConflict, "give either --features or --input, not both");
  }
  if (a.features.empty() && a.input.empty()) throw Error(ErrorKind::InvalidConfig, "cv needs --features or --input");
  PipelineSpec spec;
  spec.scaler = parse_scaler_kind(a.scaler);
  spec.pca = parse_switch(a.pca, "pca");
  spec.pca_components = a.pca_components;
  spec.model.kind = parse_model_kind(a.model);
  spec.model.forest.n_trees = a.trees;
  spec.global_fit = a.global_fit;
  if (spec.model.kind == ModelKind::LatentCnn) {
    throw Error(ErrorKind::InvalidConfig, "the 1-D CNN runs on DAE latents; use the dae subcommand");
  }
  if (a.grouping != "none" && a.grouping != "subject") {
    throw Error(ErrorKind::InvalidConfig, "--grouping expects none|subject");
  }

  std::vector<FeatureVector> rows;
  if (!a.features.empty()) {
    std::ifstream in(a.features, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + a.features);
    rows = read_features_csv(in);
  } else {
    rows = features_of(load_smoothed(a.input, a.fps, a.smoothing), parse_granularity(a.granularity), false);
  }
  FeatureMatrix fm{rows, {}};
  if (!a.keep_acceleration) fm = drop_acceleration(std::move(fm));
  const auto cols = fm.active_columns();
  if (fm.rows.empty()) throw Error(ErrorKind::EmptyDataset, "no feature rows");
  Matrix X(static_cast<Eigen::Index>(fm.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < fm.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fm.rows[i][cols[j]];
    }
  }
  const Labels y = labels_of(fm.rows);
  std::vector<std::string> groups;
  for (const auto& r : fm.rows) groups.push_back(r.subject_id);
  const auto plan = stratified_kfold(y, a.k, a.seed, a.grouping == "subject" ? Grouping::BySubject : Grouping::None,
                                     groups);
  const auto report = cross_validate(X, y, spec, plan, a.seed, jobs);

  json j = to_json(report);
  json names = json::array();
  for (auto c : cols) names.push_back(kFeatureNames[static_cast<std::size_t>(c)]);
  j["features"] = {{"columns", names}, {"rows", fm.rows.size()}};
  json ids = json::array();
  for (const auto& r : fm.rows) ids.push_back(r.sample_id);
  j["features"]["sample_ids"] = ids;
  j["run_config"] = cv_config(a);
  write_json(a.report, j);
  out << render_table(std::span(&j, 1));
  return 0;
}

json dae_config(const DaeArgs& a) {
  return {{"subcommand", "dae"},
          {"input", a.input},
          {"fps", a.fps},
          {"filter", smoothing_json(a.smoothing)},
          {"image_size", a.image_size},
          {"channels", a.channels},
          {"latent", a.latent},
          {"noise", a.noise},
          {"epochs", a.epochs},
          {"lr", a.lr},
          {"batch_size", a.batch_size},
          {"blocks", a.blocks},
          {"classifier", a.classifier},
          {"scaler", a.scaler},
          {"k", a.k},
          {"seed", a.seed},
          {"pad", a.pad},
          {"per_sample_range", a.per_sample_range},
          {"global_dae", a.global_dae},
          {"cnn_epochs", a.cnn_epochs},
          {"cnn_lr", a.cnn_lr},
          {"cnn_l2", a.cnn_l2},
          {"cnn_batch", a.cnn_batch},
          {"report", a.report},
          {"save_model", a.save_model}};
}

int do_dae(const DaeArgs& a, std::size_t jobs, std::ostream& out) {
  LatentPipelineOptions opts;
  opts.raster.image_size = a.image_size;
  opts.raster.channels = a.channels;
  if (a.pad != "zero" && a.pad != "last") throw Error(ErrorKind::InvalidConfig, "--pad expects zero|last");
  opts.raster.pad = a.pad == "zero" ? PadMode::Zero : PadMode::LastValue;
  opts.raster.per_sample_range = a.per_sample_range;
  opts.dae.width = opts.dae.height = a.image_size;
  opts.dae.channels = a.channels;
  opts.dae.latent_dim = a.latent;
  opts.dae.noise_factor = a.noise;
  opts.dae.epochs = a.epochs;
  opts.dae.lr = a.lr;
  opts.dae.batch_size = a.batch_size;
  opts.dae.block_channels = a.blocks;
  opts.dae.validate();
  opts.scaler = parse_scaler_kind(a.scaler);
  opts.classifier.kind = parse_model_kind(a.classifier);
  opts.classifier.cnn.epochs = a.cnn_epochs;
  opts.classifier.cnn.lr = a.cnn_lr;
  opts.classifier.cnn.l2 = a.cnn_l2;
  opts.classifier.cnn.batch_size = a.cnn_batch;
  opts.global_dae = a.global_dae;

  const Dataset d = load_smoothed(a.input, a.fps, a.smoothing);
  Labels trial_labels;
  for (const auto& t : d.trials) trial_labels.push_back(t.label == Label::Expert ? 1 : 0);
  const auto plan = stratified_kfold(trial_labels, a.k, a.seed);
  const auto report = latent_pipeline(d, opts, plan, a.seed, jobs);

  json j = to_json(report);
  json trials = json::array();
  for (const auto& t : d.trials) trials.push_back(t.trial_id);
  j["trials"] = trials;
  j["run_config"] = dae_config(a);
  if (!a.save_model.empty()) {
    DaeConfig cfg = opts.dae;
    cfg.seed = a.seed;
    const auto model = train_dae(rasterize_dataset(d, opts.raster).images, cfg);
    save_dae(model, a.save_model);
    j["saved_model"] = a.save_model;
  }
  write_json(a.report, j);
  out << render_table(std::span(&j, 1));
  return 0;
}

int do_report(const ReportArgs& a, std::ostream& out) {
  if (a.inputs.empty() && a.radar.empty() && a.overlay.empty()) {
    throw Error(ErrorKind::InvalidConfig, "report needs --input, --radar or --overlay");
  }
  if (!a.inputs.empty()) {
    std::vector<json> reports;
    for (const auto& p : a.inputs) reports.push_back(read_report(p));
    const auto table = render_table(reports, a.precision);
    if (a.output.empty()) {
      out << table;
    } else {
      write_file_atomic(a.output, table);
    }
  }
  if (!a.radar.empty()) {
    if (a.features.empty()) throw Error(ErrorKind::InvalidConfig, "--radar needs --features");
    std::ifstream in(a.features, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + a.features);
    FeatureMatrix fm{read_features_csv(in), {}};
    if (!a.keep_acceleration) fm = drop_acceleration(std::move(fm));
    write_file_atomic(a.radar, radar_svg(fm));
  }
  if (!a.overlay.empty()) {
    if (a.trajectory.empty()) throw Error(ErrorKind::InvalidConfig, "--overlay needs --trajectory");
    require_fps(a.fps);
    const FilterConfig cfg{.cutoff_hz = a.cutoff, .order = a.order, .fps = a.fps, .zero_phase = true};
    cfg.validate();
    const Tool tool = a.tool == "L" ? Tool::Left : a.tool == "R" ? Tool::Right
                                                                 : throw Error(ErrorKind::InvalidConfig, "--tool expects L|R");
    if (a.axis != "x" && a.axis != "y") throw Error(ErrorKind::InvalidConfig, "--axis expects x|y");
    const auto parsed = parse_trajectory_csv(a.trajectory, a.fps);
    const auto it = parsed.tracks.find(tool);
    if (it == parsed.tracks.end()) throw Error(ErrorKind::MissingTool, "trajectory has no tool " + a.tool);
    const auto filtered = filter_track(it->second, cfg);
    const auto raw_series = a.axis == "x" ? it->second.xs() : it->second.ys();
    const auto smooth_series = a.axis == "x" ? filtered.xs() : filtered.ys();
    write_file_atomic(a.overlay, overlay_svg(raw_series, smooth_series,
                                             "tool " + a.tool + ", " + a.axis + " (raw vs filtered, " +
                                                 detail::format_fixed(a.cutoff, 1) + " Hz)"));
  }
  return 0;
}

// ---- argument plumbing ------------------------------------------------------------

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidConfig, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(detail::trim(body.substr(0, eq)));
    std::ranges::replace(key, '_', '-');
    out[key] = std::string(detail::trim(body.substr(eq + 1)));
  }
  return out;
}

bool mentions(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::ranges::any_of(args, [&](const std::string& a) {
    return a == flag || a.starts_with(flag + "=");
  });
}

// Expands `--config <file>` into flags; flags on the command line take precedence.
std::vector<std::string> resolve_args(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;
  auto values = read_config_file(*config);
  if (auto it = values.find("subcommand"); it != values.end()) {
    if (it->second != args[0]) {
      throw Error(ErrorKind::ConfigConflict,
                  "config file is for '" + it->second + "' but the subcommand is '" + args[0] + "'");
    }
    values.erase(it);
  }
  std::vector<std::string> resolved{args[0]};
  for (const auto& [key, value] : values) {
    if (!mentions(args, key)) resolved.push_back("--" + key + "=" + value);
  }
  resolved.insert(resolved.end(), args.begin() + 1, args.end());
  return resolved;
}

void add_smoothing(CLI::App* sub, SmoothingArgs& s) {
  sub->add_option("--cutoff", s.cutoff, "Low-pass cutoff in Hz applied before feature extraction");
  sub->add_option("--order", s.order, "Butterworth order")->capture_default_str();
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Io: return 2;
    default: return 1;
  }
}

}  // namespace

int run(std::span<const std::string> raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematic and latent-feature skill classification for tool trajectories", "motionskill"};
  app.require_subcommand(1);
  std::size_t jobs = 0;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a labelled synthetic trajectory dataset");
  s->add_option("--subjects", synth.subjects, "Subjects per class")->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--segments", synth.segments)->capture_default_str();
  s->add_option("--fps", synth.fps)->capture_default_str();
  s->add_option("--duration", synth.duration, "Seconds per segment")->capture_default_str();
  s->add_option("--reaches", synth.reaches, "Reaches per segment")->capture_default_str();
  s->add_option("--expert-tremor", synth.expert_tremor, "Expert tremor sd in px")->capture_default_str();
  s->add_option("--novice-tremor", synth.novice_tremor, "Novice tremor sd in px")->capture_default_str();
  s->add_option("--submovements", synth.submovements)->capture_default_str();
  s->add_option("--pause-prob", synth.pause_prob)->capture_default_str();
  s->add_flag("--coordinated-novices", synth.coordinated_novices);
  s->add_flag("--null-case", synth.null_case, "Make both classes move identically");

  FilterArgs filter;
  auto* f = app.add_subcommand("filter", "Low-pass filter trajectory files");
  f->add_option("--input", filter.input, "Trajectory CSV or recordings directory")->required();
  f->add_option("--output", filter.output)->required();
  f->add_option("--fps", filter.fps)->required();
  f->add_option("--cutoff", filter.cutoff)->capture_default_str();
  f->add_option("--order", filter.order)->capture_default_str();
  f->add_flag("--zero-phase,!--single-pass", filter.zero_phase, "Forward-backward filtering (default)");

  FeaturesArgs features;
  auto* fe = app.add_subcommand("features", "Extract kinematic features");
  fe->add_option("--input", features.input, "Recordings directory")->required();
  fe->add_option("--output", features.output)->required();
  fe->add_option("--fps", features.fps)->required();
  fe->add_option("--granularity", features.granularity, "per-segment|per-trial")->capture_default_str();
  fe->add_flag("--include-excluded", features.include_excluded, "Keep segment S4");
  add_smoothing(fe, features.smoothing);

  CvArgs cv;
  auto* c = app.add_subcommand("cv", "Cross-validate a classifier on kinematic features");
  c->add_option("--features", cv.features, "Features CSV");
  c->add_option("--input", cv.input, "Recordings directory (features computed on the fly)");
  c->add_option("--fps", cv.fps);
  c->add_option("--granularity", cv.granularity)->capture_default_str();
  add_smoothing(c, cv.smoothing);
  c->add_option("--model", cv.model, "rf|gbdt|svm|logreg")->capture_default_str();
  c->add_option("--scaler", cv.scaler, "standard|minmax|robust|power")->capture_default_str();
  c->add_option("--pca", cv.pca, "on|off")->capture_default_str();
  c->add_option("--pca-components", cv.pca_components)->capture_default_str();
  c->add_option("--k", cv.k)->capture_default_str();
  c->add_option("--seed", cv.seed)->capture_default_str();
  c->add_option("--grouping", cv.grouping, "none|subject")->capture_default_str();
  c->add_flag("--global-fit", cv.global_fit, "Fit scaler and PCA on all rows");
  c->add_flag("--keep-acceleration", cv.keep_acceleration);
  c->add_option("--trees", cv.trees)->capture_default_str();
  c->add_option("--report", cv.report)->required();

  DaeArgs dae;
  auto* da = app.add_subcommand("dae", "Denoising-autoencoder latents plus a classifier");
  da->add_option("--input", dae.input, "Recordings directory")->required();
  da->add_option("--fps", dae.fps)->required();
  add_smoothing(da, dae.smoothing);
  da->add_option("--image-size", dae.image_size)->capture_default_str();
  da->add_option("--channels", dae.channels)->capture_default_str();
  da->add_option("--latent", dae.latent)->capture_default_str();
  da->add_option("--noise", dae.noise)->capture_default_str();
  da->add_option("--epochs", dae.epochs)->capture_default_str();
  da->add_option("--lr", dae.lr)->capture_default_str();
  da->add_option("--batch-size", dae.batch_size)->capture_default_str();
  da->add_option("--blocks", dae.blocks, "Channels per conv block")->delimiter(',');
  da->add_option("--classifier", dae.classifier, "cnn|rf|gbdt|svm|logreg")->capture_default_str();
  da->add_option("--scaler", dae.scaler)->capture_default_str();
  da->add_option("--k", dae.k)->capture_default_str();
  da->add_option("--seed", dae.seed)->capture_default_str();
  da->add_option("--pad", dae.pad, "zero|last")->capture_default_str();
  da->add_flag("--per-sample-range", dae.per_sample_range);
  da->add_flag("--global-dae", dae.global_dae, "Train one DAE on every image");
  da->add_option("--cnn-epochs", dae.cnn_epochs)->capture_default_str();
  da->add_option("--cnn-lr", dae.cnn_lr)->capture_default_str();
  da->add_option("--cnn-l2", dae.cnn_l2)->capture_default_str();
  da->add_option("--cnn-batch", dae.cnn_batch)->capture_default_str();
  da->add_option("--report", dae.report)->required();
  da->add_option("--save-model", dae.save_model, "Path prefix for a DAE trained on all images");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Render report tables and plots");
  r->add_option("--input", rep.inputs, "Report JSON (repeatable)");
  r->add_option("--output", rep.output, "Table file (default: stdout)");
  r->add_option("--precision", rep.precision)->capture_default_str();
  r->add_option("--features", rep.features);
  r->add_option("--radar", rep.radar, "SVG radar plot of class-mean features");
  r->add_flag("--keep-acceleration", rep.keep_acceleration);
  r->add_option("--trajectory", rep.trajectory);
  r->add_option("--fps", rep.fps);
  r->add_option("--cutoff", rep.cutoff)->capture_default_str();
  r->add_option("--order", rep.order)->capture_default_str();
  r->add_option("--tool", rep.tool)->capture_default_str();
  r->add_option("--axis", rep.axis)->capture_default_str();
  r->add_option("--overlay", rep.overlay, "SVG of raw vs filtered data");

  for (auto* sub : {s, f, fe, c, da, r}) sub->add_option("--jobs", jobs, "Worker threads (0: MOTIONSKILL_JOBS or all cores)");

  try {
    std::vector<std::string> args(raw_args.begin(), raw_args.end());
    if (!args.empty() && !args[0].starts_with("-") &&
        std::ranges::find(kSubcommands, std::string_view(args[0])) == kSubcommands.end()) {
      throw Error(ErrorKind::UnknownSubcommand, "unknown subcommand '" + args[0] + "'");
    }
    if (!args.empty() && !args[0].starts_with("-")) args = resolve_args(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
      }
      err << "error: " << e.what() << "\n";
      return 1;
    }
    if (jobs == 0) jobs = default_jobs();

    if (s->parsed()) return do_synth(synth, jobs, out);
    if (f->parsed()) return do_filter(filter, out);
    if (fe->parsed()) return do_features(features, out);
    if (c->parsed()) return do_cv(cv, jobs, out);
    if (da->parsed()) return do_dae(dae, jobs, out);
    if (r->parsed()) return do_report(rep, out);
    throw Error(ErrorKind::UnknownSubcommand, "no subcommand given");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace motionskill::cli
