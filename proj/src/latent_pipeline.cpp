#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "motionskill/dae.hpp"
#include "motionskill/error.hpp"
#include "motionskill/parallel.hpp"
#include "motionskill/preprocessing.hpp"

namespace motionskill {

namespace {

constexpr std::array<std::pair<Tool, Axis>, 4> kRowOrder{
    {{Tool::Left, Axis::X}, {Tool::Left, Axis::Y}, {Tool::Right, Axis::X}, {Tool::Right, Axis::Y}}};

int label_value(Label l) { return l == Label::Expert ? 1 : 0; }

ValueRange widened(ValueRange r) {
  if (r.hi > r.lo) return r;
  return {r.lo - 0.5, r.hi + 0.5};
}

}  // namespace

RasterSet rasterize_dataset(const Dataset& d, const RasterOptions& opts) {
  if (d.trials.empty()) throw Error(ErrorKind::EmptyDataset, "no trials to rasterize");
  std::vector<std::vector<double>> series;
  RasterSet set;
  for (const auto& trial : d.trials) {
    for (const auto& [tool, axis] : kRowOrder) {
      series.push_back(concat_segments(trial, tool, axis));
      set.rows.push_back({trial.trial_id, trial.subject_id, tool, axis, trial.label});
    }
  }
  std::size_t max_len = 0;
  for (const auto& s : series) max_len = std::max(max_len, s.size());

  std::map<Axis, std::vector<std::vector<double>>> by_axis;
  for (std::size_t i = 0; i < series.size(); ++i) by_axis[set.rows[i].axis].push_back(series[i]);
  std::map<Axis, ValueRange> ranges;
  for (const auto& [axis, group] : by_axis) ranges[axis] = global_range(group);

  set.images.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const ValueRange range = opts.per_sample_range ? widened(global_range(std::span(&series[i], 1)))
                                                   : ranges.at(set.rows[i].axis);
    set.images.push_back(
        rasterize(series[i], opts.image_size, opts.image_size, opts.channels, max_len, range, opts.pad));
  }
  return set;
}

LatentDataset encode_all(const DaeModel& m, const RasterSet& set) {
  LatentDataset out;
  out.rows = set.rows;
  out.latents.resize(static_cast<Eigen::Index>(set.images.size()), m.cfg.latent_dim);
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    out.latents.row(static_cast<Eigen::Index>(i)) = encode(m, set.images[i]).transpose();
  }
  return out;
}

nlohmann::json to_json(const LatentPipelineOptions& opts) {
  const auto& c = opts.dae;
  PipelineSpec classifier_spec{.scaler = opts.scaler, .pca = false, .pca_components = 0, .model = opts.classifier};
  return {{"raster",
           {{"image_size", opts.raster.image_size},
            {"channels", opts.raster.channels},
            {"pad", opts.raster.pad == PadMode::Zero ? "zero" : "last-value"},
            {"per_sample_range", opts.raster.per_sample_range}}},
          {"dae",
           {{"width", c.width},
            {"height", c.height},
            {"channels", c.channels},
            {"noise_factor", c.noise_factor},
            {"latent_dim", c.latent_dim},
            {"block_channels", c.block_channels},
            {"lr", c.lr},
            {"momentum", c.momentum},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size}}},
          {"classifier", to_json(classifier_spec)},
          {"global_dae", opts.global_dae}};
}

MetricsReport latent_pipeline(const Dataset& d, const LatentPipelineOptions& opts, const CvPlan& trial_plan,
                              std::uint64_t seed, std::size_t jobs) {
  require_both_classes(d);
  if (trial_plan.fold_of.size() != d.trials.size()) {
    throw Error(ErrorKind::LengthMismatch, "fold plan must assign every trial");
  }
  if (opts.raster.image_size != opts.dae.width || opts.raster.image_size != opts.dae.height ||
      opts.raster.channels != opts.dae.channels) {
    throw Error(ErrorKind::ConfigConflict, "raster size does not match the DAE input");
  }
  const RasterSet set = rasterize_dataset(d, opts.raster);
  const std::size_t per_trial = kRowOrder.size();
  Labels y;
  for (const auto& row : set.rows) y.push_back(label_value(row.label));

  std::optional<DaeModel> shared;
  if (opts.global_dae) {
    DaeConfig cfg = opts.dae;
    cfg.seed = seed;
    shared = train_dae(set.images, cfg);
  }

  MetricsReport report;
  report.model_name = display_name(opts.classifier.kind);
  report.scaler_name = display_name(opts.scaler);
  report.pca = false;
  report.seed = seed;
  report.plan = trial_plan;
  report.spec = to_json(opts);
  report.folds.resize(static_cast<std::size_t>(trial_plan.k));
  std::vector<Evaluation> votes(report.folds.size());
  std::vector<std::vector<double>> dae_losses(report.folds.size());

  parallel_for(report.folds.size(), jobs, [&](std::size_t f) {
    const int fold = static_cast<int>(f);
    std::vector<std::size_t> train, test;
    for (auto t : trial_plan.train_indices(fold)) {
      for (std::size_t r = 0; r < per_trial; ++r) train.push_back(t * per_trial + r);
    }
    for (auto t : trial_plan.test_indices(fold)) {
      for (std::size_t r = 0; r < per_trial; ++r) test.push_back(t * per_trial + r);
    }

    DaeModel local;
    if (!shared) {
      DaeConfig cfg = opts.dae;
      cfg.seed = seed + f;
      std::vector<RasterImage> images;
      for (auto i : train) images.push_back(set.images[i]);
      local = train_dae(images, cfg);
    }
    const DaeModel& dae = shared ? *shared : local;
    dae_losses[f] = dae.loss_history;

    const auto encode_rows = [&](const std::vector<std::size_t>& idx) {
      Matrix Z(static_cast<Eigen::Index>(idx.size()), dae.cfg.latent_dim);
      for (std::size_t r = 0; r < idx.size(); ++r) Z.row(static_cast<Eigen::Index>(r)) = encode(dae, set.images[idx[r]]).transpose();
      return Z;
    };
    const Matrix Z_train = encode_rows(train);
    const Matrix Z_test = encode_rows(test);
    Labels y_train, y_test;
    for (auto i : train) y_train.push_back(y[i]);
    for (auto i : test) y_test.push_back(y[i]);

    const ScalerModel scaler = fit_scaler(opts.scaler, Z_train);
    const auto model = train_model(opts.classifier, transform(scaler, Z_train), y_train, seed + f, 1);
    const Labels predicted = model->predict(transform(scaler, Z_test));

    FoldResult& out = report.folds[f];
    out.fold = fold;
    out.n_train = train.size();
    out.n_test = test.size();
    out.eval = evaluate(predicted, y_test);

    // Majority vote over each held-out subject's rows; ties go to Expert.
    std::map<std::string, std::pair<int, int>> tally;  // subject -> (expert votes, rows)
    std::map<std::string, int> truth;
    for (std::size_t r = 0; r < test.size(); ++r) {
      const auto& row = set.rows[test[r]];
      auto& [expert, total] = tally[row.subject_id];
      expert += predicted[r];
      ++total;
      truth[row.subject_id] = y_test[r];
    }
    Labels vote_pred, vote_true;
    for (const auto& [subject, t] : tally) {
      vote_pred.push_back(2 * t.first >= t.second ? 1 : 0);
      vote_true.push_back(truth[subject]);
    }
    votes[f] = evaluate(vote_pred, vote_true);
  });
  finalize_summary(report);

  std::vector<double> acc, f1, ppv, npv;
  nlohmann::json vote_folds = nlohmann::json::array();
  for (const auto& v : votes) {
    acc.push_back(v.metrics.accuracy);
    f1.push_back(v.metrics.f1);
    ppv.push_back(v.metrics.ppv);
    npv.push_back(v.metrics.npv);
    vote_folds.push_back({{"tp", v.confusion.tp}, {"fp", v.confusion.fp}, {"fn", v.confusion.fn},
                          {"tn", v.confusion.tn}, {"accuracy", v.metrics.accuracy}});
  }
  const auto summary = [](std::span<const double> v) {
    const auto s = summarize(v);
    return nlohmann::json{{"mean", s.mean}, {"std", s.std}};
  };
  report.extra = {{"pipeline", "dae-latent"},
                  {"rows_per_trial", per_trial},
                  {"row_order", {"L-x", "L-y", "R-x", "R-y"}},
                  {"subject_vote",
                   {{"folds", vote_folds},
                    {"accuracy", summary(acc)},
                    {"f1", summary(f1)},
                    {"ppv", summary(ppv)},
                    {"npv", summary(npv)}}},
                  {"dae_loss_history", dae_losses}};
  return report;
}

}  // namespace motionskill
