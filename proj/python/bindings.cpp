#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "motionskill/classifiers.hpp"
#include "motionskill/cli.hpp"
#include "motionskill/error.hpp"
#include "motionskill/kinematics.hpp"
#include "motionskill/preprocessing.hpp"
#include "motionskill/signal_filter.hpp"
#include "motionskill/synth.hpp"

namespace py = pybind11;
using namespace motionskill;

namespace {

FilterConfig filter_config(double fps, double cutoff, int order, bool zero_phase) {
  return FilterConfig{.cutoff_hz = cutoff, .order = order, .fps = fps, .zero_phase = zero_phase};
}

py::dict metrics_dict(const Evaluation& e) {
  py::dict d;
  d["accuracy"] = e.metrics.accuracy;
  d["f1"] = e.metrics.f1;
  d["ppv"] = e.metrics.ppv;
  d["npv"] = e.metrics.npv;
  d["recall"] = e.metrics.recall;
  d["tp"] = e.confusion.tp;
  d["fp"] = e.confusion.fp;
  d["fn"] = e.confusion.fn;
  d["tn"] = e.confusion.tn;
  return d;
}

}  // namespace

PYBIND11_MODULE(_motionskill, m) {
  m.doc() = "Kinematic skill assessment core";

  static py::exception<Error> error(m, "MotionSkillError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("frequency_response",
        [](double fps, double cutoff, int order, const std::vector<double>& freqs) {
          const auto c = design_lowpass(filter_config(fps, cutoff, order, false));
          std::vector<double> out;
          for (double f : freqs) out.push_back(frequency_response(c, f, fps));
          return out;
        },
        py::arg("fps"), py::arg("cutoff"), py::arg("order"), py::arg("freqs"),
        "Single-pass magnitude of the designed low-pass at each frequency.");

  m.def("filter_series",
        [](const std::vector<double>& x, double fps, double cutoff, int order, bool zero_phase) {
          return filter_series(x, filter_config(fps, cutoff, order, zero_phase));
        },
        py::arg("series"), py::arg("fps"), py::arg("cutoff") = 24.0, py::arg("order") = 4,
        py::arg("zero_phase") = true);

  m.def("min_jerk_profile", &min_jerk_profile, py::arg("tau"));

  m.def("kinematic_features",
        [](const std::vector<double>& lx, const std::vector<double>& ly, const std::vector<double>& rx,
           const std::vector<double>& ry, double fps) {
          const auto track = [fps](Tool tool, const std::vector<double>& x, const std::vector<double>& y) {
            if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "x and y differ in length");
            ToolTrack t;
            t.tool = tool;
            t.fps = fps;
            for (std::size_t i = 0; i < x.size(); ++i) t.samples.push_back({static_cast<std::int64_t>(i), x[i], y[i]});
            return t;
          };
          const auto f = features_for(track(Tool::Left, lx, ly), track(Tool::Right, rx, ry));
          py::dict d;
          for (std::size_t i = 0; i < kFeatureCount; ++i) d[py::str(std::string(kFeatureNames[i]))] = f.values[i];
          return d;
        },
        py::arg("left_x"), py::arg("left_y"), py::arg("right_x"), py::arg("right_y"), py::arg("fps"));

  m.def("scale",
        [](const std::string& kind, const Matrix& X) {
          const auto s = fit_scaler(parse_scaler_kind(kind), X);
          return transform(s, X);
        },
        py::arg("kind"), py::arg("X"), "Fit a scaler on X and return the transformed matrix.");

  m.def("pca",
        [](const Matrix& X, Eigen::Index n) {
          const auto p = fit_pca(X, n);
          return py::make_tuple(p.components, p.explained_variance_ratio, pca_transform(p, X));
        },
        py::arg("X"), py::arg("n_components"), "Returns (components, explained_variance_ratio, projected).");

  m.def("evaluate",
        [](const std::vector<int>& predictions, const std::vector<int>& labels) {
          return metrics_dict(evaluate(predictions, labels));
        },
        py::arg("predictions"), py::arg("labels"));

  m.def("stratified_kfold",
        [](const std::vector<int>& labels, int k, std::uint64_t seed) {
          return stratified_kfold(labels, k, seed).fold_of;
        },
        py::arg("labels"), py::arg("k") = 10, py::arg("seed") = 42);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run one CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
