#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "beamtrain/array.hpp"
#include "beamtrain/channel.hpp"
#include "beamtrain/cli.hpp"
#include "beamtrain/codebook.hpp"
#include "beamtrain/errors.hpp"
#include "beamtrain/experiment.hpp"
#include "beamtrain/training.hpp"

namespace py = pybind11;
using namespace beamtrain;

namespace {

py::array_t<cplx> to_array(const ComplexVector& v) {
  py::array_t<cplx> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ComplexVector from_array(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InvalidArgument("expected a one-dimensional array");
  return ComplexVector(a.data(), a.data() + a.size());
}

OverheadMethod parse_overhead_method(const std::string& name) {
  for (auto m : {OverheadMethod::dynamic, OverheadMethod::hs, OverheadMethod::mdr,
                 OverheadMethod::acs}) {
    if (name == to_string(m)) return m;
  }
  throw InvalidArgument("unknown overhead method '" + name + "' (dynamic, hs, mdr, acs)");
}

std::vector<std::pair<int, int>> pairs_of(const TrainingOutcome& o) {
  std::vector<std::pair<int, int>> out;
  for (const auto& d : o.detected) out.emplace_back(d.p, d.q);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = R"pbdoc(
    Dynamic hierarchical codebook beam training
    -------------------------------------------

    Codebook synthesis, index-set nulling, hierarchical beam search and the
    Monte Carlo harness, backed by the C++ library.
  )pbdoc";

  py::register_exception<Error>(m, "BeamtrainError", PyExc_ValueError);

  // array
  m.def("steering_vector", [](int n, double omega) { return to_array(steering_vector(n, omega)); },
        py::arg("n"), py::arg("omega"));
  m.def("inner_product",
        [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<cplx, py::array::c_style | py::array::forcecast>& b) {
          return inner_product(from_array(a), from_array(b));
        });
  m.def("beam_gain",
        [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& v, double omega) {
          return beam_gain(from_array(v), omega);
        },
        py::arg("v"), py::arg("omega"));
  m.def("pattern_samples",
        [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& v, int grid) {
          const auto pts = pattern_samples(from_array(v), grid);
          py::array_t<double> omega(static_cast<py::ssize_t>(pts.size()));
          py::array_t<double> mag(static_cast<py::ssize_t>(pts.size()));
          for (std::size_t k = 0; k < pts.size(); ++k) {
            omega.mutable_data()[k] = pts[k].omega;
            mag.mutable_data()[k] = pts[k].magnitude;
          }
          return py::make_tuple(omega, mag);
        },
        py::arg("v"), py::arg("grid_size"), "Returns (omega, |gain|) arrays.");

  // codebook
  m.def("bottom_center", &bottom_center, py::arg("n"), py::arg("i"));
  m.def("bottom_codeword", [](int n, int i) { return to_array(bottom_codeword(n, i).weights); },
        py::arg("n"), py::arg("i"));
  m.def("initial_index_set",
        [](int s, int mpos, int n) { return initial_index_set(s, mpos, n).members(); },
        py::arg("s"), py::arg("m"), py::arg("n"));
  m.def("synthesize",
        [](int n, std::vector<int> members) {
          return to_array(synthesize(IndexSet(n, std::move(members))).weights);
        },
        py::arg("n"), py::arg("members"));
  m.def("midpoint_phase_check", &midpoint_phase_check, py::arg("n"), py::arg("i"));
  m.def("midpoint_alignment_residual", &midpoint_alignment_residual, py::arg("n"), py::arg("i"));

  py::class_<CodebookState>(m, "CodebookState")
      .def(py::init<int, int>(), py::arg("n"), py::arg("start_layer"))
      .def_static("from_descriptor", &CodebookState::from_descriptor)
      .def_property_readonly("array_size", &CodebookState::array_size)
      .def_property_readonly("num_layers", &CodebookState::num_layers)
      .def_property_readonly("start_layer", &CodebookState::start_layer)
      .def_property_readonly("removed", &CodebookState::removed)
      .def("index_set", [](const CodebookState& s, int layer, int pos) {
        return s.index_set(layer, pos).members();
      })
      .def("remove_index", &CodebookState::remove_index)
      .def("codeword", [](CodebookState& s, int layer, int pos) {
        return to_array(s.codeword_at(layer, pos).weights);
      })
      .def("dirty_slots", &CodebookState::dirty_slots)
      .def("descriptor", &CodebookState::descriptor)
      .def("__repr__", [](const CodebookState& s) { return "<CodebookState " + s.descriptor() + ">"; });

  // channel
  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def(py::init([](int nt, int nr, const std::vector<std::tuple<cplx, double, double>>& paths) {
             std::vector<PathComponent> comps;
             for (const auto& [g, aod, aoa] : paths) comps.push_back({g, aod, aoa});
             return ChannelRealization(nt, nr, std::move(comps));
           }),
           py::arg("nt"), py::arg("nr"), py::arg("paths"),
           "paths: sequence of (gain, aod, aoa) tuples")
      .def_property_readonly("nt", &ChannelRealization::nt)
      .def_property_readonly("nr", &ChannelRealization::nr)
      .def_property_readonly("paths", [](const ChannelRealization& ch) {
        std::vector<std::tuple<cplx, double, double>> out;
        for (const auto& p : ch.paths()) out.emplace_back(p.gain, p.aod, p.aoa);
        return out;
      })
      .def("apply", [](const ChannelRealization& ch,
                       const py::array_t<cplx, py::array::c_style | py::array::forcecast>& v) {
        return to_array(apply_channel(ch, from_array(v)));
      });

  m.def("draw_channel",
        [](int nt, int nr, int num_paths, const std::string& mode, std::uint64_t seed) {
          Rng rng(seed);
          return draw_channel(nt, nr, num_paths, parse_angle_mode(mode), rng);
        },
        py::arg("nt"), py::arg("nr"), py::arg("num_paths"), py::arg("angle_mode") = "continuous",
        py::arg("seed") = 1);

  py::class_<MeasurementModel>(m, "MeasurementModel")
      .def(py::init<double, double, std::uint64_t>(), py::arg("power"),
           py::arg("noise_variance"), py::arg("seed") = 1)
      .def("measure",
           [](MeasurementModel& mm, const ChannelRealization& ch,
              const py::array_t<cplx, py::array::c_style | py::array::forcecast>& v,
              const py::array_t<cplx, py::array::c_style | py::array::forcecast>& w) {
             return mm.measure(ch, from_array(v), from_array(w));
           })
      .def_property_readonly("count", &MeasurementModel::count)
      .def_property_readonly("power", &MeasurementModel::power)
      .def_property_readonly("noise_variance", &MeasurementModel::noise_variance);

  m.def("snr_to_noise", &snr_to_noise, py::arg("snr_db"), py::arg("power") = 1.0);

  // training
  py::class_<TrainingOutcome>(m, "TrainingOutcome")
      .def_property_readonly("detected", &pairs_of)
      .def_readonly("tx_indices", &TrainingOutcome::tx_indices)
      .def_readonly("rx_indices", &TrainingOutcome::rx_indices)
      .def_readonly("total_measurements", &TrainingOutcome::total_measurements)
      .def("trace", [](const TrainingOutcome& o) {
        std::ostringstream os;
        write_trace(os, o);
        return os.str();
      });

  m.def("train_dynamic", py::overload_cast<int, int, int, int, const ChannelRealization&,
                                           MeasurementModel&>(&train_dynamic),
        py::arg("nt"), py::arg("nr"), py::arg("paths_to_detect"), py::arg("start_layer"),
        py::arg("channel"), py::arg("model"));
  m.def("train_baseline_subtraction", &train_baseline_subtraction, py::arg("nt"), py::arg("nr"),
        py::arg("paths_to_detect"), py::arg("start_layer"), py::arg("channel"), py::arg("model"));
  m.def("exhaustive_sweep",
        [](const ChannelRealization& ch, MeasurementModel& mm) {
          const auto d = exhaustive_sweep(ch, mm);
          return std::make_pair(d.p, d.q);
        },
        py::arg("channel"), py::arg("model"));
  m.def("estimate_gain", &estimate_gain, py::arg("y_best"), py::arg("power"));

  // experiment
  m.def("true_bin", &true_bin, py::arg("omega"), py::arg("n"));
  m.def("success_detection",
        [](const TrainingOutcome& o, const ChannelRealization& ch) {
          return success_detection(o, ch);
        });
  m.def("overhead",
        [](const std::string& method, int nt, int ld, int s0, int k) {
          return overhead(parse_overhead_method(method), nt, ld, s0, k);
        },
        py::arg("method"), py::arg("nt"), py::arg("paths_to_detect"), py::arg("start_layer"),
        py::arg("k") = 2);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readonly("nt", &ExperimentConfig::nt)
      .def_readonly("nr", &ExperimentConfig::nr)
      .def_readonly("num_paths", &ExperimentConfig::num_paths)
      .def_readonly("paths_to_detect", &ExperimentConfig::paths_to_detect)
      .def_readonly("start_layer", &ExperimentConfig::start_layer)
      .def_readonly("power", &ExperimentConfig::power)
      .def_readonly("snr_db_list", &ExperimentConfig::snr_db_list)
      .def_readonly("trials", &ExperimentConfig::trials)
      .def_readonly("seed", &ExperimentConfig::seed)
      .def_property_readonly("method",
                             [](const ExperimentConfig& c) { return std::string(to_string(c.method)); })
      .def_property_readonly("angle_mode", [](const ExperimentConfig& c) {
        return std::string(to_string(c.angle_mode));
      });

  m.def("parse_config", &parse_config, py::arg("text"),
        py::arg("overrides") = std::map<std::string, std::string>{});
  m.def("format_config", &format_config);
  m.def("run_monte_carlo",
        [](const ExperimentConfig& cfg, int threads) {
          std::vector<CurvePoint> curve;
          {
            py::gil_scoped_release nogil;
            curve = run_monte_carlo(cfg, threads);
          }
          py::list rows;
          for (const auto& p : curve) {
            py::dict row;
            row["method"] = std::string(to_string(p.method));
            row["snr_db"] = p.snr_db;
            row["trials"] = p.trials;
            row["successes"] = p.successes;
            row["success_rate"] = p.success_rate;
            row["wilson_halfwidth"] = p.wilson_halfwidth;
            row["mean_measurements"] = p.mean_measurements;
            row["degenerate_trials"] = p.degenerate_trials;
            rows.append(row);
          }
          return rows;
        },
        py::arg("config"), py::arg("threads") = 1);
  m.def("write_csv", [](const ExperimentConfig& cfg, int threads) {
    std::vector<CurvePoint> curve;
    {
      py::gil_scoped_release nogil;
      curve = run_monte_carlo(cfg, threads);
    }
    std::ostringstream os;
    write_csv(os, curve);
    return os.str();
  }, py::arg("config"), py::arg("threads") = 1, "Runs the config and returns its CSV text.");

  m.def("cli_main",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = cli_main(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the CLI in-process; returns (exit_code, stdout, stderr).");

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
