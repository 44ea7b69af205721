#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ivgan/benchmarks.hpp"
#include "ivgan/checkpoint.hpp"
#include "ivgan/cli.hpp"
#include "ivgan/divergence.hpp"
#include "ivgan/errors.hpp"
#include "ivgan/trainer.hpp"

namespace py = pybind11;
using namespace ivgan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Tensor& t) {
  Array out(std::vector<py::ssize_t>(t.dims().begin(), t.dims().end()));
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Tensor from_numpy(const Array& a) {
  Dims dims(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

SyntheticDataset dataset_named(const std::string& name, double square_a) {
  TrainConfig c;
  c.dataset = dataset_from_string(name);
  c.square_a = square_a;
  return make_dataset(c);
}

// Runs one CLI subcommand on a config text; returns (exit code, printed output).
template <int (*Cmd)(const RunConfig&, std::ostream&)>
std::pair<int, std::string> run(const std::string& text, const std::map<std::string, std::string>& overrides) {
  const RunConfig config = parse_config(text, {overrides.begin(), overrides.end()});
  std::ostringstream out;
  int code;
  {
    py::gil_scoped_release release;
    code = Cmd(config, out);
  }
  return {code, out.str()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Intervention GAN core: datasets, divergences, training and checks.";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);
  m.attr("ConfigError") = py::reinterpret_steal<py::object>(
      PyErr_NewException("ivgan._core.ConfigError", PyExc_ValueError, nullptr));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::object cls = py::module_::import("ivgan._core").attr("ConfigError");
      py::object err = cls(e.what());
      err.attr("key") = e.key();
      err.attr("line") = e.line();
      PyErr_SetObject(cls.ptr(), err.ptr());
    }
  });

  m.def("sample_dataset",
        [](const std::string& name, std::size_t n, std::uint64_t seed, double square_a) {
          RandomSource rng(seed);
          return to_numpy(sample_dataset(dataset_named(name, square_a), n, rng));
        },
        py::arg("name"), py::arg("n"), py::arg("seed") = 0, py::arg("square_a") = 0.5,
        "n x 2 draws from the grid, ring or square_pair dataset.");

  m.def("mode_coverage",
        [](const Array& samples, const std::string& name, std::size_t min_count) {
          const SyntheticDataset ds = dataset_named(name, 0.5);
          const Tensor s = from_numpy(samples);
          if (min_count == 0) min_count = default_min_count(s.rows(), ds.mode_centers.size());
          const ModeCoverageReport r = mode_coverage(s, ds.mode_centers, ds.component_sigma, min_count);
          py::dict out;
          out["modes_covered"] = r.modes_covered;
          out["counts"] = r.counts;
          out["kl_to_uniform"] = r.kl_to_uniform;
          out["unassigned_fraction"] = r.unassigned_fraction;
          return out;
        },
        py::arg("samples"), py::arg("dataset") = "grid", py::arg("min_count") = 0,
        "Mode metrics of samples against a dataset's centers; min_count 0 uses the default rule.");

  m.def("multi_js_discrete",
        [](const std::vector<std::vector<double>>& dists, std::optional<std::vector<double>> weights) {
          std::vector<DiscreteDist> ps;
          for (const auto& d : dists) ps.emplace_back(d);
          const WeightVector w = weights ? WeightVector(*weights) : WeightVector::uniform(ps.size());
          return multi_js_discrete(ps, w);
        },
        py::arg("dists"), py::arg("weights") = py::none());

  m.def("optimal_classifier_posterior",
        [](const std::vector<double>& densities) { return optimal_classifier_posterior(densities); });

  m.def("square_fitting_table",
        [](const std::vector<double>& a_values, std::size_t mc_samples, std::uint64_t seed) {
          RandomSource rng(seed);
          py::list rows;
          for (const auto& r : square_fitting_table(a_values, mc_samples, rng)) {
            py::dict row;
            row["a"] = r.a;
            row["js_two"] = r.js_two;
            row["l_iv_exact"] = r.l_iv_exact;
            row["l_iv_mc"] = r.l_iv_mc;
            row["mc_stderr"] = r.mc_stderr;
            rows.append(row);
          }
          return rows;
        },
        py::arg("a_values"), py::arg("mc_samples") = 200000, py::arg("seed") = 0);

  m.def("anneal_noise", &anneal_noise, py::arg("iter"), py::arg("total_iters"), py::arg("sigma0"),
        py::arg("decay_frac"));

  m.def("parse_config",
        [](const std::string& text, const std::map<std::string, std::string>& overrides) {
          return serialize(parse_config(text, {overrides.begin(), overrides.end()}));
        },
        py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{},
        "Parses a key = value config and returns it in canonical form.");
  m.def("config_keys", &config_keys);

  const auto overrides_default = std::map<std::string, std::string>{};
  m.def("train", &run<cmd_train>, py::arg("config") = "", py::arg("overrides") = overrides_default);
  m.def("evaluate", &run<cmd_eval>, py::arg("config") = "", py::arg("overrides") = overrides_default);
  m.def("square_fit", &run<cmd_square_fit>, py::arg("config") = "", py::arg("overrides") = overrides_default);
  m.def("gradcheck", &run<cmd_gradcheck>, py::arg("config") = "", py::arg("overrides") = overrides_default);
  m.def("invariance", &run<cmd_invariance>, py::arg("config") = "", py::arg("overrides") = overrides_default);

  m.def("load_checkpoint_tensors",
        [](const std::filesystem::path& path) {
          py::dict out;
          for (const auto& t : read_tensor_file(path)) out[py::str(t.name)] = to_numpy(t.value);
          return out;
        },
        "All named tensors of a checkpoint as numpy arrays.");
}
