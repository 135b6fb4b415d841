#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <variant>

#include "netpred/cli.hpp"
#include "netpred/data.hpp"
#include "netpred/errors.hpp"
#include "netpred/mgm.hpp"
#include "netpred/mvar.hpp"
#include "netpred/predictability.hpp"
#include "netpred/sampler.hpp"
#include "netpred/serialize.hpp"
#include "netpred/version.hpp"
#include "netpred/viz.hpp"

namespace py = pybind11;
using namespace netpred;

namespace {

std::vector<VariableSpec> spec_from_lists(const std::vector<std::string>& names,
                                          const std::vector<std::string>& kinds,
                                          const std::vector<int>& levels) {
  if (names.size() != kinds.size() || names.size() != levels.size())
    throw DataError("names, kinds and levels must have equal length");
  std::vector<VariableSpec> spec;
  for (std::size_t i = 0; i < names.size(); ++i) {
    VariableSpec v;
    v.name = names[i];
    if (kinds[i] == "continuous" || kinds[i] == "g")
      v.kind = VarKind::continuous;
    else if (kinds[i] == "categorical" || kinds[i] == "c")
      v.kind = VarKind::categorical;
    else
      throw DataError("unknown kind: " + kinds[i]);
    v.levels = levels[i];
    spec.push_back(std::move(v));
  }
  return spec;
}

std::optional<TimeIndex> time_from_array(const py::object& time) {
  if (time.is_none()) return std::nullopt;
  const auto arr = time.cast<Eigen::MatrixXi>();
  if (arr.cols() != 2) throw DataError("time index must be an (n, 2) array of day, beep");
  TimeIndex out;
  out.reserve(static_cast<std::size_t>(arr.rows()));
  for (int i = 0; i < arr.rows(); ++i) out.push_back(TimeStamp{arr(i, 0), arr(i, 1)});
  return out;
}

py::dict measures_to_dict(const NodeMeasures& m, const std::vector<VariableSpec>& spec) {
  py::dict d;
  d["node"] = m.node;
  d["name"] = spec[static_cast<std::size_t>(m.node)].name;
  if (m.kind == VarKind::continuous) {
    d["kind"] = "continuous";
    d["R2"] = m.r2;
  } else {
    d["kind"] = "categorical";
    d["CC"] = m.cc;
    d["nCC"] = m.ncc;
    d["CCmarg"] = m.ccmarg;
  }
  return d;
}

py::list report_to_list(const PredictabilityReport& report,
                        const std::vector<VariableSpec>& spec) {
  py::list out;
  for (const auto& m : report.nodes) out.append(measures_to_dict(m, spec));
  return out;
}

PredictabilityReport report_from_obj(const py::object& obj) {
  // Accepts the PredictabilityReport class or a JSON report path.
  if (py::isinstance<PredictabilityReport>(obj)) return obj.cast<PredictabilityReport>();
  const std::string path = obj.cast<std::string>();
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report file: " + path);
  nlohmann::json j;
  in >> j;
  return report_from_json(j);
}

Provenance py_provenance(std::uint64_t seed, const std::vector<VariableSpec>& spec) {
  Provenance prov;
  prov.spec_hash = spec_hash(spec);
  prov.seed = seed;
  prov.config = {{"interface", "python"}};
  prov.tool_version = kVersion;
  return prov;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixed graphical models, mixed VAR models and nodewise predictability";
  m.attr("__version__") = kVersion;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const Eigen::MatrixXd& values, const std::vector<std::string>& names,
                       const std::vector<std::string>& kinds, const std::vector<int>& levels) {
             return Dataset(spec_from_lists(names, kinds, levels), values);
           }),
           py::arg("values"), py::arg("names"), py::arg("kinds"), py::arg("levels"))
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("p", &Dataset::p)
      .def_property_readonly("values", [](const Dataset& d) { return d.values(); })
      .def_property_readonly("names",
                             [](const Dataset& d) {
                               std::vector<std::string> names;
                               for (const auto& v : d.spec()) names.push_back(v.name);
                               return names;
                             })
      .def_property_readonly("centered", &Dataset::centered)
      .def("center", &center_continuous)
      .def("zscore", &zscore_continuous);

  m.def("load_csv",
        [](const std::string& data_path, const std::string& spec_path) {
          return load_csv(data_path, load_spec_file(spec_path));
        },
        py::arg("data_path"), py::arg("spec_path"));

  py::class_<PairwiseMGM>(m, "MgmModel")
      .def_property_readonly("wadj", [](const PairwiseMGM& m_) { return m_.wadj; })
      .def_property_readonly("signs", [](const PairwiseMGM& m_) { return m_.signs; })
      .def_property_readonly("rule",
                             [](const PairwiseMGM& m_) {
                               return m_.rule == EdgeRule::OR ? "or" : "and";
                             })
      .def_property_readonly("selected_lambdas",
                             [](const PairwiseMGM& m_) {
                               std::vector<double> out;
                               for (const auto& n : m_.nodes) out.push_back(n.lambda);
                               return out;
                             })
      .def("save", [](const PairwiseMGM& m_, const std::string& path) {
        write_text_file(path, model_to_json(m_, py_provenance(m_.seed, m_.spec)).dump(2) + "\n");
      });

  py::class_<VARModel>(m, "VarModel")
      .def_property_readonly("lags", [](const VARModel& m_) { return m_.lags; })
      .def_property_readonly("coefficients",
                             [](const VARModel& m_) { return m_.coefficients; })
      .def_property_readonly("intercepts", [](const VARModel& m_) { return m_.intercepts; })
      .def_property_readonly("residual_sigmas",
                             [](const VARModel& m_) { return m_.residual_sigmas; })
      .def("save", [](const VARModel& m_, const std::string& path) {
        write_text_file(path, model_to_json(m_, py_provenance(m_.seed, m_.spec)).dump(2) + "\n");
      });

  py::class_<PredictabilityReport>(m, "PredictabilityReport")
      .def_property_readonly("sample_kind",
                             [](const PredictabilityReport& r) {
                               return r.sample_kind == SampleKind::within_sample
                                          ? "within_sample"
                                          : "out_of_sample";
                             })
      .def("to_list", [](const PredictabilityReport& r, const py::object& model) {
        if (py::isinstance<PairwiseMGM>(model))
          return report_to_list(r, model.cast<const PairwiseMGM&>().spec);
        return report_to_list(r, model.cast<const VARModel&>().spec);
      });

  m.def("fit_mgm",
        [](const Dataset& d, const std::string& rule, int folds, int n_lambda,
           double lambda_min_ratio, std::uint64_t seed, int threads, bool binary_sign,
           const py::object& fixed_lambda) {
          MgmOptions options;
          options.rule = rule == "and" ? EdgeRule::AND : EdgeRule::OR;
          options.cv = CvConfig{folds, n_lambda, lambda_min_ratio, seed};
          options.seed = seed;
          options.threads = threads;
          options.binary_sign = binary_sign;
          if (!fixed_lambda.is_none()) options.fixed_lambda = fixed_lambda.cast<double>();
          return fit_mgm(d, options);
        },
        py::arg("dataset"), py::arg("rule") = "or", py::arg("folds") = 10,
        py::arg("n_lambda") = 50, py::arg("lambda_min_ratio") = 1e-3, py::arg("seed") = 0,
        py::arg("threads") = 1, py::arg("binary_sign") = false,
        py::arg("fixed_lambda") = py::none());

  m.def("fit_mvar",
        [](const Dataset& d, const std::vector<int>& lags, const py::object& time, int folds,
           int n_lambda, double lambda_min_ratio, std::uint64_t seed, int threads,
           const py::object& fixed_lambda) {
          MvarOptions options;
          options.lags = lags;
          options.cv = CvConfig{folds, n_lambda, lambda_min_ratio, seed};
          options.seed = seed;
          options.threads = threads;
          if (!fixed_lambda.is_none()) options.fixed_lambda = fixed_lambda.cast<double>();
          return fit_mvar(d, time_from_array(time), options);
        },
        py::arg("dataset"), py::arg("lags") = std::vector<int>{1},
        py::arg("time") = py::none(), py::arg("folds") = 10, py::arg("n_lambda") = 50,
        py::arg("lambda_min_ratio") = 1e-3, py::arg("seed") = 0, py::arg("threads") = 1,
        py::arg("fixed_lambda") = py::none());

  m.def("evaluate",
        [](const py::object& model, const Dataset& d, const py::object& time,
           const std::string& sample_kind) {
          const SampleKind kind = sample_kind == "out_of_sample" ? SampleKind::out_of_sample
                                                                 : SampleKind::within_sample;
          if (py::isinstance<PairwiseMGM>(model))
            return evaluate(model.cast<const PairwiseMGM&>(), d, kind);
          return evaluate(model.cast<const VARModel&>(), d, time_from_array(time), kind);
        },
        py::arg("model"), py::arg("dataset"), py::arg("time") = py::none(),
        py::arg("sample_kind") = "within_sample");

  m.def("load_model", [](const std::string& path) -> py::object {
    LoadedModel loaded = load_model_file(path);
    if (loaded.is_mgm()) return py::cast(std::get<PairwiseMGM>(std::move(loaded.model)));
    return py::cast(std::get<VARModel>(std::move(loaded.model)));
  });

  // samplers
  m.def("sample_ggm",
        [](const Eigen::MatrixXd& precision, int n, std::uint64_t seed) {
          return sample_ggm(precision, n, seed).values();
        },
        py::arg("precision"), py::arg("n"), py::arg("seed") = 0);
  m.def("sample_ising",
        [](const Eigen::MatrixXd& weights, const Eigen::VectorXd& thresholds, int n,
           std::uint64_t seed, int burn_in, int thin) {
          return sample_ising_gibbs(weights, thresholds, n, burn_in, thin, seed).values();
        },
        py::arg("weights"), py::arg("thresholds"), py::arg("n"), py::arg("seed") = 0,
        py::arg("burn_in") = 1000, py::arg("thin") = 10);
  m.def("simulate_var",
        [](const Eigen::MatrixXd& coefficients, const Eigen::VectorXd& noise_sds, int n,
           std::uint64_t seed) {
          return simulate_var(coefficients, noise_sds, n, seed).values();
        },
        py::arg("coefficients"), py::arg("noise_sds"), py::arg("n"), py::arg("seed") = 0);
  m.def("population_r2", &population_r2, py::arg("precision"));

  // predictability measures
  m.def("r_squared", &r_squared, py::arg("predicted"), py::arg("observed"));
  m.def("accuracy",
        [](const Eigen::VectorXi& predicted, const Eigen::VectorXi& observed) {
          return accuracy(predicted, observed);
        },
        py::arg("predicted"), py::arg("observed"));
  m.def("normalized_accuracy", &normalized_accuracy, py::arg("acc"), py::arg("marginals"));
  m.def("marginal_accuracy", &marginal_accuracy, py::arg("marginals"));
  m.def("categorical_probabilities",
        [](const Eigen::VectorXd& intercepts, const Eigen::MatrixXd& betas,
           const Eigen::VectorXd& x) {
          NodeModel node;
          node.family = Family::multinomial;
          node.levels = static_cast<int>(intercepts.size());
          node.coef.intercepts = intercepts;
          node.coef.betas = betas;
          node.terms.resize(static_cast<std::size_t>(betas.rows()));
          const CategoricalPrediction pred = predict_categorical(node, x);
          return py::make_tuple(pred.probabilities, pred.category);
        },
        py::arg("intercepts"), py::arg("betas"), py::arg("x"),
        "Class probabilities exp(mu_k)/sum_l exp(mu_l) with mu = intercepts + betas.T @ x");

  // rendering
  m.def("spring_layout", &spring_layout, py::arg("wadj"), py::arg("iterations") = 300,
        py::arg("seed") = 0);
  m.def("render_svg",
        [](const py::object& model, const py::object& report, int iterations,
           std::uint64_t seed) {
          const PredictabilityReport rep = report_from_obj(report);
          RenderedGraph graph;
          if (py::isinstance<PairwiseMGM>(model))
            graph = make_rendered_graph(model.cast<const PairwiseMGM&>(), rep, iterations, seed);
          else
            graph = make_rendered_graph(model.cast<const VARModel&>(), rep, iterations, seed);
          return render_svg(graph);
        },
        py::arg("model"), py::arg("report"), py::arg("iterations") = 300, py::arg("seed") = 0);
  m.def("export_dot",
        [](const py::object& model, const py::object& report, int iterations,
           std::uint64_t seed) {
          const PredictabilityReport rep = report_from_obj(report);
          RenderedGraph graph;
          if (py::isinstance<PairwiseMGM>(model))
            graph = make_rendered_graph(model.cast<const PairwiseMGM&>(), rep, iterations, seed);
          else
            graph = make_rendered_graph(model.cast<const VARModel&>(), rep, iterations, seed);
          return export_dot(graph);
        },
        py::arg("model"), py::arg("report"), py::arg("iterations") = 300, py::arg("seed") = 0);

  m.def("cli_main", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("netpred");
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
  });
}
