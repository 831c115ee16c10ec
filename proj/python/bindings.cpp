#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gvarma/experiments.hpp"
#include "gvarma/fitting.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/io.hpp"
#include "gvarma/models.hpp"
#include "gvarma/time_vertex.hpp"
#include "gvarma/tracking.hpp"

namespace py = pybind11;
using namespace gvarma;

namespace {

Normalization norm_arg(const std::string& s) { return parse_normalization(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph time-series forecasting: G-VARMA / GP-VAR models and Kalman tracking";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<Graph>(m, "Graph")
      .def_static(
          "from_edges",
          [](int n, const std::vector<std::tuple<int, int, double>>& edges) {
            std::vector<Edge> list;
            for (const auto& [i, j, w] : edges) list.push_back({i, j, w});
            return Graph::from_edges(n, std::move(list));
          },
          py::arg("n"), py::arg("edges"))
      .def_property_readonly("size", &Graph::size)
      .def_property_readonly("adjacency", &Graph::adjacency)
      .def("to_csv", &graph_to_csv);

  m.def("knn_graph", &build_knn_graph, py::arg("coords"), py::arg("k"));
  m.def("random_graph", &random_graph, py::arg("n"), py::arg("edges"), py::arg("seed") = 0);

  py::class_<SpectralBasis>(m, "SpectralBasis")
      .def_readonly("eigenvectors", &SpectralBasis::eigenvectors)
      .def_readonly("eigenvalues", &SpectralBasis::eigenvalues)
      .def_readonly("laplacian", &SpectralBasis::laplacian)
      .def_property_readonly("size", &SpectralBasis::size);

  m.def(
      "spectral_basis",
      [](const Graph& g, const std::string& normalization) { return spectral_basis(g, norm_arg(normalization)); },
      py::arg("graph"), py::arg("normalization") = "unit_spectral_norm");

  m.def(
      "jft", [](const SpectralBasis& b, const Matrix& X) { return jft(b, TemporalBasis(static_cast<int>(X.cols())), X); },
      py::arg("basis"), py::arg("X"));
  m.def(
      "ijft",
      [](const SpectralBasis& b, const CMatrix& X_hat) {
        return ijft(b, TemporalBasis(static_cast<int>(X_hat.cols())), X_hat);
      },
      py::arg("basis"), py::arg("X_hat"));

  py::class_<GVarmaModel>(m, "GVarmaModel")
      .def(py::init<>())
      .def_readwrite("ar", &GVarmaModel::ar)
      .def_readwrite("ma", &GVarmaModel::ma)
      .def_readwrite("innovation_spectrum", &GVarmaModel::innovation_spectrum);

  py::class_<GpVarModel>(m, "GpVarModel")
      .def(py::init<>())
      .def_readwrite("psi", &GpVarModel::psi)
      .def_readwrite("restricted", &GpVarModel::restricted)
      .def_readwrite("laplacian", &GpVarModel::laplacian)
      .def_readwrite("innovation_cov", &GpVarModel::innovation_cov);

  py::class_<Forecast>(m, "Forecast")
      .def_readonly("predictions", &Forecast::predictions)
      .def_readonly("step_mse", &Forecast::step_mse);

  m.def("random_gpvar", &random_gpvar, py::arg("basis"), py::arg("P"), py::arg("L"), py::arg("radius") = 0.8,
        py::arg("seed") = 0, py::arg("restricted") = false);
  m.def("random_gvarma", &random_gvarma, py::arg("basis"), py::arg("P"), py::arg("Q"), py::arg("radius") = 0.8,
        py::arg("seed") = 0);
  m.def("gvarma_simulate", &gvarma_simulate, py::arg("model"), py::arg("basis"), py::arg("T"), py::arg("seed"),
        py::arg("burn_in") = 500);
  m.def("gpvar_simulate", &gpvar_simulate, py::arg("model"), py::arg("T"), py::arg("seed"), py::arg("burn_in") = 500);
  m.def("gvarma_predict", &gvarma_predict, py::arg("model"), py::arg("basis"), py::arg("history"), py::arg("k"));
  m.def("gpvar_predict", &gpvar_predict, py::arg("model"), py::arg("history"), py::arg("k"));

  m.def(
      "fit_gvarma",
      [](const SpectralBasis& basis, const Matrix& X, int P, int Q, double gamma, double sigma_g, int low_rank) {
        FitConfig cfg;
        cfg.P = P;
        cfg.Q = Q;
        cfg.gamma = gamma;
        cfg.smoothing = {sigma_g, 0.0};
        if (low_rank > 0 && low_rank < basis.size()) return fit_gvarma_low_rank(basis, X, cfg, low_rank).model;
        return fit_gvarma(basis, X, cfg).model;
      },
      py::arg("basis"), py::arg("X"), py::arg("P") = 1, py::arg("Q") = 0, py::arg("gamma") = 0.0,
      py::arg("sigma_g") = 0.0, py::arg("low_rank") = 0);
  m.def(
      "fit_gpvar",
      [](const SpectralBasis& basis, const Matrix& X, int P, int L, bool restricted, const std::string& method) {
        std::vector<int> orders;
        for (int p = 1; p <= P; ++p) orders.push_back(restricted ? std::min(L, p) : L);
        const Autocorrelation R = estimate_autocorrelation(X, P);
        if (method == "mse") return fit_gpvar_mse(basis.laplacian, R, orders, restricted).model;
        if (method == "yule-walker") return fit_gpvar_yule_walker(basis.laplacian, R, orders, restricted).model;
        throw InvalidInput("unknown method '" + method + "'");
      },
      py::arg("basis"), py::arg("X"), py::arg("P") = 1, py::arg("L") = 2, py::arg("restricted") = false,
      py::arg("method") = "mse");

  m.def(
      "track",
      [](const GpVarModel& model, const std::vector<std::vector<std::pair<int, double>>>& schedule,
         double noise_variance) {
        std::vector<ObservationSet> obs;
        for (const auto& step : schedule) {
          ObservationSet s;
          for (const auto& [node, value] : step) s.push_back({node, value});
          obs.push_back(std::move(s));
        }
        const TrackResult r = track(build_state_space(model), obs, ObservationModel{noise_variance});
        return py::make_tuple(r.estimates, r.error_trace);
      },
      py::arg("model"), py::arg("schedule"), py::arg("noise_variance") = 1e-6);

  m.def("rnmse", &rnmse, py::arg("truth"), py::arg("estimate"));
  m.def(
      "split",
      [](Eigen::Index T, double train, double valid, double test) {
        const SplitRanges r = split(T, SplitSpec{train, valid, test});
        return py::make_tuple(py::make_tuple(r.train.begin, r.train.end), py::make_tuple(r.valid.begin, r.valid.end),
                              py::make_tuple(r.test.begin, r.test.end));
      },
      py::arg("T"), py::arg("train") = 0.35, py::arg("valid") = 0.15, py::arg("test") = 0.5);
}
