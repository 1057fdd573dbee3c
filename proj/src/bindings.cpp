#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "graphmcmc/diagnostics.hpp"
#include "graphmcmc/metric.hpp"
#include "graphmcmc/rng.hpp"
#include "graphmcmc/sample_graph.hpp"
#include "graphmcmc/targets.hpp"

namespace py = pybind11;
using namespace graphmcmc;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graph-accelerated MCMC core bindings";

  m.def("splitmix64", &splitmix64, py::arg("x"),
        "SplitMix64 hash step, the seed expander behind Rng.");

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def(
          "uniform", [](Rng& rng) { return rng.uniform(); },
          "Uniform draw on [0, 1).")
      .def(
          "uniform",
          [](Rng& rng, double a, double b) { return rng.uniform(a, b); },
          py::arg("a"), py::arg("b"))
      .def("normal", &Rng::normal)
      .def("substream", &Rng::substream, py::arg("id"),
           "Independent child stream; does not advance this generator.")
      .def("seed", &Rng::seed);

  py::class_<Target>(m, "Target")
      .def("dim", &Target::dim)
      .def("log_kernel", &Target::log_kernel, py::arg("theta"),
           "Unnormalized log density.");

  py::class_<GmmTarget, Target>(m, "GmmTarget")
      .def(py::init([](const std::vector<double>& weights,
                       const std::vector<Eigen::VectorXd>& means,
                       const std::vector<Eigen::MatrixXd>& covariances) {
             GmmSpec spec;
             spec.weights = weights;
             spec.means = means;
             spec.covariances = covariances;
             return GmmTarget(spec);
           }),
           py::arg("weights"), py::arg("means"), py::arg("covariances"))
      .def("sample", &GmmTarget::sample, py::arg("rng"));

  py::class_<BananaTarget, Target>(m, "BananaTarget")
      .def(py::init<Eigen::VectorXd>(), py::arg("y"));

  m.def("autocorrelation", &autocorrelation, py::arg("series"),
        py::arg("max_lag"), "Biased sample autocorrelation at lags 0..max_lag.");
  m.def("effective_sample_size", &effective_sample_size, py::arg("series"));

  py::class_<SampleGraph>(m, "SampleGraph")
      .def_property_readonly("size", &SampleGraph::size)
      .def_property_readonly("dim", &SampleGraph::dim)
      .def_property_readonly("total_cost", &SampleGraph::total_cost)
      .def("nodes", &SampleGraph::nodes, py::return_value_policy::copy)
      .def("edges", &SampleGraph::edges)
      .def("nearest_node", &SampleGraph::nearest_node, py::arg("theta"))
      .def("ball", &SampleGraph::ball, py::arg("j"), py::arg("r"),
           "Nodes within walk distance r of node j.");

  m.def(
      "build_graph",
      [](const Eigen::MatrixXd& beta, const Target& target, double kappa,
         int radius) { return build_mst(beta, target, Metric(), kappa, radius); },
      py::arg("beta"), py::arg("target"), py::arg("kappa") = 1.0,
      py::arg("radius") = 3,
      "Minimum spanning tree over sample rows under the density-aware edge "
      "cost, with the Euclidean metric.");
}
