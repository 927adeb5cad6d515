#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "rsalab/causal.hpp"
#include "rsalab/correlation.hpp"
#include "rsalab/experiment.hpp"
#include "rsalab/graph_measures.hpp"
#include "rsalab/limits.hpp"
#include "rsalab/oracle.hpp"
#include "rsalab/packing.hpp"
#include "rsalab/stats.hpp"

namespace py = pybind11;
using namespace rsalab;

namespace {

FieldMode mode_from_string(const std::string& s) {
  if (s == "continuum") return FieldMode::continuum;
  if (s == "lattice") return FieldMode::lattice;
  throw std::invalid_argument("mode must be 'continuum' or 'lattice'");
}

SampleMode sample_mode_from_string(const std::string& s) {
  if (s == "infinite") return SampleMode::infinite_volume;
  if (s == "finite") return SampleMode::finite_volume;
  throw std::invalid_argument("sample mode must be 'infinite' or 'finite'");
}

Region region_from_boxes(const std::vector<std::pair<Vec, Vec>>& boxes) {
  std::vector<Box> bs;
  for (const auto& [lo, hi] : boxes) bs.push_back(Box{lo, hi});
  return Region(std::move(bs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact infinite-volume simulation of random sequential adsorption "
            "and related spatial processes, with correlation and Gaussian "
            "limit diagnostics.";

  py::register_exception<ConeCapError>(m, "ConeCapError");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<SpaceTimePoint>(m, "SpaceTimePoint")
      .def(py::init([](Vec x, double t, std::optional<int> mark,
                       std::optional<double> lifetime) {
             SpaceTimePoint p;
             p.x = std::move(x);
             p.t = t;
             p.mark = mark;
             p.lifetime = lifetime;
             return p;
           }),
           py::arg("x"), py::arg("t"), py::arg("mark") = std::nullopt,
           py::arg("lifetime") = std::nullopt)
      .def_readwrite("x", &SpaceTimePoint::x)
      .def_readwrite("t", &SpaceTimePoint::t)
      .def_readwrite("mark", &SpaceTimePoint::mark)
      .def_readwrite("lifetime", &SpaceTimePoint::lifetime)
      .def_readonly("uid", &SpaceTimePoint::uid)
      .def("__repr__", [](const SpaceTimePoint& p) {
        std::string s = "SpaceTimePoint(x=[";
        for (std::size_t i = 0; i < p.x.size(); ++i)
          s += (i ? "," : "") + format_double(p.x[i]);
        return s + "], t=" + format_double(p.t) + ")";
      });

  py::class_<Region>(m, "Region")
      .def(py::init(&region_from_boxes), py::arg("boxes"))
      .def(py::init([](Vec lo, Vec hi) { return Region(lo, hi); }),
           py::arg("lo"), py::arg("hi"))
      .def_static("cube", &Region::cube, py::arg("dimension"), py::arg("side"),
                  py::arg("center") = 0.0)
      .def("volume", &Region::volume)
      .def("contains", &Region::contains)
      .def("scaled", &Region::scaled)
      .def("dimension", &Region::dimension)
      .def("boxes", [](const Region& r) {
        std::vector<std::pair<Vec, Vec>> out;
        for (const auto& b : r.boxes()) out.emplace_back(b.lo, b.hi);
        return out;
      });

  py::class_<CellField>(m, "CellField")
      .def_readonly("master_seed", &CellField::master_seed)
      .def_readonly("dimension", &CellField::dimension)
      .def_readonly("tau", &CellField::tau)
      .def_readonly("cell_size", &CellField::cell_size)
      .def_property_readonly(
          "mode", [](const CellField& f) { return to_string(f.mode); })
      .def("with_seed", &CellField::with_seed);

  m.def(
      "make_field",
      [](std::uint64_t seed, int dimension, const std::string& mode,
         double tau, double cell_size) {
        return make_field(seed, dimension, mode_from_string(mode), tau,
                          cell_size);
      },
      py::arg("master_seed"), py::arg("dimension"), py::arg("mode"),
      py::arg("tau"), py::arg("cell_size") = 2.0,
      "Deterministic lazily generated Poisson input field. Lattice mode "
      "requires tau=float('inf').");

  m.def("cell_points", &cell_points, py::arg("field"), py::arg("cell"));
  m.def("sample_window", &sample_window, py::arg("field"), py::arg("region"));
  m.def("lattice_arrivals", &lattice_arrivals, py::arg("field"),
        py::arg("site"), py::arg("horizon"));
  m.def("first_arrival", &first_arrival, py::arg("field"), py::arg("site"));
  m.def("assign_marks", [](std::vector<SpaceTimePoint> pts, int n_types) {
    assign_marks(pts, n_types);
    return pts;
  });

  py::class_<PackedSample>(m, "PackedSample")
      .def_readonly("points", &PackedSample::points)
      .def_property_readonly(
          "accepted",
          [](const PackedSample& s) {
            std::vector<bool> out(s.accepted.begin(), s.accepted.end());
            return out;
          })
      .def("accepted_count", &PackedSample::accepted_count)
      .def("accepted_positions", &PackedSample::accepted_positions)
      .def("__len__", &PackedSample::size);

  m.def("overlaps", &overlaps, py::arg("x1"), py::arg("x2"));
  m.def("pack_sequential", &pack_sequential, py::arg("points"));
  m.def("pack_window_infinite", &pack_window_infinite, py::arg("field"),
        py::arg("region"),
        "Restriction to the window of the exact infinite-volume packing.");
  m.def("sigma_infinite", &sigma_infinite, py::arg("point"), py::arg("field"));
  m.def("sigma_joint", &sigma_joint, py::arg("points"), py::arg("field"));
  m.def("first_blocking_time", &first_blocking_time, py::arg("field"),
        py::arg("x"), py::arg("t_max"));
  m.def("simulate_desorption", &simulate_desorption, py::arg("field"),
        py::arg("region"), py::arg("lifetime_rate"));
  m.def("simulate_birth_growth", &simulate_birth_growth, py::arg("field"),
        py::arg("region"), py::arg("speed"), py::arg("initial_radius"));
  m.def("filter_by_mark", &filter_by_mark, py::arg("sample"), py::arg("mark"));
  m.def("jam_lattice_window", &jam_lattice_window, py::arg("field"),
        py::arg("window"));
  m.def("jam_priority_flags",
        [](const std::vector<CellIndex>& sites, const std::vector<double>& t) {
          auto flags = jam_priority_flags(sites, t);
          return std::vector<bool>(flags.begin(), flags.end());
        });

  py::class_<CausalGraph>(m, "CausalGraph")
      .def_readonly("out_edges", &CausalGraph::out)
      .def_readonly("in_edges", &CausalGraph::in);
  m.def("build_causal_graph", &build_causal_graph, py::arg("points"));

  py::class_<CausalCone>(m, "CausalCone")
      .def_readonly("root", &CausalCone::root)
      .def_readonly("members", &CausalCone::members)
      .def_readonly("spatial_radius", &CausalCone::spatial_radius)
      .def_readonly("time_extent", &CausalCone::time_extent);
  m.def("backward_cone", &backward_cone, py::arg("point"), py::arg("points"));
  m.def("forward_cone", &forward_cone, py::arg("point"), py::arg("points"));

  py::class_<ProbabilityEstimate>(m, "ProbabilityEstimate")
      .def_readonly("value", &ProbabilityEstimate::value)
      .def_readonly("standard_error", &ProbabilityEstimate::standard_error)
      .def_readonly("n_samples", &ProbabilityEstimate::n_samples)
      .def_readonly("degenerate", &ProbabilityEstimate::degenerate);

  m.def("estimate_rbar", &estimate_rbar, py::arg("tests"), py::arg("field"),
        py::arg("n_samples"), py::arg("joint_blocking") = true);
  m.def(
      "r1_profile",
      [](const CellField& proto, const std::vector<double>& t_grid,
         int n_samples) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& pt : r1_profile(proto, t_grid, n_samples))
          out.emplace_back(pt.t, pt.estimate.value,
                           pt.estimate.standard_error);
        return out;
      },
      py::arg("field"), py::arg("t_grid"), py::arg("n_samples"),
      "Returns a list of (t, value, standard_error).");

  py::class_<BinnedCorrelation>(m, "BinnedCorrelation")
      .def_readonly("bin_edges", &BinnedCorrelation::bin_edges)
      .def_readonly("estimates", &BinnedCorrelation::estimates)
      .def_readonly("standard_errors", &BinnedCorrelation::standard_errors)
      .def_readonly("pair_counts", &BinnedCorrelation::pair_counts)
      .def_readonly("intensity", &BinnedCorrelation::intensity)
      .def_readonly("intensity_se", &BinnedCorrelation::intensity_se);
  m.def("spatial_pair_correlation", &spatial_pair_correlation,
        py::arg("samples"), py::arg("bin_edges"));
  m.def(
      "estimate_C_corr",
      [](const BinnedCorrelation& corr) {
        const auto est = estimate_C_corr(corr);
        return py::make_tuple(est.value, est.truncation_error);
      },
      py::arg("binned"), "Returns (C, truncation_error).");
  m.def(
      "estimate_C_var",
      [](const std::vector<double>& lambdas,
         const std::vector<std::vector<double>>& counts, int dimension,
         double box_volume) {
        const auto est = estimate_C_var(lambdas, counts, dimension, box_volume);
        return py::make_tuple(est.value, est.normalized_variance);
      },
      py::arg("lambdas"), py::arg("counts"), py::arg("dimension"),
      py::arg("box_volume"),
      "Returns (C_at_largest_lambda, normalized_variances).");
  m.def(
      "moments_from_correlations",
      [](const std::vector<double>& t_grid, const std::vector<double>& r1,
         const BinnedCorrelation& r2, const Region& region) {
        const auto mp = moments_from_correlations(t_grid, r1, r2, region);
        return py::make_tuple(mp.mean, mp.variance);
      },
      py::arg("t_grid"), py::arg("r1_of_t"), py::arg("r2"), py::arg("region"));

  py::class_<RescaledVectorSample>(m, "RescaledVectorSample")
      .def_readonly("lam", &RescaledVectorSample::lambda)
      .def_readonly("raw", &RescaledVectorSample::raw)
      .def_readonly("centered_scaled", &RescaledVectorSample::centered_scaled)
      .def_readonly("mean_estimate", &RescaledVectorSample::mean_estimate)
      .def_readonly("replicate_seed", &RescaledVectorSample::replicate_seed);
  m.def(
      "rescaled_sample",
      [](const CellField& field, const std::string& mode, double lambda,
         const std::vector<Region>& boxes, const std::optional<Region>& A) {
        return rescaled_sample(field, sample_mode_from_string(mode), lambda,
                               boxes, A);
      },
      py::arg("field"), py::arg("mode"), py::arg("lam"), py::arg("boxes"),
      py::arg("A") = std::nullopt);
  m.def("center_samples", [](std::vector<RescaledVectorSample> samples) {
    center_samples(samples);
    return samples;
  });

  m.def(
      "boundary_processes",
      [](const CellField& field, double lambda, const Region& A) {
        const auto diff = boundary_processes(field, lambda, A);
        return py::make_tuple(diff.plus_count(), diff.minus_count());
      },
      py::arg("field"), py::arg("lam"), py::arg("A"),
      "Returns (plus_count, minus_count) of the coupled finite/infinite "
      "discrepancy.");

  m.def(
      "cone_tail",
      [](const CellField& proto, const std::vector<double>& r_grid,
         double beta, int n_samples) {
        const auto res = cone_tail(proto, r_grid, beta, n_samples);
        return py::make_tuple(res.escape_probability, res.escape_se,
                              res.fit_valid ? res.fit.rate : 0.0);
      },
      py::arg("field"), py::arg("r_grid"), py::arg("beta"),
      py::arg("n_samples"));

  m.def("build_nn_weights", [](const std::vector<Vec>& points) {
    return build_nn_graph(points).weights;
  });
  m.def("nn_total_edge_length", [](const std::vector<Vec>& points) {
    return build_nn_graph(points).total_edge_length;
  });
  m.def("nn_measure", &nn_measure, py::arg("points"), py::arg("query"));
  m.def(
      "nn_rescaled_sample",
      [](const CellField& field, const std::string& mode, double lambda,
         const std::vector<Region>& boxes, const std::optional<Region>& A,
         double margin) {
        return nn_rescaled_sample(field, sample_mode_from_string(mode), lambda,
                                  boxes, A, margin);
      },
      py::arg("field"), py::arg("mode"), py::arg("lam"), py::arg("boxes"),
      py::arg("A") = std::nullopt, py::arg("margin") = 8.0);
  m.def(
      "stabilization_radius_probe",
      [](const CellField& field) {
        return stabilization_radius_probe(field,
                                          default_stabilization_config());
      },
      py::arg("field"));

  m.def("renyi_density_oracle", &renyi_density_oracle, py::arg("tau"));
  m.def("brute_force_sigma_oracle", &brute_force_sigma_oracle,
        py::arg("field"), py::arg("point"), py::arg("box_halfwidth"),
        py::arg("margin"));

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto config =
            config_from_json(nlohmann::json::parse(config_json));
        const RunResult result = run_experiment(config);
        return py::make_tuple(result.out_dir.string(), result.summary.dump());
      },
      py::arg("config_json"),
      "Runs an experiment from a JSON config string; returns "
      "(out_dir, summary_json).");
  m.def("default_config_json", [](const std::string& kind) {
    return config_to_json(default_config(kind)).dump();
  });

  m.attr("__version__") = kToolVersion;
}
