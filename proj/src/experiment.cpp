#include "rsalab/experiment.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rsalab/causal.hpp"
#include "rsalab/correlation.hpp"
#include "rsalab/graph_measures.hpp"
#include "rsalab/limits.hpp"
#include "rsalab/oracle.hpp"
#include "rsalab/packing.hpp"
#include "rsalab/rng.hpp"
#include "rsalab/stats.hpp"

namespace rsalab {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  return fnv1a64(data.data(), data.size());
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv(kWorkersEnvVar)) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

json region_to_json(const Region& region) {
  json out = json::array();
  for (const auto& b : region.boxes()) out.push_back(json{{"lo", b.lo}, {"hi", b.hi}});
  return out;
}

Region region_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("region: expected a list of boxes");
  std::vector<Box> boxes;
  for (const auto& jb : j) {
    Box b;
    b.lo = jb.at("lo").get<Vec>();
    b.hi = jb.at("hi").get<Vec>();
    boxes.push_back(std::move(b));
  }
  try {
    return Region(std::move(boxes));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("region: ") + e.what());
  }
}

namespace {

std::vector<Region> default_box_family(int dimension) {
  // Two disjoint unit boxes plus an overlapping pair.
  const auto unit_box = [dimension](double start) {
    Vec lo(dimension, 0.0), hi(dimension, 1.0);
    lo[0] = start;
    hi[0] = start + 1.0;
    return Region(std::move(lo), std::move(hi));
  };
  return {unit_box(0.0), unit_box(2.0), unit_box(5.0), unit_box(5.5)};
}

Region default_domain(int dimension) {
  // Contains the default box family with room to spare.
  Vec lo(dimension, -1.0), hi(dimension, 2.0);
  lo[0] = -1.0;
  hi[0] = 8.0;
  return Region(std::move(lo), std::move(hi));
}

std::uint64_t sub_seed(std::uint64_t master, const char* component) {
  return chain(chain(master, kTagInternal),
               fnv1a64(component, std::string(component).size()));
}

}  // namespace

ExperimentConfig default_config(const std::string& kind, int dimension) {
  ExperimentConfig c;
  c.kind = kind;
  c.options = json::object();
  if (dimension == 0) dimension = kind == "boundary" ? 2 : 1;
  c.dimension = dimension;
  if (kind == "pack") {
    Vec lo(dimension, 0.0), hi(dimension, dimension == 1 ? 100.0 : 20.0);
    c.region = Region(std::move(lo), std::move(hi));
    c.options["model"] = "rsa";  // rsa | desorption | birth-growth
    c.options["sample"] = "infinite";
    c.options["lifetime_rate"] = 1.0;
    c.options["speed"] = 1.0;
    c.options["initial_radius"] = 0.0;
  } else if (kind == "correlate") {
    c.replicates = 200;
    c.options["n_samples"] = 20000;
    c.options["t_grid"] = json::array();
    c.options["bin_max"] = 12.0;
    c.options["bin_width"] = 0.25;
    c.options["corr_window"] = 400.0;
    c.options["separations"] = json::array();
    c.options["tuple_t"] = 0.5;
    c.options["joint_blocking"] = true;
    c.lambdas = {8.0, 16.0, 32.0, 64.0};
    c.options["var_replicates"] = 400;
  } else if (kind == "clt") {
    c.replicates = 1000;
    c.lambdas = {64.0};
    c.boxes = default_box_family(dimension);
    c.region = default_domain(dimension);
    c.options["modes"] = json::array({"infinite", "finite"});
    c.options["c_source"] = "corr";  // corr | value
    c.options["c_value"] = 0.0;
    c.options["corr_replicates"] = 300;
    c.options["corr_window"] = 400.0;
    c.options["bin_max"] = 12.0;
    c.options["bin_width"] = 0.25;
  } else if (kind == "boundary") {
    c.replicates = 200;
    c.lambdas = {8.0, 16.0, 32.0, 64.0};
    c.region = Region::cube(dimension, 1.0);
  } else if (kind == "cones") {
    c.options["r_grid"] = json::array({2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0});
    c.options["beta"] = 4.0;
    c.options["n_samples"] = 200000;
  } else if (kind == "nn") {
    c.replicates = 1000;
    c.lambdas = {64.0};
    c.boxes = default_box_family(dimension);
    c.region = default_domain(dimension);
    c.options["modes"] = json::array({"infinite", "finite"});
    c.options["margin"] = 8.0;
    c.options["n_probes"] = 20000;
    c.options["stab_t_grid"] = json::array({2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
  } else if (kind == "oracle") {
    c.options["mc_check"] = false;
    c.options["window"] = 10000.0;
    c.replicates = 100;
  } else {
    throw ConfigError("unknown experiment kind: " + kind);
  }
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  if (!j.contains("kind")) throw ConfigError("config: missing kind");
  int dimension = 0;
  if (j.contains("dimension")) {
    try {
      dimension = j.at("dimension").get<int>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  ExperimentConfig c = default_config(j.at("kind").get<std::string>(), dimension);
  try {
    if (j.contains("mode")) {
      const auto m = j.at("mode").get<std::string>();
      if (m == "continuum")
        c.mode = FieldMode::continuum;
      else if (m == "lattice")
        c.mode = FieldMode::lattice;
      else
        throw ConfigError("config: mode must be continuum or lattice");
    }
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("master_seed"))
      c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<int>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("lambdas"))
      c.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (j.contains("region")) c.region = region_from_json(j.at("region"));
    if (j.contains("boxes")) {
      c.boxes.clear();
      for (const auto& jb : j.at("boxes")) c.boxes.push_back(region_from_json(jb));
    }
    if (j.contains("options")) {
      for (const auto& [key, value] : j.at("options").items())
        c.options[key] = value;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.dimension < 1) throw ConfigError("config: dimension >= 1");
  if (c.replicates < 1) throw ConfigError("config: replicates >= 1");
  if (c.mode == FieldMode::continuum && !(c.tau > 0.0))
    throw ConfigError("config: tau > 0 required in continuum mode");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind;
  j["dimension"] = c.dimension;
  j["mode"] = to_string(c.mode);
  j["tau"] = c.tau;
  j["master_seed"] = c.master_seed;
  j["replicates"] = c.replicates;
  j["workers"] = c.workers;
  j["out_dir"] = c.out_dir;
  j["lambdas"] = c.lambdas;
  j["region"] = region_to_json(c.region);
  json boxes = json::array();
  for (const auto& b : c.boxes) boxes.push_back(region_to_json(b));
  j["boxes"] = boxes;
  j["options"] = c.options;
  return j;
}

namespace {

CellField field_prototype(const ExperimentConfig& c) {
  const double tau = c.mode == FieldMode::lattice ? kUnboundedTime : c.tau;
  return make_field(c.master_seed, c.dimension, c.mode, tau);
}

struct CsvTable {
  std::string header;
  std::vector<std::string> rows;
};

struct ExperimentOutput {
  CsvTable replicates;
  CsvTable curves{"curve,x,value,se,n,flag", {}};
  json summary;
};

void append_curve(CsvTable& curves, const std::string& name, double x,
                  double value, double se, std::size_t n, int flag = 0) {
  curves.rows.push_back(name + "," + format_double(x) + "," +
                        format_double(value) + "," + format_double(se) + "," +
                        std::to_string(n) + "," + std::to_string(flag));
}

std::vector<double> bin_edges_from_options(const json& options) {
  const double bin_max = options.at("bin_max").get<double>();
  const double width = options.at("bin_width").get<double>();
  std::vector<double> edges;
  for (double e = 0.0; e < bin_max - 1e-9; e += width) edges.push_back(e);
  edges.push_back(bin_max);
  return edges;
}

// Pair-correlation sweep shared by the correlate and clt experiments.
struct CorrOutcome {
  BinnedCorrelation binned;
  CorrCEstimate c_corr;
};

CorrOutcome run_pair_correlation(const ExperimentConfig& c,
                                 std::uint64_t seed_base, int workers) {
  const int replicates = c.options.at("corr_replicates").get<int>();
  const double window_side = c.options.at("corr_window").get<double>();
  const Region window = Region::cube(c.dimension, window_side);
  const CellField proto = field_prototype(c).with_seed(seed_base);
  std::vector<PackedSample> samples(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    const CellField field = sample_field(proto, r);
    samples[r] = pack_window_infinite(field, window);
  });
  CorrOutcome out;
  out.binned = spatial_pair_correlation(samples, bin_edges_from_options(c.options));
  out.c_corr = estimate_C_corr(out.binned);
  return out;
}

ExperimentOutput run_pack(const ExperimentConfig& c, int workers) {
  ExperimentOutput out;
  out.replicates.header = "replicate,seed,n_points,n_accepted,density";
  const CellField proto = field_prototype(c);
  const Region& region = c.region;
  if (region.empty()) throw ConfigError("pack: region required");
  const double volume = region.volume();
  const auto model = c.options.at("model").get<std::string>();
  const auto sample_kind = c.options.at("sample").get<std::string>();

  struct Row {
    std::uint64_t seed;
    std::size_t n_points, n_accepted;
  };
  std::vector<Row> rows(c.replicates);
  parallel_for(c.replicates, workers, [&](std::size_t r) {
    const std::uint64_t seed = replicate_seed(c.master_seed, r);
    const CellField field = proto.with_seed(seed);
    Row row{seed, 0, 0};
    if (c.mode == FieldMode::lattice) {
      const auto sites = sites_in_region(region);
      row.n_points = sites.size();
      if (sample_kind == "finite") {
        std::vector<double> arrivals(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i)
          arrivals[i] = first_arrival(field, sites[i]);
        const auto flags = jam_priority_flags(sites, arrivals);
        for (const auto f : flags) row.n_accepted += f;
      } else {
        row.n_accepted = jam_lattice_window(field, region).size();
      }
    } else {
      PackedSample sample;
      if (model == "desorption") {
        sample = simulate_desorption(field, region,
                                     c.options.at("lifetime_rate").get<double>());
      } else if (model == "birth-growth") {
        sample = simulate_birth_growth(field, region,
                                       c.options.at("speed").get<double>(),
                                       c.options.at("initial_radius").get<double>());
      } else if (model == "rsa") {
        sample = sample_kind == "finite"
                     ? pack_sequential(sample_window(field, region))
                     : pack_window_infinite(field, region);
      } else {
        throw ConfigError("pack: unknown model " + model);
      }
      row.n_points = sample.size();
      row.n_accepted = sample.accepted_count();
    }
    rows[r] = row;
  });

  std::vector<double> densities;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double density = static_cast<double>(rows[r].n_accepted) / volume;
    densities.push_back(density);
    out.replicates.rows.push_back(
        std::to_string(r) + "," + std::to_string(rows[r].seed) + "," +
        std::to_string(rows[r].n_points) + "," +
        std::to_string(rows[r].n_accepted) + "," + format_double(density));
  }
  const auto ms = mean_se(densities);
  out.summary["kind"] = "pack";
  out.summary["model"] = model;
  out.summary["volume"] = volume;
  out.summary["mean_density"] = ms.mean;
  out.summary["density_se"] = ms.se;
  out.summary["n_replicates"] = c.replicates;
  if (c.mode == FieldMode::continuum && c.dimension == 1 && model == "rsa") {
    const double oracle = renyi_density_oracle(c.tau);
    out.summary["renyi_oracle"] = oracle;
    out.summary["oracle_z"] = ms.se > 0.0 ? (ms.mean - oracle) / ms.se : 0.0;
  }
  return out;
}

ExperimentOutput run_correlate(const ExperimentConfig& c, int workers) {
  ExperimentOutput out;
  out.replicates.header = "replicate,seed,n_accepted";
  out.summary["kind"] = "correlate";
  const int n_samples = c.options.at("n_samples").get<int>();

  // Time profile of the one-point correlation.
  std::vector<double> t_grid =
      c.options.at("t_grid").get<std::vector<double>>();
  if (t_grid.empty()) {
    if (c.mode == FieldMode::continuum) {
      for (int i = 1; i <= 9; ++i) t_grid.push_back(c.tau * i / 10.0);
    } else {
      for (double t = 0.5; t <= 4.0 + 1e-9; t += 0.5) t_grid.push_back(t);
    }
  }
  const CellField profile_proto =
      field_prototype(c).with_seed(sub_seed(c.master_seed, "r1-profile"));
  const auto profile = r1_profile(profile_proto, t_grid, n_samples);
  for (const auto& pt : profile)
    append_curve(out.curves, "r1_t", pt.t, pt.estimate.value,
                 pt.estimate.standard_error, pt.estimate.n_samples);

  if (c.mode == FieldMode::lattice) {
    std::vector<double> xs, ys;
    for (const auto& pt : profile) {
      if (pt.estimate.value <= 2.0 * pt.estimate.standard_error) continue;
      xs.push_back(pt.t);
      ys.push_back(pt.estimate.value);
    }
    if (xs.size() >= 3) {
      const DecayFit fit = fit_exponential_decay(xs, ys);
      out.summary["lattice_decay_rate"] = fit.rate;
      out.summary["lattice_decay_r_squared"] = fit.r_squared;
    }
  } else {
    std::vector<double> lx, ly;
    for (const auto& pt : profile) {
      if (pt.t <= 0.0 || pt.estimate.value <= 2.0 * pt.estimate.standard_error)
        continue;
      lx.push_back(std::log(pt.t));
      ly.push_back(std::log(pt.estimate.value));
    }
    if (lx.size() >= 3) {
      const LinearFit fit = linear_fit(lx, ly);
      out.summary["profile_loglog_slope"] = fit.slope;
      out.summary["profile_loglog_r_squared"] = fit.r_squared;
    }
  }

  if (c.mode == FieldMode::continuum) {
    // Spatial pair correlation and the correlation-route C.
    const CorrOutcome corr =
        run_pair_correlation(c, sub_seed(c.master_seed, "pair-corr"), workers);
    for (std::size_t b = 0; b < corr.binned.n_bins(); ++b) {
      const double mid =
          0.5 * (corr.binned.bin_edges[b] + corr.binned.bin_edges[b + 1]);
      append_curve(out.curves, "r2_s", mid, corr.binned.estimates[b],
                   corr.binned.standard_errors[b], corr.binned.n_samples,
                   corr.binned.bin_empty(b) ? 1 : 0);
    }
    out.summary["intensity"] = corr.binned.intensity;
    out.summary["intensity_se"] = corr.binned.intensity_se;
    out.summary["c_corr"] = corr.c_corr.value;
    out.summary["c_corr_truncation_error"] = corr.c_corr.truncation_error;

    // Variance-route C over the lambda grid.
    if (!c.lambdas.empty()) {
      const int var_replicates = c.options.at("var_replicates").get<int>();
      const Region unit_box = Region::cube(c.dimension, 1.0);
      const CellField var_proto =
          field_prototype(c).with_seed(sub_seed(c.master_seed, "var-route"));
      std::vector<std::vector<double>> counts(
          c.lambdas.size(), std::vector<double>(var_replicates, 0.0));
      parallel_for(var_replicates, workers, [&](std::size_t r) {
        const CellField field = sample_field(var_proto, r);
        for (std::size_t li = 0; li < c.lambdas.size(); ++li) {
          const auto sample = rescaled_sample(
              field, SampleMode::infinite_volume, c.lambdas[li], {unit_box});
          counts[li][r] = sample.raw[0];
        }
      });
      const auto cvar =
          estimate_C_var(c.lambdas, counts, c.dimension, unit_box.volume());
      for (std::size_t li = 0; li < c.lambdas.size(); ++li)
        append_curve(out.curves, "cvar_lambda", c.lambdas[li],
                     cvar.normalized_variance[li], 0.0, var_replicates);
      out.summary["c_var"] = cvar.value;
    }

    // Clustering gap, when separations are requested.
    const auto separations =
        c.options.at("separations").get<std::vector<double>>();
    if (!separations.empty()) {
      const double tuple_t = c.options.at("tuple_t").get<double>();
      const CellField gap_proto =
          field_prototype(c).with_seed(sub_seed(c.master_seed, "clustering"));
      const std::vector<SpaceTimePoint> k_tuple{
          {Vec(c.dimension, 0.0), tuple_t, {}, {}, 0}};
      const auto gap = clustering_gap(k_tuple, k_tuple, separations, gap_proto,
                                      n_samples);
      for (const auto& pt : gap.points) {
        append_curve(out.curves, "gap_sep", pt.separation, pt.gap, pt.gap_se,
                     n_samples, pt.below_noise_floor ? 1 : 0);
        append_curve(out.curves, "cone_sep", pt.separation,
                     pt.cone_intersect_prob, pt.cone_intersect_se, n_samples);
      }
      if (gap.gap_fit_valid) {
        out.summary["gap_decay_rate"] = gap.gap_fit.rate;
        out.summary["gap_decay_r_squared"] = gap.gap_fit.r_squared;
      }
      if (gap.cone_fit_valid) {
        out.summary["cone_decay_rate"] = gap.cone_fit.rate;
        out.summary["cone_decay_r_squared"] = gap.cone_fit.r_squared;
      }
    }
  }
  return out;
}

json report_to_json(const GaussianityReport& rep) {
  json j;
  j["n_replicates"] = rep.n_replicates;
  j["lambda"] = rep.lambda;
  j["c_estimate"] = rep.c_estimate;
  j["max_rel_deviation"] = rep.max_rel_deviation;
  j["zero_pred_max_z"] = rep.zero_pred_max_z;
  json per_box = json::array();
  for (const auto& b : rep.per_box)
    per_box.push_back(json{{"skewness", b.skewness},
                           {"excess_kurtosis", b.excess_kurtosis},
                           {"ks_p", b.ks_p},
                           {"ad_p", b.ad_p},
                           {"variance", b.variance}});
  j["per_box"] = per_box;
  j["empirical_cov"] = rep.empirical_cov;
  j["empirical_cov_se"] = rep.empirical_cov_se;
  j["predicted_cov"] = rep.predicted_cov;
  return j;
}

ExperimentOutput run_clt(const ExperimentConfig& c, int workers) {
  if (c.boxes.empty()) throw ConfigError("clt: box family required");
  if (c.lambdas.empty()) throw ConfigError("clt: lambda required");
  ExperimentOutput out;
  out.summary["kind"] = "clt";
  const double lambda = c.lambdas.back();
  const CellField proto = field_prototype(c);

  double c_estimate = 0.0;
  const auto c_source = c.options.at("c_source").get<std::string>();
  if (c_source == "value") {
    c_estimate = c.options.at("c_value").get<double>();
  } else if (c_source == "corr") {
    if (c.mode != FieldMode::continuum)
      throw ConfigError("clt: c_source corr requires continuum mode");
    c_estimate =
        run_pair_correlation(c, sub_seed(c.master_seed, "clt-corr"), workers)
            .c_corr.value;
  } else {
    throw ConfigError("clt: c_source must be corr or value");
  }
  out.summary["c_estimate"] = c_estimate;

  std::string header = "replicate,seed,mode";
  for (std::size_t b = 0; b < c.boxes.size(); ++b)
    header += ",count_" + std::to_string(b);
  out.replicates.header = header;

  const std::optional<Region> domain =
      c.region.empty() ? std::nullopt : std::optional<Region>(c.region);
  for (const auto& mode_name :
       c.options.at("modes").get<std::vector<std::string>>()) {
    const SampleMode mode = mode_name == "finite" ? SampleMode::finite_volume
                                                  : SampleMode::infinite_volume;
    std::vector<RescaledVectorSample> samples(c.replicates);
    parallel_for(c.replicates, workers, [&](std::size_t r) {
      const CellField field =
          proto.with_seed(replicate_seed(c.master_seed, r));
      samples[r] = rescaled_sample(field, mode, lambda, c.boxes, domain);
    });
    center_samples(samples);
    for (std::size_t r = 0; r < samples.size(); ++r) {
      std::string row = std::to_string(r) + "," +
                        std::to_string(samples[r].replicate_seed) + "," +
                        mode_name;
      for (const double v : samples[r].raw) row += "," + format_double(v);
      out.replicates.rows.push_back(row);
    }
    const GaussianityReport rep = gaussianity_report(samples, c_estimate);
    out.summary[mode_name] = report_to_json(rep);
  }
  return out;
}

ExperimentOutput run_boundary(const ExperimentConfig& c, int workers) {
  if (c.region.empty()) throw ConfigError("boundary: region A required");
  if (c.lambdas.size() < 3) throw ConfigError("boundary: >= 3 lambdas");
  ExperimentOutput out;
  out.replicates.header = "replicate,seed,lambda,plus,minus";
  const CellField proto = field_prototype(c);

  BoundaryScaling scaling;
  scaling.lambdas = c.lambdas;
  for (const double lambda : c.lambdas) {
    std::vector<double> plus(c.replicates), minus(c.replicates);
    std::vector<std::uint64_t> seeds(c.replicates);
    parallel_for(c.replicates, workers, [&](std::size_t r) {
      seeds[r] = replicate_seed(c.master_seed, r);
      const CellField field = proto.with_seed(seeds[r]);
      const BoundaryDiff diff = boundary_processes(field, lambda, c.region);
      plus[r] = static_cast<double>(diff.plus_count());
      minus[r] = static_cast<double>(diff.minus_count());
    });
    for (int r = 0; r < c.replicates; ++r)
      out.replicates.rows.push_back(
          std::to_string(r) + "," + std::to_string(seeds[r]) + "," +
          format_double(lambda) + "," + format_double(plus[r]) + "," +
          format_double(minus[r]));
    scaling.mean_plus.push_back(mean_se(plus).mean);
    scaling.var_plus.push_back(sample_variance(plus));
    scaling.mean_minus.push_back(mean_se(minus).mean);
    scaling.var_minus.push_back(sample_variance(minus));
    append_curve(out.curves, "mean_plus", lambda, scaling.mean_plus.back(),
                 mean_se(plus).se, c.replicates);
    append_curve(out.curves, "var_plus", lambda, scaling.var_plus.back(), 0.0,
                 c.replicates);
    append_curve(out.curves, "mean_minus", lambda, scaling.mean_minus.back(),
                 mean_se(minus).se, c.replicates);
    append_curve(out.curves, "var_minus", lambda, scaling.var_minus.back(), 0.0,
                 c.replicates);
  }

  const auto fit_to_json = [](const std::vector<double>& lambdas,
                              const std::vector<double>& values) {
    json j;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (values[i] <= 0.0) continue;
      lx.push_back(std::log(lambdas[i]));
      ly.push_back(std::log(values[i]));
    }
    if (lx.size() >= 2) {
      const LinearFit f = linear_fit(lx, ly);
      j["slope"] = f.slope;
      j["r_squared"] = f.r_squared;
      j["n_points"] = lx.size();
    }
    return j;
  };
  out.summary["kind"] = "boundary";
  out.summary["mean_plus_fit"] = fit_to_json(c.lambdas, scaling.mean_plus);
  out.summary["var_plus_fit"] = fit_to_json(c.lambdas, scaling.var_plus);
  out.summary["mean_minus_fit"] = fit_to_json(c.lambdas, scaling.mean_minus);
  out.summary["var_minus_fit"] = fit_to_json(c.lambdas, scaling.var_minus);
  return out;
}

ExperimentOutput run_cones(const ExperimentConfig& c, int workers) {
  ExperimentOutput out;
  out.summary["kind"] = "cones";
  const auto r_grid = c.options.at("r_grid").get<std::vector<double>>();
  const double beta = c.options.at("beta").get<double>();
  const int n_samples = c.options.at("n_samples").get<int>();

  // Samples are independent; split them across workers deterministically by
  // running the library routine on disjoint index blocks and merging counts.
  const int blocks = std::max(1, std::min(workers * 4, n_samples));
  const CellField proto = field_prototype(c);
  std::vector<std::vector<std::uint64_t>> counts(
      blocks, std::vector<std::uint64_t>(r_grid.size(), 0));
  std::vector<int> block_sizes(blocks, 0);
  for (int s = 0; s < n_samples; ++s) ++block_sizes[s % blocks];
  std::vector<int> block_starts(blocks, 0);
  for (int b = 1; b < blocks; ++b)
    block_starts[b] = block_starts[b - 1] + block_sizes[b - 1];

  parallel_for(blocks, workers, [&](std::size_t b) {
    for (int s = block_starts[b]; s < block_starts[b] + block_sizes[b]; ++s) {
      const CellField field = sample_field(proto, static_cast<std::uint64_t>(s));
      SpaceTimePoint root;
      bool found = false;
      for (std::int64_t shell = 0; shell < 50 && !found; ++shell) {
        CellIndex probe(c.dimension, -shell);
        while (true) {
          std::int64_t norm = 0;
          for (const auto v : probe) norm = std::max(norm, std::abs(v));
          if (norm == shell) {
            const auto pts = cell_points(field, probe);
            if (!pts.empty() && (!found || arrival_less(pts.front(), root))) {
              root = pts.front();
              found = true;
            }
          }
          int axis = c.dimension - 1;
          while (axis >= 0 && probe[axis] == shell) probe[axis--] = -shell;
          if (axis < 0) break;
          ++probe[axis];
        }
      }
      if (!found) continue;
      const CausalCone cone =
          causal_cone_infinite(root, field, ConeDirection::both);
      double worst = 0.0;
      for (const auto& m : cone.members)
        worst = std::max(worst, distance(m.x, root.x) -
                                    beta * std::abs(m.t - root.t));
      for (std::size_t i = 0; i < r_grid.size(); ++i)
        if (worst > r_grid[i]) ++counts[b][i];
    }
  });

  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    std::uint64_t total = 0;
    for (int b = 0; b < blocks; ++b) total += counts[b][i];
    const double p = static_cast<double>(total) / n_samples;
    const double se = std::sqrt(p * (1.0 - p) / n_samples);
    append_curve(out.curves, "escape", r_grid[i], p, se, n_samples,
                 total == 0 ? 1 : 0);
    if (total > 0) {
      fx.push_back(r_grid[i]);
      fy.push_back(p);
    }
  }
  if (fx.size() >= 3) {
    const DecayFit fit = fit_exponential_decay(fx, fy);
    out.summary["decay_rate"] = fit.rate;
    out.summary["decay_r_squared"] = fit.r_squared;
    out.summary["n_fit_points"] = fit.n_used;
  }
  out.summary["beta"] = beta;
  out.summary["n_samples"] = n_samples;
  return out;
}

ExperimentOutput run_nn(const ExperimentConfig& c, int workers) {
  if (c.boxes.empty()) throw ConfigError("nn: box family required");
  if (c.lambdas.empty()) throw ConfigError("nn: lambda required");
  ExperimentOutput out;
  out.summary["kind"] = "nn";
  const double lambda = c.lambdas.back();
  const double margin = c.options.at("margin").get<double>();
  const CellField proto = field_prototype(c);

  std::string header = "replicate,seed,mode";
  for (std::size_t b = 0; b < c.boxes.size(); ++b)
    header += ",measure_" + std::to_string(b);
  out.replicates.header = header;

  const std::optional<Region> domain =
      c.region.empty() ? std::nullopt : std::optional<Region>(c.region);
  for (const auto& mode_name :
       c.options.at("modes").get<std::vector<std::string>>()) {
    const SampleMode mode = mode_name == "finite" ? SampleMode::finite_volume
                                                  : SampleMode::infinite_volume;
    std::vector<RescaledVectorSample> samples(c.replicates);
    parallel_for(c.replicates, workers, [&](std::size_t r) {
      const CellField field = proto.with_seed(replicate_seed(c.master_seed, r));
      samples[r] = nn_rescaled_sample(field, mode, lambda, c.boxes, domain, margin);
    });
    center_samples(samples);
    for (std::size_t r = 0; r < samples.size(); ++r) {
      std::string row = std::to_string(r) + "," +
                        std::to_string(samples[r].replicate_seed) + "," +
                        mode_name;
      for (const double v : samples[r].raw) row += "," + format_double(v);
      out.replicates.rows.push_back(row);
    }
    // No closed form for the covariance constant here: estimate it from the
    // per-box variances themselves and test the kernel structure across
    // boxes (off-diagonal overlap entries remain a real prediction).
    double c_est = 0.0;
    for (std::size_t b = 0; b < c.boxes.size(); ++b) {
      std::vector<double> v;
      for (const auto& s : samples) v.push_back(s.centered_scaled[b]);
      c_est += sample_variance(v) / c.boxes[b].volume();
    }
    c_est /= static_cast<double>(c.boxes.size());
    const GaussianityReport rep = gaussianity_report(samples, c_est);
    out.summary[mode_name] = report_to_json(rep);
  }

  // Stabilization-radius tail.
  const int n_probes = c.options.at("n_probes").get<int>();
  if (n_probes > 0) {
    const auto t_grid = c.options.at("stab_t_grid").get<std::vector<double>>();
    StabilizationConfig cfg = default_stabilization_config();
    const CellField stab_proto =
        proto.with_seed(sub_seed(c.master_seed, "stabilization"));
    std::vector<double> radii(n_probes);
    parallel_for(n_probes, workers, [&](std::size_t s) {
      const CellField field = sample_field(stab_proto, s);
      radii[s] = stabilization_radius_probe(field, cfg);
    });
    std::size_t censored = 0;
    for (const double r : radii)
      if (!std::isfinite(r)) ++censored;
    std::vector<double> tx, ty;
    for (const double t : t_grid) {
      std::uint64_t hits = 0;
      for (const double r : radii)
        if (r > t) ++hits;
      const double p = static_cast<double>(hits) / n_probes;
      append_curve(out.curves, "stab_tail", t, p,
                   std::sqrt(p * (1.0 - p) / n_probes), n_probes);
      if (p > 0.0) {
        tx.push_back(t);
        ty.push_back(p);
      }
    }
    out.summary["stab_n_censored"] = censored;
    if (tx.size() >= 3) {
      const DecayFit fit = fit_exponential_decay(tx, ty);
      out.summary["stab_decay_rate"] = fit.rate;
      out.summary["stab_decay_r_squared"] = fit.r_squared;
    }
  }
  return out;
}

ExperimentOutput run_oracle(const ExperimentConfig& c, int workers) {
  ExperimentOutput out;
  out.summary["kind"] = "oracle";
  if (c.dimension != 1 || c.mode != FieldMode::continuum)
    throw ConfigError("oracle: the density oracle is d=1 continuum");
  const double density = renyi_density_oracle(c.tau);
  out.summary["tau"] = c.tau;
  out.summary["density"] = density;

  if (c.options.at("mc_check").get<bool>()) {
    const double window = c.options.at("window").get<double>();
    const Region region(Vec{0.0}, Vec{window});
    const CellField proto = field_prototype(c);
    out.replicates.header = "replicate,seed,n_accepted,density";
    std::vector<double> densities(c.replicates);
    std::vector<std::uint64_t> seeds(c.replicates), accepted(c.replicates);
    parallel_for(c.replicates, workers, [&](std::size_t r) {
      seeds[r] = replicate_seed(c.master_seed, r);
      const CellField field = proto.with_seed(seeds[r]);
      accepted[r] = pack_window_infinite(field, region).accepted_count();
      densities[r] = static_cast<double>(accepted[r]) / window;
    });
    for (int r = 0; r < c.replicates; ++r)
      out.replicates.rows.push_back(std::to_string(r) + "," +
                                    std::to_string(seeds[r]) + "," +
                                    std::to_string(accepted[r]) + "," +
                                    format_double(densities[r]));
    const auto ms = mean_se(densities);
    out.summary["mc_mean"] = ms.mean;
    out.summary["mc_se"] = ms.se;
    out.summary["mc_z"] = ms.se > 0.0 ? (ms.mean - density) / ms.se : 0.0;
  }
  return out;
}

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw IoError("cannot write " + path.string());
  outf << content;
  if (!outf) throw IoError("write failed: " + path.string());
}

std::string csv_to_string(const CsvTable& table) {
  std::string s = table.header + "\n";
  for (const auto& row : table.rows) s += row + "\n";
  return s;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  const int workers = resolve_workers(config.workers);
  const std::string started = iso_utc_now();

  ExperimentOutput result;
  if (config.kind == "pack")
    result = run_pack(config, workers);
  else if (config.kind == "correlate")
    result = run_correlate(config, workers);
  else if (config.kind == "clt")
    result = run_clt(config, workers);
  else if (config.kind == "boundary")
    result = run_boundary(config, workers);
  else if (config.kind == "cones")
    result = run_cones(config, workers);
  else if (config.kind == "nn")
    result = run_nn(config, workers);
  else if (config.kind == "oracle")
    result = run_oracle(config, workers);
  else
    throw ConfigError("unknown experiment kind: " + config.kind);

  const std::filesystem::path out_dir(config.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string());

  std::vector<std::filesystem::path> written;
  try {
    json summary = result.summary;
    summary["tool"] = "rsalab";
    summary["version"] = kToolVersion;

    const auto write_output = [&](const char* name, const std::string& data) {
      const auto path = out_dir / name;
      write_text_file(path, data);
      written.push_back(path);
    };
    write_output("replicates.csv", csv_to_string(result.replicates));
    write_output("curves.csv", csv_to_string(result.curves));
    write_output("summary.json", summary.dump(2) + "\n");

    json manifest;
    manifest["tool"] = "rsalab";
    manifest["version"] = kToolVersion;
    manifest["kind"] = config.kind;
    manifest["master_seed"] = config.master_seed;
    manifest["config"] = config_to_json(config);
    json seeds = json::array();
    for (int r = 0; r < config.replicates; ++r)
      seeds.push_back(replicate_seed(config.master_seed, r));
    manifest["replicate_seeds"] = seeds;
    manifest["started_at"] = started;
    manifest["finished_at"] = iso_utc_now();
    json outputs = json::array();
    for (const auto& path : written) {
      char hex[32];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(fnv1a64_file(path)));
      outputs.push_back(json{{"file", path.filename().string()},
                             {"bytes", std::filesystem::file_size(path)},
                             {"fnv1a64", hex}});
    }
    manifest["outputs"] = outputs;
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

    RunResult run;
    run.out_dir = out_dir;
    run.manifest = manifest;
    run.summary = summary;
    return run;
  } catch (...) {
    for (const auto& path : written) std::filesystem::remove(path, ec);
    std::filesystem::remove(out_dir / "manifest.json", ec);
    throw;
  }
}

}  // namespace rsalab
