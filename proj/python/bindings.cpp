#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ttclab/config.hpp"
#include "ttclab/harness.hpp"
#include "ttclab/oracles.hpp"
#include "ttclab/stats.hpp"

namespace py = pybind11;

namespace {

using namespace ttclab;

Mat stack_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return Mat(0, 0);
  Mat out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i];
  return out;
}

py::dict report_dict(const DriftReport& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["nfe"] = r.nfe;
  d["jepa_std"] = r.jepa_std;
  d["jepa_diff"] = r.jepa_diff;
  d["boundary"] = r.boundary;
  d["hist_l1"] = r.hist_l1;
  d["hist_corr"] = r.hist_corr;
  d["dynamic"] = r.dynamic;
  d["density_mean"] = r.density_mean;
  d["density_final"] = r.density_final;
  d["d_trace"] = r.d_trace;
  d["density_trace"] = r.density_trace;
  return d;
}

py::dict summary_dict(const Summary& s) {
  py::dict d;
  d["n"] = s.n;
  d["mean"] = s.mean;
  d["stddev"] = s.stddev;
  d["stderr"] = s.stderr_mean;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ttclab, m) {
  m.doc() = "Chunked diffusion rollout laboratory: drift, correction, and test-time studies";

  py::class_<Scenario>(m, "Scenario")
      .def_static("from_text", &parse_scenario, py::arg("text"),
                  "Parse a scenario from its INI-style config text")
      .def_static("from_preset", &preset_scenario, py::arg("name"))
      .def("to_text", &serialize_scenario, "Canonical config text (round-trips exactly)")
      .def("validate", &Scenario::validate)
      .def_property_readonly("name", [](const Scenario& s) { return s.name; })
      .def_property_readonly("hash", &scenario_hash_hex)
      .def_property_readonly("n_chunks", [](const Scenario& s) { return s.n_chunks; })
      .def_property_readonly("n_seeds", [](const Scenario& s) { return s.n_seeds; })
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario '" + s.name + "' hash " + scenario_hash_hex(s) + ">";
      });

  m.def("preset_names", &preset_names);

  m.def(
      "rollout",
      [](const Scenario& s, std::uint64_t seed) {
        const RolloutRecord rec = scenario_rollout(s, seed);
        py::dict d;
        d["seed"] = rec.seed;
        d["frame_dim"] = rec.frame_dim;
        d["frames_per_chunk"] = rec.frames_per_chunk;
        d["frames"] = stack_rows(rec.frames);
        d["chunks"] = stack_rows(rec.chunks);
        d["boundaries"] = rec.boundaries;
        d["nfe"] = rec.total_nfe();
        return d;
      },
      py::arg("scenario"), py::arg("seed"),
      "One full rollout under the scenario's switches; frames/chunks stacked row-wise");

  m.def(
      "drift_report",
      [](const Scenario& s, std::uint64_t seed) {
        return report_dict(compute_drift_report(scenario_rollout(s, seed), s.metrics));
      },
      py::arg("scenario"), py::arg("seed"), "Rollout + the full drift metric record");

  m.def(
      "run",
      [](const Scenario& s, std::uint64_t base_seed) {
        const RunManifest man = run_scenario(s, base_seed);
        py::dict d;
        d["scenario_name"] = man.scenario_name;
        d["scenario_hash"] = man.scenario_hash;
        d["base_seed"] = man.base_seed;
        d["n_chunks"] = man.n_chunks;
        d["seeds"] = man.seeds;
        d["wall_time_sec"] = man.wall_time_sec;
        py::list rows;
        for (const DriftReport& r : man.rows) rows.append(report_dict(r));
        d["rows"] = rows;
        py::dict aggs;
        for (const auto& [name, summary] : man.aggregates) {
          aggs[py::str(name)] = summary_dict(summary);
        }
        d["aggregates"] = aggs;
        return d;
      },
      py::arg("scenario"), py::arg("base_seed"),
      "Full paired-seed study: per-seed metric rows plus per-metric aggregates");

  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const WilcoxonResult r = wilcoxon_signed_rank(a, b);
        py::dict d;
        d["statistic"] = r.statistic;
        d["p_value"] = r.p_value;
        d["n_effective"] = r.n_effective;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("a"), py::arg("b"),
      "Paired two-sided Wilcoxon signed-rank test (zero differences dropped)");

  m.def("oracle_suite", []() {
    py::list out;
    for (const OracleResult& r : run_oracle_suite()) {
      py::dict d;
      d["name"] = r.name;
      d["pass"] = r.pass;
      d["value"] = r.value;
      d["bound"] = r.bound;
      d["detail"] = r.detail;
      out.append(d);
    }
    return out;
  });
}
