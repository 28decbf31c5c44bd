// Python bindings, imported as saqd._core.

#include <fstream>
#include <map>

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "saqd/experiment.hpp"

namespace py = pybind11;
using namespace saqd;

namespace {

py::dict point_dict(const DataPoint& dp) {
  py::dict out;
  out["manifold"] = manifold_name(dp.point.manifold);
  out["d"] = dp.point.d;
  out["L"] = dp.point.L;
  out["p"] = dp.point.p;
  out["t"] = dp.point.t;
  out["validator"] = decoder_name(dp.point.decoders.validator);
  out["corrector"] = decoder_name(dp.point.decoders.corrector);
  out["trials"] = dp.trials;
  out["failures"] = dp.failures;
  out["pfail"] = dp.p_fail;
  out["p_tilde"] = dp.p_tilde;
  out["ci_lo"] = dp.ci_lo;
  out["ci_hi"] = dp.ci_hi;
  out["seed"] = dp.seed;
  return out;
}

py::list point_list(const std::vector<DataPoint>& rows) {
  py::list out;
  for (const auto& r : rows) out.append(point_dict(r));
  return out;
}

DataPoint point_from(const py::dict& row) {
  DataPoint dp;
  dp.point.L = row["L"].cast<int>();
  dp.point.p = row["p"].cast<double>();
  dp.trials = row["trials"].cast<long long>();
  dp.failures = row["failures"].cast<long long>();
  finish_point(dp);
  if (row.contains("ci_lo")) dp.ci_lo = row["ci_lo"].cast<double>();
  if (row.contains("ci_hi")) dp.ci_hi = row["ci_hi"].cast<double>();
  return dp;
}

DecoderConfig decoders_from(const std::string& val, const std::string& corr) {
  return {parse_decoder(val), parse_decoder(corr)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Subsystem abelian quantum double codes over Z_d";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<LatticeError>(m, "LatticeError", PyExc_ValueError);
  py::register_exception<DecoderError>(m, "DecoderError");
  py::register_exception<NoCrossing>(m, "NoCrossing");

  py::enum_<Manifold>(m, "Manifold")
      .value("Torus3", Manifold::Torus3)
      .value("T2xI", Manifold::T2xI)
      .value("T2xIPrime", Manifold::T2xIPrime)
      .value("Cube", Manifold::Cube);
  m.def("parse_manifold", &parse_manifold);
  m.def("manifold_name", &manifold_name);

  py::class_<PauliOp>(m, "PauliOp")
      .def_static("from_dense", &PauliOp::from_dense, py::arg("d"), py::arg("x"),
                  py::arg("z"))
      .def_property_readonly("n", &PauliOp::n)
      .def_property_readonly("d", &PauliOp::d)
      .def_property_readonly("weight", &PauliOp::weight)
      .def("dense_x", &PauliOp::dense_x)
      .def("dense_z", &PauliOp::dense_z)
      .def("__mul__", &multiply)
      .def("__eq__", &PauliOp::operator==)
      .def("__repr__", &PauliOp::to_string);
  m.def("symplectic_product", &symplectic_product);

  py::class_<SubsystemCode>(m, "SubsystemCode")
      .def_property_readonly("n", &SubsystemCode::n)
      .def_readonly("d", &SubsystemCode::d)
      .def_property_readonly("k", [](const SubsystemCode& c) { return c.params.k; })
      .def_property_readonly("s", [](const SubsystemCode& c) { return c.params.s; })
      .def_property_readonly("r", [](const SubsystemCode& c) { return c.params.r; })
      .def_property_readonly("gauge", [](const SubsystemCode& c) {
        std::vector<PauliOp> out;
        for (const auto& g : c.gauge) out.push_back(g.op);
        return out;
      })
      .def_property_readonly("stabilizers", [](const SubsystemCode& c) {
        std::vector<PauliOp> out;
        for (const auto& s : c.stabilizers) out.push_back(s.op);
        return out;
      })
      .def_property_readonly("bare_logicals", [](const SubsystemCode& c) {
        std::vector<std::pair<PauliOp, PauliOp>> out;
        for (const auto& l : c.bare_logicals) out.emplace_back(l.x, l.z);
        return out;
      })
      .def_property_readonly("dressed_logicals", [](const SubsystemCode& c) {
        std::vector<std::pair<PauliOp, PauliOp>> out;
        for (const auto& l : c.dressed_logicals) out.emplace_back(l.x, l.z);
        return out;
      })
      .def("dump", &code_dump);

  m.def("build_code", &build_code, py::arg("manifold"), py::arg("L"), py::arg("d"));
  m.def("verify_parameters", [](const SubsystemCode& c) {
    const ParameterReport r = verify_parameters(c);
    py::dict out;
    out["n"] = r.n;
    out["k"] = r.k;
    out["expected_n"] = r.expected_n;
    out["expected_k"] = r.expected_k;
    out["s"] = r.s;
    out["r"] = r.r;
    out["bare_weight"] = r.bare_weight;
    out["dressed_weight"] = r.dressed_weight;
    out["ok"] = r.ok();
    return out;
  });
  m.def("brute_force_distance", [](const SubsystemCode& c, int cap, int which) {
    const DistanceResult r = brute_force_distance(c, cap, which);
    return std::make_pair(r.found, r.weight);
  }, py::arg("code"), py::arg("cap"), py::arg("which") = -1,
     py::call_guard<py::gil_scoped_release>());

  py::class_<CheckMatrix>(m, "CheckMatrix")
      .def_readonly("m", &CheckMatrix::m)
      .def_readonly("n", &CheckMatrix::n)
      .def_readonly("d", &CheckMatrix::d)
      .def("apply", &CheckMatrix::apply);
  m.def("validation_checks", &build_validation_checks);
  m.def("correction_checks", &build_correction_checks);
  m.def("cluster_decode", [](const CheckMatrix& H, const std::vector<int>& sigma) {
    return cluster_decode(SyndromeGraph(H), sigma);
  });
  m.def("matching_decode", [](const CheckMatrix& H, const std::vector<int>& sigma) {
    return mwpm_decode(SyndromeGraph(H), sigma);
  });

  m.def("mix64", &mix64);
  m.def("run_trial", [](const SubsystemCode& c, double p, int t,
                        const std::string& val, const std::string& corr,
                        std::uint64_t seed, std::uint64_t index) {
    Rng rng = trial_rng(seed, index);
    return run_trial(c, {p, t}, decoders_from(val, corr), rng);
  }, py::arg("code"), py::arg("p"), py::arg("t"), py::arg("validator") = "clustering",
     py::arg("corrector") = "clustering", py::arg("seed") = 1, py::arg("index") = 0,
     py::call_guard<py::gil_scoped_release>());

  m.def("estimate_pfail", [](const std::string& manifold, int d, int L, double p,
                             int t, long long trials, std::uint64_t seed,
                             const std::string& val, const std::string& corr) {
    GridPoint pt{parse_manifold(manifold), d, L, p, t, decoders_from(val, corr)};
    DataPoint dp;
    {
      py::gil_scoped_release release;
      dp = estimate_pfail(pt, trials, seed);
    }
    return point_dict(dp);
  }, py::arg("manifold"), py::arg("d"), py::arg("L"), py::arg("p"), py::arg("t"),
     py::arg("trials"), py::arg("seed"), py::arg("validator") = "clustering",
     py::arg("corrector") = "clustering");

  m.def("agresti_coull", [](long long k, long long n, double z) {
    const Interval i = agresti_coull(k, n, z);
    return py::make_tuple(i.centre, i.lo, i.hi);
  }, py::arg("failures"), py::arg("trials"), py::arg("z") = 1.96);

  m.def("crossing_threshold", [](const py::list& rows) {
    std::map<int, std::vector<DataPoint>> curves;
    for (const auto& r : rows) {
      const DataPoint dp = point_from(r.cast<py::dict>());
      curves[dp.point.L].push_back(dp);
    }
    const ThresholdEstimate e = crossing_threshold(curves);
    py::dict out;
    out["p_th"] = e.p_th;
    out["uncertainty"] = e.uncertainty;
    out["method"] = e.method;
    out["L_small"] = e.L_small;
    out["L_large"] = e.L_large;
    return out;
  });
  m.def("rescale_threshold", &rescale_threshold);
  m.def("unscale_threshold", &unscale_threshold);

  m.def("csv_header", &csv_header);
  m.def("read_csv", [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return point_list(read_csv(in));
  });
  m.def("load_config", [](const std::string& path) {
    const RunConfig c = load_run_config(path);
    py::dict out;
    out["manifold"] = manifold_name(c.manifold);
    out["d"] = c.d;
    out["L"] = c.L;
    out["p"] = c.p;
    out["t"] = c.t;
    out["trials"] = c.trials;
    out["validator"] = decoder_name(c.decoders.validator);
    out["corrector"] = decoder_name(c.decoders.corrector);
    out["seed"] = c.seed;
    out["out"] = c.out;
    return out;
  });
  m.def("run", [](const std::string& manifold, const std::vector<int>& d,
                  const std::vector<int>& L, const std::vector<double>& p,
                  const std::vector<int>& t, long long trials,
                  const std::string& val, const std::string& corr,
                  std::uint64_t seed, const std::string& out) {
    RunConfig cfg;
    cfg.manifold = parse_manifold(manifold);
    cfg.d = d;
    cfg.L = L;
    cfg.p = p;
    cfg.t = t;
    cfg.trials = trials;
    cfg.decoders = decoders_from(val, corr);
    cfg.seed = seed;
    cfg.out = out;
    cfg.validate();
    std::vector<DataPoint> rows;
    {
      py::gil_scoped_release release;
      rows = run_sweep(cfg);
    }
    return point_list(rows);
  }, py::arg("manifold") = "cube", py::arg("d") = std::vector<int>{2},
     py::arg("L") = std::vector<int>{4}, py::arg("p") = std::vector<double>{0.01},
     py::arg("t") = std::vector<int>{4}, py::arg("trials") = 1000,
     py::arg("validator") = "clustering", py::arg("corrector") = "clustering",
     py::arg("seed") = 1, py::arg("out") = "results.csv");
}
