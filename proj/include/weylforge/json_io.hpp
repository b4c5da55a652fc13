#pragma once

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "weylforge/chart.hpp"
#include "weylforge/errors.hpp"
#include "weylforge/matrix_group.hpp"
#include "weylforge/weyl.hpp"

// JSON schemas for the file interfaces. Matrices travel as flat row-major
// arrays; grid fields as a chart header plus a flat row-major (node-major)
// value array.

namespace weylforge::io {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open input file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("malformed JSON: ") + e.what());
  }
  return j;
}

inline json matrix_to_json(const MatrixX<double>& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

inline MatrixX<double> matrix_from_json(const json& a, int n) {
  if (!a.is_array() || static_cast<int>(a.size()) != n * n)
    throw InvalidSpec("matrix entry count does not match the declared dimension");
  MatrixX<double> m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const auto& v = a[static_cast<std::size_t>(r) * n + c];
      if (!v.is_number()) throw InvalidSpec("matrix entries must be numbers");
      m(r, c) = v.get<double>();
    }
  return m;
}

// Generator file: {"n": int, "generators": [[row-major reals], ...], "tol": real?}
inline matgroup::MatrixGroupSpec<double> group_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("generators"))
    throw InvalidSpec("generator file needs fields 'n' and 'generators'");
  if (!j["n"].is_number_integer()) throw InvalidSpec("'n' must be an integer");
  matgroup::MatrixGroupSpec<double> spec;
  spec.n = j["n"].get<int>();
  if (spec.n < 1) throw InvalidSpec("'n' must be at least 1");
  if (!j["generators"].is_array() || j["generators"].empty())
    throw InvalidSpec("'generators' must be a nonempty array");
  for (const auto& g : j["generators"]) spec.generators.push_back(matrix_from_json(g, spec.n));
  if (j.contains("tol")) {
    if (!j["tol"].is_number()) throw InvalidSpec("'tol' must be a number");
    spec.tol = j["tol"].get<double>();
  }
  return spec;
}

inline json group_spec_to_json(const matgroup::MatrixGroupSpec<double>& spec) {
  json j;
  j["n"] = spec.n;
  j["generators"] = json::array();
  for (const auto& g : spec.generators) j["generators"].push_back(matrix_to_json(g));
  j["tol"] = spec.tol;
  return j;
}

inline json hclass_to_json(const matgroup::HClass<double>& h) {
  json j;
  switch (h.positive_part) {
    case matgroup::PositivePart::trivial:
      j["positive_part"] = {{"kind", "trivial"}};
      break;
    case matgroup::PositivePart::cyclic:
      j["positive_part"] = {{"kind", "cyclic"}, {"lambda", h.lambda}};
      break;
    case matgroup::PositivePart::continuum:
      j["positive_part"] = {{"kind", "continuum"}};
      break;
  }
  switch (h.negative_part) {
    case matgroup::NegativePart::none:
      j["negative_part"] = {{"kind", "none"}};
      break;
    case matgroup::NegativePart::minus_one:
      j["negative_part"] = {{"kind", "minus_one"}};
      break;
    case matgroup::NegativePart::negative_generator:
      j["negative_part"] = {{"kind", "negative_generator"}, {"mu", h.mu}};
      break;
  }
  return j;
}

inline json classification_to_json(const matgroup::GroupClassification<double>& cls) {
  json j;
  j["linear_part"] = cls.linear_part == matgroup::LinearPart::SO ? "SO" : "SL";
  j["h"] = hclass_to_json(cls.h);
  j["witnesses"] = json::array();
  for (const auto& w : cls.splitting_witnesses) j["witnesses"].push_back(matrix_to_json(w));
  return j;
}

// ---------------------------------------------------------------------------
// Grid fields
// ---------------------------------------------------------------------------

inline json chart_to_json(const weyl::Chart<double>& c) {
  json j;
  j["n"] = c.n;
  j["extents"] = json::array();
  j["resolution"] = json::array();
  for (int a = 0; a < c.n; ++a) {
    j["extents"].push_back({c.extents[a][0], c.extents[a][1]});
    j["resolution"].push_back(c.resolution[a]);
  }
  return j;
}

inline weyl::Chart<double> chart_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("extents") || !j.contains("resolution"))
    throw InvalidSpec("chart needs fields 'n', 'extents', 'resolution'");
  const int n = j["n"].get<int>();
  std::vector<std::array<double, 2>> ranges;
  std::vector<int> res;
  for (const auto& e : j["extents"]) {
    if (!e.is_array() || e.size() != 2) throw InvalidSpec("chart extent must be [lo, hi]");
    ranges.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  for (const auto& r : j["resolution"]) res.push_back(r.get<int>());
  return weyl::Chart<double>::make(n, ranges, res);
}

// Field file: {"chart": {...}, "kind": "...", "values": [flat row-major]}.
// Per-node payload: n^2 entries for a metric, n for a one-form, 1 otherwise.
inline json metric_to_json(const weyl::MetricField<double>& f) {
  json j;
  j["chart"] = chart_to_json(f.chart);
  j["kind"] = "metric";
  json vals = json::array();
  for (const auto& m : f.g)
    for (int r = 0; r < f.chart.n; ++r)
      for (int c = 0; c < f.chart.n; ++c) vals.push_back(m(r, c));
  j["values"] = std::move(vals);
  return j;
}

inline weyl::MetricField<double> metric_from_json(const json& j) {
  if (j.value("kind", "") != std::string("metric")) throw InvalidSpec("expected kind 'metric'");
  auto chart = chart_from_json(j.at("chart"));
  const auto& vals = j.at("values");
  const long count = chart.node_count();
  if (static_cast<long>(vals.size()) != count * chart.n * chart.n)
    throw InvalidSpec("metric value count mismatch");
  weyl::MetricField<double> out{chart, {}};
  out.g.reserve(count);
  std::size_t at = 0;
  for (long id = 0; id < count; ++id) {
    MatrixX<double> m(chart.n, chart.n);
    for (int r = 0; r < chart.n; ++r)
      for (int c = 0; c < chart.n; ++c) m(r, c) = vals[at++].get<double>();
    out.g.push_back(std::move(m));
  }
  return out;
}

inline json oneform_to_json(const weyl::OneFormField<double>& f) {
  json j;
  j["chart"] = chart_to_json(f.chart);
  j["kind"] = "oneform";
  json vals = json::array();
  for (const auto& v : f.theta)
    for (int a = 0; a < f.chart.n; ++a) vals.push_back(v(a));
  j["values"] = std::move(vals);
  return j;
}

inline weyl::OneFormField<double> oneform_from_json(const json& j) {
  if (j.value("kind", "") != std::string("oneform")) throw InvalidSpec("expected kind 'oneform'");
  auto chart = chart_from_json(j.at("chart"));
  const auto& vals = j.at("values");
  const long count = chart.node_count();
  if (static_cast<long>(vals.size()) != count * chart.n)
    throw InvalidSpec("one-form value count mismatch");
  weyl::OneFormField<double> out{chart, {}};
  out.theta.reserve(count);
  std::size_t at = 0;
  for (long id = 0; id < count; ++id) {
    VectorX<double> v(chart.n);
    for (int a = 0; a < chart.n; ++a) v(a) = vals[at++].get<double>();
    out.theta.push_back(std::move(v));
  }
  return out;
}

inline json scalar_to_json(const weyl::ScalarField<double>& f, const std::string& kind = "scalar") {
  json j;
  j["chart"] = chart_to_json(f.chart);
  j["kind"] = kind;
  j["values"] = f.values;
  return j;
}

inline weyl::ScalarField<double> scalar_from_json(const json& j) {
  const std::string kind = j.value("kind", "");
  if (kind != "scalar" && kind != "density") throw InvalidSpec("expected a scalar-valued kind");
  auto chart = chart_from_json(j.at("chart"));
  weyl::ScalarField<double> out{chart, j.at("values").get<std::vector<double>>()};
  if (static_cast<long>(out.values.size()) != chart.node_count())
    throw InvalidSpec("scalar value count mismatch");
  return out;
}

inline json weyl_report_to_json(const weyl::WeylReport<double>& rep) {
  json j;
  j["torsion_residual"] = rep.torsion_residual;
  j["compatibility_residual"] = rep.compatibility_residual;
  j["dtheta_residual"] = rep.dtheta_residual;
  j["closed"] = rep.closed;
  j["closedness_tol"] = rep.closedness_tol;
  j["potential_residual"] =
      rep.potential_residual ? json(*rep.potential_residual) : json(nullptr);
  j["local_metric_residual"] =
      rep.local_metric_residual ? json(*rep.local_metric_residual) : json(nullptr);
  return j;
}

}  // namespace weylforge::io
