// Command-line front end: reproducible verification runs over the library
// modules with machine-readable JSON reports.
//
//   classify        group-generator file -> normal-form classification
//   torsion-table   rank analysis of the torsion operator per subalgebra
//   weyl-verify     Weyl connection residual suite on an analytic preset
//   sl-volume-demo  volume-normalized metric determinant check
//   circle-demo     circle-bundle obstruction, Lee form and holonomy
//
// Exit codes: 0 success, 1 input error, 2 ambiguous/inconclusive numerics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "weylforge/circle.hpp"
#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"
#include "weylforge/json_io.hpp"
#include "weylforge/matrix_group.hpp"
#include "weylforge/presets.hpp"
#include "weylforge/torsion.hpp"
#include "weylforge/weyl.hpp"

namespace {

using json = nlohmann::json;
using namespace weylforge;

void emit(const json& j, const std::string& output) {
  const std::string text = j.dump(2) + "\n";
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw InvalidSpec("cannot open output file: " + output);
  out << text;
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

int run_classify(const std::string& input, const std::string& output, double tol,
                 double max_denominator) {
  auto spec = io::group_spec_from_json(io::load_json_file(input));
  if (tol > 0) spec.tol = tol;
  matgroup::CommensurabilityOptions copts;
  copts.max_denominator = max_denominator;
  const auto cls = matgroup::classify_group(spec, copts);
  json j = io::classification_to_json(cls);
  j["n"] = spec.n;
  emit(j, output);
  return 0;
}

// ---------------------------------------------------------------------------
// torsion-table
// ---------------------------------------------------------------------------

int run_torsion_table(int nmax, const std::string& output) {
  if (nmax < 2 || nmax > 6) throw InvalidSpec("nmax must lie in [2, 6]");
  json rows = json::array();
  for (int n = 2; n <= nmax; ++n) {
    const std::vector<std::pair<std::string, torsion::SubalgebraBasis<double>>> algebras = {
        {"so", torsion::SubalgebraBasis<double>::so(n)},
        {"co", torsion::SubalgebraBasis<double>::co(n)},
        {"sl", torsion::SubalgebraBasis<double>::sl(n)},
        {"gl", torsion::SubalgebraBasis<double>::gl(n)},
    };
    for (const auto& [name, alg] : algebras) {
      const auto rep = torsion::del_matrix(alg);
      rows.push_back({{"algebra", name},
                      {"n", n},
                      {"domain", rep.domain_dim},
                      {"codomain", rep.codomain_dim},
                      {"rank", rep.rank},
                      {"kernel", rep.kernel_dim},
                      {"coker", rep.coker_dim}});
    }
  }
  if (!output.empty() && output.size() > 4 && output.substr(output.size() - 4) == ".csv") {
    std::ofstream out(output);
    if (!out) throw InvalidSpec("cannot open output file: " + output);
    out << "algebra,n,domain,codomain,rank,kernel,coker\n";
    for (const auto& r : rows)
      out << r["algebra"].get<std::string>() << ',' << r["n"] << ',' << r["domain"] << ','
          << r["codomain"] << ',' << r["rank"] << ',' << r["kernel"] << ',' << r["coker"]
          << '\n';
    return 0;
  }
  emit(json{{"table", rows}}, output);
  return 0;
}

// ---------------------------------------------------------------------------
// weyl-verify
// ---------------------------------------------------------------------------

// Tiny one-form grammar: "zero" | "random" | "closed-random" | sum of terms
// "<coef>*<basis>" with coef a number or a coordinate name and basis one of
// dx, dy, dz. Examples: "0.3*dx", "y*dx", "y*dx+x*dy".
weyl::OneFormField<double> parse_theta(const std::string& spec_text,
                                       const weyl::Chart<double>& chart, Rng& rng) {
  if (spec_text.empty() || spec_text == "zero") return presets::zero_oneform(chart);
  if (spec_text == "random") return presets::random_smooth_oneform(chart, rng, 0.3);
  if (spec_text == "closed-random")
    return presets::closed_random_oneform(chart, rng, 0.3).theta;

  struct Term {
    int axis = -1;        // which d-basis
    int coord_axis = -1;  // -1 for constant coefficients
    double coefficient = 1.0;
  };
  std::vector<Term> terms;
  std::string text = spec_text;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find('+', pos);
    if (next == std::string::npos) next = text.size();
    std::string token = text.substr(pos, next - pos);
    pos = next + 1;
    token.erase(remove_if(token.begin(), token.end(), ::isspace), token.end());
    if (token.empty()) throw InvalidSpec("empty term in theta spec");

    Term term;
    std::string coef;
    std::string basis;
    const std::size_t star = token.find('*');
    if (star != std::string::npos) {
      coef = token.substr(0, star);
      basis = token.substr(star + 1);
    } else if (token.size() >= 2 && token[0] == 'd') {
      basis = token;
    } else {
      throw InvalidSpec("cannot parse theta term: " + token);
    }
    if (basis == "dx") term.axis = 0;
    else if (basis == "dy") term.axis = 1;
    else if (basis == "dz") term.axis = 2;
    else throw InvalidSpec("unknown basis one-form: " + basis);
    if (term.axis >= chart.n) throw InvalidSpec("basis one-form beyond the chart dimension");

    if (coef.empty()) term.coefficient = 1.0;
    else if (coef == "x") term.coord_axis = 0;
    else if (coef == "y") term.coord_axis = 1;
    else if (coef == "z") term.coord_axis = 2;
    else {
      try {
        term.coefficient = std::stod(coef);
      } catch (...) {
        throw InvalidSpec("cannot parse theta coefficient: " + coef);
      }
    }
    if (term.coord_axis >= chart.n)
      throw InvalidSpec("coordinate coefficient beyond the chart dimension");
    terms.push_back(term);
  }
  return presets::sample_oneform(chart, [&](const VectorX<double>& x) {
    VectorX<double> v = VectorX<double>::Zero(chart.n);
    for (const auto& t : terms)
      v(t.axis) += t.coord_axis >= 0 ? x(t.coord_axis) : t.coefficient;
    return v;
  });
}

weyl::MetricField<double> build_preset_metric(const std::string& preset,
                                              const weyl::Chart<double>& chart) {
  if (preset == "flat") return presets::flat_metric(chart);
  if (preset == "polar") return presets::polar_metric(chart);
  if (preset == "conformal")
    return presets::conformal_metric(chart, presets::default_conformal_profile<double>(chart.n));
  throw InvalidSpec("unknown metric preset: " + preset);
}

weyl::Chart<double> preset_chart(const std::string& preset, int resolution) {
  if (preset == "polar")
    return weyl::Chart<double>::make(2, {{{1.0, 2.0}}, {{0.0, 1.0}}},
                                     {resolution, resolution});
  return weyl::Chart<double>::make(2, {{{0.0, 1.0}}, {{0.0, 1.0}}},
                                   {resolution, resolution});
}

int run_weyl_verify(const std::string& preset, int resolution, const std::string& theta_spec,
                    unsigned long seed, const std::string& output, const std::string& input) {
  weyl::MetricField<double> g{};
  if (preset == "file") {
    if (input.empty()) throw InvalidSpec("--preset file needs --input");
    g = io::metric_from_json(io::load_json_file(input));
  } else {
    g = build_preset_metric(preset, preset_chart(preset, resolution));
  }
  Rng rng(seed);
  const auto theta = parse_theta(theta_spec, g.chart, rng);
  const auto rep = weyl::verify_weyl_structure(g, theta);

  const double h = g.chart.max_spacing();
  const double scale = 1.0 + weyl::c1_estimate(g) + weyl::c1_estimate(theta);
  const double gate = std::max(1e-9, 50.0 * h * h * scale);
  bool pass = rep.torsion_residual <= 1e-12 && rep.compatibility_residual <= gate;
  if (rep.closed) {
    pass = pass && rep.potential_residual.value_or(0.0) <= gate &&
           rep.local_metric_residual.value_or(0.0) <= gate;
  }

  json j = io::weyl_report_to_json(rep);
  j["preset"] = preset;
  j["theta"] = theta_spec.empty() ? "zero" : theta_spec;
  j["resolution"] = resolution;
  j["seed"] = seed;
  j["chart"] = io::chart_to_json(g.chart);
  j["residual_gate"] = gate;
  j["pass"] = pass;
  emit(j, output);
  return pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// sl-volume-demo
// ---------------------------------------------------------------------------

int run_sl_volume(const std::string& preset, int resolution, std::optional<double> rho_value,
                  unsigned long seed, const std::string& output) {
  const auto chart = weyl::Chart<double>::make(2, {{{0.0, 1.0}}, {{0.0, 1.0}}},
                                               {resolution, resolution});
  weyl::MetricField<double> h{};
  double rho_default = 1.0;
  if (preset == "identity") {
    h = presets::flat_metric(chart);
  } else if (preset == "scaled") {
    h = presets::sample_metric(chart, [&](const VectorX<double>&) {
      return MatrixX<double>(4.0 * MatrixX<double>::Identity(2, 2));
    });
  } else if (preset == "random-spd") {
    Rng rng(seed);
    h = presets::random_spd_metric(chart, rng);
    rho_default = 2.0;
  } else {
    throw InvalidSpec("unknown sl-volume preset: " + preset);
  }
  const double rho = rho_value.value_or(rho_default);
  const auto density = presets::constant_density(chart, rho);
  const auto g = weyl::volume_normalized_metric(h, density);

  double worst = 0.0;
  for (long id = 0; id < chart.node_count(); ++id)
    worst = std::max(worst, std::abs(g.g[id].determinant() - rho * rho));

  json j;
  j["preset"] = preset;
  j["resolution"] = resolution;
  j["rho"] = rho;
  j["max_det_deviation"] = worst;
  j["pass"] = worst <= 1e-10;
  emit(j, output);
  return worst <= 1e-10 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// circle-demo
// ---------------------------------------------------------------------------

int run_circle_demo(double lambda, int samples, unsigned long seed, double tol,
                    const std::string& output, std::string csv_path) {
  const auto spec = circle::build_circle_structure(lambda, samples);
  const auto obstruction = circle::reduction_obstruction(spec, tol);
  const auto cover = circle::cover_metric(lambda);
  const auto descended = circle::descend_weyl(cover, samples);
  const double holonomy = circle::lee_holonomy(descended);

  Rng rng(seed);
  std::uniform_real_distribution<double> amp(0.05, 0.3);
  std::uniform_real_distribution<double> phase(0.0, circle::two_pi);
  json invariance = json::array();
  for (int trial = 0; trial < 10; ++trial) {
    VectorX<double> f(samples);
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    for (int i = 0; i < samples; ++i) {
      const double t = circle::two_pi * i / samples;
      f(i) = a1 * std::sin(t + p1) + a2 * std::sin(2 * t + p2) + a3 * std::sin(3 * t + p3);
    }
    const auto rep = circle::conformal_class_invariance(descended, f);
    invariance.push_back({{"trial", trial},
                          {"holonomy_conformal", rep.holonomy_conformal},
                          {"holonomy_deviation", rep.holonomy_deviation},
                          {"max_pointwise_change", rep.max_pointwise_change}});
  }

  json j;
  j["lambda"] = lambda;
  j["samples"] = samples;
  j["seed"] = seed;
  j["obstruction"] = obstruction.holonomy;
  j["reducible"] = obstruction.reducible;
  j["c"] = cover.c;
  j["gamma"] = descended.gamma_mean;
  j["theta"] = descended.theta_mean;
  j["gamma_constancy"] = descended.constancy;
  j["direct_formula_gap"] = descended.direct_formula_gap;
  j["holonomy"] = holonomy;
  j["holonomy_expected"] = -2.0 * std::log(lambda);
  j["similarity_residual"] = circle::deck_similarity_residual(cover, samples, 1);
  j["invariance_checks"] = std::move(invariance);
  emit(j, output);

  if (csv_path.empty() && !output.empty() && output != "-") {
    const std::size_t dot = output.find_last_of('.');
    csv_path = (dot == std::string::npos ? output : output.substr(0, dot)) + ".csv";
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw InvalidSpec("cannot open csv file: " + csv_path);
    csv << "t,theta\n";
    for (int i = 0; i < samples; ++i)
      csv << descended.t(i) << ',' << descended.theta(i) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weylforge: matrix-group classification and Weyl-connection verification"};
  app.require_subcommand(1);

  std::string input, output, csv_path;
  std::string preset = "flat";
  std::string theta_spec = "zero";
  double tol = 0.0;
  double circle_tol = defaults::tol;
  double max_denominator = 1e6;
  double lambda = 2.0;
  std::optional<double> rho;
  int nmax = 4;
  int resolution = 64;
  int samples = 256;
  unsigned long seed = 0;

  auto* classify = app.add_subcommand("classify", "classify a generator file");
  classify->add_option("--input", input, "generator JSON file")->required();
  classify->add_option("--output", output, "report path (default stdout)");
  classify->add_option("--tol", tol, "membership tolerance override")
      ->envname("WEYLFORGE_TOL");
  classify->add_option("--max-denominator", max_denominator,
                       "integer-relation search bound");

  auto* table = app.add_subcommand("torsion-table", "torsion operator rank table");
  table->add_option("--nmax", nmax, "largest dimension (2..6)")->required();
  table->add_option("--output", output, "report path; .csv selects CSV");

  auto* verify = app.add_subcommand("weyl-verify", "Weyl connection residual suite");
  verify->add_option("--preset", preset, "flat | polar | conformal | file");
  verify->add_option("--resolution", resolution, "nodes per axis");
  verify->add_option("--theta", theta_spec,
                     "zero | random | closed-random | e.g. \"0.3*dx\", \"y*dx\"");
  verify->add_option("--seed", seed, "seed for random theta");
  verify->add_option("--input", input, "metric field file for --preset file");
  verify->add_option("--output", output, "report path (default stdout)");

  auto* volume = app.add_subcommand("sl-volume-demo", "volume-normalized metric check");
  volume->add_option("--preset", preset, "identity | scaled | random-spd");
  volume->add_option("--resolution", resolution, "nodes per axis");
  volume->add_option("--rho", rho, "constant volume density");
  volume->add_option("--seed", seed, "seed for the random preset");
  volume->add_option("--output", output, "report path (default stdout)");

  auto* circle_cmd = app.add_subcommand("circle-demo", "circle-bundle Weyl structure");
  circle_cmd->add_option("--lambda", lambda, "positive scale generator");
  circle_cmd->add_option("--samples", samples, "sample count on the circle");
  circle_cmd->add_option("--seed", seed, "seed for the conformal sweep");
  circle_cmd->add_option("--tol", circle_tol, "reducibility tolerance")
      ->envname("WEYLFORGE_TOL");
  circle_cmd->add_option("--output", output, "report path (default stdout)");
  circle_cmd->add_option("--csv", csv_path, "CSV path for the theta samples");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(classify))
      return run_classify(input, output, tol, max_denominator);
    if (app.got_subcommand(table)) return run_torsion_table(nmax, output);
    if (app.got_subcommand(verify))
      return run_weyl_verify(preset, resolution, theta_spec, seed, output, input);
    if (app.got_subcommand(volume))
      return run_sl_volume(preset, resolution, rho, seed, output);
    if (app.got_subcommand(circle_cmd))
      return run_circle_demo(lambda, samples, seed, circle_tol, output, csv_path);
  } catch (const AmbiguousCommensurability& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return 2;
  } catch (const RankTolerance& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
