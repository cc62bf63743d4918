#include "coiso/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "coiso/io.hpp"

namespace coiso {

namespace {

struct Options {
  std::string path;
  std::string model;
  std::string loop;
  std::string cls;
  std::string out;
  std::string format = "json";
  std::string plot_data;
  std::string experiment;
  std::uint64_t seed = 1;
  int trials = 0;
  int n = 0;
  int k = 0;
  double delta = 0.1;
  double max_length = 0.0;
  double scale = 1e-3;
  std::vector<double> C_values;
  std::vector<double> eps_values;
  double r = 0.0;
  double R = 0.0;
  Tolerances tol;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateEndpoint:
    case ErrorKind::IrregularCrossing:
    case ErrorKind::DegenerateForm:
    case ErrorKind::PairingFailure:
    case ErrorKind::RefinementExhausted:
    case ErrorKind::ProjectionRankLoss:
      return kExitDegenerate;
    case ErrorKind::NoWitnessFound:
      return kExitCheckFailed;
    default:
      return kExitInput;
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("COISO_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadInput, "COISO_SEED is not an unsigned integer");
    }
  }
  return 1;
}

CoisotropicModel load_model(const Options& o) {
  if (o.model.empty()) throw Error(ErrorKind::BadInput, "--model is required");
  return CoisotropicModel::from_config(model_config_from_json(read_json_file(o.model)));
}

Json external_constants(const CoisotropicModel& model) {
  const auto& cfg = model.config();
  return {{"displacement_energy",
           {{"value", model.displacement_energy()},
            {"external", true},
            {"source", cfg.displacement_energy ? "configured" : "model default"}}},
          {"neighborhood_energy",
           {{"value", model.neighborhood_energy()},
            {"external", true},
            {"source", cfg.neighborhood_energy ? "configured" : "model default"}}}};
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
  }
}

int cmd_index(const Options& o, std::ostream& out) {
  const SymplecticPath path = path_from_json(read_json_file(o.path), o.tol.sympl);
  const IndexResult r = index_report(path, o.tol);
  if (o.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "mean_index,cz,degenerate_endpoint\n"
       << r.mean_index << ',' << (r.cz ? std::to_string(*r.cz) : "") << ',' << (r.degenerate_endpoint ? 1 : 0)
       << '\n';
    emit(o, os.str(), out);
  } else {
    emit(o, to_json(r).dump(2) + "\n", out);
  }
  return r.degenerate_endpoint ? kExitDegenerate : kExitOk;
}

int cmd_maslov(const Options& o, std::ostream& out) {
  std::optional<CoisotropicModel> model;
  ClassVector cls;
  std::optional<FramedLeafLoop> loop;
  if (!o.loop.empty()) {
    LeafLoopSpec spec = leaf_loop_from_json(read_json_file(o.loop));
    model = CoisotropicModel::from_config(spec.model);
    cls = spec.homotopy_class;
    loop = std::move(spec.loop);
  } else {
    model = load_model(o);
    if (o.cls.empty()) throw Error(ErrorKind::BadInput, "--class is required");
    cls = class_from_string(o.cls);
  }
  const ClassVector normal = model->normalize_class(cls);
  const double mu = loop ? maslov_index(*loop, *model, o.tol) : maslov_index(*model, normal, o.tol);
  const Json j = {{"model", model->name()},
                  {"class", normal},
                  {"mu", mu},
                  {"area", model->area(normal)},
                  {"length", model->length(normal)}};
  if (o.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "class,mu,area,length\n"
       << class_to_string(normal) << ',' << mu << ',' << model->area(normal) << ',' << model->length(normal) << '\n';
    emit(o, os.str(), out);
  } else {
    emit(o, j.dump(2) + "\n", out);
  }
  return kExitOk;
}

struct ProfileParams {
  std::vector<double> C, eps;
  double r, R;
};

ProfileParams profile_params(const Options& o, const CoisotropicModel& model) {
  ProfileParams p;
  p.R = o.R > 0.0 ? o.R : model.chart_radius();
  p.r = o.r > 0.0 ? o.r : 0.8 * p.R;
  p.C = o.C_values.empty() ? std::vector<double>{model.neighborhood_energy() + 1.0} : o.C_values;
  p.eps = o.eps_values.empty() ? std::vector<double>{p.r / 20.0} : o.eps_values;
  return p;
}

int cmd_catalog(const Options& o, std::ostream& out) {
  const CoisotropicModel model = load_model(o);
  const ProfileParams p = profile_params(o, model);
  if (p.C.size() != 1 || p.eps.size() != 1) throw Error(ErrorKind::BadInput, "catalog takes one --C and one --eps");
  const auto h = TestHamiltonianProfile::build(p.C[0], p.eps[0], p.r, p.R);
  const auto records = orbit_catalog(h, model);
  if (!o.plot_data.empty()) write_text_file(o.plot_data, plot_data_csv(records));
  if (o.format == "csv") {
    emit(o, orbit_records_csv(records), out);
  } else {
    Json list = Json::array();
    for (const auto& r : records) list.push_back(to_json(r));
    emit(o, Json{{"model", model.name()}, {"profile", to_json(h)}, {"orbits", list}}.dump(2) + "\n", out);
  }
  return kExitOk;
}

std::vector<ClassVector> shortest_classes(const CoisotropicModel& model, double max_length) {
  const auto geodesics = closed_geodesics(model, max_length);
  std::vector<ClassVector> out;
  if (geodesics.empty()) return out;
  const double shortest = geodesics.front().length;
  for (const auto& g : geodesics) {
    if (g.length <= shortest * (1.0 + 1e-9)) out.push_back(g.homotopy_class);
  }
  return out;
}

struct ExperimentOutcome {
  Json parameters;
  Json external = Json::object();
  Json results;
  bool passed = false;
  std::vector<OrbitRecord> plot_records;
};

ExperimentOutcome run_lemma33(const Options& o) {
  ExperimentOutcome e;
  const int trials = o.trials > 0 ? o.trials : 500;
  std::vector<std::pair<int, int>> dims;
  if (o.n > 0) {
    if (o.k > 0) {
      dims.push_back({o.n, o.k});
    } else {
      for (int k = 1; k <= o.n; ++k) dims.push_back({o.n, k});
    }
  } else {
    for (int n = 1; n <= 4; ++n) {
      for (int k = 1; k <= n; ++k) dims.push_back({n, k});
    }
  }
  e.parameters = {{"trials", trials}, {"perturb_scale", o.scale}, {"dims", dims}};
  e.results = Json::array();
  e.passed = true;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto [n, k] = dims[i];
    const auto r = lemma33_fuzz(n, k, trials, o.scale, o.seed + 1000 * i);
    e.results.push_back(to_json(r));
    e.passed = e.passed && r.violations == 0;
  }
  return e;
}

ExperimentOutcome run_prop31(const Options& o) {
  ExperimentOutcome e;
  const CoisotropicModel model = load_model(o);
  const double max_length = o.max_length > 0.0 ? o.max_length : 10.0;
  e.parameters = {{"model", model_config_to_json(model.config())}, {"max_length", max_length}};
  e.results = Json::array();
  e.passed = true;
  for (const auto& g : closed_geodesics(model, max_length)) {
    const auto r = prop31_check(model, g.homotopy_class);
    e.results.push_back(to_json(r));
    e.passed = e.passed && r.diff <= 1e-6;
  }
  return e;
}

ExperimentOutcome run_prop32(const Options& o) {
  ExperimentOutcome e;
  const CoisotropicModel model = load_model(o);
  const int trials = o.trials > 0 ? o.trials : 100;
  std::vector<ClassVector> classes;
  if (!o.cls.empty()) {
    classes.push_back(class_from_string(o.cls));
  } else {
    classes = shortest_classes(model, o.max_length > 0.0 ? o.max_length : 100.0);
  }
  Json class_list = Json::array();
  for (const auto& c : classes) class_list.push_back(c);
  e.parameters = {{"model", model_config_to_json(model.config())},
                  {"trials", trials},
                  {"perturb_scale", o.scale},
                  {"classes", class_list}};
  e.results = Json::array();
  e.passed = !classes.empty();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto r = prop32_window_check(model, classes[i], trials, o.seed + 1000 * i, o.scale);
    e.results.push_back(to_json(r));
    e.passed = e.passed && r.passed;
  }
  return e;
}

ExperimentOutcome run_theorem(const Options& o) {
  ExperimentOutcome e;
  const CoisotropicModel model = load_model(o);
  const double max_length = o.max_length > 0.0 ? o.max_length : 10.0;
  e.parameters = {{"model", model_config_to_json(model.config())}, {"delta", o.delta}, {"max_length", max_length}};
  e.external = external_constants(model);
  const auto r = theorem_bounds_check(model, o.delta, max_length, false);
  e.results = to_json(r);
  e.passed = r.passed;
  return e;
}

ExperimentOutcome run_lemma35(const Options& o) {
  ExperimentOutcome e;
  const CoisotropicModel model = load_model(o);
  ProfileParams p = profile_params(o, model);
  if (o.C_values.empty()) p.C = {model.neighborhood_energy() + 1.0, model.neighborhood_energy() + 2.3};
  if (o.eps_values.empty()) p.eps = {p.r / 20.0, p.r / 10.0};
  e.parameters = {{"model", model_config_to_json(model.config())}, {"C", p.C}, {"eps", p.eps}, {"r", p.r}, {"R", p.R}};
  e.external = external_constants(model);
  const auto r = lemma35_band_check(model, p.C, p.eps, p.r, p.R);
  e.results = to_json(r);
  e.passed = r.passed;
  for (const auto& c : r.cases) e.plot_records.insert(e.plot_records.end(), c.inner_orbits.begin(), c.inner_orbits.end());
  return e;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  static const std::map<std::string, std::function<ExperimentOutcome(const Options&)>> runners = {
      {"lemma33", run_lemma33}, {"prop31", run_prop31}, {"prop32", run_prop32},
      {"lemma35", run_lemma35}, {"theorem", run_theorem}};
  const auto it = runners.find(o.experiment);
  if (it == runners.end()) throw Error(ErrorKind::BadInput, "unknown experiment '" + o.experiment + "'");
  const ExperimentOutcome e = it->second(o);
  if (!o.plot_data.empty()) write_text_file(o.plot_data, plot_data_csv(e.plot_records));
  const Json report = make_report({o.experiment, o.seed, utc_timestamp()}, e.parameters, e.external, e.results, e.passed);
  emit(o, report.dump(2) + "\n", out);
  return e.passed ? kExitOk : kExitCheckFailed;
}

void add_tolerances(CLI::App* cmd, Tolerances& tol) {
  cmd->add_option("--tol-sympl", tol.sympl, "symplectic defect tolerance");
  cmd->add_option("--tol-pairing", tol.pairing, "eigenvalue pairing tolerance");
  cmd->add_option("--tol-eig", tol.eig, "quadratic form degeneracy tolerance");
  cmd->add_option("--tol-cross", tol.cross, "eigenvalue-1 detection tolerance");
  cmd->add_option("--tol-form", tol.form, "crossing form degeneracy tolerance");
  cmd->add_option("--tol-unit-circle", tol.unit_circle, "unit circle distance tolerance");
  cmd->add_option("--tol-cluster", tol.cluster, "spectral cluster tolerance");
}

void add_output(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", o.out, "write output to this file instead of standard output");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Coisotropic Maslov index and rigidity experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* index = app.add_subcommand("index", "mean index and Conley-Zehnder index of a sympath-v1 path");
  index->add_option("--path", o.path, "path file")->required();
  add_output(index, o);
  add_tolerances(index, o.tol);

  auto* maslov = app.add_subcommand("maslov", "Maslov index of a class or a leafloop-v1 loop");
  maslov->add_option("--model", o.model, "coiso-model-v1 file");
  maslov->add_option("--class", o.cls, "class vector, e.g. 1,0");
  maslov->add_option("--loop", o.loop, "leafloop-v1 file");
  add_output(maslov, o);
  add_tolerances(maslov, o.tol);

  auto* catalog = app.add_subcommand("catalog", "one-periodic orbits of a test Hamiltonian");
  catalog->add_option("--model", o.model, "coiso-model-v1 file")->required();
  catalog->add_option("--C", o.C_values, "plateau value")->expected(1);
  catalog->add_option("--eps", o.eps_values, "cap width")->expected(1);
  catalog->add_option("--r", o.r, "support radius");
  catalog->add_option("--R", o.R, "outer radius");
  catalog->add_option("--emit-plot-data", o.plot_data, "write plot-data CSV to this file");
  add_output(catalog, o);

  auto* experiment = app.add_subcommand("experiment", "run a check and write a rigidity-report-v1 report");
  experiment->add_option("name", o.experiment, "lemma33 | prop31 | prop32 | lemma35 | theorem")
      ->required()
      ->check(CLI::IsMember({"lemma33", "prop31", "prop32", "lemma35", "theorem"}));
  experiment->add_option("--model", o.model, "coiso-model-v1 file");
  experiment->add_option("--seed", o.seed, "random seed (default: COISO_SEED or 1)");
  experiment->add_option("--trials", o.trials, "trials per case");
  experiment->add_option("--delta", o.delta, "slack over the displacement energy");
  experiment->add_option("--n", o.n, "half dimension (lemma33)");
  experiment->add_option("--k", o.k, "codimension (lemma33)");
  experiment->add_option("--class", o.cls, "class vector (prop32)");
  experiment->add_option("--max-length", o.max_length, "geodesic length cutoff");
  experiment->add_option("--scale", o.scale, "perturbation scale");
  experiment->add_option("--C", o.C_values, "plateau values (lemma35)");
  experiment->add_option("--eps", o.eps_values, "cap widths (lemma35)");
  experiment->add_option("--r", o.r, "support radius (lemma35)");
  experiment->add_option("--R", o.R, "outer radius (lemma35)");
  experiment->add_option("--emit-plot-data", o.plot_data, "write plot-data CSV to this file");
  experiment->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json"}));
  experiment->add_option("--out", o.out, "report file (default: standard output)");

  auto fail = [&](const std::string& kind, const std::string& message, int code) {
    out << Json{{"error", kind}, {"message", message}}.dump() << "\n";
    err << "coiso: " << message << "\n";
    return code;
  };

  try {
    o.seed = default_seed();
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), kExitInput);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitInput);
  }

  try {
    if (index->parsed()) return cmd_index(o, out);
    if (maslov->parsed()) return cmd_maslov(o, out);
    if (catalog->parsed()) return cmd_catalog(o, out);
    return cmd_experiment(o, out);
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return fail("internal", e.what(), kExitInput);
  }
}

}  // namespace coiso
