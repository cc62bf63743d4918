#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "coiso/cli.hpp"
#include "coiso/io.hpp"

using namespace coiso;

namespace fs = std::filesystem;

namespace {

const std::string kData = COISO_DATA_DIR;

struct CliRun {
  int code = 0;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coiso");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path temp_file(const std::string& name, const std::string& content = {}) {
  const fs::path dir = fs::temp_directory_path() / "coiso-tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  if (!content.empty()) std::ofstream(p) << content;
  return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::BadInput;
}

SymplecticPath rotation(double delta) {
  return flow_of_quadratic(QuadraticHamiltonian(-delta * Matrix::Identity(2, 2)), 1.0, 16);
}

}  // namespace

TEST_CASE("path files") {
  const auto p = rotation(1.3);
  const Json j = path_to_json(p);
  CHECK(j.at("fmt") == kPathSchema);
  const auto back = path_from_json(j);
  REQUIRE(back.samples().size() == p.samples().size());
  for (std::size_t i = 0; i < p.samples().size(); ++i) {
    CHECK(back.samples()[i].t == p.samples()[i].t);
    CHECK((back.samples()[i].m - p.samples()[i].m).norm() == 0.0);
  }

  Json nested = j;
  for (auto& s : nested["samples"]) {
    const auto flat = s["m"];
    s["m"] = Json::array({Json::array({flat[0], flat[1]}), Json::array({flat[2], flat[3]})});
  }
  CHECK(mean_index(path_from_json(nested)) == doctest::Approx(mean_index(p)));

  Json extra = j;
  extra["colour"] = "blue";
  CHECK(kind_of([&] { path_from_json(extra); }) == ErrorKind::BadInput);

  Json bad = j;
  bad["samples"][3]["m"][0] = 2.0;
  CHECK(kind_of([&] { path_from_json(bad); }) == ErrorKind::NotSymplectic);

  CHECK(kind_of([] { read_json_file("/nonexistent/coiso.json"); }) == ErrorKind::Io);
  const auto broken = temp_file("broken.json", "{ not json");
  CHECK(kind_of([&] { read_json_file(broken.string()); }) == ErrorKind::BadInput);
}

TEST_CASE("model files") {
  const auto cfg = model_config_from_json(read_json_file(kData + "/models/torus12.json"));
  CHECK(cfg.kind == ModelKind::SplitLagrangianTorus);
  CHECK(cfg.n == 2);
  CHECK(cfg.k == 2);
  CHECK(cfg.radii == std::vector<double>{1.0, 2.0});
  CHECK(cfg.R == 0.25);
  CHECK_FALSE(cfg.displacement_energy.has_value());

  const auto again = model_config_from_json(model_config_to_json(cfg));
  CHECK(again.kind == cfg.kind);
  CHECK(again.radii == cfg.radii);

  Json extra = model_config_to_json(cfg);
  extra["radius"] = 1.0;
  CHECK(kind_of([&] { model_config_from_json(extra); }) == ErrorKind::BadInput);

  const Json flat = Json::parse(R"({"schema": "coiso-model-v1", "kind": "flat-coisotropic-torus", "radii": [1.0]})");
  CHECK(kind_of([&] { model_config_from_json(flat); }) == ErrorKind::BadInput);

  for (const char* name : {"torus12.json", "flat3.json", "ellipsoid.json"}) {
    CHECK_NOTHROW(CoisotropicModel::from_config(model_config_from_json(read_json_file(kData + "/models/" + name))));
  }
}

TEST_CASE("class strings") {
  CHECK(class_from_string("1,0") == ClassVector{1, 0});
  CHECK(class_from_string("(1, -2)") == ClassVector{1, -2});
  CHECK(class_from_string("[3]") == ClassVector{3});
  CHECK(class_to_string({1, -2}) == class_to_string(class_from_string(class_to_string({1, -2}))));
  CHECK(kind_of([] { class_from_string("1,x"); }) == ErrorKind::BadInput);
}

TEST_CASE("leaf loop files") {
  const auto model = CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25);
  const auto loop = model.loop({1, 1});
  const auto spec = leaf_loop_from_json(leaf_loop_to_json(model.config(), loop));
  REQUIRE(spec.loop.has_value());
  CHECK(spec.homotopy_class == ClassVector{1, 1});
  const auto rebuilt = CoisotropicModel::from_config(spec.model);
  CHECK(maslov_index(*spec.loop, rebuilt) == doctest::Approx(maslov_index(loop, model)).epsilon(1e-12));
}

TEST_CASE("cli index") {
  auto r = cli({"index", "--path", kData + "/paths/rot90.json"});
  CHECK(r.code == kExitOk);
  CHECK(r.json()["mean_index"].get<double>() == doctest::Approx(0.5));
  CHECK(r.json()["cz"] == 1);

  r = cli({"index", "--path", kData + "/paths/shear.json"});
  CHECK(r.code == kExitDegenerate);
  CHECK(r.json()["cz"].is_null());
  CHECK(r.json()["degenerate_endpoint"] == true);

  r = cli({"index", "--path", kData + "/paths/rot90.json", "--format", "csv"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("0.5,1,0") != std::string::npos);

  r = cli({"index", "--path", "/nonexistent/path.json"});
  CHECK(r.code == kExitInput);
  CHECK(r.json()["error"] == "Io");
  CHECK_FALSE(r.err.empty());

  r = cli({"index"});
  CHECK(r.code == kExitInput);
}

TEST_CASE("cli maslov") {
  const std::string model = kData + "/models/torus12.json";
  auto r = cli({"maslov", "--model", model, "--class", "1,0"});
  CHECK(r.code == kExitOk);
  CHECK(r.json()["mu"].get<double>() == doctest::Approx(2.0));
  CHECK(r.json()["area"].get<double>() == doctest::Approx(std::numbers::pi));

  r = cli({"maslov", "--model", model, "--class", "0,0"});
  CHECK(r.code == kExitOk);
  CHECK(r.json()["mu"].get<double>() == 0.0);

  r = cli({"maslov", "--model", model, "--class", "1,0,0"});
  CHECK(r.code == kExitInput);
  CHECK(r.json()["error"] == "BadInput");

  const auto m = CoisotropicModel::flat_coisotropic_torus(3, {1.0, 1.5}, 0.25);
  const auto loop_file = temp_file("loop.json", leaf_loop_to_json(m.config(), m.loop({1, 0})).dump());
  r = cli({"maslov", "--loop", loop_file.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.json()["mu"].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("cli experiments") {
  const std::string model = kData + "/models/torus12.json";
  auto r = cli({"experiment", "theorem", "--model", model});
  CHECK(r.code == kExitOk);
  Json rep = r.json();
  CHECK(rep["schema"] == kReportSchema);
  CHECK(rep["passed"] == true);
  CHECK(rep.at("results").at("witness").at("class") == Json::array({1, 0}));
  CHECK(rep["external_constants"]["displacement_energy"]["external"] == true);

  // reruns agree up to the timestamp
  Json again = cli({"experiment", "theorem", "--model", model}).json();
  rep.erase("timestamp");
  again.erase("timestamp");
  CHECK(rep == again);

  r = cli({"experiment", "lemma33", "--n", "2", "--k", "1", "--trials", "20", "--seed", "5"});
  CHECK(r.code == kExitOk);
  CHECK(r.json()["seed"] == 5);
  CHECK(r.json()["results"][0]["violations"] == 0);

  ::setenv("COISO_SEED", "17", 1);
  r = cli({"experiment", "lemma33", "--n", "1", "--k", "1", "--trials", "3"});
  CHECK(r.json()["seed"] == 17);
  r = cli({"experiment", "lemma33", "--n", "1", "--k", "1", "--trials", "3", "--seed", "4"});
  CHECK(r.json()["seed"] == 4);
  ::unsetenv("COISO_SEED");

  // a configured displacement energy below every area leaves no witness
  Json cfg = read_json_file(model);
  cfg["displacement_energy"] = 0.5;
  const auto tiny = temp_file("tiny.json", cfg.dump());
  r = cli({"experiment", "theorem", "--model", tiny.string()});
  CHECK(r.code == kExitCheckFailed);
  CHECK(r.json()["passed"] == false);
  CHECK(r.json()["external_constants"]["displacement_energy"]["source"] == "configured");

  const auto out = temp_file("report.json");
  fs::remove(out);
  r = cli({"experiment", "prop31", "--model", model, "--max-length", "7", "--out", out.string()});
  CHECK(r.code == kExitOk);
  CHECK(read_json_file(out.string())["passed"] == true);

  r = cli({"experiment", "bogus"});
  CHECK(r.code == kExitInput);
}

TEST_CASE("cli catalog and plot data") {
  const auto plot = temp_file("plot.csv");
  fs::remove(plot);
  auto r = cli({"catalog", "--model", kData + "/models/torus12.json", "--emit-plot-data", plot.string()});
  CHECK(r.code == kExitOk);
  CHECK_FALSE(r.json()["orbits"].empty());
  std::ifstream in(plot);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("level_action") != std::string::npos);
  CHECK(text.find("class_mu") != std::string::npos);

  r = cli({"catalog", "--model", kData + "/models/torus12.json", "--format", "csv"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("action") != std::string::npos);
}
