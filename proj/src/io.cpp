#include "coiso/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace coiso {

namespace {

void require_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw Error(ErrorKind::BadInput, std::string(what) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw Error(ErrorKind::BadInput, std::string(what) + ": unknown key \"" + item.key() + "\"");
    }
  }
}

void require_fmt(const Json& j, const char* key, const char* expected) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string() || j.at(key).get<std::string>() != expected) {
    throw Error(ErrorKind::BadInput, std::string("expected ") + key + " \"" + expected + "\"");
  }
}

template <typename T>
T get_as(const Json& j, const char* key, const char* what) {
  if (!j.contains(key)) throw Error(ErrorKind::BadInput, std::string(what) + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadInput, std::string(what) + ": bad \"" + key + "\": " + e.what());
  }
}

// Accepts a flat row-major array or an array of rows.
Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  std::vector<double> flat;
  try {
    if (j.is_array() && !j.empty() && j.front().is_array()) {
      for (const auto& row : j) {
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
      if (static_cast<Eigen::Index>(j.size()) != rows) flat.clear();
    } else {
      flat = j.get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::BadInput, std::string(what) + ": " + e.what());
  }
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << " entries";
    throw Error(ErrorKind::BadInput, os.str());
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string csv_class(const ClassVector& cls) {
  std::string s;
  for (std::size_t i = 0; i < cls.size(); ++i) s += (i ? " " : "") + std::to_string(cls[i]);
  return s;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::BadInput, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

Json path_to_json(const SymplecticPath& path) {
  Json samples = Json::array();
  for (const auto& s : path.samples()) samples.push_back({{"t", s.t}, {"m", matrix_to_json(s.m)}});
  return {{"fmt", kPathSchema}, {"dim", path.dim()}, {"samples", samples}};
}

SymplecticPath path_from_json(const Json& j, double sympl_tol) {
  require_keys(j, {"fmt", "dim", "samples"}, "sympath");
  require_fmt(j, "fmt", kPathSchema);
  const int dim = get_as<int>(j, "dim", "sympath");
  if (dim <= 0) throw Error(ErrorKind::BadInput, "sympath: dim must be positive");
  if (dim % 2 != 0) throw Error(ErrorKind::OddDimension, "sympath: odd dimension");
  const Json& samples = j.at("samples");
  if (!samples.is_array() || samples.size() < 2) throw Error(ErrorKind::BadInput, "sympath: need at least two samples");
  std::vector<PathSample> out;
  for (const auto& s : samples) {
    require_keys(s, {"t", "m"}, "sympath sample");
    if (!s.contains("m")) throw Error(ErrorKind::BadInput, "sympath sample: missing \"m\"");
    out.push_back({get_as<double>(s, "t", "sympath sample"), matrix_from_json(s.at("m"), dim, dim, "sympath sample")});
  }
  return SymplecticPath::from_samples(std::move(out), sympl_tol);
}

Json model_config_to_json(const ModelConfig& c) {
  Json j = {{"schema", kModelSchema}, {"kind", to_string(c.kind)}, {"n", c.n}, {"k", c.k},
            {"radii", c.radii}, {"R", c.R}};
  if (c.displacement_energy) j["displacement_energy"] = *c.displacement_energy;
  if (c.neighborhood_energy) j["neighborhood_energy"] = *c.neighborhood_energy;
  return j;
}

ModelConfig model_config_from_json(const Json& j) {
  require_keys(j, {"schema", "kind", "n", "k", "radii", "R", "displacement_energy", "neighborhood_energy"},
               "model");
  require_fmt(j, "schema", kModelSchema);
  ModelConfig c;
  c.kind = model_kind_from_string(get_as<std::string>(j, "kind", "model"));
  c.radii = get_as<std::vector<double>>(j, "radii", "model");
  if (c.kind == ModelKind::FlatCoisotropicTorus && !j.contains("n")) {
    throw Error(ErrorKind::BadInput, "model: flat coisotropic torus needs \"n\"");
  }
  c.n = j.contains("n") ? get_as<int>(j, "n", "model") : static_cast<int>(c.radii.size());
  if (j.contains("k")) {
    c.k = get_as<int>(j, "k", "model");
  } else {
    c.k = c.kind == ModelKind::SplitLagrangianTorus ? c.n
          : c.kind == ModelKind::Ellipsoid          ? 1
                                                    : static_cast<int>(c.radii.size());
  }
  if (j.contains("R")) c.R = get_as<double>(j, "R", "model");
  if (j.contains("displacement_energy")) c.displacement_energy = get_as<double>(j, "displacement_energy", "model");
  if (j.contains("neighborhood_energy")) c.neighborhood_energy = get_as<double>(j, "neighborhood_energy", "model");
  return c;
}

Json leaf_loop_to_json(const ModelConfig& model, const FramedLeafLoop& loop) {
  Json samples = Json::array();
  for (std::size_t s = 0; s < loop.t.size(); ++s) {
    samples.push_back(
        {{"t", loop.t[s]}, {"point", vector_to_json(loop.points[s])}, {"frame", matrix_to_json(loop.frame[s])}});
  }
  return {{"fmt", kLoopSchema},
          {"model", model_config_to_json(model)},
          {"class", loop.homotopy_class},
          {"orientable", loop.orientable},
          {"samples", samples}};
}

LeafLoopSpec leaf_loop_from_json(const Json& j) {
  require_keys(j, {"fmt", "model", "class", "orientable", "samples"}, "leafloop");
  require_fmt(j, "fmt", kLoopSchema);
  LeafLoopSpec spec;
  if (!j.contains("model")) throw Error(ErrorKind::BadInput, "leafloop: missing \"model\"");
  spec.model = j.at("model").is_string() ? model_config_from_json(read_json_file(j.at("model").get<std::string>()))
                                         : model_config_from_json(j.at("model"));
  spec.homotopy_class = get_as<ClassVector>(j, "class", "leafloop");
  if (!j.contains("samples")) return spec;
  const int dim = 2 * spec.model.n;
  FramedLeafLoop loop;
  loop.homotopy_class = spec.homotopy_class;
  if (j.contains("orientable")) loop.orientable = get_as<bool>(j, "orientable", "leafloop");
  for (const auto& s : j.at("samples")) {
    require_keys(s, {"t", "point", "frame"}, "leafloop sample");
    loop.t.push_back(get_as<double>(s, "t", "leafloop sample"));
    const auto point = get_as<std::vector<double>>(s, "point", "leafloop sample");
    if (static_cast<int>(point.size()) != dim) throw Error(ErrorKind::BadInput, "leafloop sample: wrong point size");
    loop.points.push_back(Eigen::Map<const Vector>(point.data(), dim));
    if (!s.contains("frame")) throw Error(ErrorKind::BadInput, "leafloop sample: missing \"frame\"");
    loop.frame.push_back(matrix_from_json(s.at("frame"), dim, spec.model.k, "leafloop sample frame"));
  }
  spec.loop = std::move(loop);
  return spec;
}

Json to_json(const IndexResult& r) {
  Json crossings = Json::array();
  for (const auto& c : r.crossings) crossings.push_back({{"t", c.t}, {"signature", c.signature}});
  return {{"mean_index", r.mean_index},
          {"cz", r.cz ? Json(*r.cz) : Json(nullptr)},
          {"degenerate_endpoint", r.degenerate_endpoint},
          {"crossings", crossings}};
}

Json to_json(const OrbitRecord& r) {
  return {{"class", r.homotopy_class}, {"length", r.length},         {"level", r.level}, {"action", r.action},
          {"mean_index", r.mean_index}, {"maslov", r.maslov}, {"band", to_string(r.band)}};
}

Json to_json(const Lemma33Result& r) {
  return {{"n", r.n},
          {"k", r.k},
          {"trials", r.trials},
          {"violations", r.violations},
          {"rejected", r.rejected},
          {"worst_lower_margin", r.worst_lower_margin},
          {"worst_upper_margin", r.worst_upper_margin},
          {"seed", r.seed}};
}

Json to_json(const Prop31Result& r) {
  return {{"class", r.homotopy_class}, {"mu", r.mu}, {"minus_mean_index", r.minus_mean_index}, {"diff", r.diff}};
}

Json to_json(const Prop32Result& r) {
  return {{"class", r.homotopy_class}, {"mean_index", r.mean_index}, {"trials", r.trials},
          {"violations", r.violations}, {"rejected", r.rejected},     {"cz_values", r.cz_values},
          {"passed", r.passed}};
}

Json to_json(const WitnessCandidate& c) {
  return {{"class", c.eta_class}, {"length", c.length},     {"mu", c.mu},
          {"area", c.area},       {"index_ok", c.index_ok}, {"area_ok", c.area_ok}};
}

Json to_json(const TheoremReport& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) candidates.push_back(to_json(c));
  return {{"model", r.model},
          {"n", r.n},
          {"k", r.k},
          {"delta", r.delta},
          {"displacement_energy", r.displacement_energy},
          {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
          {"orbit_mean_index", r.orbit_mean_index},
          {"mean_index_window_ok", r.mean_index_window_ok},
          {"selection", "enumeration of closed geodesics, not a Floer computation"},
          {"candidates", candidates},
          {"passed", r.passed}};
}

Json to_json(const Lemma35Report& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) {
    Json orbits = Json::array();
    for (std::size_t i = 0; i < c.inner_orbits.size(); ++i) {
      Json o = to_json(c.inner_orbits[i]);
      o["in_action_window"] = i < c.in_action_window.size() ? c.in_action_window[i] : false;
      orbits.push_back(o);
    }
    cases.push_back({{"C", c.C},
                     {"eps", c.eps},
                     {"slope", c.slope},
                     {"slope_outside_spectrum", c.slope_outside_spectrum},
                     {"inner_orbits", orbits},
                     {"passed", c.passed}});
  }
  return {{"model", r.model},
          {"r", r.r},
          {"R", r.R},
          {"neighborhood_energy", r.neighborhood_energy},
          {"action_window_strictness", "untested"},
          {"cases", cases},
          {"passed", r.passed}};
}

Json to_json(const TestHamiltonianProfile& h) {
  Json pieces = Json::array();
  for (const auto& p : h.pieces()) {
    pieces.push_back({{"a", p.a}, {"b", p.b}, {"value", p.value}, {"slope", p.slope}, {"curvature", p.curvature}});
  }
  return {{"C", h.C()},         {"eps", h.eps()},       {"r", h.r()},          {"R", h.R()},
          {"slope", h.slope()}, {"cap", h.cap_kind()}, {"pieces", pieces}};
}

Json make_report(const ReportHeader& header, const Json& parameters, const Json& external_constants,
                 const Json& results, bool passed) {
  return {{"schema", kReportSchema},
          {"tool_version", kToolVersion},
          {"experiment", header.experiment},
          {"seed", header.seed},
          {"external_constants", external_constants},
          {"parameters", parameters},
          {"results", results},
          {"passed", passed},
          {"timestamp", header.timestamp}};
}

std::string orbit_records_csv(const std::vector<OrbitRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "class,length,level,action,mean_index,maslov,band\n";
  for (const auto& r : records) {
    os << csv_class(r.homotopy_class) << ',' << r.length << ',' << r.level << ',' << r.action << ','
       << r.mean_index << ',' << r.maslov << ',' << to_string(r.band) << '\n';
  }
  return os.str();
}

std::string plot_data_csv(const std::vector<OrbitRecord>& records) {
  std::ostringstream os;
  os.precision(17);
  os << "series,class,x,y\n";
  for (const auto& r : records) os << "level_action," << csv_class(r.homotopy_class) << ',' << r.level << ',' << r.action << '\n';
  std::set<ClassVector> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.homotopy_class).second) continue;
    os << "class_mu," << csv_class(r.homotopy_class) << ',' << r.length << ',' << r.maslov << '\n';
  }
  return os.str();
}

std::string class_to_string(const ClassVector& cls) {
  std::string s = "(";
  for (std::size_t i = 0; i < cls.size(); ++i) s += (i ? "," : "") + std::to_string(cls[i]);
  return s + ")";
}

ClassVector class_from_string(const std::string& text) {
  std::string cleaned;
  for (char ch : text) cleaned += (ch == '(' || ch == ')' || ch == '[' || ch == ']' || ch == ',') ? ' ' : ch;
  std::istringstream is(cleaned);
  ClassVector out;
  std::string token;
  while (is >> token) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw Error(ErrorKind::BadInput, "bad class entry \"" + token + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::BadInput, "empty class vector");
  return out;
}

}  // namespace coiso
