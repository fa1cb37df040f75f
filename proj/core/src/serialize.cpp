#include "smeq/serialize.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smeq {

namespace {

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  require(j.is_array() && !j.empty(), "config: expected a matrix (array of rows)");
  const int r = static_cast<int>(j.size());
  const int c = static_cast<int>(j[0].size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i) {
    require(static_cast<int>(j[static_cast<std::size_t>(i)].size()) == c,
            "config: ragged matrix");
    for (int k = 0; k < c; ++k)
      m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vector_to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vector_from_json(const Json& j) {
  require(j.is_array(), "config: expected a vector (array)");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

Json to_json(const GroupDescriptor& g) {
  Json j;
  switch (g.kind()) {
    case GroupKind::continuous:
      j["kind"] = "continuous";
      j["Q"] = matrix_to_json(g.Q());
      break;
    case GroupKind::discrete:
      j["kind"] = "discrete";
      j["A"] = to_json(g.generator());
      break;
    case GroupKind::trivial:
      j["kind"] = "trivial";
      j["dim"] = g.dim();
      break;
  }
  Json gens = Json::array();
  for (const auto& o : g.compact_generators()) gens.push_back(matrix_to_json(o));
  j["compact_generators"] = std::move(gens);
  if (g.isotropic()) j["isotropic"] = true;
  return j;
}

GroupDescriptor group_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  std::vector<Mat> gens;
  if (j.contains("compact_generators")) {
    for (const auto& g : j["compact_generators"]) gens.push_back(matrix_from_json(g));
  }
  const bool iso = j.value("isotropic", false);
  if (kind == "continuous") {
    return GroupDescriptor::continuous_group(matrix_from_json(j.at("Q")), std::move(gens),
                                             iso);
  }
  if (kind == "discrete") {
    return GroupDescriptor::discrete_group(similarity_from_json(j.at("A")),
                                           std::move(gens));
  }
  if (kind == "trivial") {
    return GroupDescriptor::trivial_group(j.at("dim").get<int>(), std::move(gens));
  }
  throw DomainError("config: unknown group kind '" + kind + "'");
}

Json to_json(const Similarity& a) {
  return Json{{"scale", a.scale()}, {"rotation", matrix_to_json(a.rotation())}};
}

Similarity similarity_from_json(const Json& j) {
  return Similarity(j.at("scale").get<double>(), matrix_from_json(j.at("rotation")));
}

Json to_json(const SpectralMeasure& rho) {
  Json atoms = Json::array();
  for (const auto& a : rho.atoms) {
    atoms.push_back(Json{{"s", vector_to_json(a.s)}, {"w", a.w}});
  }
  return Json{{"atoms", std::move(atoms)}};
}

SpectralMeasure spectral_from_json(const Json& j) {
  SpectralMeasure rho;
  for (const auto& a : j.at("atoms")) {
    rho.atoms.push_back({vector_from_json(a.at("s")), a.at("w").get<double>()});
  }
  return rho;
}

Json to_json(const StableSpec& spec) {
  Json payload;
  switch (spec.kind()) {
    case StableSpec::Kind::jump:
      payload = to_json(spec.jump_payload().rho);
      payload["kind"] = "jump";
      break;
    case StableSpec::Kind::isotropic1:
      payload["kind"] = "isotropic1";
      payload["c"] = spec.isotropic1_payload().c;
      payload["z"] = vector_to_json(spec.isotropic1_payload().z);
      break;
    case StableSpec::Kind::operator1:
      payload = to_json(spec.operator1_payload().rho);
      payload["kind"] = "operator1";
      payload["z"] = vector_to_json(spec.operator1_payload().z);
      break;
    case StableSpec::Kind::gaussian:
      payload["kind"] = "gaussian";
      payload["sigma"] = matrix_to_json(spec.gaussian_payload().sigma);
      break;
    case StableSpec::Kind::zero:
      payload["kind"] = "zero";
      break;
  }
  return Json{{"alpha", spec.alpha()}, {"group", to_json(spec.group())},
              {"payload", std::move(payload)}};
}

StableSpec stable_spec_from_json(const Json& j) {
  const double alpha = j.at("alpha").get<double>();
  GroupDescriptor g = group_from_json(j.at("group"));
  const Json& p = j.at("payload");
  const std::string kind = p.at("kind").get<std::string>();
  if (kind == "jump") return StableSpec::jump(alpha, std::move(g), spectral_from_json(p));
  if (kind == "isotropic1") {
    return StableSpec::isotropic1(std::move(g), p.at("c").get<double>(),
                                  p.contains("z") ? vector_from_json(p["z"])
                                                  : Vec(Vec::Zero(g.dim())));
  }
  if (kind == "operator1") {
    return StableSpec::operator1(std::move(g), spectral_from_json(p),
                                 p.contains("z") ? vector_from_json(p["z"])
                                                 : Vec(Vec::Zero(g.dim())));
  }
  if (kind == "gaussian") {
    return StableSpec::gaussian(std::move(g), matrix_from_json(p.at("sigma")));
  }
  if (kind == "zero") return StableSpec::zero(alpha, std::move(g));
  throw DomainError("config: unknown payload kind '" + kind + "'");
}

WeightModel model_from_json(const Json& j) {
  const std::string preset = j.at("preset").get<std::string>();
  if (preset == "bary_spacings") return presets::bary_spacings(j.at("b").get<int>());
  if (preset == "bary_exponential")
    return presets::bary_exponential(j.at("b").get<int>());
  if (preset == "cyclic_polya") return presets::cyclic_polya(j.at("b").get<int>());
  if (preset == "fragmentation")
    return presets::fragmentation(j.at("b").get<int>(), j.value("theta", 1.0));
  if (preset == "biggins_brw") {
    presets::BigginsParams p;
    p.lambda = Complex(j.at("lambda_re").get<double>(), j.value("lambda_im", 0.0));
    p.disp_mean = j.value("disp_mean", 0.0);
    p.disp_sd = j.value("disp_sd", 1.0);
    p.imag_disp_sd = j.value("imag_disp_sd", 0.0);
    p.offspring = j.value("offspring", 2);
    return presets::biggins_brw(p);
  }
  if (preset == "kac3d") return presets::kac3d(j.value("conserve_momentum", false));
  if (preset == "table") {
    std::vector<presets::TableAtom> atoms;
    for (const auto& a : j.at("atoms")) {
      presets::TableAtom atom;
      atom.prob = a.at("prob").get<double>();
      atom.C = vector_from_json(a.at("C"));
      for (const auto& t : a.at("T")) atom.T.push_back(similarity_from_json(t));
      atoms.push_back(std::move(atom));
    }
    std::optional<GroupDescriptor> g;
    if (j.contains("group")) g = group_from_json(j["group"]);
    return presets::table(std::move(atoms), std::move(g), j.value("label", "table"));
  }
  throw DomainError("config: unknown preset '" + preset + "'");
}

// ---------------------------------------------------------------------------
// flat TOML subset -> JSON

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

Json toml_value(const std::string& raw);

Json toml_array(const std::string& raw) {
  Json arr = Json::array();
  int depth = 0;
  std::string cur;
  bool in_str = false;
  for (std::size_t i = 1; i + 1 < raw.size() || (i < raw.size() && raw[i] != ']'); ++i) {
    if (i >= raw.size()) break;
    const char ch = raw[i];
    if (ch == '"') in_str = !in_str;
    if (!in_str) {
      if (ch == '[') ++depth;
      if (ch == ']') {
        if (depth == 0) break;
        --depth;
      }
      if (ch == ',' && depth == 0) {
        if (!strip(cur).empty()) arr.push_back(toml_value(strip(cur)));
        cur.clear();
        continue;
      }
    }
    cur += ch;
  }
  if (!strip(cur).empty()) arr.push_back(toml_value(strip(cur)));
  return arr;
}

Json toml_value(const std::string& raw) {
  if (raw.empty()) throw DomainError("toml: empty value");
  if (raw.front() == '"') {
    require(raw.size() >= 2 && raw.back() == '"', "toml: unterminated string");
    return raw.substr(1, raw.size() - 2);
  }
  if (raw.front() == '[') return toml_array(raw);
  if (raw == "true") return true;
  if (raw == "false") return false;
  try {
    if (raw.find_first_of(".eE") == std::string::npos) return std::stoll(raw);
    return std::stod(raw);
  } catch (const std::exception&) {
    throw DomainError("toml: cannot parse value '" + raw + "'");
  }
}

Json toml_to_json(const std::string& text) {
  Json root = Json::object();
  Json* table = &root;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', "toml: malformed table header");
      std::string path = strip(line.substr(1, line.size() - 2));
      table = &root;
      std::size_t pos = 0;
      while (pos != std::string::npos) {
        const auto dot = path.find('.', pos);
        const std::string key =
            strip(path.substr(pos, dot == std::string::npos ? dot : dot - pos));
        table = &(*table)[key];
        pos = dot == std::string::npos ? dot : dot + 1;
      }
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, "toml: expected key = value");
    (*table)[strip(line.substr(0, eq))] = toml_value(strip(line.substr(eq + 1)));
  }
  return root;
}

}  // namespace

Json load_config_text(const std::string& text) {
  char first = '\0';
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      first = ch;
      break;
    }
  }
  if (first == '{') {
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw DomainError(std::string("config: JSON parse error: ") + e.what());
    }
  }
  if (first == '[') {
    // could be a JSON array or a TOML table header
    try {
      return Json::parse(text);
    } catch (const Json::parse_error&) {
      return toml_to_json(text);
    }
  }
  return toml_to_json(text);
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

std::string CsvWriter::format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  require(cells.size() == columns_, "csv: wrong column count");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += quote(cells[i]);
  }
  buf_ += "\r\n";
}

void CsvWriter::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format(v));
  row(cells);
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace smeq
