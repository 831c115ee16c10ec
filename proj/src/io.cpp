#include "gvarma/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

namespace gvarma {

using nlohmann::json;

std::string format_number(double value) {
  require(std::isfinite(value), "cannot format a non-finite number");
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};

Table parse_table(const std::string& text) {
  Table t;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    auto fields = split_fields(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    require(fields.size() == t.header.size(),
            "line " + std::to_string(number) + ": expected " + std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(number);
  }
  require(!t.header.empty(), "CSV has no header");
  return t;
}

void expect_header(const Table& t, const std::vector<std::string>& names) {
  require(t.header == names, "unexpected CSV header; expected " + [&] {
    std::string s;
    for (const auto& n : names) s += (s.empty() ? "" : ",") + n;
    return s;
  }());
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(),
          "not a number: '" + text + "'");
  require(std::isfinite(value), "non-finite number: '" + text + "'");
  return value;
}

int parse_int(const std::string& text) {
  const std::string s = trim(text);
  int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size() && !s.empty(),
          "not an integer: '" + text + "'");
  return value;
}

std::string read_text(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text(const std::string& path, const std::string& contents) {
  if (path == "-") {
    std::cout << contents;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write '" + path + "'");
  out << contents;
  require(out.good(), "write to '" + path + "' failed");
}

Graph parse_graph_csv(const std::string& text) {
  const Table t = parse_table(text);
  expect_header(t, {"i", "j", "weight"});
  int n = -1;
  for (const auto& c : t.comments) {
    const auto pos = c.find("nodes:");
    if (pos != std::string::npos) n = parse_int(c.substr(pos + 6));
  }
  std::vector<Edge> edges;
  int top = -1;
  for (const auto& row : t.rows) {
    Edge e{parse_int(row[0]), parse_int(row[1]), parse_number(row[2])};
    require(e.i >= 0 && e.j >= 0, "node indices must be nonnegative");
    top = std::max({top, e.i, e.j});
    edges.push_back(e);
  }
  if (n < 0) n = top + 1;
  require(n >= 1, "graph has no nodes");
  require(top < n, "edge endpoint exceeds the declared node count");
  return Graph::from_edges(n, std::move(edges));
}

std::string graph_to_csv(const Graph& graph) {
  std::string s = "# nodes: " + std::to_string(graph.size()) + "\ni,j,weight\n";
  for (const Edge& e : graph.edges()) {
    s += std::to_string(e.i) + "," + std::to_string(e.j) + "," + format_number(e.weight) + "\n";
  }
  return s;
}

Matrix parse_coordinates_csv(const std::string& text) {
  const Table t = parse_table(text);
  require(t.header.size() >= 3 && t.header.size() <= 4 && t.header[0] == "node" && t.header[1] == "x" &&
              t.header[2] == "y" && (t.header.size() == 3 || t.header[3] == "z"),
          "coordinates CSV header must be node,x,y[,z]");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const auto dim = static_cast<Eigen::Index>(t.header.size() - 1);
  Matrix C(n, dim);
  std::vector<bool> seen(n, false);
  for (const auto& row : t.rows) {
    const int node = parse_int(row[0]);
    require(node >= 0 && node < n && !seen[node], "node indices must be a permutation of 0..N-1");
    seen[node] = true;
    for (Eigen::Index d = 0; d < dim; ++d) C(node, d) = parse_number(row[d + 1]);
  }
  return C;
}

Matrix parse_signal_csv(const std::string& text) {
  const Table t = parse_table(text);
  require(t.header.size() >= 2 && t.header[0] == "node", "signal CSV header must be node,t1,...,tT");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  const auto T = static_cast<Eigen::Index>(t.header.size() - 1);
  require(n >= 1, "signal has no rows");
  Matrix X(n, T);
  std::vector<bool> seen(n, false);
  for (const auto& row : t.rows) {
    const int node = parse_int(row[0]);
    require(node >= 0 && node < n && !seen[node], "node indices must be a permutation of 0..N-1");
    seen[node] = true;
    for (Eigen::Index c = 0; c < T; ++c) X(node, c) = parse_number(row[c + 1]);
  }
  return X;
}

std::string signal_to_csv(const Matrix& X, const std::string& column_prefix) {
  std::string s = "node";
  for (Eigen::Index c = 0; c < X.cols(); ++c) s += "," + column_prefix + std::to_string(c + 1);
  s += "\n";
  for (Eigen::Index n = 0; n < X.rows(); ++n) {
    s += std::to_string(n);
    for (Eigen::Index c = 0; c < X.cols(); ++c) s += "," + format_number(X(n, c));
    s += "\n";
  }
  return s;
}

Jpsd parse_jpsd_csv(const std::string& text, int N, int T) {
  const Table t = parse_table(text);
  expect_header(t, {"lambda_index", "omega_index", "power"});
  Jpsd P = Jpsd::Constant(N, T, -1.0);
  for (const auto& row : t.rows) {
    const int n = parse_int(row[0]);
    const int w = parse_int(row[1]);
    require(n >= 0 && n < N && w >= 0 && w < T, "JPSD index out of range");
    const double v = parse_number(row[2]);
    require(v >= 0.0, "JPSD entries must be nonnegative");
    P(n, w) = v;
  }
  require((P.array() >= 0.0).all(), "JPSD CSV must list every (lambda, omega) pair");
  return P;
}

std::string jpsd_to_csv(const Jpsd& jpsd) {
  std::string s = "lambda_index,omega_index,power\n";
  for (Eigen::Index n = 0; n < jpsd.rows(); ++n)
    for (Eigen::Index w = 0; w < jpsd.cols(); ++w)
      s += std::to_string(n) + "," + std::to_string(w) + "," + format_number(jpsd(n, w)) + "\n";
  return s;
}

std::vector<ObservationSet> parse_observations_csv(const std::string& text, int T) {
  const Table t = parse_table(text);
  expect_header(t, {"t", "node", "value"});
  std::vector<ObservationSet> schedule(T);
  for (const auto& row : t.rows) {
    const int time = parse_int(row[0]);
    require(time >= 0 && time < T, "observation time out of range");
    schedule[time].push_back({parse_int(row[1]), parse_number(row[2])});
  }
  return schedule;
}

std::string observations_to_csv(const std::vector<ObservationSet>& schedule) {
  std::string s = "t,node,value\n";
  for (std::size_t t = 0; t < schedule.size(); ++t)
    for (const auto& o : schedule[t])
      s += std::to_string(t) + "," + std::to_string(o.node) + "," + format_number(o.value) + "\n";
  return s;
}

std::string scores_to_csv(const std::vector<ScoreRow>& rows) {
  std::string s = "method,step,rnmse\n";
  for (const auto& r : rows) s += r.method + "," + std::to_string(r.step) + "," + format_number(r.rnmse) + "\n";
  return s;
}

std::string laplacian_checksum(const Matrix& L) {
  std::uint64_t h = 1469598103934665603ULL;
  char buf[40];
  for (Eigen::Index j = 0; j < L.cols(); ++j) {
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      double v = L(i, j);
      if (std::abs(v) < 1e-300) v = 0.0;
      const int len = std::snprintf(buf, sizeof(buf), "%.12g;", v);
      for (int k = 0; k < len; ++k) {
        h ^= static_cast<unsigned char>(buf[k]);
        h *= 1099511628211ULL;
      }
    }
  }
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(Normalization normalization) {
  return normalization == Normalization::combinatorial ? "combinatorial" : "unit_spectral_norm";
}

Normalization parse_normalization(const std::string& text) {
  if (text == "combinatorial") return Normalization::combinatorial;
  if (text == "unit_spectral_norm" || text == "unit") return Normalization::unit_spectral_norm;
  throw InvalidInput("unknown Laplacian normalization '" + text + "'");
}

namespace {

constexpr int kModelVersion = 1;

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vector(const json& j, Eigen::Index n, const std::string& what) {
  require(j.is_array() && static_cast<Eigen::Index>(j.size()) == n, what + " must have length " + std::to_string(n));
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(j[i].is_number(), what + " entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

json header(const std::string& type, const SpectralBasis& basis, int P, int Q, const Vector& mean) {
  require(mean.size() == 0 || mean.size() == basis.size(), "mean length does not match the graph");
  const Vector level = mean.size() == 0 ? Vector::Zero(basis.size()) : mean;
  return json{{"format", "gvarma-model"},
              {"version", kModelVersion},
              {"type", type},
              {"N", basis.size()},
              {"P", P},
              {"Q", Q},
              {"normalization", to_string(basis.normalization)},
              {"laplacian_checksum", laplacian_checksum(basis.laplacian)},
              {"mean", vector_json(level)}};
}

template <typename T>
T field(const json& doc, const char* name) {
  require(doc.contains(name), std::string("model document lacks '") + name + "'");
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("model field '") + name + "' has the wrong type");
  }
}

}  // namespace

json model_to_json(const GVarmaModel& model, const SpectralBasis& basis, const Vector& mean) {
  model.validate();
  require(model.size() == basis.size(), "model size does not match the graph");
  json doc = header("gvarma", basis, model.ar_order(), model.ma_order(), mean);
  json ar = json::array(), ma = json::array();
  for (const auto& a : model.ar) ar.push_back(vector_json(a));
  for (const auto& b : model.ma) ma.push_back(vector_json(b));
  doc["ar"] = ar;
  doc["ma"] = ma;
  doc["innovation_spectrum"] = vector_json(model.innovation_spectrum);
  return doc;
}

json model_to_json(const GpVarModel& model, const SpectralBasis& basis, const Vector& mean) {
  model.validate();
  require(model.size() == basis.size(), "model size does not match the graph");
  json doc = header("gpvar", basis, model.ar_order(), 0, mean);
  doc["restricted"] = model.restricted;
  doc["psi"] = model.psi;
  json cov = json::array();
  for (Eigen::Index i = 0; i < model.innovation_cov.rows(); ++i)
    cov.push_back(vector_json(model.innovation_cov.row(i).transpose()));
  doc["innovation_cov"] = cov;
  return doc;
}

LoadedModel model_from_json(const json& doc) {
  require(doc.is_object(), "model document must be a JSON object");
  require(field<std::string>(doc, "format") == "gvarma-model", "not a model document");
  require(field<int>(doc, "version") == kModelVersion, "unsupported model version");
  LoadedModel m;
  m.type = field<std::string>(doc, "type");
  m.normalization = parse_normalization(field<std::string>(doc, "normalization"));
  const int N = field<int>(doc, "N");
  const int P = field<int>(doc, "P");
  const int Q = field<int>(doc, "Q");
  require(N >= 1 && P >= 0 && Q >= 0, "model dimensions out of range");
  m.mean = doc.contains("mean") ? json_vector(doc.at("mean"), N, "mean") : Vector::Zero(N);
  if (m.type == "gvarma") {
    const json& ar = doc.at("ar");
    const json& ma = doc.at("ma");
    require(ar.is_array() && static_cast<int>(ar.size()) == P, "ar must hold P spectra");
    require(ma.is_array() && static_cast<int>(ma.size()) == Q, "ma must hold Q spectra");
    for (const auto& a : ar) m.gvarma.ar.push_back(json_vector(a, N, "ar spectrum"));
    for (const auto& b : ma) m.gvarma.ma.push_back(json_vector(b, N, "ma spectrum"));
    m.gvarma.innovation_spectrum = json_vector(doc.at("innovation_spectrum"), N, "innovation_spectrum");
    m.gvarma.validate();
  } else if (m.type == "gpvar") {
    require(Q == 0, "GP-VAR models have no MA part");
    m.gpvar.restricted = field<bool>(doc, "restricted");
    m.gpvar.psi = field<std::vector<std::vector<double>>>(doc, "psi");
    require(static_cast<int>(m.gpvar.psi.size()) == P, "psi must hold P rows");
    const json& cov = doc.at("innovation_cov");
    require(cov.is_array() && static_cast<int>(cov.size()) == N, "innovation_cov must be N x N");
    m.gpvar.innovation_cov.resize(N, N);
    for (int i = 0; i < N; ++i) m.gpvar.innovation_cov.row(i) = json_vector(cov[i], N, "innovation_cov row").transpose();
  } else {
    throw InvalidInput("unknown model type '" + m.type + "'");
  }
  return m;
}

void bind_model(LoadedModel& model, const json& doc, const SpectralBasis& basis) {
  require(field<int>(doc, "N") == basis.size(), "model size does not match the graph");
  require(field<std::string>(doc, "laplacian_checksum") == laplacian_checksum(basis.laplacian),
          "model was fitted on a different graph or normalization (Laplacian checksum mismatch)");
  if (model.type == "gpvar") {
    model.gpvar.laplacian = basis.laplacian;
    model.gpvar.validate();
  }
}

json fit_report_to_json(const FitReport& report) {
  json freqs = json::array();
  for (const auto& f : report.frequencies) {
    freqs.push_back({{"index", f.index},
                     {"converged", f.converged},
                     {"reflected", f.reflected},
                     {"iterations", f.iterations},
                     {"residual_variance", f.residual_variance}});
  }
  return json{{"frequencies", freqs}, {"selected", report.selected}, {"warnings", report.warnings}};
}

}  // namespace gvarma
