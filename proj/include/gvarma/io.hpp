#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gvarma/common.hpp"
#include "gvarma/experiments.hpp"
#include "gvarma/fitting.hpp"
#include "gvarma/graph.hpp"
#include "gvarma/models.hpp"
#include "gvarma/stationarity.hpp"
#include "gvarma/tracking.hpp"

namespace gvarma {

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);
/// Strict full-string parse; throws InvalidInput.
double parse_number(const std::string& text);
int parse_int(const std::string& text);

/// Reads a whole file ("-" is stdin) / writes it ("-" is stdout).
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& contents);

/// Graph CSV: optional "# nodes: N" line, header i,j,weight, one row per
/// undirected edge (0-based). Without the nodes line N = max index + 1.
Graph parse_graph_csv(const std::string& text);
std::string graph_to_csv(const Graph& graph);

/// Coordinates CSV: header node,x,y[,z]; rows in any order.
Matrix parse_coordinates_csv(const std::string& text);

/// Signal CSV: header node,t1,...,tT; one row per node.
Matrix parse_signal_csv(const std::string& text);
std::string signal_to_csv(const Matrix& X, const std::string& column_prefix = "t");

/// JPSD CSV: header lambda_index,omega_index,power.
Jpsd parse_jpsd_csv(const std::string& text, int N, int T);
std::string jpsd_to_csv(const Jpsd& jpsd);

/// Observation CSV: header t,node,value; absent pairs are unobserved.
std::vector<ObservationSet> parse_observations_csv(const std::string& text, int T);
std::string observations_to_csv(const std::vector<ObservationSet>& schedule);

/// Score table CSV: header method,step,rnmse.
std::string scores_to_csv(const std::vector<ScoreRow>& rows);

/// FNV-1a hash of the Laplacian entries printed at 12 significant digits.
std::string laplacian_checksum(const Matrix& L);

std::string to_string(Normalization normalization);
Normalization parse_normalization(const std::string& text);

/// `mean` is the per-node level the model was fitted around (empty = zero).
nlohmann::json model_to_json(const GVarmaModel& model, const SpectralBasis& basis, const Vector& mean = {});
nlohmann::json model_to_json(const GpVarModel& model, const SpectralBasis& basis, const Vector& mean = {});

struct LoadedModel {
  std::string type;  // "gvarma" or "gpvar"
  Normalization normalization = Normalization::combinatorial;
  GVarmaModel gvarma;
  GpVarModel gpvar;
  Vector mean;
};

/// Parses a model document without checking it against a graph.
LoadedModel model_from_json(const nlohmann::json& doc);
/// Throws InvalidInput unless the document's checksum matches the basis, then
/// attaches the basis Laplacian to GP-VAR models.
void bind_model(LoadedModel& model, const nlohmann::json& doc, const SpectralBasis& basis);

nlohmann::json fit_report_to_json(const FitReport& report);

}  // namespace gvarma
