#pragma once

#include "plqks/model.hpp"
#include "plqks/penalty.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace plqks::io {

/// Parsed JSON model configuration. Matrix fields hold either one entry
/// (broadcast to every step) or one entry per step.
struct ModelConfig {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::optional<Eigen::Index> N;
  std::vector<Eigen::MatrixXd> G, H, Q, R;
  Eigen::VectorXd x0;
  nlohmann::json process_penalty;
  nlohmann::json measurement_penalty;

  /// Expands broadcast fields into a model with N steps.
  StateSpaceModel model(Eigen::Index N) const;
};

ModelConfig parse_config(const nlohmann::json& j);
ModelConfig load_config(const std::filesystem::path& path);

/// Penalty spec: {"kind": "l2"}, {"kind": "l1", "scale": s},
/// {"kind": "huber", "kappa": k}, {"kind": "vapnik", "epsilon": e} or
/// {"kind": "plq", "A": [[...]], "a": [...], "M": [[...]], "b": [...], "B": [[...]]}.
/// Atoms and scalar raw penalties are applied componentwise to reach dim.
PlqPenalty penalty_from_json(const nlohmann::json& spec, Eigen::Index dim);

/// A single spec or an array of per-step specs.
std::vector<PlqPenalty> penalties_from_json(const nlohmann::json& spec, Eigen::Index dim);

/// Short form used on the command line: "l2", "l1:1", "huber:1.5", "vapnik:0.1".
nlohmann::json penalty_spec_from_string(const std::string& text);

/// Reads an N x cols CSV of numbers. A non-numeric first row is treated as a
/// header. Throws InvalidArgument naming the row (1-based file line) on errors.
std::vector<Eigen::VectorXd> read_csv(const std::filesystem::path& path, Eigen::Index cols);

/// Writes rows with a header line and 17 significant digits.
void write_csv(const std::filesystem::path& path, const std::vector<Eigen::VectorXd>& rows,
               const std::string& column_prefix);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace plqks::io
