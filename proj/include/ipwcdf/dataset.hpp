#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ipwcdf {

// Observational sample: outcome y, binary treatment a and confounders x (n x p).
// Instances are validated on construction and immutable afterwards.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::VectorXd a, Eigen::MatrixXd x,
          std::vector<std::string> col_names = {});

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& a() const { return a_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const std::vector<std::string>& col_names() const { return col_names_; }

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return x_.cols(); }
  Eigen::Index n_treated() const { return n_treated_; }
  Eigen::Index n_control() const { return n() - n_treated_; }

  // Rows selected by index, in the given order (used for resampling).
  Dataset subset(const std::vector<Eigen::Index>& rows) const;

 private:
  Eigen::VectorXd y_;
  Eigen::VectorXd a_;
  Eigen::MatrixXd x_;
  std::vector<std::string> col_names_;
  Eigen::Index n_treated_ = 0;
};

struct ColumnSpec {
  std::string outcome;
  std::string treatment;
  std::vector<std::string> confounders;

  // Throws ValidationError unless names are distinct and confounders non-empty.
  void validate() const;
};

enum class MissingPolicy { drop_row, fail };

struct LoadResult {
  Dataset data;
  std::size_t dropped = 0;
};

// Comma-separated file with a header row. Entries that are blank, "NA" or not
// parseable as numbers count as missing.
LoadResult load_csv(const std::string& path, const ColumnSpec& spec,
                    MissingPolicy missing_policy = MissingPolicy::drop_row);

// Same as load_csv but from in-memory text.
LoadResult parse_csv(const std::string& text, const ColumnSpec& spec,
                     MissingPolicy missing_policy = MissingPolicy::drop_row);

struct ArmSplit {
  std::vector<Eigen::Index> treated;
  std::vector<Eigen::Index> control;
};

ArmSplit arm_split(const Dataset& d);

nlohmann::json to_json(const Dataset& d);

}  // namespace ipwcdf
