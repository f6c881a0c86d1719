#include "ipwcdf/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ipwcdf/errors.hpp"

namespace ipwcdf {

Dataset::Dataset(Eigen::VectorXd y, Eigen::VectorXd a, Eigen::MatrixXd x,
                 std::vector<std::string> col_names)
    : y_(std::move(y)), a_(std::move(a)), x_(std::move(x)), col_names_(std::move(col_names)) {
  const Eigen::Index n = y_.size();
  if (n < 2) throw EmptyDataError("dataset needs at least 2 rows, got " + std::to_string(n));
  if (a_.size() != n || x_.rows() != n)
    throw ValidationError("y, a and x must have the same number of rows");
  if (col_names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) col_names_.push_back("X" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(col_names_.size()) != x_.cols())
    throw ValidationError("col_names must have one entry per confounder column");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a_[i] != 0.0 && a_[i] != 1.0)
      throw ValidationError("treatment value at row " + std::to_string(i) + " is not 0/1");
    if (!std::isfinite(y_[i])) throw ValidationError("non-finite outcome at row " + std::to_string(i));
  }
  if (!x_.allFinite()) throw ValidationError("non-finite confounder value");
  n_treated_ = static_cast<Eigen::Index>(a_.sum());
  if (n_treated_ == 0 || n_treated_ == n)
    throw ValidationError("both treatment arms must be non-empty");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd y(m), a(m);
  Eigen::MatrixXd x(m, p());
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = rows[static_cast<std::size_t>(r)];
    y[r] = y_[i];
    a[r] = a_[i];
    x.row(r) = x_.row(i);
  }
  return Dataset(std::move(y), std::move(a), std::move(x), col_names_);
}

void ColumnSpec::validate() const {
  if (confounders.empty()) throw ValidationError("at least one confounder column is required");
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (name.empty()) throw ValidationError("empty column name");
    if (!seen.insert(name).second) throw ValidationError("column '" + name + "' named twice");
  };
  add(outcome);
  add(treatment);
  for (const auto& c : confounders) add(c);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == ".") return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

LoadResult parse_csv(const std::string& text, const ColumnSpec& spec, MissingPolicy missing_policy) {
  spec.validate();
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input has no header row");
  const auto header = split_csv_line(line);
  std::unordered_map<std::string, std::size_t> col_of;
  for (std::size_t j = 0; j < header.size(); ++j) col_of.emplace(trim(header[j]), j);
  auto locate = [&](const std::string& name) {
    const auto it = col_of.find(name);
    if (it == col_of.end()) throw SchemaError("column '" + name + "' not found in CSV header");
    return it->second;
  };
  const std::size_t y_col = locate(spec.outcome);
  const std::size_t a_col = locate(spec.treatment);
  std::vector<std::size_t> x_cols;
  for (const auto& c : spec.confounders) x_cols.push_back(locate(c));

  std::vector<double> ys, as, xs;
  std::size_t dropped = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    auto field = [&](std::size_t j) -> std::optional<double> {
      if (j >= fields.size()) return std::nullopt;
      return parse_number(fields[j]);
    };
    const auto yv = field(y_col);
    const auto av = field(a_col);
    std::vector<double> row;
    bool missing = !yv || !av;
    for (const std::size_t j : x_cols) {
      const auto v = field(j);
      if (!v) missing = true;
      row.push_back(v.value_or(0.0));
    }
    if (av && *av != 0.0 && *av != 1.0)
      throw ValidationError("treatment value on line " + std::to_string(line_no) + " is not 0/1");
    if (missing) {
      if (missing_policy == MissingPolicy::fail)
        throw ValidationError("missing or non-numeric entry on line " + std::to_string(line_no));
      ++dropped;
      continue;
    }
    ys.push_back(*yv);
    as.push_back(*av);
    xs.insert(xs.end(), row.begin(), row.end());
  }
  if (ys.empty()) throw EmptyDataError("no complete rows in CSV input");
  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto p = static_cast<Eigen::Index>(x_cols.size());
  Eigen::MatrixXd x =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          xs.data(), n, p);
  return LoadResult{Dataset(Eigen::Map<const Eigen::VectorXd>(ys.data(), n),
                            Eigen::Map<const Eigen::VectorXd>(as.data(), n), std::move(x),
                            spec.confounders),
                    dropped};
}

LoadResult load_csv(const std::string& path, const ColumnSpec& spec, MissingPolicy missing_policy) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SchemaError("cannot open CSV file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_csv(buf.str(), spec, missing_policy);
}

ArmSplit arm_split(const Dataset& d) {
  ArmSplit s;
  for (Eigen::Index i = 0; i < d.n(); ++i) (d.a()[i] == 1.0 ? s.treated : s.control).push_back(i);
  return s;
}

nlohmann::json to_json(const Dataset& d) {
  nlohmann::json j;
  j["n"] = d.n();
  j["p"] = d.p();
  j["col_names"] = d.col_names();
  j["y"] = std::vector<double>(d.y().data(), d.y().data() + d.n());
  j["a"] = std::vector<double>(d.a().data(), d.a().data() + d.n());
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(d.p()));
    for (Eigen::Index k = 0; k < d.p(); ++k) r[static_cast<std::size_t>(k)] = d.x()(i, k);
    rows.push_back(std::move(r));
  }
  j["x"] = std::move(rows);
  return j;
}

}  // namespace ipwcdf
