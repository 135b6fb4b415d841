#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace netpred {

enum class VarKind { continuous, categorical };

struct VariableSpec {
  std::string name;
  VarKind kind = VarKind::continuous;
  int levels = 1;  // 1 for continuous, K >= 2 for categorical

  bool operator==(const VariableSpec&) const = default;
};

// Within-day measurement stamp for time-series rows.
struct TimeStamp {
  int day = 0;
  int beep = 0;

  bool operator==(const TimeStamp&) const = default;
};

using TimeIndex = std::vector<TimeStamp>;

// Immutable typed column store. Continuous cells hold reals; categorical
// cells hold integer codes in [1, K] (stored as doubles, validated exact).
class Dataset {
 public:
  Dataset(std::vector<VariableSpec> spec, Eigen::MatrixXd values);

  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }
  const std::vector<VariableSpec>& spec() const { return spec_; }
  const VariableSpec& var(int j) const { return spec_[static_cast<std::size_t>(j)]; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd column(int j) const { return values_.col(j); }
  double value(int row, int col) const { return values_(row, col); }
  int code(int row, int col) const { return static_cast<int>(values_(row, col)); }

  bool centered() const { return centering_means_.has_value(); }
  // Recorded per-column means (0 for categorical columns); set by centering.
  const Eigen::VectorXd& centering_means() const { return *centering_means_; }
  // Recorded per-column scale divisors; set when z-scored.
  const std::optional<Eigen::VectorXd>& scales() const { return scales_; }

  // Internal constructor used by the centering operations.
  static Dataset with_transform(std::vector<VariableSpec> spec, Eigen::MatrixXd values,
                                Eigen::VectorXd means, std::optional<Eigen::VectorXd> scales);

 private:
  Dataset() = default;
  std::vector<VariableSpec> spec_;
  Eigen::MatrixXd values_;
  std::optional<Eigen::VectorXd> centering_means_;
  std::optional<Eigen::VectorXd> scales_;
};

// Sidecar spec file: one `name,kind,levels` line per variable; kind is
// `continuous` or `categorical` (`g` / `c` accepted); lines starting with
// `#` are ignored.
std::vector<VariableSpec> load_spec_file(const std::string& path);
std::string spec_to_text(const std::vector<VariableSpec>& spec);
void save_spec_file(const std::string& path, const std::vector<VariableSpec>& spec,
                    const std::vector<std::string>& comment_lines = {});

// FNV-1a 64 over the canonical sidecar text; embedded in output artifacts.
std::string spec_hash(const std::vector<VariableSpec>& spec);

// CSV ingestion. Header row must match the spec names in order. Continuous
// cells parse as reals. Categorical cells that parse as integers are taken
// as codes and must lie in [1, K]; otherwise the column's distinct labels
// are mapped to 1..K in order of first appearance.
Dataset load_csv(const std::string& path, const std::vector<VariableSpec>& spec);
void save_csv(const std::string& path, const Dataset& d,
              const std::vector<std::string>& comment_lines = {});

// day,beep CSV for --time-index.
TimeIndex load_time_index(const std::string& path);
// Throws unless stamps are sorted by (day, beep) and strictly increasing
// within each day; n >= 0 checks the length against the dataset.
void validate_time_index(const TimeIndex& time, int n);

// Subtracts the sample mean from each continuous column and records it.
// Categorical columns are untouched. Rejects an already-centered input.
Dataset center_continuous(const Dataset& d);

// Centering followed by division by the sample standard deviation (n-1).
// Constant columns keep scale 1.
Dataset zscore_continuous(const Dataset& d);

// Applies a stored training transform (means, optional scales) to raw data;
// used for out-of-sample evaluation.
Dataset apply_transform(const Dataset& d, const Eigen::VectorXd& means,
                        const std::optional<Eigen::VectorXd>& scales);

// Overcomplete one-hot encoding: all K indicator columns, no reference
// category dropped. Row i has a single 1 in column code_i - 1.
Eigen::MatrixXd encode_categorical(const Eigen::VectorXd& column, int levels);

// p_k = count(code == k) / n.
Eigen::VectorXd marginal_distribution(const Eigen::VectorXd& column, int levels);

}  // namespace netpred
