#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netpred {

// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

struct RunConfig {
  enum class Command { fit_mgm, fit_var, predict, simulate, viz };
  Command command = Command::fit_mgm;

  std::string data_path;
  std::string spec_path;
  std::string model_path;
  std::string out_path;
  std::string table_path;
  std::string report_path;
  std::string dot_path;
  std::string time_index_path;
  std::string params_path;
  std::string spec_out_path;

  std::string rule = "or";
  std::vector<int> lags = {1};
  int folds = 10;
  int n_lambda = 50;
  double lambda_min_ratio = 1e-3;
  std::uint64_t seed = 0;
  int threads = 1;
  bool zscore = false;
  bool binary_sign = false;

  std::string sim_kind;  // ggm | ising | var
  int sim_n = 0;
  int iterations = 300;  // layout iterations for viz
};

// Executes one command; writes declared artifacts atomically (staged under a
// .tmp suffix, renamed after every output succeeded). Throws UsageError /
// DataError / NumericalError.
void run(const RunConfig& config);

// Parses argv, runs, and maps errors onto exit codes with a one-line
// machine-parseable message on stderr: `netpred: error: [kind] message`.
int cli_main(int argc, const char* const* argv);

}  // namespace netpred
