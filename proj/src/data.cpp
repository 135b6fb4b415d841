#include "netpred/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "netpred/errors.hpp"

namespace netpred {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& s, long& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

void validate_spec(const std::vector<VariableSpec>& spec) {
  std::unordered_set<std::string> names;
  for (const auto& v : spec) {
    if (v.name.empty()) throw DataError("variable with empty name");
    if (!names.insert(v.name).second)
      throw DataError("duplicate variable name: " + v.name);
    if (v.kind == VarKind::continuous && v.levels != 1)
      throw DataError("continuous variable " + v.name + " must have levels = 1");
    if (v.kind == VarKind::categorical && v.levels < 2)
      throw DataError("categorical variable " + v.name + " must have levels >= 2");
  }
}

}  // namespace

Dataset::Dataset(std::vector<VariableSpec> spec, Eigen::MatrixXd values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  validate_spec(spec_);
  if (static_cast<std::size_t>(values_.cols()) != spec_.size())
    throw DataError("value matrix has " + std::to_string(values_.cols()) +
                    " columns but spec declares " + std::to_string(spec_.size()));
  for (int j = 0; j < p(); ++j) {
    const auto& v = spec_[static_cast<std::size_t>(j)];
    for (int i = 0; i < n(); ++i) {
      const double x = values_(i, j);
      if (!std::isfinite(x))
        throw DataError("missing or non-finite cell at row " + std::to_string(i + 1) +
                        ", column " + v.name);
      if (v.kind == VarKind::categorical) {
        const double r = std::nearbyint(x);
        if (r != x || r < 1 || r > v.levels)
          throw DataError("category code out of range [1," + std::to_string(v.levels) +
                          "] at row " + std::to_string(i + 1) + ", column " + v.name);
      }
    }
  }
}

Dataset Dataset::with_transform(std::vector<VariableSpec> spec, Eigen::MatrixXd values,
                                Eigen::VectorXd means, std::optional<Eigen::VectorXd> scales) {
  Dataset d(std::move(spec), std::move(values));
  d.centering_means_ = std::move(means);
  d.scales_ = std::move(scales);
  return d;
}

std::vector<VariableSpec> load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spec file: " + path);
  std::vector<VariableSpec> spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split_csv_line(t);
    if (cells.size() != 3)
      throw DataError("spec file " + path + " line " + std::to_string(lineno) +
                      ": expected `name,kind,levels`");
    VariableSpec v;
    v.name = cells[0];
    const std::string& kind = cells[1];
    if (kind == "continuous" || kind == "g")
      v.kind = VarKind::continuous;
    else if (kind == "categorical" || kind == "c")
      v.kind = VarKind::categorical;
    else
      throw DataError("spec file " + path + " line " + std::to_string(lineno) +
                      ": unknown kind `" + kind + "`");
    long levels = 0;
    if (!parse_int(cells[2], levels) || levels < 1)
      throw DataError("spec file " + path + " line " + std::to_string(lineno) +
                      ": bad level count `" + cells[2] + "`");
    v.levels = static_cast<int>(levels);
    spec.push_back(std::move(v));
  }
  validate_spec(spec);
  return spec;
}

std::string spec_to_text(const std::vector<VariableSpec>& spec) {
  std::string out;
  for (const auto& v : spec) {
    out += v.name;
    out += v.kind == VarKind::continuous ? ",continuous," : ",categorical,";
    out += std::to_string(v.levels);
    out += '\n';
  }
  return out;
}

void save_spec_file(const std::string& path, const std::vector<VariableSpec>& spec,
                    const std::vector<std::string>& comment_lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write spec file: " + path);
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << spec_to_text(spec);
  if (!out) throw DataError("failed writing spec file: " + path);
}

std::string spec_hash(const std::vector<VariableSpec>& spec) {
  const std::string text = spec_to_text(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Dataset load_csv(const std::string& path, const std::vector<VariableSpec>& spec) {
  validate_spec(spec);
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file: " + path);

  std::string line;
  std::vector<std::string> header;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split_csv_line(t);
    break;
  }
  if (header.empty()) throw DataError("data file has no header row: " + path);
  if (header.size() != spec.size())
    throw DataError("header has " + std::to_string(header.size()) +
                    " columns but spec declares " + std::to_string(spec.size()));
  for (std::size_t j = 0; j < spec.size(); ++j)
    if (header[j] != spec[j].name)
      throw DataError("header column " + std::to_string(j + 1) + " is `" + header[j] +
                      "` but spec declares `" + spec[j].name + "`");

  const int p = static_cast<int>(spec.size());
  std::vector<std::vector<std::string>> raw_rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto cells = split_csv_line(t);
    if (static_cast<int>(cells.size()) != p)
      throw DataError("row at line " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(p));
    raw_rows.push_back(std::move(cells));
  }
  const int n = static_cast<int>(raw_rows.size());
  if (n == 0) throw DataError("data file has no rows: " + path);

  Eigen::MatrixXd values(n, p);
  for (int j = 0; j < p; ++j) {
    const auto& v = spec[static_cast<std::size_t>(j)];
    if (v.kind == VarKind::continuous) {
      for (int i = 0; i < n; ++i) {
        double x;
        if (!parse_double(raw_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], x) ||
            !std::isfinite(x))
          throw DataError("unparseable continuous cell at data row " + std::to_string(i + 1) +
                          ", column " + v.name);
        values(i, j) = x;
      }
      continue;
    }
    // Categorical: integer cells are codes; otherwise labels mapped by
    // first appearance.
    bool all_codes = true;
    for (int i = 0; i < n && all_codes; ++i) {
      long code;
      all_codes = parse_int(raw_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], code);
    }
    if (all_codes) {
      for (int i = 0; i < n; ++i) {
        long code = 0;
        parse_int(raw_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], code);
        if (code < 1 || code > v.levels)
          throw DataError("category code out of range [1," + std::to_string(v.levels) +
                          "] at data row " + std::to_string(i + 1) + ", column " + v.name);
        values(i, j) = static_cast<double>(code);
      }
    } else {
      std::unordered_map<std::string, int> codes;
      for (int i = 0; i < n; ++i) {
        const std::string& label = raw_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        auto [it, inserted] = codes.emplace(label, static_cast<int>(codes.size()) + 1);
        if (inserted && it->second > v.levels)
          throw DataError("column " + v.name + " has more than " + std::to_string(v.levels) +
                          " distinct labels (saw `" + label + "` at data row " +
                          std::to_string(i + 1) + ")");
        values(i, j) = static_cast<double>(it->second);
      }
    }
  }
  return Dataset(spec, std::move(values));
}

void save_csv(const std::string& path, const Dataset& d,
              const std::vector<std::string>& comment_lines) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write data file: " + path);
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  const auto& spec = d.spec();
  for (std::size_t j = 0; j < spec.size(); ++j)
    out << spec[j].name << (j + 1 < spec.size() ? "," : "\n");
  char buf[40];
  for (int i = 0; i < d.n(); ++i) {
    for (int j = 0; j < d.p(); ++j) {
      if (d.var(j).kind == VarKind::categorical) {
        out << d.code(i, j);
      } else {
        std::snprintf(buf, sizeof(buf), "%.17g", d.value(i, j));
        out << buf;
      }
      out << (j + 1 < d.p() ? "," : "\n");
    }
  }
  if (!out) throw DataError("failed writing data file: " + path);
}

TimeIndex load_time_index(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open time index file: " + path);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split_csv_line(t);
    break;
  }
  if (header.size() != 2 || header[0] != "day" || header[1] != "beep")
    throw DataError("time index file must have header `day,beep`: " + path);
  TimeIndex time;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split_csv_line(t);
    long day = 0, beep = 0;
    if (cells.size() != 2 || !parse_int(cells[0], day) || !parse_int(cells[1], beep))
      throw DataError("bad time index row at line " + std::to_string(lineno));
    time.push_back(TimeStamp{static_cast<int>(day), static_cast<int>(beep)});
  }
  return time;
}

void validate_time_index(const TimeIndex& time, int n) {
  if (n >= 0 && static_cast<int>(time.size()) != n)
    throw DataError("time index has " + std::to_string(time.size()) +
                    " rows but dataset has " + std::to_string(n));
  for (std::size_t i = 1; i < time.size(); ++i) {
    const auto& a = time[i - 1];
    const auto& b = time[i];
    const bool ordered = b.day > a.day || (b.day == a.day && b.beep > a.beep);
    if (!ordered)
      throw DataError("unordered time index at row " + std::to_string(i + 1));
  }
}

Dataset center_continuous(const Dataset& d) {
  if (d.centered()) throw DataError("dataset is already centered");
  Eigen::MatrixXd values = d.values();
  Eigen::VectorXd means = Eigen::VectorXd::Zero(d.p());
  for (int j = 0; j < d.p(); ++j) {
    if (d.var(j).kind != VarKind::continuous) continue;
    means[j] = values.col(j).mean();
    values.col(j).array() -= means[j];
  }
  return Dataset::with_transform(d.spec(), std::move(values), std::move(means), std::nullopt);
}

Dataset zscore_continuous(const Dataset& d) {
  if (d.centered()) throw DataError("dataset is already centered");
  Eigen::MatrixXd values = d.values();
  Eigen::VectorXd means = Eigen::VectorXd::Zero(d.p());
  Eigen::VectorXd scales = Eigen::VectorXd::Ones(d.p());
  for (int j = 0; j < d.p(); ++j) {
    if (d.var(j).kind != VarKind::continuous) continue;
    means[j] = values.col(j).mean();
    values.col(j).array() -= means[j];
    if (d.n() > 1) {
      const double sd = std::sqrt(values.col(j).squaredNorm() / (d.n() - 1));
      if (sd > 0) {
        scales[j] = sd;
        values.col(j) /= sd;
      }
    }
  }
  return Dataset::with_transform(d.spec(), std::move(values), std::move(means),
                                 std::move(scales));
}

Dataset apply_transform(const Dataset& d, const Eigen::VectorXd& means,
                        const std::optional<Eigen::VectorXd>& scales) {
  if (d.centered()) throw DataError("dataset is already centered");
  if (means.size() != d.p()) throw DataError("transform dimension mismatch");
  if (scales && scales->size() != d.p()) throw DataError("transform dimension mismatch");
  Eigen::MatrixXd values = d.values();
  for (int j = 0; j < d.p(); ++j) {
    if (d.var(j).kind != VarKind::continuous) continue;
    values.col(j).array() -= means[j];
    if (scales) values.col(j) /= (*scales)[j];
  }
  return Dataset::with_transform(d.spec(), std::move(values), means, scales);
}

Eigen::MatrixXd encode_categorical(const Eigen::VectorXd& column, int levels) {
  if (levels < 1) throw DataError("level count must be positive");
  const int n = static_cast<int>(column.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, levels);
  for (int i = 0; i < n; ++i) {
    const double x = column[i];
    const double r = std::nearbyint(x);
    if (r != x || r < 1 || r > levels)
      throw DataError("category code out of range [1," + std::to_string(levels) +
                      "] at row " + std::to_string(i + 1));
    out(i, static_cast<int>(r) - 1) = 1.0;
  }
  return out;
}

Eigen::VectorXd marginal_distribution(const Eigen::VectorXd& column, int levels) {
  const int n = static_cast<int>(column.size());
  if (n < 1) throw DataError("empty column has no marginal distribution");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(levels);
  for (int i = 0; i < n; ++i) {
    const double x = column[i];
    const double r = std::nearbyint(x);
    if (r != x || r < 1 || r > levels)
      throw DataError("category code out of range [1," + std::to_string(levels) +
                      "] at row " + std::to_string(i + 1));
    counts[static_cast<int>(r) - 1] += 1.0;
  }
  return counts / static_cast<double>(n);
}

}  // namespace netpred
