#include <smkl/data_io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <utility>

namespace smkl {

std::string trim_copy(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_text_lines(const std::string& path,
                                         const std::string& what) {
  std::ifstream in(path);
  if (!in) throw Error("io", what + ": cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim_copy(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

// Splits on every delimiter so trailing/empty fields are visible to callers.
std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string cell(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row + 1) + ", column " +
         std::to_string(col + 1);
}

double parse_double_field(const std::string& field, std::size_t row,
                          std::size_t col) {
  const std::string t = trim_copy(field);
  if (t.empty()) throw Error("parse", cell(row, col) + ": empty field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw Error("parse", cell(row, col) + ": not a number: '" + t + "'");
  if (!std::isfinite(v))
    throw Error("parse", cell(row, col) + ": non-finite value '" + t + "'");
  return v;
}

long long parse_int_text(const std::string& text, const std::string& where) {
  const std::string t = trim_copy(text);
  if (t.empty()) throw Error("parse", where + ": empty integer");
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size())
    throw Error("parse", where + ": not an integer: '" + t + "'");
  return v;
}

double parse_double_text(const std::string& text, const std::string& where) {
  const std::string t = trim_copy(text);
  if (t.empty()) throw Error("parse", where + ": empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw Error("parse", where + ": not a finite number: '" + t + "'");
  return v;
}

bool parse_bool_text(const std::string& text, const std::string& where) {
  const std::string t = trim_copy(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw Error("parse", where + ": expected true/false/1/0, got '" + t + "'");
}

}  // namespace

void validate(const SolverConfig& cfg) {
  auto bad = [](const std::string& m) { throw Error("domain", "config: " + m); };
  if (!(cfg.alpha > 0)) bad("alpha must be positive");
  if (!(cfg.beta > 0)) bad("beta must be positive");
  if (!(cfg.gamma > 0)) bad("gamma must be positive");
  if (cfg.c < 2) bad("c must be at least 2");
  if (cfg.max_iter < 1) bad("max_iter must be at least 1");
  if (!(cfg.rel_tol > 0 && cfg.rel_tol < 1))
    bad("rel_tol must be in (0, 1)");
  if (cfg.kmeans_restarts < 1) bad("kmeans_restarts must be at least 1");
  if (!(cfg.epsilon_w > 0)) bad("epsilon_w must be positive");
  if (!(cfg.ridge > 0)) bad("ridge must be positive");
}

DataMatrix load_dense_matrix(const std::string& path, char delimiter) {
  const auto lines = read_text_lines(path, "load_dense_matrix");
  if (lines.empty())
    throw Error("parse", "load_dense_matrix: '" + path + "' is empty");
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  std::size_t d = 0;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r], delimiter);
    if (r == 0) {
      d = fields.size();
    } else if (fields.size() != d) {
      throw Error("parse", "row " + std::to_string(r + 1) + " has " +
                               std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(d));
    }
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j)
      row[j] = parse_double_field(fields[j], r, j);
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2)
    throw Error("domain", "load_dense_matrix: need at least 2 rows, got " +
                              std::to_string(rows.size()));
  DataMatrix out;
  out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

void save_dense_matrix(const std::string& path, const Matrix& values,
                       char delimiter) {
  std::ofstream out(path);
  if (!out)
    throw Error("io", "save_dense_matrix: cannot open '" + path + "'");
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (j) out << delimiter;
      out << format_g17(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error("io", "save_dense_matrix: write failed: '" + path + "'");
}

LabelVector load_labels(const std::string& path, Index n) {
  const auto lines = read_text_lines(path, "load_labels");
  if (static_cast<Index>(lines.size()) != n)
    throw Error("parse", "load_labels: expected " + std::to_string(n) +
                             " lines, got " + std::to_string(lines.size()));
  LabelVector out;
  out.labels.resize(lines.size());
  int max_label = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const long long v =
        parse_int_text(lines[i], "line " + std::to_string(i + 1));
    if (v < -1)
      throw Error("domain", "load_labels: line " + std::to_string(i + 1) +
                                ": label " + std::to_string(v) +
                                " is below the -1 sentinel");
    out.labels[i] = static_cast<int>(v);
    max_label = std::max(max_label, out.labels[i]);
  }
  if (max_label < 0)
    throw Error("domain", "load_labels: all labels are -1, no class information");
  out.num_classes = max_label + 1;
  return out;
}

void save_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw Error("io", "save_labels: cannot open '" + path + "'");
  for (int y : labels) out << y << '\n';
  if (!out) throw Error("io", "save_labels: write failed: '" + path + "'");
}

LabelMask split_labeled(const LabelVector& labels, double fraction,
                        std::uint64_t seed) {
  const int n = static_cast<int>(labels.labels.size());
  if (n == 0) throw Error("domain", "split_labeled: empty label vector");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw Error("domain", "split_labeled: fraction must be in (0, 1]");

  std::vector<std::vector<int>> buckets(
      std::max(labels.num_classes, 1));
  std::vector<int> forced_unlabeled;
  for (int i = 0; i < n; ++i) {
    const int y = labels.labels[i];
    if (y < 0) {
      forced_unlabeled.push_back(i);
    } else {
      if (y >= static_cast<int>(buckets.size()))
        throw Error("domain", "split_labeled: label out of range");
      buckets[y].push_back(i);
    }
  }
  std::vector<int> present;
  long long avail = 0;
  for (int k = 0; k < static_cast<int>(buckets.size()); ++k) {
    if (!buckets[k].empty()) {
      present.push_back(k);
      avail += static_cast<long long>(buckets[k].size());
    }
  }
  if (present.empty())
    throw Error("domain", "split_labeled: no labeled samples");

  long long l_target = std::llround(fraction * n);
  if (l_target < static_cast<long long>(present.size()))
    throw Error("domain",
                "split_labeled: fraction " + std::to_string(fraction) +
                    " yields " + std::to_string(l_target) +
                    " labeled samples, fewer than the " +
                    std::to_string(present.size()) + " classes present");
  l_target = std::min(l_target, avail);

  // Largest-remainder apportionment of l_target slots across classes.
  std::vector<long long> quota(buckets.size(), 0);
  std::vector<std::pair<double, int>> by_remainder;  // (-remainder, class)
  long long base_sum = 0;
  for (int k : present) {
    const double ideal = fraction * static_cast<double>(buckets[k].size());
    quota[k] = std::min(static_cast<long long>(std::floor(ideal)),
                        static_cast<long long>(buckets[k].size()));
    base_sum += quota[k];
    by_remainder.emplace_back(-(ideal - std::floor(ideal)), k);
  }
  std::sort(by_remainder.begin(), by_remainder.end());
  long long extra = l_target - base_sum;
  while (extra > 0) {
    bool gave = false;
    for (const auto& [neg_rem, k] : by_remainder) {
      (void)neg_rem;
      if (extra == 0) break;
      if (quota[k] < static_cast<long long>(buckets[k].size())) {
        ++quota[k];
        --extra;
        gave = true;
      }
    }
    if (!gave) break;  // every class at capacity
  }
  // Guarantee one labeled sample per present class; a donor with quota >= 2
  // always exists because l_target >= the number of present classes.
  for (int k : present) {
    if (quota[k] >= 1) continue;
    int donor = -1;
    long long best = 1;
    for (int j : present) {
      if (quota[j] > best) {
        best = quota[j];
        donor = j;
      }
    }
    if (donor >= 0) --quota[donor];
    quota[k] = 1;
  }

  std::mt19937_64 rng(seed);
  LabelMask mask;
  for (int k : present) {
    std::vector<int> idx = buckets[k];
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (static_cast<long long>(t) < quota[k])
        mask.labeled_idx.push_back(idx[t]);
      else
        mask.unlabeled_idx.push_back(idx[t]);
    }
  }
  mask.unlabeled_idx.insert(mask.unlabeled_idx.end(), forced_unlabeled.begin(),
                            forced_unlabeled.end());
  std::sort(mask.labeled_idx.begin(), mask.labeled_idx.end());
  std::sort(mask.unlabeled_idx.begin(), mask.unlabeled_idx.end());
  return mask;
}

bool set_config_field(SolverConfig& cfg, const std::string& key,
                      const std::string& value) {
  const std::string where = "config key '" + key + "'";
  if (key == "alpha") {
    cfg.alpha = parse_double_text(value, where);
  } else if (key == "beta") {
    cfg.beta = parse_double_text(value, where);
  } else if (key == "gamma") {
    cfg.gamma = parse_double_text(value, where);
  } else if (key == "c") {
    cfg.c = static_cast<int>(parse_int_text(value, where));
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(parse_int_text(value, where));
  } else if (key == "rel_tol") {
    cfg.rel_tol = parse_double_text(value, where);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int_text(value, where));
  } else if (key == "adaptive_alpha") {
    cfg.adaptive_alpha = parse_bool_text(value, where);
  } else if (key == "kmeans_restarts") {
    cfg.kmeans_restarts = static_cast<int>(parse_int_text(value, where));
  } else if (key == "epsilon_w") {
    cfg.epsilon_w = parse_double_text(value, where);
  } else if (key == "ridge") {
    cfg.ridge = parse_double_text(value, where);
  } else {
    return false;
  }
  return true;
}

SolverConfig load_config(const std::string& path) {
  SolverConfig cfg;
  const auto lines = read_text_lines(path, "load_config");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("parse", "load_config: line " + std::to_string(i + 1) +
                               ": expected key=value, got '" + line + "'");
    const std::string key = trim_copy(line.substr(0, eq));
    const std::string value = trim_copy(line.substr(eq + 1));
    if (!set_config_field(cfg, key, value))
      throw Error("parse", "load_config: line " + std::to_string(i + 1) +
                               ": unknown key '" + key + "'");
  }
  validate(cfg);
  return cfg;
}

}  // namespace smkl
