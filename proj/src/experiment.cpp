#include <smkl/experiment.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include <smkl/evaluation.hpp>
#include <smkl/kernels.hpp>
#include <smkl/solver.hpp>

namespace smkl {

namespace {

namespace fs = std::filesystem;

std::vector<double> parse_positive_list(const std::string& value,
                                        const std::string& where) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = value.find(',', start);
    const std::string field = trim_copy(
        value.substr(start, comma == std::string::npos ? std::string::npos
                                                       : comma - start));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != field.size() || field.empty() || !std::isfinite(v))
      throw Error("parse", where + ": bad number '" + field + "'");
    if (!(v > 0)) throw Error("domain", where + ": values must be positive");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int parse_int_field(const std::string& value, const std::string& where) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(trim_copy(value), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != trim_copy(value).size())
    throw Error("parse", where + ": bad integer '" + value + "'");
  return static_cast<int>(v);
}

double parse_double_fieldv(const std::string& value, const std::string& where) {
  std::size_t used = 0;
  double v = 0;
  const std::string t = trim_copy(value);
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(v))
    throw Error("parse", where + ": bad number '" + value + "'");
  return v;
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::string& path) {
  ExperimentSpec spec;
  const std::vector<std::string> lines =
      read_text_lines(path, "experiment spec");
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string line = lines[li];
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const std::string where = "experiment spec line " + std::to_string(li + 1);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("parse", where + ": expected key=value");
    const std::string key = trim_copy(line.substr(0, eq));
    const std::string value = trim_copy(line.substr(eq + 1));

    if (key == "data") {
      spec.data_path = value;
    } else if (key == "labels") {
      spec.labels_path = value;
    } else if (key == "mode") {
      spec.mode = value;
    } else if (key == "method") {
      spec.method = value;
    } else if (key == "recipe") {
      spec.recipe = value;
    } else if (key == "kernel_index") {
      if (value == "best") {
        spec.kernel_best = true;
        spec.kernel_index = -1;
      } else {
        spec.kernel_index = parse_int_field(value, where);
        spec.kernel_best = false;
      }
    } else if (key == "label_fraction") {
      spec.label_fraction = parse_double_fieldv(value, where);
    } else if (key == "repeats") {
      spec.repeats = parse_int_field(value, where);
    } else if (key == "out_dir") {
      spec.out_dir = value;
    } else if (key == "workers") {
      spec.workers = parse_int_field(value, where);
    } else if (key == "dump_matrices") {
      spec.dump_matrices = parse_int_field(value, where) != 0;
    } else if (key == "sweep.alpha") {
      spec.sweep_alpha = parse_positive_list(value, where);
    } else if (key == "sweep.beta") {
      spec.sweep_beta = parse_positive_list(value, where);
    } else if (key == "sweep.gamma") {
      spec.sweep_gamma = parse_positive_list(value, where);
    } else if (key.rfind("solver.", 0) == 0) {
      const std::string field = key.substr(7);
      try {
        if (!set_config_field(spec.solver, field, value))
          throw Error("parse", where + ": unknown key '" + key + "'");
      } catch (const Error& e) {
        if (e.kind() == "parse" && std::string(e.what()).find(where) ==
                                       std::string::npos)
          throw Error("parse", where + ": " + e.what());
        throw;
      }
      if (field == "c") spec.solver_c_set = true;
    } else {
      throw Error("parse", where + ": unknown key '" + key + "'");
    }
  }
  validate(spec);
  return spec;
}

void validate(const ExperimentSpec& spec) {
  if (spec.data_path.empty() || spec.labels_path.empty())
    throw Error("domain", "experiment spec: data= and labels= are required");
  if (spec.mode != "clustering" && spec.mode != "ssl")
    throw Error("domain", "experiment spec: mode must be clustering or ssl");
  if (spec.method != "smkl" && spec.method != "kgl" && spec.method != "pmkl")
    throw Error("domain", "experiment spec: method must be smkl, kgl or pmkl");
  if (spec.mode == "ssl" && spec.method != "smkl")
    throw Error("domain",
                "experiment spec: ssl mode runs on the smkl method only");
  if (!spec.recipe.empty() && spec.recipe != "clustering12" &&
      spec.recipe != "ssl7")
    throw Error("domain",
                "experiment spec: recipe must be clustering12 or ssl7");
  if (spec.method == "kgl" && !spec.kernel_best && spec.kernel_index < 0)
    throw Error("domain",
                "experiment spec: kgl needs kernel_index=<i> or "
                "kernel_index=best");
  if (spec.mode == "ssl") {
    if (!(spec.label_fraction > 0 && spec.label_fraction < 1))
      throw Error("domain",
                  "experiment spec: label_fraction must be in (0,1)");
    if (spec.repeats < 1)
      throw Error("domain", "experiment spec: repeats must be >= 1");
  }
  if (spec.workers < 1)
    throw Error("domain", "experiment spec: workers must be >= 1");
  validate(spec.solver);
}

namespace {

struct GridPoint {
  double alpha, beta, gamma;
  int kernel;  // bank index for single-kernel points, -1 otherwise
};

std::vector<GridPoint> make_grid(const ExperimentSpec& spec, int bank_size) {
  const std::vector<double> alphas =
      spec.sweep_alpha.empty() ? std::vector<double>{spec.solver.alpha}
                               : spec.sweep_alpha;
  const std::vector<double> betas =
      spec.sweep_beta.empty() ? std::vector<double>{spec.solver.beta}
                              : spec.sweep_beta;
  const std::vector<double> gammas =
      spec.sweep_gamma.empty() ? std::vector<double>{spec.solver.gamma}
                               : spec.sweep_gamma;
  std::vector<int> kernels{-1};
  if (spec.method == "kgl") {
    kernels.clear();
    if (spec.kernel_best)
      for (int i = 0; i < bank_size; ++i) kernels.push_back(i);
    else
      kernels.push_back(spec.kernel_index);
  }
  std::vector<GridPoint> grid;
  grid.reserve(alphas.size() * betas.size() * gammas.size() * kernels.size());
  for (double a : alphas)
    for (double b : betas)
      for (double g : gammas)
        for (int k : kernels) grid.push_back({a, b, g, k});
  return grid;
}

FitResult fit_point(const GridPoint& gp, const ExperimentSpec& spec,
                    const KernelBank& bank, const LabelVector& truth,
                    SolverConfig cfg, int rep, LabelMask* mask_out) {
  cfg.alpha = gp.alpha;
  cfg.beta = gp.beta;
  cfg.gamma = gp.gamma;
  if (spec.mode == "ssl") {
    cfg.seed += static_cast<std::uint64_t>(rep);
    LabelMask mask = split_labeled(truth, spec.label_fraction, cfg.seed);
    FitResult fit = fit_ssl(bank, truth, mask, cfg);
    if (mask_out) *mask_out = std::move(mask);
    return fit;
  }
  if (spec.method == "smkl") return fit_clustering(bank, cfg);
  if (spec.method == "pmkl") return fit_pmkl(bank, cfg);
  return fit_kgl(bank.kernels[static_cast<std::size_t>(gp.kernel)], cfg);
}

PointResult run_point(int idx, const GridPoint& gp, const ExperimentSpec& spec,
                      const KernelBank& bank, const LabelVector& truth,
                      const SolverConfig& base) {
  PointResult r;
  r.point = idx;
  r.method = spec.method;
  r.mode = spec.mode;
  r.alpha = gp.alpha;
  r.beta = gp.beta;
  r.gamma = gp.gamma;
  if (gp.kernel >= 0)
    r.kernel = bank.kernels[static_cast<std::size_t>(gp.kernel)].kind.name();
  try {
    if (spec.mode == "clustering") {
      const FitResult fit = fit_point(gp, spec, bank, truth, base, 0, nullptr);
      const MetricReport m = evaluate(fit.labels, truth.labels);
      r.acc = m.acc;
      r.nmi = m.nmi;
      r.iterations = fit.iterations;
      r.converged = fit.converged;
      r.labels = fit.labels;
    } else {
      std::vector<double> accs;
      double nmi_sum = 0, iter_sum = 0;
      bool all_converged = true;
      for (int rep = 0; rep < spec.repeats; ++rep) {
        LabelMask mask;
        const FitResult fit = fit_point(gp, spec, bank, truth, base, rep, &mask);
        const MetricReport m =
            evaluate(fit.labels, truth.labels, mask.unlabeled_idx);
        accs.push_back(m.acc);
        nmi_sum += m.nmi;
        iter_sum += fit.iterations;
        all_converged = all_converged && fit.converged;
        if (rep == 0) r.labels = fit.labels;
      }
      const double n = static_cast<double>(accs.size());
      double mean = 0;
      for (double a : accs) mean += a;
      mean /= n;
      double var = 0;
      for (double a : accs) var += (a - mean) * (a - mean);
      r.acc = mean;
      r.stddev = accs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      r.nmi = nmi_sum / n;
      r.iterations = iter_sum / n;
      r.converged = all_converged;
    }
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.kind();
    r.labels.clear();
  } catch (const std::exception&) {
    r.failed = true;
    r.error = "internal";
    r.labels.clear();
  }
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += "\"\"";
    else quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string human_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_report_txt(std::ostream& out, const ExperimentSpec& spec,
                      const KernelBank& bank, Index n, Index d, int classes,
                      const std::vector<PointResult>& results, int best) {
  out << "# run " << utc_timestamp() << '\n';
  out << "mode=" << spec.mode << '\n';
  out << "method=" << spec.method << '\n';
  out << "recipe=" << spec.recipe << '\n';
  out << "n=" << n << '\n';
  out << "d=" << d << '\n';
  out << "classes=" << classes << '\n';
  out << "kernels=" << bank.size() << '\n';
  if (spec.mode == "ssl") {
    out << "label_fraction=" << human_g(spec.label_fraction) << '\n';
    out << "repeats=" << spec.repeats << '\n';
  }
  out << "points=" << results.size() << "\n\n";

  char buf[256];
  out << "point  kernel                alpha      beta       gamma      "
         "acc       nmi       std       iters   conv  status\n";
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%5d  %-20s  %-9s  %-9s  %-9s  ", r.point,
                  r.kernel.c_str(), human_g(r.alpha).c_str(),
                  human_g(r.beta).c_str(), human_g(r.gamma).c_str());
    out << buf;
    if (r.failed) {
      std::snprintf(buf, sizeof buf, "%-8s  %-8s  %-8s  %-6s  %-4s  failed(%s)",
                    "-", "-", "-", "-", "-", r.error.c_str());
    } else {
      char acc_s[16], nmi_s[16], std_s[16], it_s[16];
      std::snprintf(acc_s, sizeof acc_s, "%.4f", r.acc);
      std::snprintf(nmi_s, sizeof nmi_s, "%.4f", r.nmi);
      if (r.mode == "ssl")
        std::snprintf(std_s, sizeof std_s, "%.4f", r.stddev);
      else
        std::snprintf(std_s, sizeof std_s, "-");
      std::snprintf(it_s, sizeof it_s, "%g", r.iterations);
      std::snprintf(buf, sizeof buf, "%-8s  %-8s  %-8s  %-6s  %-4s  %s%s",
                    acc_s, nmi_s, std_s, it_s, r.converged ? "yes" : "no",
                    "ok", r.best ? " *best*" : "");
    }
    out << buf << '\n';
  }
  out << '\n';
  if (best < 0) {
    out << "best: none (every point failed)\n";
  } else {
    const PointResult& b = results[static_cast<std::size_t>(best)];
    out << "best: point=" << b.point;
    if (b.kernel != "-") out << " kernel=" << b.kernel;
    out << " alpha=" << human_g(b.alpha) << " beta=" << human_g(b.beta)
        << " gamma=" << human_g(b.gamma);
    char m[96];
    if (spec.mode == "ssl")
      std::snprintf(m, sizeof m, " acc=%.4f std=%.4f nmi=%.4f", b.acc,
                    b.stddev, b.nmi);
    else
      std::snprintf(m, sizeof m, " acc=%.4f nmi=%.4f", b.acc, b.nmi);
    out << m << '\n';
  }
}

}  // namespace

void emit_sweep_table(std::ostream& out,
                      const std::vector<PointResult>& results) {
  if (results.empty())
    throw Error("domain", "emit_sweep_table: no results to tabulate");
  out << "point,method,mode,kernel,alpha,beta,gamma,acc,nmi,std,iterations,"
         "converged,best,status,error\n";
  for (const auto& r : results) {
    out << r.point << ',' << csv_field(r.method) << ',' << csv_field(r.mode)
        << ',' << csv_field(r.kernel) << ',' << format_g17(r.alpha) << ','
        << format_g17(r.beta) << ',' << format_g17(r.gamma) << ',';
    if (!r.failed) {
      out << format_g17(r.acc) << ',' << format_g17(r.nmi) << ',';
      if (r.mode == "ssl") out << format_g17(r.stddev);
      out << ',' << format_g17(r.iterations) << ','
          << (r.converged ? '1' : '0');
    } else {
      out << ",,,,";
    }
    out << ',' << (r.best ? '1' : '0') << ','
        << (r.failed ? "failed" : "ok") << ',' << csv_field(r.error) << '\n';
  }
}

int run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  validate(spec);
  if (spec.recipe.empty())
    spec.recipe = spec.mode == "ssl" ? "ssl7" : "clustering12";

  const DataMatrix data = load_dense_matrix(spec.data_path);
  const LabelVector truth = load_labels(spec.labels_path, data.n());
  const KernelBank bank = build_bank(data.values, spec.recipe);
  if (spec.method == "kgl" && !spec.kernel_best &&
      spec.kernel_index >= bank.size())
    throw Error("domain", "experiment spec: kernel_index " +
                              std::to_string(spec.kernel_index) +
                              " out of range for recipe " + spec.recipe);

  SolverConfig base = spec.solver;
  if (!spec.solver_c_set) base.c = truth.num_classes;

  const std::vector<GridPoint> grid = make_grid(spec, bank.size());
  std::vector<PointResult> results(grid.size());

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      results[i] =
          run_point(static_cast<int>(i), grid[i], spec, bank, truth, base);
    }
  };
  const int pool_size = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(spec.workers),
                            grid.size()));
  if (pool_size <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(pool_size));
    for (int t = 0; t < pool_size; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].failed) continue;
    if (best < 0 || results[i].acc > results[static_cast<std::size_t>(best)].acc ||
        (results[i].acc == results[static_cast<std::size_t>(best)].acc &&
         results[i].nmi > results[static_cast<std::size_t>(best)].nmi))
      best = static_cast<int>(i);
  }
  if (best >= 0) results[static_cast<std::size_t>(best)].best = true;

  fs::create_directories(spec.out_dir);
  {
    std::ofstream csv(fs::path(spec.out_dir) / "report.csv");
    if (!csv) throw Error("io", "cannot write report.csv in " + spec.out_dir);
    emit_sweep_table(csv, results);
  }
  {
    std::ofstream txt(fs::path(spec.out_dir) / "report.txt");
    if (!txt) throw Error("io", "cannot write report.txt in " + spec.out_dir);
    write_report_txt(txt, spec, bank, data.n(), data.d(), truth.num_classes,
                     results, best);
  }
  if (best >= 0) {
    const PointResult& b = results[static_cast<std::size_t>(best)];
    save_labels((fs::path(spec.out_dir) / "labels.txt").string(), b.labels);
    // Re-derive the winning fit (first repeat in ssl mode) for the structured
    // dump; the solver is deterministic so this reproduces the scored run.
    const FitResult fit = fit_point(grid[static_cast<std::size_t>(best)], spec,
                                    bank, truth, base, 0, nullptr);
    std::ofstream ft(fs::path(spec.out_dir) / "fit.txt");
    if (!ft) throw Error("io", "cannot write fit.txt in " + spec.out_dir);
    write_fit_result(ft, fit);
    if (spec.dump_matrices) {
      save_dense_matrix((fs::path(spec.out_dir) / "S.csv").string(), fit.S);
      save_dense_matrix((fs::path(spec.out_dir) / "K.csv").string(), fit.K);
    }
  }
  for (const auto& r : results)
    if (r.failed) return 2;
  return 0;
}

}  // namespace smkl
