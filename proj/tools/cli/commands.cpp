#include "cli/commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/csv.hpp"
#include "cli/report.hpp"
#include "ordlatent/baselines.hpp"
#include "ordlatent/inference.hpp"
#include "ordlatent/simulate.hpp"
#include "ordlatent/version.hpp"

namespace ordlatent::cli {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) != nullptr) return kExitParse;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  if (dynamic_cast<const InvalidArgument*>(&e) != nullptr) return kExitUsage;
  if (dynamic_cast<const UnidentifiedError*>(&e) != nullptr) return kExitUnidentified;
  if (dynamic_cast<const ConvergenceError*>(&e) != nullptr) return kExitConvergence;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return kExitNumerical;
  return kExitInternal;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << content;
  file.close();
  if (!file) throw IoError("failed writing '" + path + "'");
}

void cmd_fit(const FitArgs& args, std::ostream& out) {
  if (args.bootstrap < 0) throw InvalidArgument("--bootstrap must be non-negative");
  const Panel panel = read_panel(args.input, args.panel);
  FitOptions fopts;
  fopts.seed = args.seed;
  const FitResult fitted = fit(panel.data, fopts);

  std::optional<BootstrapReport> boot;
  if (args.bootstrap > 0) {
    BootstrapOptions bopts;
    bopts.b = args.bootstrap;
    bopts.seed = args.seed;
    bopts.threads = args.threads;
    bopts.fit = fopts;
    boot = parametric_bootstrap(panel.data, fitted, bopts);
  }
  std::vector<std::string> labels;
  for (int i = 0; i < panel.data.n(); ++i) labels.push_back(panel.label(i));
  const FitReport report = make_fit_report(fitted, args.input, args.seed, panel.names, labels, panel.data.n(),
                                           boot ? &*boot : nullptr, args.fisher_mean_correction);
  nlohmann::ordered_json j = report;

  if (!args.scores_out.empty()) {
    std::ostringstream csv;
    csv << csv_field(panel.label_header.empty() ? "row" : panel.label_header) << ",f_x,f_y\n";
    for (int i = 0; i < panel.data.n(); ++i) {
      csv << csv_field(labels[i]) << ',' << format_double(fitted.scores[i].f_x) << ','
          << format_double(fitted.scores[i].f_y) << '\n';
    }
    write_output(args.scores_out, csv.str(), out);
  }
  write_output(args.output, dump(j), out);
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const Scenario s = builtin_scenario(args.scenario, args.rho);
  if (args.n < 1) throw InvalidArgument("--n must be at least 1");
  std::ostringstream csv;
  write_panel(csv, make_panel(sample_dataset(s.params, s.config, args.n, args.seed)));
  write_output(args.output, csv.str(), out);
}

void cmd_mc(const McArgs& args, std::ostream& out) {
  Scenario s = builtin_scenario(args.scenario, args.rho);
  s.n = args.n;
  s.n_reps = args.reps;
  MonteCarloOptions opts;
  opts.threads = args.threads;
  const MonteCarloReport report = run_monte_carlo(s, args.seed, opts);

  std::ostringstream reps;
  reps << "replicate,parameter,truth,estimate,bias\n";
  std::ostringstream cover;
  cover << "replicate,ok,rho_hat,fisher_lower,fisher_upper,covers,error\n";
  for (const auto& r : report.replicates) {
    if (r.ok) {
      for (std::size_t k = 0; k < report.parameter_names.size(); ++k) {
        reps << r.replicate << ',' << csv_field(report.parameter_names[k]) << ',' << format_double(report.truth[k])
             << ',' << format_double(r.estimates[k]) << ',' << format_double(r.estimates[k] - report.truth[k]) << '\n';
      }
      cover << r.replicate << ",1," << format_double(r.estimates.back()) << ',' << format_double(r.fisher_lower) << ','
            << format_double(r.fisher_upper) << ',' << (r.covers ? 1 : 0) << ",\n";
    } else {
      cover << r.replicate << ",0,,,,," << csv_field(r.error) << '\n';
    }
  }

  std::ostringstream box;
  box << "parameter,truth,mean_bias,lower_whisker,q1,median_bias,q3,upper_whisker,outliers\n";
  for (const auto& b : report.bias) {
    box << csv_field(b.name) << ',' << format_double(b.truth) << ',' << format_double(b.mean) << ','
        << format_double(b.lower_whisker) << ',' << format_double(b.q1) << ',' << format_double(b.median) << ','
        << format_double(b.q3) << ',' << format_double(b.upper_whisker) << ',' << b.outliers << '\n';
  }

  if (args.out_dir.empty()) {
    out << dump(monte_carlo_summary(report));
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw IoError("cannot create directory '" + args.out_dir + "': " + ec.message());
  const std::filesystem::path dir(args.out_dir);
  write_output((dir / "replicates.csv").string(), reps.str(), out);
  write_output((dir / "coverage.csv").string(), cover.str(), out);
  write_output((dir / "boxplot.csv").string(), box.str(), out);
  write_output((dir / "summary.json").string(), dump(monte_carlo_summary(report)), out);
}

ContingencyTable parse_table(std::istream& in, const std::string& source) {
  std::string line;
  std::vector<std::int64_t> counts;
  int rows = 0;
  int cols = -1;
  bool header = true;
  for (int number = 1; std::getline(in, line); ++number) {
    strip_line(line, number == 1);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv(line);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, number, 0, e.what());
    }
    if (header) {
      header = false;
      cols = static_cast<int>(fields.size()) - 1;
      if (cols < 1) throw ParseError(source, number, 0, "table header needs a label column and at least one count column");
      continue;
    }
    if (static_cast<int>(fields.size()) != cols + 1) {
      throw ParseError(source, number, 0,
                       "expected " + std::to_string(cols + 1) + " fields, found " + std::to_string(fields.size()));
    }
    for (int j = 1; j <= cols; ++j) {
      const std::string& cell = fields[j];
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      std::int64_t v = -1;
      const char* first = b == std::string::npos ? cell.data() : cell.data() + b;
      const char* last = b == std::string::npos ? cell.data() : cell.data() + e + 1;
      const auto res = std::from_chars(first, last, v);
      if (first == last || res.ec != std::errc() || res.ptr != last || v < 0) {
        throw ParseError(source, number, j + 1, "'" + cell + "' is not a nonnegative integer count");
      }
      counts.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(source, 1, 0, "table has no rows");
  try {
    return ContingencyTable(rows, cols, std::move(counts));
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, 0, e.what());
  }
}

void cmd_baselines(const BaselinesArgs& args, std::ostream& out) {
  if (args.table) {
    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw IoError("cannot open '" + args.input + "' for reading");
    const PolychoricResult r = polychoric(parse_table(in, args.input));
    nlohmann::ordered_json j;
    j["tool"] = "ordlatent";
    j["version"] = kVersion;
    j["command"] = "baselines";
    j["input"] = args.input;
    j["polychoric"] = polychoric_json(r);
    write_output(args.output, dump(j), out);
    return;
  }
  const Panel panel = read_panel(args.input, args.panel);
  const auto pairs = pairwise_polychoric(panel.data);
  std::optional<CanonicalResult> canonical;
  std::string status = "ok";
  try {
    canonical = canonical_correlation(code_covariance(panel.data), panel.data.config().p_x);
  } catch (const Error& e) {
    status = e.what();
  }
  write_output(args.output,
               dump(baselines_json({args.input, panel.data.config().p_x, panel.names}, pairs, canonical, status)), out);
}

}  // namespace ordlatent::cli
