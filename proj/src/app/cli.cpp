#include "csid/app/cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "csid/app/artifact.hpp"
#include "csid/app/pipeline.hpp"
#include "csid/errors.hpp"

namespace csid::app {
namespace {

// Shortest text that reads back to the same double.
std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string brief(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

struct SolverFlags {
  std::size_t rank = 10;
  double rho = 1e-3;
  double mu = 0.0;
  std::string diff = "first";
  std::size_t alphabet = 25;
  std::size_t max_sweeps = 500;
  double tol = 1e-6;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;

  TrainOptions options() const {
    TrainOptions o;
    o.alphabet = alphabet;
    o.solver.rank = rank;
    o.solver.ridge = rho;
    o.solver.smoothness = {mu};
    o.solver.difference = diff == "second" ? DifferenceKind::second : DifferenceKind::first;
    o.solver.max_sweeps = max_sweeps;
    o.solver.rel_tol = tol;
    o.solver.restarts = restarts;
    o.solver.seed = seed;
    return o;
  }
};

void add_shared_flags(CLI::App& cmd, SolverFlags& f) {
  cmd.add_option("--diff", f.diff, "Difference operator for ordinal modes")
      ->check(CLI::IsMember({"first", "second"}))
      ->capture_default_str();
  cmd.add_option("--alphabet", f.alphabet, "Quantizer levels for continuous predictors")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--max-sweeps", f.max_sweeps, "Sweep limit per restart")->capture_default_str();
  cmd.add_option("--tol", f.tol, "Relative objective change that stops a restart")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--restarts", f.restarts, "Random initializations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

Table read_table(const std::string& path) { return read_csv_file(path); }

int cmd_fit(const std::string& train_path, const std::string& schema_path,
            const std::string& model_path, const SolverFlags& flags, std::ostream& out) {
  const SchemaDeclaration decl = read_schema_file(schema_path);
  const Table train = read_table(train_path);
  const ModelArtifact a = train_model(train, decl, flags.options());
  save_artifact(model_path, a);

  const auto& r = a.report;
  out << "predictors " << a.schema.order() << ", responses " << a.schema.responses.size()
      << ", rank " << a.model.rank() << "\n";
  out << "alphabet";
  for (std::size_t s : a.schema.shape()) out << ' ' << s;
  out << "\n";
  out << "objective " << brief(r.objective_trace.front()) << " -> "
      << brief(r.final_objective()) << " in " << r.sweeps << " sweeps"
      << (r.converged ? " (converged)" : " (sweep limit)") << "\n";
  out << "best restart " << r.best_restart + 1 << " of " << r.restart_objectives.size() << "\n";
  if (r.min_norm_fallbacks > 0)
    out << "minimum-norm fallbacks " << r.min_norm_fallbacks << "\n";
  const Evaluation e = evaluate_table(a, train);
  out << "train rmse " << brief(e.rmse) << "\n";
  out << "model written to " << model_path << "\n";
  return kSuccess;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& output_path, std::ostream& out) {
  const ModelArtifact a = load_artifact(model_path);
  const Table input = read_table(input_path);
  Table result;
  result.header = a.schema.responses;
  if (input.size() > 0) {
    const Matrix pred = predict_table(a, input);
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
      std::vector<std::string> row;
      for (Eigen::Index j = 0; j < pred.cols(); ++j) row.push_back(exact(pred(r, j)));
      result.rows.push_back(std::move(row));
    }
  }
  if (output_path.empty()) {
    write_csv(out, result);
  } else {
    std::ofstream file(output_path);
    if (!file) throw DataError("cannot write '" + output_path + "'");
    write_csv(file, result);
  }
  return kSuccess;
}

int cmd_evaluate(const std::string& model_path, const std::string& test_path,
                 std::ostream& out) {
  const ModelArtifact a = load_artifact(model_path);
  const Evaluation e = evaluate_table(a, read_table(test_path));
  out << "rmse " << exact(e.rmse) << "\n";
  out << "values " << e.count << "\n";
  return kSuccess;
}

void write_grid(std::ostream& out, const CvResult& cv) {
  out << "rank,rho,mu,cv_rmse\n";
  for (const auto& c : cv.cells)
    out << c.rank << ',' << exact(c.ridge) << ',' << exact(c.smoothness) << ','
        << exact(c.rmse) << "\n";
}

void write_best(std::ostream& out, const GridCell& c) {
  out << "rank " << c.rank << ", rho " << brief(c.ridge) << ", mu " << brief(c.smoothness)
      << ", cv rmse " << brief(c.rmse);
}

int cmd_cv(const std::string& train_path, const std::string& schema_path, const Grid& grid,
           const SolverFlags& flags, std::size_t folds, std::size_t repeats,
           double train_frac, const std::string& table_path, std::ostream& out) {
  const SchemaDeclaration decl = read_schema_file(schema_path);
  const Table data = read_table(train_path);
  std::unique_ptr<std::ofstream> file;
  if (!table_path.empty()) {
    file = std::make_unique<std::ofstream>(table_path);
    if (!*file) throw DataError("cannot write '" + table_path + "'");
  }
  std::ostream& table = file ? *file : out;

  if (train_frac > 0.0) {
    const HoldoutResult h = monte_carlo_holdout(data, decl, flags.options(), grid, folds,
                                                repeats, train_frac, flags.seed);
    for (std::size_t r = 0; r < h.runs.size(); ++r) {
      out << "repeat " << r + 1 << ": ";
      write_best(out, h.runs[r].cv.best_cell());
      out << ", test rmse " << brief(h.runs[r].test_rmse) << "\n";
    }
    out << "mean test rmse " << brief(h.mean_rmse) << " +/- " << brief(h.std_rmse) << "\n";
    if (file) write_grid(table, h.runs.front().cv);
    return kSuccess;
  }
  const CvResult cv =
      cross_validate(data, decl, flags.options(), grid, folds, repeats, flags.seed);
  write_grid(table, cv);
  out << "best: ";
  write_best(out, cv.best_cell());
  out << "\n";
  return kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear regression by smooth low-rank tensor completion", "csid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "csid 1.0");

  SolverFlags flags;
  std::string train_path, schema_path, model_path, input_path, output_path, test_path;

  auto* fit = app.add_subcommand("fit", "Train a model from a CSV file and a schema");
  fit->add_option("--train", train_path, "Training CSV")->required();
  fit->add_option("--schema", schema_path, "Schema file")->required();
  fit->add_option("--model", model_path, "Model file to write")->required();
  fit->add_option("--rank", flags.rank, "CPD rank")->check(CLI::PositiveNumber)->capture_default_str();
  fit->add_option("--rho", flags.rho, "Ridge weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  fit->add_option("--mu", flags.mu, "Smoothness weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  add_shared_flags(*fit, flags);

  auto* predict = app.add_subcommand("predict", "Predict responses for a CSV file");
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--input", input_path, "Input CSV")->required();
  predict->add_option("--output", output_path, "Prediction CSV (default: standard output)");

  auto* evaluate = app.add_subcommand("evaluate", "Report RMSE on a labelled CSV file");
  evaluate->add_option("--model", model_path, "Model file")->required();
  evaluate->add_option("--test", test_path, "Labelled CSV")->required();

  Grid grid;
  std::size_t folds = 5, repeats = 1;
  double train_frac = 0.0;
  auto* cv = app.add_subcommand("cv", "Select rank, rho and mu by k-fold cross-validation");
  cv->add_option("--train", train_path, "Training CSV")->required();
  cv->add_option("--schema", schema_path, "Schema file")->required();
  cv->add_option("--rank", grid.ranks, "Candidate ranks")->delimiter(',')->capture_default_str();
  cv->add_option("--rho", grid.ridges, "Candidate ridge weights")->delimiter(',')->capture_default_str();
  cv->add_option("--mu", grid.smoothness, "Candidate smoothness weights")->delimiter(',')->capture_default_str();
  cv->add_option("--folds", folds, "Number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
  cv->add_option("--repeats", repeats, "Repetitions (fold assignments, or random splits with --train-frac)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cv->add_option("--train-frac", train_frac,
                 "Hold out 1 - f of the rows, tune on the rest and report test RMSE")
      ->check(CLI::Range(0.0, 1.0));
  cv->add_option("--output", output_path, "Write the per-cell table here");
  add_shared_flags(*cv, flags);

  std::vector<std::string> argv_store{"csid"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << "csid 1.0\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    for (double v : grid.ridges)
      if (v < 0.0) throw ConfigError("--rho values must be non-negative");
    for (double v : grid.smoothness)
      if (v < 0.0) throw ConfigError("--mu values must be non-negative");
    for (std::size_t v : grid.ranks)
      if (v == 0) throw ConfigError("--rank values must be positive");
    if (fit->parsed()) return cmd_fit(train_path, schema_path, model_path, flags, out);
    if (predict->parsed()) return cmd_predict(model_path, input_path, output_path, out);
    if (evaluate->parsed()) return cmd_evaluate(model_path, test_path, out);
    if (train_frac >= 1.0) throw ConfigError("--train-frac must be below 1");
    return cmd_cv(train_path, schema_path, grid, flags, folds, repeats, train_frac,
                  output_path, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace csid::app
