// dstein: command-line front end for the Stein characterization library.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "stein/characterize.hpp"
#include "stein/error.hpp"
#include "stein/estimate.hpp"
#include "stein/gof.hpp"
#include "stein/spec_parser.hpp"
#include "stein/study.hpp"

namespace {

using namespace stein;

constexpr int kExitData = 2;
constexpr int kExitConfig = 3;

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<GofStatistic> parse_statistics(const std::vector<std::string>& names) {
  std::vector<GofStatistic> out;
  for (const auto& n : names) {
    if (n == "all") return {std::begin(kAllStatistics), std::end(kAllStatistics)};
    out.push_back(parse_statistic(n));
  }
  return out;
}

FixedParams parse_fixed(const std::vector<std::string>& items) {
  FixedParams out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (item.rfind("theta", 0) != 0 || eq == std::string::npos)
      throw ConfigError("--fix expects thetaI=value, got '" + item + "'");
    try {
      out.emplace_back(std::stoi(item.substr(5, eq - 5)), std::stod(item.substr(eq + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("--fix expects thetaI=value, got '" + item + "'");
    }
  }
  return out;
}

struct OptimizerFlags {
  int maxit = 1000;
  double gtol = 1e-8;

  void attach(CLI::App* app) {
    app->add_option("--maxit", maxit, "Optimizer iteration cap")->capture_default_str();
    app->add_option("--gtol", gtol, "Projected-gradient tolerance")->capture_default_str();
  }
  OptimizerConfig config() const {
    OptimizerConfig c;
    c.max_iter = maxit;
    c.grad_tol = gtol;
    c.validate();
    return c;
  }
};

void write_estimate(std::ostream& out, const EstimateResult& e, std::uint64_t seed) {
  for (std::size_t i = 1; i <= e.params.size(); ++i) out << "param_" << i << ',';
  out << "objective,converged\n";
  for (double v : e.params) out << format_number(v) << ',';
  out << format_number(e.objective) << ',' << (e.converged ? 1 : 0) << '\n';
  out << provenance_line(seed) << '\n';
}

template <class Residual, class Row>
void write_residual(std::ostream& out, const Residual& r, const std::string& header, Row&& row) {
  out << header << '\n';
  for (std::size_t i = 0; i < r.at.size(); ++i) row(i);
  out << "# sup_abs=" << format_number(r.sup_abs) << " l2=" << format_number(r.l2) << '\n';
  out << provenance_line(0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stein characterizations of discrete laws: goodness-of-fit tests, estimation, studies"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", STEIN_VERSION);
  std::string out_path;
  app.add_option("--out", out_path, "Write CSV here instead of stdout");

  // gof
  auto* gof = app.add_subcommand("gof", "Bootstrap test of poissonity for one sample");
  std::string gof_data;
  std::vector<std::string> gof_stats{"tnpo"};
  BootstrapConfig gof_boot;
  gof->add_option("--data", gof_data, "Data file, one integer per line")->required();
  gof->add_option("--stat", gof_stats, "Statistics (tnpo bh sr ru k1 k2 ks cm all)")->delimiter(',');
  gof->add_option("--B", gof_boot.B, "Bootstrap samples")->capture_default_str();
  gof->add_option("--alpha", gof_boot.alpha, "Significance level")->capture_default_str();
  gof->add_option("--seed", gof_boot.seed, "Random seed")->capture_default_str();

  // power-table
  auto* power = app.add_subcommand("power-table", "Monte Carlo rejection rates");
  StudyConfig study;
  std::string config_path;
  std::vector<std::string> rows;
  std::vector<std::string> power_stats;
  power->add_option("--config", config_path, "Flat key=value study configuration");
  auto* opt_rows = power->add_option("--row", rows, "Alternative spec, e.g. pp:q=0.25,t1=1,t2=5");
  auto* opt_n = power->add_option("--n", study.n, "Sample size");
  auto* opt_reps = power->add_option("--reps", study.reps, "Monte Carlo repetitions");
  auto* opt_B = power->add_option("--B", study.B, "Bootstrap samples");
  auto* opt_alpha = power->add_option("--alpha", study.alpha, "Significance level");
  auto* opt_seed = power->add_option("--seed", study.seed, "Random seed");
  auto* opt_stats = power->add_option("--stat", power_stats, "Statistics")->delimiter(',');
  auto* opt_workers = power->add_option("--workers", study.workers, "Worker threads");

  // estimate-nb
  auto* enb = app.add_subcommand("estimate-nb", "Negative binomial estimation");
  std::string enb_data, enb_method = "mde";
  int enb_starts = 1;
  std::uint64_t enb_seed = 0;
  OptimizerFlags enb_opt;
  enb->add_option("--data", enb_data, "Data file")->required();
  enb->add_option("--method", enb_method, "mde or moments")
      ->check(CLI::IsMember({"mde", "moments"}))
      ->capture_default_str();
  enb->add_option("--starts", enb_starts, "Random starts")->capture_default_str();
  enb->add_option("--seed", enb_seed, "Random seed")->capture_default_str();
  enb_opt.attach(enb);

  // estimate-exppoly
  auto* eep = app.add_subcommand("estimate-exppoly", "Exponential-polynomial estimation");
  std::string eep_data, eep_method = "mde";
  int eep_d = 3, eep_starts = 1;
  std::vector<std::string> eep_fix;
  std::uint64_t eep_seed = 0;
  OptimizerFlags eep_opt;
  eep->add_option("--data", eep_data, "Data file")->required();
  eep->add_option("--d", eep_d, "Polynomial degree")->capture_default_str();
  eep->add_option("--fix", eep_fix, "Pinned coefficient, e.g. theta2=0");
  eep->add_option("--method", eep_method, "mde or hd")
      ->check(CLI::IsMember({"mde", "hd"}))
      ->capture_default_str();
  eep->add_option("--starts", eep_starts, "Random starts")->capture_default_str();
  eep->add_option("--seed", eep_seed, "Random seed")->capture_default_str();
  eep_opt.attach(eep);

  // bias-scatter
  auto* bias = app.add_subcommand("bias-scatter", "Replicated estimation for bias scatter plots");
  ScatterConfig scatter;
  std::string family = "negbin";
  std::vector<std::string> bias_fix;
  OptimizerFlags bias_opt;
  bias->add_option("--family", family, "negbin or exppoly")
      ->check(CLI::IsMember({"negbin", "exppoly"}))
      ->capture_default_str();
  bias->add_option("--truth", scatter.truth, "True parameters, e.g. 2,0.25")
      ->delimiter(',')
      ->required();
  bias->add_option("--n", scatter.n, "Sample size")->capture_default_str();
  bias->add_option("--reps", scatter.reps, "Replicates")->capture_default_str();
  bias->add_option("--method", scatter.methods, "Methods (negbin: mde,moments; exppoly: mde,hd)")
      ->delimiter(',');
  bias->add_option("--fix", bias_fix, "Pinned coefficient, e.g. theta2=0");
  bias->add_option("--starts", scatter.starts, "Random starts")->capture_default_str();
  bias->add_option("--seed", scatter.seed, "Random seed")->capture_default_str();
  bias->add_option("--workers", scatter.workers, "Worker threads")->capture_default_str();
  bias_opt.attach(bias);

  // identity-check
  auto* ident = app.add_subcommand("identity-check", "Evaluate both sides of an identity");
  std::string model_text, law_text, identity = "pmf";
  std::int64_t kmax = 40;
  int points = 20;
  ident->add_option("--model", model_text, "Model, e.g. poisson:lambda=2")->required();
  ident->add_option("--law", law_text, "Law of X when it differs from the model (pmf only)");
  ident->add_option("--identity", identity, "pmf, cdf, cf, pgf or backward")
      ->check(CLI::IsMember({"pmf", "cdf", "cf", "pgf", "backward"}))
      ->capture_default_str();
  ident->add_option("--kmax", kmax, "Largest k for pmf and cdf")->capture_default_str();
  ident->add_option("--points", points, "Grid size for cf (t in [0, 2pi)) and pgf (s in [0, 0.8])")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Output output(out_path);
    std::ostream& out = output.stream();

    if (gof->parsed()) {
      const Sample sample = read_sample_file(gof_data);
      const auto stats = parse_statistics(gof_stats);
      const auto reports = run_tests(sample, stats, gof_boot, RandomStream(gof_boot.seed));
      out << "stat,value,critical,reject\n";
      for (std::size_t i = 0; i < stats.size(); ++i)
        out << to_string(stats[i]) << ',' << format_number(reports[i].statistic) << ','
            << format_number(reports[i].critical_value) << ',' << (reports[i].reject ? 1 : 0) << '\n';
      out << provenance_line(gof_boot.seed) << '\n';
    } else if (power->parsed()) {
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
        StudyConfig from_file;
        apply_study_config(from_file, read_key_values(in));
        // Command-line flags take precedence over the file.
        if (!opt_n->count()) study.n = from_file.n;
        if (!opt_reps->count()) study.reps = from_file.reps;
        if (!opt_B->count()) study.B = from_file.B;
        if (!opt_alpha->count()) study.alpha = from_file.alpha;
        if (!opt_seed->count()) study.seed = from_file.seed;
        if (!opt_workers->count()) study.workers = from_file.workers;
        if (!opt_stats->count()) study.statistics = from_file.statistics;
        if (!opt_rows->count()) study.rows = from_file.rows;
      }
      if (opt_stats->count()) study.statistics = parse_statistics(power_stats);
      if (opt_rows->count()) {
        study.rows.clear();
        for (const auto& r : rows) study.rows.push_back(parse_alternative(r));
      }
      if (study.workers < 1) throw ConfigError("--workers must be >= 1");
      const auto cells = power_table(study);
      write_power_table(out, study, cells);
    } else if (enb->parsed()) {
      const Sample sample = read_sample_file(enb_data);
      if (enb_method == "moments") {
        const auto m = moment_estimators_nb(sample);
        const bool in_space = m.r_tilde > 0.0 && std::isfinite(m.r_tilde) && m.q_tilde > 0.0 &&
                              m.q_tilde < 1.0;
        out << "param_1,param_2,underdispersed,in_space\n"
            << format_number(m.r_tilde) << ',' << format_number(m.q_tilde) << ','
            << (m.underdispersed ? 1 : 0) << ',' << (in_space ? 1 : 0) << '\n'
            << provenance_line(enb_seed) << '\n';
      } else {
        NbOptions opts;
        opts.n_starts = enb_starts;
        write_estimate(out, estimate_nb(sample, enb_opt.config(), RandomStream(enb_seed), opts),
                       enb_seed);
      }
    } else if (eep->parsed()) {
      const Sample sample = read_sample_file(eep_data);
      if (sample.min() < 1) throw DataError("exponential-polynomial data must be >= 1");
      ExpPolyOptions opts;
      opts.n_starts = eep_starts;
      const auto fixed = parse_fixed(eep_fix);
      const auto result =
          eep_method == "hd"
              ? estimate_exppoly_hd(sample, eep_d, fixed, eep_opt.config(), HdConstants{},
                                    RandomStream(eep_seed), opts)
              : estimate_exppoly(sample, eep_d, fixed, eep_opt.config(), RandomStream(eep_seed), opts);
      write_estimate(out, result, eep_seed);
    } else if (bias->parsed()) {
      scatter.family = family == "negbin" ? ScatterFamily::NegBin : ScatterFamily::ExpPoly;
      scatter.fixed = parse_fixed(bias_fix);
      scatter.optimizer = bias_opt.config();
      if (scatter.methods.empty())
        scatter.methods = scatter.family == ScatterFamily::NegBin
                              ? std::vector<std::string>{"mde", "moments"}
                              : std::vector<std::string>{"mde", "hd"};
      if (scatter.workers < 1) throw ConfigError("--workers must be >= 1");
      bias_scatter(out, scatter);
    } else if (ident->parsed()) {
      const DiscreteModel model = parse_model(model_text);
      if (!law_text.empty() && identity != "pmf")
        throw ConfigError("--law applies to the pmf identity only");
      if (points < 1) throw ConfigError("--points must be >= 1");
      auto real_rows = [&](const IdentityResidual& r) {
        write_residual(out, r, "at,lhs,rhs,residual", [&](std::size_t i) {
          out << format_number(r.at[i]) << ',' << format_number(r.lhs[i]) << ','
              << format_number(r.rhs[i]) << ',' << format_number(std::abs(r.lhs[i] - r.rhs[i]))
              << '\n';
        });
      };
      if (identity == "pmf") {
        real_rows(law_text.empty() ? pmf_identity_residual(model, kmax)
                                   : pmf_identity_residual(parse_model(law_text), model, kmax));
      } else if (identity == "cdf") {
        real_rows(cdf_identity_residual(model, kmax));
      } else if (identity == "backward") {
        real_rows(backward_identity_residual(model));
      } else if (identity == "pgf") {
        std::vector<double> grid;
        for (int i = 0; i < points; ++i) grid.push_back(points == 1 ? 0.0 : 0.8 * i / (points - 1));
        real_rows(pgf_identity_residual(model, grid));
      } else {
        std::vector<double> grid;
        for (int i = 0; i < points; ++i) grid.push_back(2.0 * std::numbers::pi * i / points);
        const auto r = cf_identity_residual(model, grid);
        write_residual(out, r, "at,lhs_re,lhs_im,rhs_re,rhs_im,residual", [&](std::size_t i) {
          out << format_number(r.at[i]) << ',' << format_number(r.lhs[i].real()) << ','
              << format_number(r.lhs[i].imag()) << ',' << format_number(r.rhs[i].real()) << ','
              << format_number(r.rhs[i].imag()) << ',' << format_number(std::abs(r.lhs[i] - r.rhs[i]))
              << '\n';
        });
      }
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateSample& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedOperation& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
