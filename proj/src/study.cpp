#include "stein/study.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "stein/error.hpp"
#include "stein/parallel.hpp"
#include "stein/spec_parser.hpp"

namespace stein {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) { return trim(line.substr(0, line.find('#'))); }

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ConfigError("config: invalid value '" + text + "' for '" + key + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

bool has_method(const ScatterConfig& cfg, const std::string& m) {
  for (const auto& x : cfg.methods)
    if (x == m) return true;
  return false;
}

struct MethodOutcome {
  std::optional<EstimateResult> result;
  std::string error;
};

template <class Fn>
MethodOutcome attempt(Fn&& fn) {
  MethodOutcome out;
  try {
    out.result = fn();
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

struct NbReplicate {
  MethodOutcome mde;
  std::optional<MomentEstimates> moments;
  bool underdispersed = false;
  std::string diagnostics;
};

void scatter_negbin(std::ostream& out, const ScatterConfig& cfg) {
  if (cfg.truth.size() != 2) throw ConfigError("bias-scatter: negbin truth is (r, q)");
  const alt::NegBinomial law{cfg.truth[0], cfg.truth[1]};
  validate(law);
  const bool mde = has_method(cfg, "mde");
  const bool mom = has_method(cfg, "moments");
  const RandomStream root(cfg.seed);

  std::vector<NbReplicate> reps(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t j) {
    const RandomStream rep = substream(root, j);
    RandomStream data = substream(rep, 0);
    const Sample sample = draw(law, cfg.n, data);
    auto& r = reps[j];
    r.underdispersed = sample.mean() >= sample.variance();
    if (mde) {
      NbOptions opts;
      opts.n_starts = cfg.starts;
      r.mde = attempt([&] { return estimate_nb(sample, cfg.optimizer, substream(rep, 1), opts); });
      if (!r.mde.result) r.diagnostics += "mde: " + r.mde.error + ";";
    }
    if (mom) {
      try {
        r.moments = moment_estimators_nb(sample);
      } catch (const DegenerateSample& e) {
        r.diagnostics += std::string("moments: ") + e.what() + ";";
      }
    }
  });

  out << "replicate";
  if (mde) out << ",r_hat,q_hat,r_bias,q_bias,objective,converged";
  if (mom) out << ",r_tilde,q_tilde,r_tilde_bias,q_tilde_bias";
  out << ",underdispersed,diagnostics\n";
  std::size_t under = 0, failures = 0, both = 0;
  for (std::size_t j = 0; j < reps.size(); ++j) {
    const auto& r = reps[j];
    out << j;
    bool failed = false;
    if (mde) {
      if (r.mde.result) {
        const auto& e = *r.mde.result;
        out << ',' << format_number(e.params[0]) << ',' << format_number(e.params[1]) << ','
            << format_number(e.params[0] - law.r) << ',' << format_number(e.params[1] - law.q) << ','
            << format_number(e.objective) << ',' << (e.converged ? 1 : 0);
        failed = !e.converged;
      } else {
        out << ",NA,NA,NA,NA,NA,0";
        failed = true;
      }
    }
    if (mom) {
      if (r.moments)
        out << ',' << format_number(r.moments->r_tilde) << ',' << format_number(r.moments->q_tilde)
            << ',' << format_number(r.moments->r_tilde - law.r) << ','
            << format_number(r.moments->q_tilde - law.q);
      else
        out << ",NA,NA,NA,NA";
    }
    out << ',' << (r.underdispersed ? 1 : 0) << ',' << r.diagnostics << '\n';
    under += r.underdispersed;
    failures += failed;
    both += failed && r.underdispersed;
  }
  out << "# underdispersed=" << under << " failures=" << failures << " both=" << both << '\n';
}

struct EpReplicate {
  MethodOutcome mde;
  MethodOutcome hd;
};

void write_theta_outcome(std::ostream& out, const MethodOutcome& m, const std::vector<double>& truth) {
  if (m.result) {
    const auto& e = *m.result;
    for (double v : e.params) out << ',' << format_number(v);
    for (std::size_t i = 0; i < e.params.size(); ++i) out << ',' << format_number(e.params[i] - truth[i]);
    out << ',' << format_number(e.objective) << ',' << (e.converged ? 1 : 0);
  } else {
    for (std::size_t i = 0; i < 2 * truth.size() + 1; ++i) out << ",NA";
    out << ",0";
  }
}

void scatter_exppoly(std::ostream& out, const ScatterConfig& cfg) {
  const alt::ExpPoly law{cfg.truth};
  validate(law);
  const int d = static_cast<int>(cfg.truth.size());
  const bool mde = has_method(cfg, "mde");
  const bool hd = has_method(cfg, "hd");
  const RandomStream root(cfg.seed);
  ExpPolyOptions opts;
  opts.n_starts = cfg.starts;

  std::vector<EpReplicate> reps(cfg.reps);
  parallel_for(cfg.reps, cfg.workers, [&](std::size_t j) {
    const RandomStream rep = substream(root, j);
    RandomStream data = substream(rep, 0);
    const Sample sample = draw(law, cfg.n, data);
    if (mde)
      reps[j].mde = attempt([&] {
        return estimate_exppoly(sample, d, cfg.fixed, cfg.optimizer, substream(rep, 1), opts);
      });
    if (hd)
      reps[j].hd = attempt([&] {
        return estimate_exppoly_hd(sample, d, cfg.fixed, cfg.optimizer, HdConstants{},
                                   substream(rep, 2), opts);
      });
  });

  out << "replicate";
  for (const std::string m : {"mde", "hd"}) {
    if (!has_method(cfg, m)) continue;
    for (int i = 1; i <= d; ++i) out << ',' << m << "_theta" << i;
    for (int i = 1; i <= d; ++i) out << ',' << m << "_bias" << i;
    out << ',' << m << "_objective," << m << "_converged";
  }
  out << ",diagnostics\n";
  std::size_t fail_mde = 0, fail_hd = 0;
  for (std::size_t j = 0; j < reps.size(); ++j) {
    const auto& r = reps[j];
    out << j;
    std::string diag;
    if (mde) {
      write_theta_outcome(out, r.mde, cfg.truth);
      fail_mde += !(r.mde.result && r.mde.result->converged);
      if (!r.mde.result) diag += "mde: " + r.mde.error + ";";
    }
    if (hd) {
      write_theta_outcome(out, r.hd, cfg.truth);
      fail_hd += !(r.hd.result && r.hd.result->converged);
      if (!r.hd.result) diag += "hd: " + r.hd.error + ";";
    }
    out << ',' << diag << '\n';
  }
  out << "#";
  if (mde) out << " failures_mde=" << fail_mde;
  if (hd) out << " failures_hd=" << fail_hd;
  out << '\n';
}

}  // namespace

const std::vector<PowerRow>& power_table_rows() {
  static const std::vector<PowerRow> rows = {
      {alt::Poisson{1}, {5, 5, 5, 5, 5, 5, 5, 5}},
      {alt::Poisson{5}, {5, 5, 5, 5, 5, 5, 5, 5}},
      {alt::Poisson{10}, {5, 5, 5, 5, 5, 5, 5, 5}},
      {alt::Poisson{30}, {5, 5, 5, 5, 5, 5, 5, 5}},
      {alt::Uniform{1}, {99, 99, 99, 99, 99, 99, 99, 99}},
      {alt::Uniform{2}, {39, 9, 22, 15, 64, 68, 50, 58}},
      {alt::Uniform{4}, {46, 33, 20, 27, 61, 16, 45, 51}},
      {alt::Uniform{5}, {69, 65, 58, 62, 75, 39, 60, 63}},
      {alt::Uniform{6}, {85, 85, 83, 85, 86, 66, 72, 76}},
      {alt::Binomial{2, 0.5}, {81, 81, 89, 87, 86, 90, 83, 81}},
      {alt::Binomial{4, 0.25}, {18, 22, 23, 24, 18, 22, 21, 15}},
      {alt::Binomial{10, 0.1}, {7, 7, 7, 7, 6, 7, 7, 6}},
      {alt::Binomial{10, 0.5}, {57, 52, 49, 52, 82, 88, 60, 68}},
      {alt::NegBinomial{1, 0.5}, {73, 77, 82, 81, 80, 82, 76, 77}},
      {alt::NegBinomial{2, 2.0 / 3.0}, {34, 38, 44, 44, 43, 45, 37, 39}},
      {alt::NegBinomial{3, 0.75}, {19, 22, 26, 26, 26, 27, 21, 23}},
      {alt::NegBinomial{9, 0.9}, {6, 7, 8, 8, 8, 8, 7, 8}},
      {alt::NegBinomial{5, 0.5}, {82, 85, 80, 84, 88, 89, 67, 71}},
      {alt::NegBinomial{10, 2.0 / 3.0}, {41, 45, 41, 44, 48, 50, 28, 31}},
      {alt::NegBinomial{15, 0.75}, {23, 27, 26, 26, 28, 30, 16, 18}},
      {alt::NegBinomial{45, 0.9}, {8, 9, 10, 9, 9, 8, 6, 7}},
      {alt::PoissonMixture{0.5, 2, 5}, {64, 64, 69, 65, 72, 74, 53, 57}},
      {alt::PoissonMixture{0.5, 3, 5}, {17, 19, 20, 19, 20, 21, 12, 14}},
      {alt::PoissonMixture{0.25, 1, 5}, {93, 95, 96, 95, 87, 88, 75, 73}},
      {alt::PoissonMixture{0.05, 1, 5}, {23, 33, 32, 32, 13, 12, 8, 7}},
      {alt::PoissonMixture{0.01, 1, 5}, {7, 9, 9, 9, 6, 5, 5, 5}},
      {alt::PoissonDeltaZero{3, 0.1}, {54, 62, 54, 59, 32, 31, 32, 26}},
      {alt::DiscreteWeibull{0.5, 1}, {73, 77, 82, 81, 80, 82, 76, 77}},
      {alt::DiscreteWeibull{0.25, 1}, {22, 24, 27, 28, 26, 26, 26, 25}},
      {alt::DiscreteWeibull{0.5, 2}, {49, 52, 52, 51, 48, 52, 51, 52}},
      {alt::DiscreteWeibull{0.25, 2}, {8, 8, 7, 6, 6, 8, 7, 10}},
      {alt::DiscreteWeibull{0.75, 2}, {28, 32, 35, 35, 26, 32, 30, 21}},
      {alt::DiscreteWeibull{0.1, 1}, {10, 10, 10, 8, 10, 10, 10, 10}},
      {alt::DiscreteWeibull{0.9, 3}, {97, 97, 99, 99, 98, 99, 97, 93}},
      {alt::ZeroModifiedPoisson{1, 0.1}, {91, 93, 90, 92, 81, 84, 90, 64}},
      {alt::ZeroModifiedPoisson{1, 0.5}, {17, 18, 19, 19, 19, 18, 18, 19}},
      {alt::ZeroModifiedPoisson{1, 0.8}, {71, 72, 74, 74, 74, 74, 74, 74}},
      {alt::ZeroModifiedPoisson{2, 0.1}, {8, 9, 8, 8, 6, 6, 6, 6}},
      {alt::ZeroModifiedPoisson{3, 0.1}, {24, 30, 24, 27, 13, 12, 11, 9}},
      {alt::ZeroTruncatedPoisson{2}, {93, 99, 83, 95, 38, 39, 56, 19}},
      {alt::ZeroTruncatedPoisson{3}, {12, 18, 18, 18, 9, 10, 7, 9}},
      {alt::ZeroTruncatedPoisson{5}, {4, 1, 1, 1, 5, 5, 5, 5}},
      {alt::AbsDiscreteNormal{0}, {45, 48, 48, 50, 42, 46, 47, 41}},
      {alt::AbsDiscreteNormal{2}, {44, 46, 59, 53, 54, 61, 42, 37}},
      {alt::AbsDiscreteNormal{3}, {88, 78, 94, 86, 96, 98, 85, 90}},
  };
  return rows;
}

std::vector<PowerCell> power_table(const StudyConfig& cfg) {
  if (cfg.n < 1) throw ConfigError("power-table: n must be >= 1");
  if (cfg.reps < 1) throw ConfigError("power-table: reps must be >= 1");
  if (cfg.statistics.empty()) throw ConfigError("power-table: no statistics selected");
  const BootstrapConfig boot{cfg.B, cfg.alpha, cfg.seed};
  // Validates B and alpha once so that configuration errors are not reported as row failures.
  interpolated_critical_value(std::vector<double>(cfg.B, 0.0), cfg.alpha);

  std::vector<AltDistSpec> rows = cfg.rows;
  if (rows.empty())
    for (const auto& r : power_table_rows()) rows.push_back(r.spec);

  const RandomStream root(cfg.seed);
  std::vector<PowerCell> cells;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    PowerCell cell;
    cell.label = label(rows[i]);
    try {
      const auto summary = rejection_rates(rows[i], cfg.n, cfg.reps, cfg.statistics, boot,
                                           substream(root, i), cfg.workers);
      const double reps = static_cast<double>(summary.reps);
      for (double r : summary.rates) cell.percent.push_back(100.0 * std::round(r * reps) / reps);
      if (summary.degenerate > 0)
        cell.diagnostics = "all_zero_samples=" + std::to_string(summary.degenerate);
    } catch (const std::exception& e) {
      cell.percent.assign(cfg.statistics.size(), kNaN);
      cell.diagnostics = std::string("error: ") + e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_power_table(std::ostream& out, const StudyConfig& cfg,
                       const std::vector<PowerCell>& cells) {
  out << "distribution";
  for (auto s : cfg.statistics) out << ',' << to_string(s);
  out << ",diagnostics\n";
  for (const auto& c : cells) {
    out << c.label;
    for (double p : c.percent) out << ',' << format_number(p);
    out << ',' << c.diagnostics << '\n';
  }
  out << provenance_line(cfg.seed) << '\n';
}

void bias_scatter(std::ostream& out, const ScatterConfig& cfg) {
  if (cfg.n < 2) throw ConfigError("bias-scatter: n must be >= 2");
  if (cfg.methods.empty()) throw ConfigError("bias-scatter: no methods selected");
  for (const auto& m : cfg.methods) {
    const bool ok = cfg.family == ScatterFamily::NegBin ? (m == "mde" || m == "moments")
                                                        : (m == "mde" || m == "hd");
    if (!ok) throw ConfigError("bias-scatter: method '" + m + "' does not apply to this family");
  }
  if (cfg.family == ScatterFamily::NegBin)
    scatter_negbin(out, cfg);
  else
    scatter_exppoly(out, cfg);
  out << provenance_line(cfg.seed) << '\n';
}

Sample read_sample(std::istream& in) {
  std::vector<std::int64_t> values;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = strip_comment(line);
    if (body.empty()) continue;
    std::int64_t v = 0;
    const char* end = body.data() + body.size();
    auto [ptr, ec] = std::from_chars(body.data(), end, v);
    if (ec != std::errc() || ptr != end) throw DataError("expected one integer per line", number);
    if (v < 0) throw DataError("negative value", number);
    values.push_back(v);
  }
  if (values.empty()) throw DataError("no observations");
  return Sample(std::move(values));
}

Sample read_sample_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_sample(in);
}

std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = strip_comment(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
    kv[key] = trim(body.substr(eq + 1));
  }
  return kv;
}

void apply_study_config(StudyConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "n")
      cfg.n = parse_value<std::size_t>(key, value);
    else if (key == "reps")
      cfg.reps = parse_value<std::size_t>(key, value);
    else if (key == "B")
      cfg.B = parse_value<std::size_t>(key, value);
    else if (key == "alpha")
      cfg.alpha = parse_value<double>(key, value);
    else if (key == "seed")
      cfg.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "workers")
      cfg.workers = parse_value<unsigned>(key, value);
    else if (key == "statistics") {
      cfg.statistics.clear();
      for (const auto& s : split(value, ',')) cfg.statistics.push_back(parse_statistic(s));
    } else if (key == "rows") {
      cfg.rows.clear();
      for (const auto& r : split(value, ';')) cfg.rows.push_back(parse_alternative(r));
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

std::string provenance_line(std::uint64_t seed) {
  return "# seed=" + std::to_string(seed) + " version=" STEIN_VERSION;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace stein
