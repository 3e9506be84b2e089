#pragma once

// Monte Carlo harness: the power table, bias scatters for the estimation
// studies, and the flat-file readers used by the command-line tool.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stein/data.hpp"
#include "stein/estimate.hpp"
#include "stein/gof.hpp"
#include "stein/sampling.hpp"

namespace stein {

// A row of the published power table with its reported percentages in the
// order tnpo, bh, sr, ru, k1, k2, ks, cm. The printed labels "Bin(1,0.5)"
// through "Bin(45,0.9)" of the second binomial block are negative binomial
// laws, and "U{0,1,2,3}" is the uniform law on {0,...,4}.
struct PowerRow {
  AltDistSpec spec;
  std::array<int, 8> reported;
};

const std::vector<PowerRow>& power_table_rows();

struct StudyConfig {
  std::vector<AltDistSpec> rows;  // empty means every row of power_table_rows()
  std::size_t n = 50;
  std::size_t reps = 2000;
  std::size_t B = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<GofStatistic> statistics{std::begin(kAllStatistics), std::end(kAllStatistics)};
  unsigned workers = 1;
};

struct PowerCell {
  std::string label;
  std::vector<double> percent;  // NaN when the row failed
  std::string diagnostics;
};

// Row i is simulated with substream(RandomStream(seed), i). Row failures
// become NaN cells with a diagnostic instead of aborting.
std::vector<PowerCell> power_table(const StudyConfig& cfg);

// CSV: distribution, one column per statistic, diagnostics; then the
// provenance line.
void write_power_table(std::ostream& out, const StudyConfig& cfg,
                       const std::vector<PowerCell>& cells);

enum class ScatterFamily { NegBin, ExpPoly };

struct ScatterConfig {
  ScatterFamily family = ScatterFamily::NegBin;
  std::vector<double> truth;  // (r, q) or full theta
  FixedParams fixed;           // exppoly only
  std::size_t n = 100;
  std::size_t reps = 200;
  // negbin: "mde", "moments"; exppoly: "mde", "hd"
  std::vector<std::string> methods;
  OptimizerConfig optimizer;
  int starts = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// One row per replicate; replicate j draws from substream(RandomStream(seed), j).
// Writes a summary comment (underdispersed / failure / both counts) and the
// provenance line after the rows.
void bias_scatter(std::ostream& out, const ScatterConfig& cfg);

// One nonnegative integer per line; '#' starts a comment. Throws DataError
// with the line number on malformed input.
Sample read_sample(std::istream& in);
Sample read_sample_file(const std::string& path);

// Flat key=value lines with '#' comments. Throws ConfigError with the line
// number on malformed lines.
std::map<std::string, std::string> read_key_values(std::istream& in);

// Applies n, reps, B, alpha, seed, workers, statistics (comma list) and rows
// (';'-separated alternative specs). Unknown keys throw ConfigError.
void apply_study_config(StudyConfig& cfg, const std::map<std::string, std::string>& kv);

// "# seed=<S> version=<V>"
std::string provenance_line(std::uint64_t seed);

// Shortest round-trip decimal representation, "NA" for NaN.
std::string format_number(double v);

}  // namespace stein
