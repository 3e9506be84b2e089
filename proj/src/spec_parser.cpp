#include "stein/spec_parser.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "stein/error.hpp"

namespace stein {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& token, const std::string& text) {
  const auto slash = token.find('/');
  if (slash != std::string::npos)
    return parse_number(token.substr(0, slash), text) / parse_number(token.substr(slash + 1), text);
  double v = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || token.empty())
    throw ConfigError("'" + text + "': cannot parse number '" + token + "'");
  return v;
}

class Params {
 public:
  Params(const std::string& text, std::string body) : text_(text) {
    std::string current;
    std::stringstream ss(body);
    std::string token;
    while (std::getline(ss, token, ',')) {
      token = trim(token);
      const auto eq = token.find('=');
      if (eq == std::string::npos) {
        if (current.empty()) throw ConfigError("'" + text + "': value without a key");
        values_[current].push_back(parse_number(token, text));
        continue;
      }
      current = trim(token.substr(0, eq));
      if (values_.count(current)) throw ConfigError("'" + text + "': duplicate key '" + current + "'");
      values_[current].push_back(parse_number(trim(token.substr(eq + 1)), text));
    }
  }

  double scalar(const std::string& key) {
    const auto& v = list(key);
    if (v.size() != 1) throw ConfigError("'" + text_ + "': '" + key + "' takes one value");
    return v[0];
  }

  double scalar(const std::string& key, double fallback) {
    return values_.count(key) ? scalar(key) : fallback;
  }

  int integer(const std::string& key) {
    const double v = scalar(key);
    if (v != std::nearbyint(v)) throw ConfigError("'" + text_ + "': '" + key + "' must be an integer");
    return static_cast<int>(v);
  }

  const std::vector<double>& list(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("'" + text_ + "': missing '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  // Rejects keys that were never read.
  void finish() const {
    for (const auto& [key, v] : values_)
      if (!used_.count(key)) throw ConfigError("'" + text_ + "': unknown key '" + key + "'");
  }

 private:
  std::string text_;
  std::map<std::string, std::vector<double>> values_;
  std::set<std::string> used_;
};

std::pair<std::string, Params> split(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = trim(text.substr(0, colon));
  if (name.empty()) throw ConfigError("'" + text + "': missing family name");
  return {name, Params(text, colon == std::string::npos ? std::string{} : text.substr(colon + 1))};
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
  return out;
}

}  // namespace

DiscreteModel parse_model(const std::string& text) {
  auto [name, p] = split(text);
  auto build = [&]() -> DiscreteModel {
    if (name == "poisson") return DiscreteModel::poisson(p.scalar("lambda"));
    if (name == "negbin") return DiscreteModel::negbinomial(p.scalar("r"), p.scalar("q"));
    if (name == "binom") return DiscreteModel::binomial(p.integer("m"), p.scalar("q"));
    if (name == "uniform") return DiscreteModel::uniform(p.integer("m"));
    if (name == "exppoly") return DiscreteModel::exppoly(p.list("theta"));
    if (name == "gibbs") {
      family::Gibbs g;
      const auto& energies = p.list("energies");
      const auto& particles = p.list("particles");
      if (energies.size() != particles.size())
        throw ConfigError("'" + text + "': energies and particles differ in length");
      for (std::size_t i = 0; i < energies.size(); ++i) {
        const auto state = static_cast<std::int64_t>(i + 1);
        g.energies[state] = energies[i];
        g.particles[state] = static_cast<std::int64_t>(particles[i]);
      }
      g.mu = p.scalar("mu", 0.0);
      g.temperature = p.scalar("T", 1.0);
      g.kappa = p.scalar("kappa", 1.0);
      return DiscreteModel::gibbs(std::move(g));
    }
    throw ConfigError("'" + text + "': unknown model family '" + name + "'");
  };
  auto model = build();
  p.finish();
  return model;
}

AltDistSpec parse_alternative(const std::string& text) {
  auto [name, p] = split(text);
  auto build = [&]() -> AltDistSpec {
    if (name == "po") return alt::Poisson{p.scalar("lambda")};
    if (name == "unif") return alt::Uniform{p.integer("m")};
    if (name == "bin") return alt::Binomial{p.integer("m"), p.scalar("q")};
    if (name == "pp") return alt::PoissonMixture{p.scalar("q"), p.scalar("t1"), p.scalar("t2")};
    if (name == "podelta") return alt::PoissonDeltaZero{p.scalar("lambda"), p.scalar("w", 0.1)};
    if (name == "w") return alt::DiscreteWeibull{p.scalar("q"), p.scalar("b")};
    if (name == "zmpo") return alt::ZeroModifiedPoisson{p.scalar("lambda"), p.scalar("q")};
    if (name == "ztpo") return alt::ZeroTruncatedPoisson{p.scalar("lambda")};
    if (name == "absnorm") return alt::AbsDiscreteNormal{p.scalar("mu")};
    if (name == "negbin") return alt::NegBinomial{p.scalar("r"), p.scalar("q")};
    if (name == "exppoly") return alt::ExpPoly{p.list("theta")};
    throw ConfigError("'" + text + "': unknown alternative '" + name + "'");
  };
  auto spec = build();
  p.finish();
  validate(spec);
  return spec;
}

std::string to_spec_string(const AltDistSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, alt::Poisson>) return "po:lambda=" + num(s.lambda);
        else if constexpr (std::is_same_v<T, alt::Uniform>) return "unif:m=" + std::to_string(s.m);
        else if constexpr (std::is_same_v<T, alt::Binomial>)
          return "bin:m=" + std::to_string(s.m) + ",q=" + num(s.q);
        else if constexpr (std::is_same_v<T, alt::PoissonMixture>)
          return "pp:q=" + num(s.q) + ",t1=" + num(s.lambda1) + ",t2=" + num(s.lambda2);
        else if constexpr (std::is_same_v<T, alt::PoissonDeltaZero>)
          return "podelta:lambda=" + num(s.lambda) + ",w=" + num(s.w0);
        else if constexpr (std::is_same_v<T, alt::DiscreteWeibull>)
          return "w:q=" + num(s.q) + ",b=" + num(s.beta);
        else if constexpr (std::is_same_v<T, alt::ZeroModifiedPoisson>)
          return "zmpo:lambda=" + num(s.lambda) + ",q=" + num(s.pi);
        else if constexpr (std::is_same_v<T, alt::ZeroTruncatedPoisson>)
          return "ztpo:lambda=" + num(s.lambda);
        else if constexpr (std::is_same_v<T, alt::AbsDiscreteNormal>) return "absnorm:mu=" + num(s.mu);
        else if constexpr (std::is_same_v<T, alt::NegBinomial>)
          return "negbin:r=" + num(s.r) + ",q=" + num(s.q);
        else return "exppoly:theta=" + join(s.theta);
      },
      spec);
}

}  // namespace stein
